use ndarray::{Array2, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use super::{
    argmax_labels, check_predict_dims, compute_centers, compute_distances, fuzzify, init_memberships, midpoint,
    objective, update_memberships, FcmConfig, FuzzyPartition, Prediction,
};
use crate::error::{Error, Result};
use crate::matrix::nested;

/// Result of interval type-2 fuzzy c-means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Type2Partition {
    pub config: FcmConfig,
    /// c×k
    #[serde(with = "nested")]
    pub centers: Array2<f64>,
    /// c×n lower membership bounds.
    #[serde(with = "nested")]
    pub u_lower: Array2<f64>,
    /// c×n upper membership bounds.
    #[serde(with = "nested")]
    pub u_upper: Array2<f64>,
    pub labels: Vec<usize>,
    pub iterations_run: usize,
    /// J evaluated on midpoint memberships raised to m.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

/// Snapshot handed to the observer after each iteration.
pub struct IterationState<'a> {
    pub iteration: usize,
    pub centers: &'a Array2<f64>,
    pub u_lower: &'a Array2<f64>,
    pub u_upper: &'a Array2<f64>,
    pub delta: f64,
    pub objective: f64,
}

pub fn fcm_type2(data: ArrayView2<'_, f64>, config: &FcmConfig) -> Result<Type2Partition> {
    config.check_data(data)?;
    let init = init_memberships(config.clusters, data.nrows(), config.seed);
    run(data, config, init, |_| {})
}

pub fn fcm_type2_with_init(data: ArrayView2<'_, f64>, config: &FcmConfig, init: Array2<f64>) -> Result<Type2Partition> {
    fcm_type2_observed(data, config, init, |_| {})
}

/// Like [`fcm_type2_with_init`], calling `observer` after every iteration.
pub fn fcm_type2_observed<F>(
    data: ArrayView2<'_, f64>,
    config: &FcmConfig,
    init: Array2<f64>,
    observer: F,
) -> Result<Type2Partition>
where
    F: FnMut(&IterationState<'_>),
{
    config.check_data(data)?;
    if init.dim() != (config.clusters, data.nrows()) {
        return Err(Error::DimensionMismatch(format!(
            "initial memberships are {:?}, expected {:?}",
            init.dim(),
            (config.clusters, data.nrows())
        )));
    }
    run(data, config, init, observer)
}

/// `clip(u - spread)` and `clip(u + spread)` to [0, 1].
fn interval_bounds(u: &Array2<f64>, spread: f64) -> (Array2<f64>, Array2<f64>) {
    (
        u.mapv(|v| (v - spread).clamp(0.0, 1.0)),
        u.mapv(|v| (v + spread).clamp(0.0, 1.0)),
    )
}

fn run<F>(data: ArrayView2<'_, f64>, config: &FcmConfig, init: Array2<f64>, mut observer: F) -> Result<Type2Partition>
where
    F: FnMut(&IterationState<'_>),
{
    let m = config.fuzzifier;
    // Both bounds start equal; the spread of the first update opens the interval.
    let mut lower = init.clone();
    let mut upper = init;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations_run = 0;
    let mut centers = Array2::zeros((config.clusters, data.ncols()));

    for iter in 1..=config.max_iter {
        let mid = midpoint(lower.view(), upper.view());
        let weights = if config.centers_use_fuzzifier {
            mid.mapv(|v| fuzzify(v, m))
        } else {
            mid.clone()
        };
        centers = compute_centers(data, weights.view(), mid.view());
        let dist = compute_distances(data, centers.view())?;
        let u_new = update_memberships(dist.view(), m);
        let (new_lower, new_upper) = interval_bounds(&u_new, config.spread);

        // Convergence is judged on the lower bound only.
        let delta = Zip::from(&lower)
            .and(&new_lower)
            .fold(0.0_f64, |acc, &a, &b| acc.max((a - b).abs()));
        let new_mid = midpoint(new_lower.view(), new_upper.view());
        let j = objective(new_mid.view(), dist.view(), m);
        trace.push(j);
        lower = new_lower;
        upper = new_upper;
        iterations_run = iter;
        observer(&IterationState {
            iteration: iter,
            centers: &centers,
            u_lower: &lower,
            u_upper: &upper,
            delta,
            objective: j,
        });
        if delta < config.epsilon {
            converged = true;
            break;
        }
    }

    let labels = argmax_labels(midpoint(lower.view(), upper.view()).view());
    Ok(Type2Partition {
        config: config.clone(),
        centers,
        u_lower: lower,
        u_upper: upper,
        labels,
        iterations_run,
        objective_trace: trace,
        converged,
    })
}

impl FuzzyPartition for Type2Partition {
    fn centers(&self) -> &Array2<f64> {
        &self.centers
    }

    fn labels(&self) -> &[usize] {
        &self.labels
    }

    fn lower(&self) -> &Array2<f64> {
        &self.u_lower
    }

    fn upper(&self) -> &Array2<f64> {
        &self.u_upper
    }

    fn converged(&self) -> bool {
        self.converged
    }

    fn predict(&self, data: ArrayView2<'_, f64>) -> Result<Prediction> {
        check_predict_dims(&self.centers, data)?;
        let dist = compute_distances(data, self.centers.view())?;
        let u = update_memberships(dist.view(), self.config.fuzzifier);
        let (u_lower, u_upper) = interval_bounds(&u, self.config.spread);
        let labels = argmax_labels(midpoint(u_lower.view(), u_upper.view()).view());
        Ok(Prediction {
            u_lower,
            u_upper,
            labels,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn blobs() -> Array2<f64> {
        array![
            [0.0, 0.1],
            [0.2, 0.0],
            [0.1, 0.2],
            [3.0, 3.1],
            [3.2, 2.9],
            [2.9, 3.0],
            [6.0, 0.0],
            [6.1, 0.2],
            [5.9, 0.1]
        ]
    }

    #[test]
    fn interval_width_follows_clip_rule() {
        let (lo, hi) = interval_bounds(&array![[0.98, 0.5, 0.01]], 0.05);
        assert_abs_diff_eq!(lo[(0, 0)], 0.93, epsilon = 1e-12);
        assert_eq!(hi[(0, 0)], 1.0);
        assert_abs_diff_eq!(hi[(0, 1)] - lo[(0, 1)], 0.1, epsilon = 1e-12);
        assert_eq!(lo[(0, 2)], 0.0);
    }

    #[test]
    fn converged_bounds_bracket_type1_update() {
        let data = blobs();
        let p = fcm_type2(data.view(), &FcmConfig::default()).unwrap();
        assert!(p.converged);
        let dist = compute_distances(data.view(), p.centers.view()).unwrap();
        let u = update_memberships(dist.view(), 2.0);
        for ((i, k), &v) in u.indexed_iter() {
            let (lo, hi) = (p.u_lower[(i, k)], p.u_upper[(i, k)]);
            assert!(lo <= hi);
            if (0.05..=0.95).contains(&v) {
                assert_abs_diff_eq!(hi - lo, 0.1, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn predict_on_training_data_matches_bounds() {
        let data = blobs();
        let p = fcm_type2(data.view(), &FcmConfig::default()).unwrap();
        let pred = p.predict(data.view()).unwrap();
        for (a, b) in pred.u_lower.iter().zip(p.u_lower.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
        for (a, b) in pred.u_upper.iter().zip(p.u_upper.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
        assert_eq!(pred.labels, p.labels);

        let at_center = p.predict(p.centers.slice(ndarray::s![1..2, ..])).unwrap();
        assert_eq!(at_center.labels, vec![1]);
        assert_eq!(at_center.u_upper[(1, 0)], 1.0);
        assert_abs_diff_eq!(at_center.u_lower[(1, 0)], 0.95, epsilon = 1e-12);
    }

    #[test]
    fn observer_sees_every_iteration() {
        let data = blobs();
        let cfg = FcmConfig::default();
        let mut seen = Vec::new();
        let p = fcm_type2_observed(data.view(), &cfg, init_memberships(3, data.nrows(), 0), |s| {
            seen.push(s.iteration)
        })
        .unwrap();
        assert_eq!(seen, (1..=p.iterations_run).collect::<Vec<_>>());
        assert_eq!(p, fcm_type2(data.view(), &cfg).unwrap());
    }

    #[test]
    fn fuzzifier_weighted_centers_variant_runs() {
        let data = blobs();
        let cfg = FcmConfig {
            centers_use_fuzzifier: true,
            ..Default::default()
        };
        let p = fcm_type2(data.view(), &cfg).unwrap();
        assert!(p.converged);
        assert_eq!(p.labels[0], p.labels[1]);
        assert_ne!(p.labels[0], p.labels[3]);
    }
}
