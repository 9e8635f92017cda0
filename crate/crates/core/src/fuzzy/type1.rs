use ndarray::{Array2, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use super::{
    argmax_labels, check_predict_dims, compute_centers, compute_distances, fuzzify, init_memberships, objective,
    update_memberships, FcmConfig, FuzzyPartition, Prediction,
};
use crate::error::{Error, Result};
use crate::matrix::nested;

/// Result of classic (type-1) fuzzy c-means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Type1Partition {
    pub config: FcmConfig,
    /// c×k
    #[serde(with = "nested")]
    pub centers: Array2<f64>,
    /// c×n, columns sum to 1.
    #[serde(with = "nested")]
    pub u: Array2<f64>,
    pub labels: Vec<usize>,
    pub iterations_run: usize,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

pub fn fcm_type1(data: ArrayView2<'_, f64>, config: &FcmConfig) -> Result<Type1Partition> {
    config.check_data(data)?;
    let init = init_memberships(config.clusters, data.nrows(), config.seed);
    run(data, config, init)
}

/// Run from a caller-supplied c×n initial membership matrix.
pub fn fcm_type1_with_init(data: ArrayView2<'_, f64>, config: &FcmConfig, init: Array2<f64>) -> Result<Type1Partition> {
    config.check_data(data)?;
    if init.dim() != (config.clusters, data.nrows()) {
        return Err(Error::DimensionMismatch(format!(
            "initial memberships are {:?}, expected {:?}",
            init.dim(),
            (config.clusters, data.nrows())
        )));
    }
    run(data, config, init)
}

fn run(data: ArrayView2<'_, f64>, config: &FcmConfig, mut u: Array2<f64>) -> Result<Type1Partition> {
    let m = config.fuzzifier;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations_run = 0;
    let mut centers = Array2::zeros((config.clusters, data.ncols()));

    for iter in 1..=config.max_iter {
        let weights = u.mapv(|v| fuzzify(v, m));
        centers = compute_centers(data, weights.view(), u.view());
        let dist = compute_distances(data, centers.view())?;
        let u_new = update_memberships(dist.view(), m);
        let delta = Zip::from(&u)
            .and(&u_new)
            .fold(0.0_f64, |acc, &a, &b| acc.max((a - b).abs()));
        trace.push(objective(u_new.view(), dist.view(), m));
        u = u_new;
        iterations_run = iter;
        if delta < config.epsilon {
            converged = true;
            break;
        }
    }

    let labels = argmax_labels(u.view());
    Ok(Type1Partition {
        config: config.clone(),
        centers,
        u,
        labels,
        iterations_run,
        objective_trace: trace,
        converged,
    })
}

impl FuzzyPartition for Type1Partition {
    fn centers(&self) -> &Array2<f64> {
        &self.centers
    }

    fn labels(&self) -> &[usize] {
        &self.labels
    }

    fn lower(&self) -> &Array2<f64> {
        &self.u
    }

    fn upper(&self) -> &Array2<f64> {
        &self.u
    }

    fn converged(&self) -> bool {
        self.converged
    }

    fn midpoint(&self) -> Array2<f64> {
        self.u.clone()
    }

    fn predict(&self, data: ArrayView2<'_, f64>) -> Result<Prediction> {
        check_predict_dims(&self.centers, data)?;
        let dist = compute_distances(data, self.centers.view())?;
        let u = update_memberships(dist.view(), self.config.fuzzifier);
        let labels = argmax_labels(u.view());
        Ok(Prediction {
            u_lower: u.clone(),
            u_upper: u,
            labels,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn two_point_blobs() {
        let data = array![[0.0], [0.0], [10.0], [10.0]];
        let cfg = FcmConfig {
            clusters: 2,
            epsilon: 1e-9,
            ..Default::default()
        };
        let p = fcm_type1(data.view(), &cfg).unwrap();
        assert!(p.converged);
        let mut c: Vec<f64> = p.centers.column(0).to_vec();
        c.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(c[0], 0.0, epsilon = 1e-3);
        assert_abs_diff_eq!(c[1], 10.0, epsilon = 1e-3);
        for k in 0..4 {
            let top = p.u.column(k).iter().copied().fold(0.0, f64::max);
            assert_abs_diff_eq!(top, 1.0, epsilon = 1e-3);
        }
        assert_eq!(p.labels[0], p.labels[1]);
        assert_ne!(p.labels[0], p.labels[2]);
    }

    #[test]
    fn predict_on_training_data_is_fixed_point() {
        let data = array![[0.0, 0.1], [0.2, 0.0], [3.0, 3.1], [3.2, 2.9], [6.0, 0.0], [6.1, 0.2]];
        let p = fcm_type1(data.view(), &FcmConfig::default()).unwrap();
        let pred = p.predict(data.view()).unwrap();
        for (a, b) in pred.u_lower.iter().zip(p.u.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
        assert_eq!(pred.labels, p.labels);

        let at_center = p.predict(p.centers.slice(ndarray::s![0..1, ..])).unwrap();
        assert_eq!(at_center.u_lower[(0, 0)], 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = FcmConfig::default();
        assert!(matches!(
            fcm_type1(array![[0.0], [1.0], [2.0]].view(), &cfg),
            Err(Error::TooFewPoints { n: 3, c: 3 })
        ));
        assert!(matches!(
            fcm_type1(array![[0.0], [1.0], [f64::NAN], [2.0]].view(), &cfg),
            Err(Error::NonFinite { row: 2, col: 0 })
        ));
        let p = fcm_type1(array![[0.0], [1.0], [2.0], [5.0]].view(), &cfg).unwrap();
        assert!(p.predict(array![[0.0, 1.0]].view()).is_err());
    }
}
