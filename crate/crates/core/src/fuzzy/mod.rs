//! Fuzzy c-means, type-1 and interval type-2.
//!
//! Both variants share the distance and membership-update kernels below. The
//! type-2 variant keeps a lower and an upper membership matrix, built as
//! `clip(u ± spread)` around the type-1 update, and computes centers and crisp
//! labels from their midpoint.

mod type1;
mod type2;

use ndarray::{Array2, ArrayView2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ensure_finite, squared_euclidean};

pub use type1::{fcm_type1, fcm_type1_with_init, Type1Partition};
pub use type2::{fcm_type2, fcm_type2_observed, fcm_type2_with_init, IterationState, Type2Partition};

/// Total membership mass below which a cluster is considered empty.
pub const EMPTY_CLUSTER_MASS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FcmConfig {
    pub clusters: usize,
    pub fuzzifier: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    /// Half-width of the membership interval (type-2 only).
    pub spread: f64,
    pub seed: u64,
    /// Weight type-2 center updates by `midpoint^m` instead of the plain midpoint.
    pub centers_use_fuzzifier: bool,
}

impl Default for FcmConfig {
    fn default() -> Self {
        Self {
            clusters: 3,
            fuzzifier: 2.0,
            epsilon: 0.005,
            max_iter: 1000,
            spread: 0.05,
            seed: 0,
            centers_use_fuzzifier: false,
        }
    }
}

impl FcmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.clusters < 2 {
            return bad(format!("clusters must be >= 2, got {}", self.clusters));
        }
        if !(self.fuzzifier > 1.0) || !self.fuzzifier.is_finite() {
            return bad(format!("fuzzifier must be > 1, got {}", self.fuzzifier));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        if !(0.0..0.5).contains(&self.spread) {
            return bad(format!("spread must lie in [0, 0.5), got {}", self.spread));
        }
        Ok(())
    }

    pub(crate) fn check_data(&self, data: ArrayView2<'_, f64>) -> Result<()> {
        self.validate()?;
        if data.nrows() <= self.clusters {
            return Err(Error::TooFewPoints {
                n: data.nrows(),
                c: self.clusters,
            });
        }
        ensure_finite(data)
    }
}

/// Random c×n membership matrix with strictly positive columns summing to 1.
pub fn init_memberships(clusters: usize, n: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = Array2::<f64>::zeros((clusters, n));
    for mut col in u.columns_mut() {
        for v in col.iter_mut() {
            *v = 1.0 - rng.gen::<f64>();
        }
        let s = col.sum();
        col.mapv_inplace(|v| v / s);
    }
    u
}

/// Euclidean distance of every point to every center, as a c×n matrix.
pub fn compute_distances(data: ArrayView2<'_, f64>, centers: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if data.ncols() != centers.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} columns, centers have {}",
            data.ncols(),
            centers.ncols()
        )));
    }
    let mut dist = Array2::<f64>::zeros((centers.nrows(), data.nrows()));
    for (i, center) in centers.outer_iter().enumerate() {
        for (k, x) in data.outer_iter().enumerate() {
            dist[(i, k)] = squared_euclidean(x, center).sqrt();
        }
    }
    Ok(dist)
}

/// FCM membership update `u_ik = d_ik^(-2/(m-1)) / Σ_j d_jk^(-2/(m-1))`.
///
/// Evaluated as `(d_min / d_ik)^p` normalized, which is the same quantity
/// without overflow for small distances. A column with a zero distance is
/// crisp at the first zero-distance cluster.
pub fn update_memberships(distances: ArrayView2<'_, f64>, fuzzifier: f64) -> Array2<f64> {
    let exponent = 2.0 / (fuzzifier - 1.0);
    let mut u = Array2::<f64>::zeros(distances.raw_dim());
    for (d, mut out) in distances.columns().into_iter().zip(u.columns_mut()) {
        if let Some(hit) = d.iter().position(|&v| v == 0.0) {
            out[hit] = 1.0;
            continue;
        }
        let d_min = d.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        for (o, &dik) in out.iter_mut().zip(d.iter()) {
            let w = (d_min / dik).powf(exponent);
            *o = w;
            total += w;
        }
        out.mapv_inplace(|w| w / total);
    }
    u
}

#[inline]
pub(crate) fn fuzzify(u: f64, m: f64) -> f64 {
    if m == 2.0 {
        u * u
    } else {
        u.powf(m)
    }
}

/// Weighted means `v_i = Σ_k w_ik x_k / Σ_k w_ik`.
///
/// A cluster whose mass falls below [`EMPTY_CLUSTER_MASS`] is re-seeded at the
/// point whose best membership (from `memberships`) is lowest.
pub(crate) fn compute_centers(
    data: ArrayView2<'_, f64>,
    weights: ArrayView2<'_, f64>,
    memberships: ArrayView2<'_, f64>,
) -> Array2<f64> {
    let c = weights.nrows();
    let dim = data.ncols();
    let mut centers = Array2::<f64>::zeros((c, dim));
    let mut used = Vec::new();
    for i in 0..c {
        let w = weights.row(i);
        let mass: f64 = w.sum();
        let mut center = centers.row_mut(i);
        if mass < EMPTY_CLUSTER_MASS {
            let k = worst_assigned_point(memberships, &used);
            used.push(k);
            center.assign(&data.row(k));
            continue;
        }
        for (x, &wk) in data.outer_iter().zip(w.iter()) {
            Zip::from(&mut center).and(&x).for_each(|c, &xv| *c += wk * xv);
        }
        center.mapv_inplace(|v| v / mass);
    }
    centers
}

fn worst_assigned_point(memberships: ArrayView2<'_, f64>, exclude: &[usize]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (k, col) in memberships.columns().into_iter().enumerate() {
        if exclude.contains(&k) {
            continue;
        }
        let top = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top < best.0 {
            best = (top, k);
        }
    }
    best.1
}

/// Column-wise argmax, ties to the lowest cluster index.
pub fn argmax_labels(memberships: ArrayView2<'_, f64>) -> Vec<usize> {
    memberships
        .columns()
        .into_iter()
        .map(|col| {
            col.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
                .0
        })
        .collect()
}

/// `J = Σ_i Σ_k u_ik^m d_ik²`.
pub fn objective(memberships: ArrayView2<'_, f64>, distances: ArrayView2<'_, f64>, fuzzifier: f64) -> f64 {
    memberships
        .iter()
        .zip(distances.iter())
        .map(|(&u, &d)| fuzzify(u, fuzzifier) * d * d)
        .sum()
}

/// Out-of-sample memberships against frozen centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub u_lower: Array2<f64>,
    pub u_upper: Array2<f64>,
    pub labels: Vec<usize>,
}

impl Prediction {
    pub fn midpoint(&self) -> Array2<f64> {
        midpoint(self.u_lower.view(), self.u_upper.view())
    }
}

pub(crate) fn midpoint(lower: ArrayView2<'_, f64>, upper: ArrayView2<'_, f64>) -> Array2<f64> {
    Zip::from(&lower).and(&upper).map_collect(|&l, &u| (l + u) / 2.0)
}

/// Common view of type-1 and type-2 partitions.
pub trait FuzzyPartition {
    fn centers(&self) -> &Array2<f64>;
    fn labels(&self) -> &[usize];
    fn lower(&self) -> &Array2<f64>;
    fn upper(&self) -> &Array2<f64>;
    fn converged(&self) -> bool;
    fn predict(&self, data: ArrayView2<'_, f64>) -> Result<Prediction>;

    /// Defuzzified membership `(lower + upper) / 2`, c×n.
    fn midpoint(&self) -> Array2<f64> {
        midpoint(self.lower().view(), self.upper().view())
    }

    fn n_clusters(&self) -> usize {
        self.centers().nrows()
    }
}

pub(crate) fn check_predict_dims(centers: &Array2<f64>, data: ArrayView2<'_, f64>) -> Result<()> {
    if data.ncols() != centers.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "new data has {} columns, partition centers have {}",
            data.ncols(),
            centers.ncols()
        )));
    }
    ensure_finite(data)
}
