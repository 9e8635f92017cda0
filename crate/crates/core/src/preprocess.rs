//! Median imputation, MinMax scaling and PCA as one fitted, invertible pipeline.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::matrix::{ensure_finite, nested};

pub const PIPELINE_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_VARIANCE_THRESHOLD: f64 = 0.95;

/// Slack on the cumulative-variance comparison so that rank-deficient data
/// does not need one extra, empty component.
const RETENTION_SLACK: f64 = 1e-12;

/// Median of a slice; the mean of the two central order statistics for even length.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 0 {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

/// Per-feature medians over non-missing entries.
pub fn fit_impute_median(data: &Dataset) -> Result<Vec<f64>> {
    (0..data.n_features())
        .map(|j| {
            median(&data.observed(j))
                .ok_or_else(|| Error::AllMissing(data.feature_names()[j].clone()))
        })
        .collect()
}

/// Replace missing cells with the given per-feature fill values.
pub fn impute(data: &Dataset, medians: &[f64]) -> Result<Array2<f64>> {
    if medians.len() != data.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "{} medians for {} features",
            medians.len(),
            data.n_features()
        )));
    }
    let mut out = data.values().clone();
    for ((i, j), v) in out.indexed_iter_mut() {
        if data.is_missing(i, j) {
            *v = medians[j];
        }
    }
    Ok(out)
}

pub fn fit_minmax(data: ArrayView2<'_, f64>) -> (Vec<f64>, Vec<f64>) {
    data.columns()
        .into_iter()
        .map(|col| {
            col.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
        })
        .unzip()
}

/// `(x - min) / (max - min)`; constant features map to 0.
#[inline]
pub fn minmax_scale_value(x: f64, min: f64, max: f64) -> f64 {
    let range = max - min;
    if range > 0.0 {
        (x - min) / range
    } else {
        0.0
    }
}

#[inline]
pub fn minmax_unscale_value(x: f64, min: f64, max: f64) -> f64 {
    x * (max - min) + min
}

/// Principal axes of a data matrix.
#[derive(Debug, Clone)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// k×d, rows are orthonormal principal directions.
    pub components: Array2<f64>,
    /// The k retained eigenvalues, non-increasing.
    pub eigenvalues: Vec<f64>,
    /// All d eigenvalues, non-increasing.
    pub all_eigenvalues: Vec<f64>,
    pub retained_variance: f64,
}

impl Pca {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }
}

fn validate_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "variance threshold must lie in (0, 1], got {threshold}"
        )))
    }
}

/// Sample covariance (divisor n - 1) of the rows of `data`.
pub fn covariance(data: ArrayView2<'_, f64>) -> (Vec<f64>, Array2<f64>) {
    let (n, d) = data.dim();
    let mean: Vec<f64> = data.columns().into_iter().map(|c| c.sum() / n as f64).collect();
    let mut cov = Array2::<f64>::zeros((d, d));
    for row in data.outer_iter() {
        for a in 0..d {
            let da = row[a] - mean[a];
            for b in a..d {
                cov[(a, b)] += da * (row[b] - mean[b]);
            }
        }
    }
    let denom = (n - 1) as f64;
    for a in 0..d {
        for b in a..d {
            let v = cov[(a, b)] / denom;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    (mean, cov)
}

/// Eigen-decompose the sample covariance and keep the smallest number of
/// leading components whose eigenvalue share reaches `variance_threshold`.
pub fn fit_pca(data: ArrayView2<'_, f64>, variance_threshold: f64) -> Result<Pca> {
    validate_threshold(variance_threshold)?;
    let (n, d) = data.dim();
    if n < 2 {
        return Err(Error::InsufficientData(format!("PCA needs at least 2 rows, got {n}")));
    }
    if d == 0 {
        return Err(Error::InsufficientData("PCA needs at least one feature".into()));
    }
    ensure_finite(data)?;

    let (mean, cov) = covariance(data);
    let sym = DMatrix::from_fn(d, d, |a, b| cov[(a, b)]);
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    // Covariance is PSD; negative eigenvalues are round-off.
    let all_eigenvalues: Vec<f64> = order
        .iter()
        .map(|&i| eig.eigenvalues[i].max(0.0))
        .collect();
    let total: f64 = all_eigenvalues.iter().sum();

    let k = if total > 0.0 {
        let mut cum = 0.0;
        let mut k = d;
        for (i, &lambda) in all_eigenvalues.iter().enumerate() {
            cum += lambda;
            if cum / total >= variance_threshold - RETENTION_SLACK {
                k = i + 1;
                break;
            }
        }
        k
    } else {
        1
    };

    let mut components = Array2::<f64>::zeros((k, d));
    for (row, &i) in order.iter().take(k).enumerate() {
        let v = eig.eigenvectors.column(i);
        let norm = v.norm();
        let pivot = (0..d).fold(0, |best, j| if v[j].abs() > v[best].abs() { j } else { best });
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            components[(row, j)] = sign * v[j] / norm;
        }
    }

    let eigenvalues = all_eigenvalues[..k].to_vec();
    let retained_variance = if total > 0.0 {
        (eigenvalues.iter().sum::<f64>() / total).min(1.0)
    } else {
        1.0
    };
    Ok(Pca {
        mean,
        components,
        eigenvalues,
        all_eigenvalues,
        retained_variance,
    })
}

/// Fitted preprocessing transforms: impute, scale to [0, 1], center, project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub schema_version: u32,
    pub feature_names: Vec<String>,
    pub medians: Vec<f64>,
    pub feature_mins: Vec<f64>,
    pub feature_maxs: Vec<f64>,
    pub pca_mean: Vec<f64>,
    #[serde(with = "nested")]
    pub pca_components: Array2<f64>,
    pub pca_eigenvalues: Vec<f64>,
    /// Every eigenvalue of the scaled covariance, retained or not.
    pub all_eigenvalues: Vec<f64>,
    pub retained_variance: f64,
    pub variance_threshold: f64,
}

impl FittedPipeline {
    pub fn fit(data: &Dataset, variance_threshold: f64) -> Result<Self> {
        validate_threshold(variance_threshold)?;
        let medians = fit_impute_median(data)?;
        let imputed = impute(data, &medians)?;
        let (feature_mins, feature_maxs) = fit_minmax(imputed.view());
        let scaled = scale_matrix(&imputed, &feature_mins, &feature_maxs);
        let pca = fit_pca(scaled.view(), variance_threshold)?;
        Ok(Self {
            schema_version: PIPELINE_SCHEMA_VERSION,
            feature_names: data.feature_names().to_vec(),
            medians,
            feature_mins,
            feature_maxs,
            pca_mean: pca.mean,
            pca_components: pca.components,
            pca_eigenvalues: pca.eigenvalues,
            all_eigenvalues: pca.all_eigenvalues,
            retained_variance: pca.retained_variance,
            variance_threshold,
        })
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_components(&self) -> usize {
        self.pca_components.nrows()
    }

    fn check_features(&self, data: &Dataset) -> Result<()> {
        if data.feature_names() != self.feature_names.as_slice() {
            return Err(Error::FeatureMismatch {
                expected: self.feature_names.clone(),
                found: data.feature_names().to_vec(),
            });
        }
        Ok(())
    }

    /// Imputed and MinMax-scaled data, before centering and projection.
    pub fn scale(&self, data: &Dataset) -> Result<Array2<f64>> {
        self.check_features(data)?;
        let imputed = impute(data, &self.medians)?;
        Ok(scale_matrix(&imputed, &self.feature_mins, &self.feature_maxs))
    }

    /// impute → scale → center → project, giving an n×k matrix.
    pub fn transform(&self, data: &Dataset) -> Result<Array2<f64>> {
        let scaled = self.scale(data)?;
        Ok(self.project_scaled(scaled.view()))
    }

    /// Project already-scaled rows. Each output row depends on its input row only.
    pub fn project_scaled(&self, scaled: ArrayView2<'_, f64>) -> Array2<f64> {
        let k = self.n_components();
        let mut out = Array2::<f64>::zeros((scaled.nrows(), k));
        for (row, mut dst) in scaled.outer_iter().zip(out.outer_iter_mut()) {
            for (c, comp) in self.pca_components.outer_iter().enumerate() {
                let mut acc = 0.0;
                for j in 0..row.len() {
                    acc += (row[j] - self.pca_mean[j]) * comp[j];
                }
                dst[c] = acc;
            }
        }
        out
    }

    fn check_points(&self, points: ArrayView2<'_, f64>) -> Result<()> {
        if points.ncols() != self.n_components() {
            return Err(Error::DimensionMismatch(format!(
                "points have {} columns, pipeline has {} components",
                points.ncols(),
                self.n_components()
            )));
        }
        Ok(())
    }

    /// Map PCA-space points back to the normalized [0, 1] feature scale (unclamped).
    pub fn inverse_to_scaled(&self, points: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_points(points)?;
        let d = self.n_features();
        let mut out = Array2::<f64>::zeros((points.nrows(), d));
        for (p, mut dst) in points.outer_iter().zip(out.outer_iter_mut()) {
            for j in 0..d {
                let mut acc = self.pca_mean[j];
                for (c, comp) in self.pca_components.outer_iter().enumerate() {
                    acc += p[c] * comp[j];
                }
                dst[j] = acc;
            }
        }
        Ok(out)
    }

    /// Map PCA-space points back to original feature units. Lossy when k < d.
    pub fn inverse_transform(&self, points: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let mut out = self.inverse_to_scaled(points)?;
        for mut row in out.outer_iter_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = minmax_unscale_value(*v, self.feature_mins[j], self.feature_maxs[j]);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        if p.schema_version != PIPELINE_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: p.schema_version,
                expected: PIPELINE_SCHEMA_VERSION,
            });
        }
        Ok(p)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn scale_matrix(data: &Array2<f64>, mins: &[f64], maxs: &[f64]) -> Array2<f64> {
    let mut out = data.clone();
    for mut row in out.outer_iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = minmax_scale_value(*v, mins[j], maxs[j]);
        }
    }
    out
}

/// Per-row squared reconstruction error of scaled data after a k-component round trip.
pub fn reconstruction_residual(pipeline: &FittedPipeline, scaled: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    let projected = pipeline.project_scaled(scaled);
    let back = pipeline.inverse_to_scaled(projected.view())?;
    Ok((&back - &scaled).mapv(|v| v * v).sum_axis(ndarray::Axis(1)))
}
