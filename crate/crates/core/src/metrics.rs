//! Cluster quality and assignment-balance measures, and the method comparison table.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::euclidean;

pub const COMPARISON_HEADER: &str = "method,silhouette,entropy,coverage,runtime_seconds";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSilhouette {
    pub cluster: usize,
    pub size: usize,
    pub silhouette: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Silhouette {
    pub overall: f64,
    /// Ascending by cluster label; only clusters with at least one point.
    pub per_cluster: Vec<ClusterSilhouette>,
    /// `None` for excluded (noise) points.
    pub per_point: Vec<Option<f64>>,
}

/// Silhouette `s(i) = (b - a) / max(a, b)` over non-noise points.
///
/// Points alone in their cluster score 0. Needs at least two clusters among
/// the evaluated points.
pub fn silhouette(data: ArrayView2<'_, f64>, labels: &[Option<usize>]) -> Result<Silhouette> {
    if data.nrows() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} rows but {} labels",
            data.nrows(),
            labels.len()
        )));
    }
    let mut ids: Vec<usize> = labels.iter().flatten().copied().collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() < 2 {
        return Err(Error::SilhouetteUndefined(format!(
            "{} cluster(s) after excluding noise",
            ids.len()
        )));
    }
    let slot: HashMap<usize, usize> = ids.iter().enumerate().map(|(s, &c)| (c, s)).collect();
    let points: Vec<(usize, usize)> = labels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.map(|c| (i, slot[&c])))
        .collect();
    let mut sizes = vec![0usize; ids.len()];
    for &(_, s) in &points {
        sizes[s] += 1;
    }

    let scores: Vec<f64> = points
        .par_iter()
        .map(|&(i, own)| {
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; ids.len()];
            let x = data.row(i);
            for &(j, s) in &points {
                if j != i {
                    sums[s] += euclidean(x, data.row(j));
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..ids.len())
                .filter(|&s| s != own)
                .map(|s| sums[s] / sizes[s] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect();

    let mut per_point = vec![None; labels.len()];
    let mut cluster_sums = vec![0.0; ids.len()];
    for (&(i, s), &score) in points.iter().zip(&scores) {
        per_point[i] = Some(score);
        cluster_sums[s] += score;
    }
    let overall = scores.iter().sum::<f64>() / scores.len() as f64;
    let per_cluster = ids
        .iter()
        .enumerate()
        .map(|(s, &cluster)| ClusterSilhouette {
            cluster,
            size: sizes[s],
            silhouette: cluster_sums[s] / sizes[s] as f64,
        })
        .collect();
    Ok(Silhouette {
        overall,
        per_cluster,
        per_point,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entropy {
    /// Natural-log Shannon entropy of the cluster shares.
    pub entropy: f64,
    /// `entropy / ln(n_clusters)`, 0 when fewer than two clusters are populated.
    pub normalized: f64,
    pub n_clusters: usize,
    pub n_evaluated: usize,
}

/// `H = -Σ p_j ln p_j` over the shares of non-noise points, with `0 ln 0 = 0`.
pub fn assignment_entropy(labels: &[Option<usize>]) -> Entropy {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in labels.iter().flatten() {
        *counts.entry(c).or_default() += 1;
    }
    let n: usize = counts.values().sum();
    let entropy = if n == 0 {
        0.0
    } else {
        -counts
            .values()
            .map(|&k| {
                let p = k as f64 / n as f64;
                p * p.ln()
            })
            .sum::<f64>()
    };
    let entropy = entropy.max(0.0);
    let n_clusters = counts.len();
    let normalized = if n_clusters > 1 {
        entropy / (n_clusters as f64).ln()
    } else {
        0.0
    };
    Entropy {
        entropy,
        normalized,
        n_clusters,
        n_evaluated: n,
    }
}

/// Evaluation of one clustering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    /// `None` when the silhouette is undefined (see `notes`).
    pub silhouette_overall: Option<f64>,
    pub silhouette_per_cluster: Vec<ClusterSilhouette>,
    pub entropy: f64,
    pub entropy_normalized: f64,
    pub n_clusters: usize,
    pub n_evaluated: usize,
    pub n_noise: usize,
    /// Best-rule coverage, for methods that produce rules.
    pub coverage: Option<f64>,
    pub runtime_seconds: f64,
    pub params: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

impl MetricsReport {
    /// Silhouette and entropy of `labels` on `data`.
    pub fn evaluate(
        method: impl Into<String>,
        data: ArrayView2<'_, f64>,
        labels: &[Option<usize>],
        runtime_seconds: f64,
        params: BTreeMap<String, String>,
    ) -> Result<Self> {
        let ent = assignment_entropy(labels);
        let n_noise = labels.iter().filter(|l| l.is_none()).count();
        let mut notes = Vec::new();
        if n_noise > 0 {
            notes.push(format!("{n_noise} noise points excluded from silhouette and entropy"));
        }
        let (silhouette_overall, silhouette_per_cluster) = match silhouette(data, labels) {
            Ok(s) => (Some(s.overall), s.per_cluster),
            Err(e @ Error::SilhouetteUndefined(_)) => {
                notes.push(e.to_string());
                (None, Vec::new())
            }
            Err(e) => return Err(e),
        };
        Ok(Self {
            method: method.into(),
            silhouette_overall,
            silhouette_per_cluster,
            entropy: ent.entropy,
            entropy_normalized: ent.normalized,
            n_clusters: ent.n_clusters,
            n_evaluated: ent.n_evaluated,
            n_noise,
            coverage: None,
            runtime_seconds,
            params,
            notes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub silhouette: Option<f64>,
    pub entropy: f64,
    pub coverage: Option<f64>,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// One row per report, in input order. Repeated method names get a `#k`
/// suffix (k counting occurrences from 1).
pub fn compare_methods(reports: &[MetricsReport]) -> ComparisonTable {
    let mut totals: HashMap<&str, usize> = HashMap::new();
    for r in reports {
        *totals.entry(r.method.as_str()).or_default() += 1;
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let rows = reports
        .iter()
        .map(|r| {
            let name = r.method.as_str();
            let method = if totals[name] > 1 {
                let k = seen.entry(name).or_default();
                *k += 1;
                format!("{name}#{k}")
            } else {
                name.to_string()
            };
            ComparisonRow {
                method,
                silhouette: r.silhouette_overall,
                entropy: r.entropy,
                coverage: r.coverage,
                runtime_seconds: r.runtime_seconds,
            }
        })
        .collect();
    ComparisonTable { rows }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ComparisonTable {
    /// CSV with the fixed header; unavailable values are empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(COMPARISON_HEADER);
        out.push('\n');
        for r in &self.rows {
            let method = if r.method.contains([',', '"', '\n']) {
                format!("\"{}\"", r.method.replace('"', "\"\""))
            } else {
                r.method.clone()
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                method,
                opt(r.silhouette),
                r.entropy,
                opt(r.coverage),
                r.runtime_seconds
            );
        }
        out
    }

    /// Aligned plain-text table with `N/A` for unavailable values.
    pub fn to_text(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "N/A".to_string(), |x| format!("{x:.3}"));
        let width = self.rows.iter().map(|r| r.method.len()).max().unwrap_or(0).max(6);
        let mut out = format!(
            "{:<width$}  {:>10}  {:>8}  {:>8}  {:>12}\n",
            "method", "silhouette", "entropy", "coverage", "runtime (s)"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>10}  {:>8.3}  {:>8}  {:>12.4}",
                r.method,
                fmt(r.silhouette),
                r.entropy,
                fmt(r.coverage),
                r.runtime_seconds
            );
        }
        out
    }
}

pub const HISTOGRAM_BINS: usize = 20;

/// Per-cluster counts of membership values in `bins` equal-width bins over
/// [0, 1]. The last bin is closed on the right.
pub fn membership_histograms(memberships: ArrayView2<'_, f64>, bins: usize) -> Vec<Vec<usize>> {
    memberships
        .outer_iter()
        .map(|row| {
            let mut counts = vec![0usize; bins];
            for &u in row {
                let b = ((u.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
                counts[b] += 1;
            }
            counts
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_edges() {
        let u = ndarray::array![[0.0, 0.05, 0.999, 1.0], [1.0, 0.95, 0.001, 0.0]];
        let h = membership_histograms(u.view(), HISTOGRAM_BINS);
        assert_eq!(h[0][0], 1);
        assert_eq!(h[0][1], 1);
        assert_eq!(h[0][19], 2);
        assert!(h.iter().all(|c| c.iter().sum::<usize>() == 4));
    }
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};

    fn some(labels: &[usize]) -> Vec<Option<usize>> {
        labels.iter().copied().map(Some).collect()
    }

    #[test]
    fn far_blobs_score_high() {
        let data = array![[0.0], [0.1], [-0.1], [100.0], [100.1], [99.9]];
        let s = silhouette(data.view(), &some(&[0, 0, 0, 1, 1, 1])).unwrap();
        assert!(s.overall > 0.95);
    }

    #[test]
    fn singleton_scores_zero() {
        let data = array![[0.0], [0.1], [5.0]];
        let s = silhouette(data.view(), &some(&[0, 0, 1])).unwrap();
        assert_eq!(s.per_point[2], Some(0.0));
        assert_eq!(s.per_cluster[1].silhouette, 0.0);
    }

    #[test]
    fn noise_is_excluded() {
        let data = array![[0.0], [0.1], [5.0], [5.1], [50.0]];
        let labels = vec![Some(0), Some(0), Some(1), Some(1), None];
        let s = silhouette(data.view(), &labels).unwrap();
        assert_eq!(s.per_point[4], None);
        let clean = silhouette(data.slice(ndarray::s![0..4, ..]), &labels[..4]).unwrap();
        assert_eq!(s.overall, clean.overall);
    }

    #[test]
    fn fewer_than_two_clusters_is_an_error() {
        let data = array![[0.0], [1.0]];
        assert!(matches!(
            silhouette(data.view(), &[Some(0), None]),
            Err(Error::SilhouetteUndefined(_))
        ));
    }

    #[test]
    fn entropy_examples() {
        let e = assignment_entropy(&some(&[2, 2, 2]));
        assert_eq!(e.entropy, 0.0);
        assert_eq!(e.normalized, 0.0);
        let e = assignment_entropy(&some(&[0, 1, 2, 0, 1, 2]));
        assert_abs_diff_eq!(e.entropy, 3f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(e.normalized, 1.0, epsilon = 1e-12);
        let e = assignment_entropy(&[None, Some(0), Some(1)]);
        assert_eq!(e.n_evaluated, 2);
        assert_abs_diff_eq!(e.entropy, 2f64.ln(), epsilon = 1e-12);
    }

    fn report(method: &str, sil: Option<f64>, cov: Option<f64>) -> MetricsReport {
        MetricsReport {
            method: method.into(),
            silhouette_overall: sil,
            silhouette_per_cluster: vec![],
            entropy: 0.9,
            entropy_normalized: 0.8,
            n_clusters: 3,
            n_evaluated: 10,
            n_noise: 0,
            coverage: cov,
            runtime_seconds: 0.25,
            params: BTreeMap::new(),
            notes: vec![],
        }
    }

    #[test]
    fn comparison_table_layout() {
        let t = compare_methods(&[report("Type-2 Fuzzy", Some(0.5), Some(0.6))]);
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.to_csv(), format!("{COMPARISON_HEADER}\nType-2 Fuzzy,0.5,0.9,0.6,0.25\n"));

        let t = compare_methods(&[
            report("Type-2 Fuzzy", Some(0.5), Some(0.6)),
            report("Type-1 Fuzzy", Some(0.4), Some(0.5)),
            report("DBSCAN", None, None),
            report("Agglomerative", Some(0.3), None),
        ]);
        let names: Vec<_> = t.rows.iter().map(|r| r.method.as_str()).collect();
        assert_eq!(names, ["Type-2 Fuzzy", "Type-1 Fuzzy", "DBSCAN", "Agglomerative"]);
        let csv = t.to_csv();
        assert!(csv.contains("\nDBSCAN,,0.9,,0.25\n"));
        assert!(t.to_text().contains("N/A"));
    }

    #[test]
    fn duplicate_methods_are_suffixed() {
        let t = compare_methods(&[report("A", None, None), report("B", None, None), report("A", None, None)]);
        let names: Vec<_> = t.rows.iter().map(|r| r.method.as_str()).collect();
        assert_eq!(names, ["A#1", "B", "A#2"]);
    }

    #[test]
    fn evaluate_records_noise_and_undefined_silhouette() {
        let data = Array2::from_shape_vec((3, 1), vec![0.0, 0.1, 9.0]).unwrap();
        let r = MetricsReport::evaluate("DBSCAN", data.view(), &[Some(0), Some(0), None], 0.0, BTreeMap::new())
            .unwrap();
        assert_eq!(r.silhouette_overall, None);
        assert_eq!(r.n_noise, 1);
        assert_eq!(r.notes.len(), 2);
    }
}
