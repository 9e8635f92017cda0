//! Granulation of cluster centers into linguistic terms and rule reports.
//!
//! Each cluster yields one conjunctive rule. Its antecedents come from the
//! center expressed on the normalized [0, 1] feature scale; its coverage and
//! significance come from the cluster's midpoint memberships.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::FuzzyPartition;
use crate::matrix::nested;
use crate::preprocess::FittedPipeline;

pub const RULESET_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_THETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    Low,
    Medium,
    High,
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Term::Low => "low",
            Term::Medium => "medium",
            Term::High => "high",
        })
    }
}

/// Cut points on the normalized scale: `low < low_below <= medium < high_from <= high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermThresholds {
    pub low_below: f64,
    pub high_from: f64,
}

impl Default for TermThresholds {
    fn default() -> Self {
        Self {
            low_below: 1.0 / 3.0,
            high_from: 2.0 / 3.0,
        }
    }
}

impl Term {
    pub fn from_value(v: f64, t: &TermThresholds) -> Self {
        if v < t.low_below {
            Term::Low
        } else if v < t.high_from {
            Term::Medium
        } else {
            Term::High
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticTerm {
    pub feature: String,
    pub term: Term,
    pub normalized_value: f64,
}

/// Tertile term per feature of one normalized center.
pub fn assign_terms<S: AsRef<str>>(
    normalized_center: ArrayView1<'_, f64>,
    feature_names: &[S],
    thresholds: &TermThresholds,
) -> Vec<LinguisticTerm> {
    normalized_center
        .iter()
        .zip(feature_names)
        .map(|(&v, name)| LinguisticTerm {
            feature: name.as_ref().to_string(),
            term: Term::from_value(v, thresholds),
            normalized_value: v,
        })
        .collect()
}

/// Cluster centers in original units and on the clamped normalized scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Granules {
    /// c×d
    pub original: Array2<f64>,
    /// c×d, clamped to [0, 1]
    pub normalized: Array2<f64>,
}

pub fn granulate_centers(centers: ArrayView2<'_, f64>, pipeline: &FittedPipeline) -> Result<Granules> {
    let original = pipeline.inverse_transform(centers)?;
    let normalized = pipeline.inverse_to_scaled(centers)?.mapv(|v| v.clamp(0.0, 1.0));
    Ok(Granules { original, normalized })
}

/// `(coverage, significance)` of one cluster's membership row at threshold `theta`.
///
/// Coverage is the share of points with membership above `theta`; the
/// significance is their mean membership, or 0 if there are none.
pub fn rule_statistics(memberships: ArrayView1<'_, f64>, theta: f64) -> (f64, f64) {
    let n = memberships.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let (count, sum) = memberships
        .iter()
        .filter(|&&u| u > theta)
        .fold((0usize, 0.0), |(c, s), &u| (c + 1, s + u));
    let coverage = count as f64 / n as f64;
    let significance = if count > 0 { sum / count as f64 } else { 0.0 };
    (coverage, significance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub cluster: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_name: Option<String>,
    pub antecedents: Vec<LinguisticTerm>,
    pub coverage: f64,
    pub significance: f64,
    /// Coverage computed from the lower membership bound.
    pub coverage_lower: f64,
    /// Coverage computed from the upper membership bound.
    pub coverage_upper: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub schema_version: u32,
    /// Sorted by coverage desc, significance desc, cluster asc.
    pub rules: Vec<Rule>,
    pub theta: f64,
    pub average_coverage: f64,
    pub average_significance: f64,
    pub feature_names: Vec<String>,
    /// c×d centers in original feature units, indexed by cluster.
    #[serde(with = "nested")]
    pub center_table: Array2<f64>,
    /// c×d centers on the normalized scale, indexed by cluster.
    #[serde(with = "nested")]
    pub normalized_centers: Array2<f64>,
}

impl RuleSet {
    pub fn best(&self) -> Option<&Rule> {
        self.rules.first()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleOptions {
    pub theta: f64,
    /// Keep only the k features farthest from 0.5 per rule; all when `None`.
    pub top_features: Option<usize>,
    pub thresholds: TermThresholds,
    pub cluster_names: BTreeMap<usize, String>,
}

impl Default for RuleOptions {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            top_features: None,
            thresholds: TermThresholds::default(),
            cluster_names: BTreeMap::new(),
        }
    }
}

fn render_rule(antecedents: &[LinguisticTerm], cluster: usize, name: Option<&str>) -> String {
    let mut text = String::new();
    if !antecedents.is_empty() {
        text.push_str("IF ");
        let clauses: Vec<String> = antecedents.iter().map(|a| format!("{} is {}", a.feature, a.term)).collect();
        text.push_str(&clauses.join(" AND "));
        text.push(' ');
    }
    let _ = write!(text, "THEN cluster {cluster}");
    if let Some(name) = name {
        let _ = write!(text, " ({name})");
    }
    text
}

/// Indices of the `k` most extreme features, returned in feature order.
fn select_features(normalized: ArrayView1<'_, f64>, k: Option<usize>) -> Vec<usize> {
    let d = normalized.len();
    let Some(k) = k.filter(|&k| k < d) else {
        return (0..d).collect();
    };
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| {
        let ea = (normalized[a] - 0.5).abs();
        let eb = (normalized[b] - 0.5).abs();
        eb.total_cmp(&ea).then(a.cmp(&b))
    });
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Build the rule set from explicit membership matrices (all c×n).
pub fn extract_rules_from_memberships(
    centers: ArrayView2<'_, f64>,
    midpoint: ArrayView2<'_, f64>,
    lower: ArrayView2<'_, f64>,
    upper: ArrayView2<'_, f64>,
    pipeline: &FittedPipeline,
    options: &RuleOptions,
) -> Result<RuleSet> {
    let theta = options.theta;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidConfig(format!("theta must lie in (0, 1), got {theta}")));
    }
    let c = centers.nrows();
    if midpoint.nrows() != c || lower.dim() != midpoint.dim() || upper.dim() != midpoint.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{c} centers but membership matrices of shape {:?}, {:?}, {:?}",
            midpoint.dim(),
            lower.dim(),
            upper.dim()
        )));
    }
    let granules = granulate_centers(centers, pipeline)?;
    let names = &pipeline.feature_names;

    let mut rules: Vec<Rule> = (0..c)
        .map(|i| {
            let norm = granules.normalized.row(i);
            let terms = assign_terms(norm, names, &options.thresholds);
            let antecedents: Vec<LinguisticTerm> = select_features(norm, options.top_features)
                .into_iter()
                .map(|j| terms[j].clone())
                .collect();
            let (coverage, significance) = rule_statistics(midpoint.row(i), theta);
            let (coverage_lower, _) = rule_statistics(lower.row(i), theta);
            let (coverage_upper, _) = rule_statistics(upper.row(i), theta);
            let cluster_name = options.cluster_names.get(&i).cloned();
            Rule {
                cluster: i,
                text: render_rule(&antecedents, i, cluster_name.as_deref()),
                cluster_name,
                antecedents,
                coverage,
                significance,
                coverage_lower,
                coverage_upper,
            }
        })
        .collect();
    rules.sort_by(|a, b| {
        b.coverage
            .total_cmp(&a.coverage)
            .then(b.significance.total_cmp(&a.significance))
            .then(a.cluster.cmp(&b.cluster))
    });
    let average_coverage = rules.iter().map(|r| r.coverage).sum::<f64>() / c.max(1) as f64;
    let average_significance = rules.iter().map(|r| r.significance).sum::<f64>() / c.max(1) as f64;
    Ok(RuleSet {
        schema_version: RULESET_SCHEMA_VERSION,
        rules,
        theta,
        average_coverage,
        average_significance,
        feature_names: names.clone(),
        center_table: granules.original,
        normalized_centers: granules.normalized,
    })
}

/// One rule per cluster of a fuzzy partition whose centers live in the
/// pipeline's PCA space.
pub fn extract_rules<P: FuzzyPartition + ?Sized>(
    partition: &P,
    pipeline: &FittedPipeline,
    options: &RuleOptions,
) -> Result<RuleSet> {
    extract_rules_from_memberships(
        partition.centers().view(),
        partition.midpoint().view(),
        partition.lower().view(),
        partition.upper().view(),
        pipeline,
        options,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "txt" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidConfig(format!("unknown report format `{other}`"))),
        }
    }
}

pub fn render_report(rules: &RuleSet, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(rules)?),
        ReportFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "theta: {}", rules.theta);
            let _ = writeln!(
                out,
                "average coverage: {:.4}  average significance: {:.4}",
                rules.average_coverage, rules.average_significance
            );
            for (rank, r) in rules.rules.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{}. {}  [coverage {:.4} (bounds {:.4}..{:.4}), significance {:.4}]",
                    rank + 1,
                    r.text,
                    r.coverage,
                    r.coverage_lower,
                    r.coverage_upper,
                    r.significance
                );
            }
            Ok(out)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "rank",
                "cluster",
                "name",
                "coverage",
                "significance",
                "coverage_lower",
                "coverage_upper",
                "antecedents",
                "text",
            ])?;
            for (rank, r) in rules.rules.iter().enumerate() {
                let antecedents: Vec<String> =
                    r.antecedents.iter().map(|a| format!("{}={}", a.feature, a.term)).collect();
                w.write_record([
                    (rank + 1).to_string(),
                    r.cluster.to_string(),
                    r.cluster_name.clone().unwrap_or_default(),
                    r.coverage.to_string(),
                    r.significance.to_string(),
                    r.coverage_lower.to_string(),
                    r.coverage_upper.to_string(),
                    antecedents.join(";"),
                    r.text.clone(),
                ])?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io {
                path: "<csv buffer>".into(),
                source: e.into_error(),
            })?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

/// Read an `index,name` CSV. A first row whose index is not an integer is
/// taken as a header.
pub fn load_cluster_names(path: impl AsRef<Path>) -> Result<BTreeMap<usize, String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut names = BTreeMap::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(Error::MalformedRow {
                line: record.position().map_or(0, |p| p.line()),
                expected: 2,
                found: record.len(),
            });
        }
        match record[0].trim().parse::<usize>() {
            Ok(i) => {
                names.insert(i, record[1].trim().to_string());
            }
            Err(_) if row == 0 => {}
            Err(_) => {
                return Err(Error::InvalidConfig(format!(
                    "cluster index `{}` on line {} is not an integer",
                    &record[0],
                    row + 1
                )))
            }
        }
    }
    Ok(names)
}
