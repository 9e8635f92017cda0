use std::collections::BTreeMap;
use std::time::Instant;

use fuzzex_core::baselines::{agglomerative, dbscan, CrispPartition};
use fuzzex_core::explain::{extract_rules, rule_statistics, RuleOptions, RuleSet};
use fuzzex_core::fuzzy::{fcm_type1, fcm_type2, FcmConfig, FuzzyPartition};
use fuzzex_core::ingest::Dataset;
use fuzzex_core::matrix::take_rows;
use fuzzex_core::metrics::{membership_histograms, MetricsReport, HISTOGRAM_BINS};
use fuzzex_core::ndarray::{Array2, ArrayView2};
use fuzzex_core::preprocess::FittedPipeline;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::plan::{ExperimentPlan, MethodSpec};
use crate::{BenchError, Result};

pub const RESULT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Seeded shuffle of the rows, then the first `round(n * fraction)` go to train.
pub fn split(data: &Dataset, fraction: f64, seed: u64) -> Result<Split> {
    let n = data.n_rows();
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(BenchError::Plan(format!("split fraction must lie in (0, 1), got {fraction}")));
    }
    if n < 5 {
        return Err(BenchError::Plan(format!("cannot split {n} rows; need at least 5")));
    }
    let n_train = (n as f64 * fraction).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(BenchError::Plan(format!(
            "split of {n} rows at {fraction} leaves one side empty"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test_indices = idx.split_off(n_train);
    Ok(Split {
        train: data.select_rows(&idx),
        test: data.select_rows(&test_indices),
        train_indices: idx,
        test_indices,
    })
}

/// Pipeline fitted on the training rows, with both sides projected.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub pipeline: FittedPipeline,
    pub train: Array2<f64>,
    pub test: Array2<f64>,
}

pub fn prepare(split: &Split, variance_threshold: f64) -> Result<Prepared> {
    let pipeline = FittedPipeline::fit(&split.train, variance_threshold)?;
    Ok(Prepared {
        train: pipeline.transform(&split.train)?,
        test: pipeline.transform(&split.test)?,
        pipeline,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    pub cpu: String,
    pub logical_cores: usize,
    pub os: String,
    pub arch: String,
}

impl Machine {
    pub fn detect() -> Self {
        let cpu = std::fs::read_to_string("/proc/cpuinfo")
            .ok()
            .and_then(|s| {
                s.lines()
                    .find(|l| l.starts_with("model name"))
                    .and_then(|l| l.split_once(':'))
                    .map(|(_, v)| v.trim().to_string())
            })
            .unwrap_or_else(|| "unknown".into());
        Self {
            cpu,
            logical_cores: std::thread::available_parallelism().map_or(1, |n| n.get()),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCell {
    pub method: String,
    pub seed: u64,
    pub spec: MethodSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<MetricsReport>,
    /// `None` for crisp methods, which have no predict step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<MetricsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<RuleSet>,
    /// Train midpoint memberships binned per cluster, fuzzy methods only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub membership_histograms: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCell {
    pub fuzzifier: f64,
    pub clusters: usize,
    pub seeds: Vec<u64>,
    /// Train silhouette per successful repetition.
    pub silhouettes: Vec<f64>,
    pub mean: Option<f64>,
    /// Sample standard deviation; 0 for a single repetition.
    pub sd: Option<f64>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    /// Row-major over fuzzifiers, then cluster counts.
    pub cells: Vec<SensitivityCell>,
    /// Cell index with the highest mean silhouette.
    pub best: Option<usize>,
}

impl SensitivityResult {
    pub fn cell(&self, fuzzifier: f64, clusters: usize) -> Option<&SensitivityCell> {
        self.cells.iter().find(|c| c.fuzzifier == fuzzifier && c.clusters == clusters)
    }

    pub fn best_cell(&self) -> Option<&SensitivityCell> {
        self.best.map(|i| &self.cells[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityPoint {
    pub size: usize,
    pub timings: Vec<f64>,
    pub median_seconds: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// `None` when all runtimes are equal.
    pub r_squared: Option<f64>,
}

impl LinearFit {
    /// Ordinary least squares; `None` with fewer than two distinct x values.
    pub fn fit(points: &[(f64, f64)]) -> Option<Self> {
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if points.len() < 2 || sxx == 0.0 {
            return None;
        }
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let sst: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
        let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        let r_squared = (sst > 0.0).then(|| (1.0 - sse / sst).clamp(0.0, 1.0));
        Some(Self {
            slope,
            intercept,
            r_squared,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityResult {
    pub points: Vec<ScalabilityPoint>,
    pub fit: Option<LinearFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub plan: ExperimentPlan,
    pub machine: Machine,
    pub n_rows: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub n_components: usize,
    pub comparison: Vec<ComparisonCell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<SensitivityResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalability: Option<ScalabilityResult>,
}

impl ExperimentResult {
    /// Train reports in plan order, the input to the comparison table.
    pub fn train_reports(&self) -> Vec<MetricsReport> {
        self.comparison.iter().filter_map(|c| c.train.clone()).collect()
    }

    pub fn test_reports(&self) -> Vec<MetricsReport> {
        self.comparison.iter().filter_map(|c| c.test.clone()).collect()
    }
}

fn fcm_params(cfg: &FcmConfig) -> BTreeMap<String, String> {
    [
        ("clusters", cfg.clusters.to_string()),
        ("fuzzifier", cfg.fuzzifier.to_string()),
        ("epsilon", cfg.epsilon.to_string()),
        ("max_iter", cfg.max_iter.to_string()),
        ("spread", cfg.spread.to_string()),
        ("seed", cfg.seed.to_string()),
        ("centers_use_fuzzifier", cfg.centers_use_fuzzifier.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

fn some_labels(labels: &[usize]) -> Vec<Option<usize>> {
    labels.iter().copied().map(Some).collect()
}

fn fuzzy_cell<P: FuzzyPartition>(
    name: &str,
    fit: fuzzex_core::Result<P>,
    runtime: f64,
    params: BTreeMap<String, String>,
    prep: &Prepared,
    options: &RuleOptions,
    cell: &mut ComparisonCell,
) -> Result<()> {
    let p = fit?;
    let mut train = MetricsReport::evaluate(name, prep.train.view(), &some_labels(p.labels()), runtime, params.clone())?;
    let rules = extract_rules(&p, &prep.pipeline, options)?;
    train.coverage = rules.best().map(|r| r.coverage);
    if !p.converged() {
        train.notes.push("did not converge within max_iter".into());
    }

    let (pred, predict_time) = timed(|| p.predict(prep.test.view()));
    let pred = pred?;
    let mut test = MetricsReport::evaluate(name, prep.test.view(), &some_labels(&pred.labels), predict_time, params)?;
    let mid = pred.midpoint();
    test.coverage = (0..mid.nrows())
        .map(|i| rule_statistics(mid.row(i), options.theta))
        .max_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .map(|s| s.0);

    cell.membership_histograms = Some(membership_histograms(p.midpoint().view(), HISTOGRAM_BINS));
    cell.converged = Some(p.converged());
    cell.train = Some(train);
    cell.test = Some(test);
    cell.rules = Some(rules);
    Ok(())
}

fn crisp_cell(
    name: &str,
    fit: fuzzex_core::Result<CrispPartition>,
    runtime: f64,
    params: BTreeMap<String, String>,
    prep: &Prepared,
    cell: &mut ComparisonCell,
) -> Result<()> {
    let p = fit?;
    let mut train = MetricsReport::evaluate(name, prep.train.view(), &p.labels, runtime, params)?;
    train.notes.push("no predict step; test split not evaluated".into());
    cell.train = Some(train);
    Ok(())
}

fn run_cell(spec: &MethodSpec, seed: u64, prep: &Prepared, options: &RuleOptions) -> ComparisonCell {
    let name = spec.name();
    let mut cell = ComparisonCell {
        method: name.to_string(),
        seed,
        spec: spec.clone(),
        train: None,
        test: None,
        rules: None,
        membership_histograms: None,
        iterations: None,
        converged: None,
        error: None,
    };
    let data = prep.train.view();
    let outcome = match spec {
        MethodSpec::Type2(base) => {
            let cfg = FcmConfig { seed, ..base.clone() };
            let (fit, t) = timed(|| fcm_type2(data, &cfg));
            cell.iterations = fit.as_ref().ok().map(|p| p.iterations_run);
            fuzzy_cell(name, fit, t, fcm_params(&cfg), prep, options, &mut cell)
        }
        MethodSpec::Type1(base) => {
            let cfg = FcmConfig { seed, ..base.clone() };
            let (fit, t) = timed(|| fcm_type1(data, &cfg));
            cell.iterations = fit.as_ref().ok().map(|p| p.iterations_run);
            fuzzy_cell(name, fit, t, fcm_params(&cfg), prep, options, &mut cell)
        }
        MethodSpec::Dbscan(d) => {
            let (p, t) = timed(|| dbscan(data, d.eps, d.min_pts));
            let params = [("eps", d.eps.to_string()), ("min_pts", d.min_pts.to_string())]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
            crisp_cell(name, Ok(p), t, params, prep, &mut cell)
        }
        MethodSpec::Agglomerative(a) => {
            let (p, t) = timed(|| agglomerative(data, a.clusters, a.linkage));
            let params = [("clusters", a.clusters.to_string()), ("linkage", a.linkage.to_string())]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
            crisp_cell(name, p, t, params, prep, &mut cell)
        }
    };
    if let Err(e) = outcome {
        log::warn!("{name} (seed {seed}) failed: {e}");
        cell.error = Some(e.to_string());
    }
    cell
}

fn rule_options(plan: &ExperimentPlan) -> RuleOptions {
    RuleOptions {
        theta: plan.theta,
        top_features: plan.top_features,
        ..Default::default()
    }
}

/// Every method for every plan seed, in plan order (seed-major). Cells run
/// sequentially so their timings do not compete for cores.
pub fn run_comparison(plan: &ExperimentPlan, prep: &Prepared) -> Result<Vec<ComparisonCell>> {
    if plan.methods.is_empty() {
        return Err(BenchError::Plan("no methods to compare".into()));
    }
    let options = rule_options(plan);
    Ok(plan
        .seeds
        .iter()
        .flat_map(|&seed| plan.methods.iter().map(move |m| (seed, m)))
        .map(|(seed, m)| run_cell(m, seed, prep, &options))
        .collect())
}

fn mean_sd(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(sd))
}

/// Mean train silhouette of type-2 runs over the `(m, c)` grid.
///
/// Run `r` of cell `i` uses seed `base_seed + i * repetitions + r`. Runs
/// execute in parallel; results are keyed by cell so the output does not
/// depend on scheduling.
pub fn run_sensitivity(plan: &ExperimentPlan, prep: &Prepared) -> Result<SensitivityResult> {
    let sweep = plan
        .sweep
        .as_ref()
        .ok_or_else(|| BenchError::Plan("plan has no sweep section".into()))?;
    if sweep.fuzzifiers.is_empty() || sweep.clusters.is_empty() {
        return Err(BenchError::Plan("sweep grid is empty".into()));
    }
    let reps = sweep.repetitions.max(1);
    let grid: Vec<(f64, usize)> = sweep
        .fuzzifiers
        .iter()
        .flat_map(|&m| sweep.clusters.iter().map(move |&c| (m, c)))
        .collect();
    let jobs: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|i| (0..reps).map(move |r| (i, sweep.base_seed + (i * reps + r) as u64)))
        .collect();
    let data = prep.train.view();
    let outcomes: Vec<std::result::Result<f64, String>> = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let (m, c) = grid[i];
            let cfg = FcmConfig {
                clusters: c,
                fuzzifier: m,
                seed,
                ..sweep.base.clone()
            };
            let p = fcm_type2(data, &cfg).map_err(|e| e.to_string())?;
            let labels = some_labels(&p.labels);
            fuzzex_core::silhouette(data, &labels)
                .map(|s| s.overall)
                .map_err(|e| e.to_string())
        })
        .collect();

    let mut cells: Vec<SensitivityCell> = grid
        .iter()
        .map(|&(m, c)| SensitivityCell {
            fuzzifier: m,
            clusters: c,
            seeds: Vec::new(),
            silhouettes: Vec::new(),
            mean: None,
            sd: None,
            errors: Vec::new(),
        })
        .collect();
    for (&(i, seed), outcome) in jobs.iter().zip(outcomes) {
        cells[i].seeds.push(seed);
        match outcome {
            Ok(s) => cells[i].silhouettes.push(s),
            Err(e) => cells[i].errors.push(format!("seed {seed}: {e}")),
        }
    }
    for cell in &mut cells {
        (cell.mean, cell.sd) = mean_sd(&cell.silhouettes);
    }
    let best = cells
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.mean.map(|m| (i, m)))
        // First maximum wins.
        .fold(None, |acc: Option<(usize, f64)>, (i, m)| match acc {
            Some((_, bm)) if bm >= m => acc,
            _ => Some((i, m)),
        })
        .map(|(i, _)| i);
    Ok(SensitivityResult { cells, best })
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Type-2 runtime against sample size on rows drawn without replacement
/// from `data`. Only the clustering call is timed.
pub fn run_scalability(plan: &ExperimentPlan, data: ArrayView2<'_, f64>) -> Result<ScalabilityResult> {
    let spec = plan
        .scalability
        .as_ref()
        .ok_or_else(|| BenchError::Plan("plan has no scalability section".into()))?;
    let n = data.nrows();
    if let Some(&too_big) = spec.sizes.iter().find(|&&s| s > n) {
        return Err(BenchError::Plan(format!(
            "sample size {too_big} exceeds the {n} available rows"
        )));
    }
    if spec.sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(BenchError::Plan("scalability sizes must be ascending".into()));
    }
    let owned = data.to_owned();
    let cfg = FcmConfig {
        seed: spec.seed,
        ..spec.config.clone()
    };
    let mut points = Vec::with_capacity(spec.sizes.len());
    for (k, &size) in spec.sizes.iter().enumerate() {
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(k as u64));
        idx.partial_shuffle(&mut rng, size);
        idx.truncate(size);
        let sample = take_rows(&owned, &idx);
        let mut timings = Vec::with_capacity(spec.repetitions);
        let mut last = None;
        for _ in 0..spec.repetitions.max(1) {
            let (p, t) = timed(|| fcm_type2(sample.view(), &cfg));
            timings.push(t);
            last = Some(p?);
        }
        let p = last.expect("at least one repetition");
        points.push(ScalabilityPoint {
            size,
            median_seconds: median(&timings),
            timings,
            iterations: p.iterations_run,
            converged: p.converged,
        });
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.size as f64, p.median_seconds)).collect();
    Ok(ScalabilityResult {
        fit: LinearFit::fit(&xy),
        points,
    })
}

/// Which parts of a plan to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Parts {
    pub comparison: bool,
    pub sensitivity: bool,
    pub scalability: bool,
}

impl Parts {
    pub const ALL: Parts = Parts {
        comparison: true,
        sensitivity: true,
        scalability: true,
    };
}

/// Load the dataset and run every part the plan configures.
///
/// Comparison and sensitivity use the train split. Scalability samples from
/// the whole dataset projected with a pipeline fitted on all rows, since the
/// largest default size exceeds a typical train split.
pub fn run_plan(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    run_parts(plan, Parts::ALL)
}

/// Like [`run_plan`], restricted to `parts`. A selected sweep or
/// scalability part missing from the plan is an error.
pub fn run_parts(plan: &ExperimentPlan, parts: Parts) -> Result<ExperimentResult> {
    plan.validate()?;
    let data = plan.dataset.load()?;
    let halves = split(&data, plan.split_fraction, plan.split_seed)?;
    let prep = prepare(&halves, plan.variance_threshold)?;
    let comparison = if parts.comparison {
        run_comparison(plan, &prep)?
    } else {
        Vec::new()
    };
    let sensitivity = if parts.sensitivity && plan.sweep.is_some() {
        Some(run_sensitivity(plan, &prep)?)
    } else {
        None
    };
    let scalability = if parts.scalability && plan.scalability.is_some() {
        let full = FittedPipeline::fit(&data, plan.variance_threshold)?.transform(&data)?;
        Some(run_scalability(plan, full.view())?)
    } else {
        None
    };
    Ok(ExperimentResult {
        schema_version: RESULT_SCHEMA_VERSION,
        plan: plan.clone(),
        machine: Machine::detect(),
        n_rows: data.n_rows(),
        n_train: halves.train.n_rows(),
        n_test: halves.test.n_rows(),
        n_components: prep.pipeline.n_components(),
        comparison,
        sensitivity,
        scalability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = LinearFit::fit(&[(1.0, 3.0), (2.0, 5.0), (4.0, 9.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert_eq!(f.r_squared, Some(1.0));
        assert!(LinearFit::fit(&[(1.0, 3.0)]).is_none());
        assert_eq!(LinearFit::fit(&[(1.0, 3.0), (2.0, 3.0)]).unwrap().r_squared, None);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0]), 2.5);
    }

    #[test]
    fn mean_and_sd() {
        assert_eq!(mean_sd(&[]), (None, None));
        assert_eq!(mean_sd(&[0.4]), (Some(0.4), Some(0.0)));
        let (m, s) = mean_sd(&[1.0, 3.0]);
        assert_eq!(m, Some(2.0));
        assert!((s.unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }
}
