use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use fuzzex_bench::{
    run_parts, write_results, DataFormat, DatasetSpec, ExperimentPlan, Parts, ScalabilitySpec,
    SweepSpec,
};
use fuzzex_core::baselines::{agglomerative, dbscan, k_distance_elbow, CrispPartition};
use fuzzex_core::explain::{extract_rules, load_cluster_names, render_report, ReportFormat, RuleOptions, RuleSet};
use fuzzex_core::fuzzy::{fcm_type1, fcm_type2, FcmConfig, FuzzyPartition};
use fuzzex_core::ingest::Dataset;
use fuzzex_core::metrics::{compare_methods, membership_histograms, MetricsReport, HISTOGRAM_BINS};
use fuzzex_core::ndarray::ArrayView2;
use fuzzex_core::partition::{PartitionKind, StoredPartition};
use fuzzex_core::preprocess::FittedPipeline;
use serde::Serialize;
use serde_json::json;

use crate::args::{Command, DataArgs, Format, Method, PlanArgs, ReportFormatArg, RuleArgs};
use crate::plot::{emit_plot_data, write_plot_data, PlotSeries};
use crate::OUTPUT_SCHEMA_VERSION;

#[derive(Serialize)]
struct MetricsDocument<'a> {
    schema_version: u32,
    report: &'a MetricsReport,
}

fn dataset_spec(d: &DataArgs) -> DatasetSpec {
    DatasetSpec {
        path: d.input.clone(),
        format: match d.format {
            Format::Uci => DataFormat::Uci,
            Format::Csv => DataFormat::Csv,
        },
        features: (!d.features.is_empty()).then(|| d.features.clone()),
        delimiter: d.delimiter,
        missing_tokens: d.missing.clone(),
    }
}

fn load(d: &DataArgs) -> Result<Dataset> {
    dataset_spec(d)
        .load()
        .with_context(|| format!("cannot load {}", d.input.display()))
}

fn out_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("cannot create output directory {}", path.display()))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn echo(out: &mut dyn Write, seed: impl std::fmt::Display, config: serde_json::Value) -> Result<()> {
    writeln!(out, "seed: {seed}")?;
    writeln!(out, "config: {config}")?;
    Ok(())
}

fn rule_options(r: &RuleArgs) -> Result<RuleOptions> {
    let cluster_names = match &r.names {
        Some(p) => load_cluster_names(p).with_context(|| format!("cannot read cluster names {}", p.display()))?,
        None => BTreeMap::new(),
    };
    Ok(RuleOptions {
        theta: r.theta,
        top_features: r.top_features,
        cluster_names,
        ..Default::default()
    })
}

fn fcm_params(cfg: &FcmConfig) -> BTreeMap<String, String> {
    serde_json::to_value(cfg)
        .ok()
        .and_then(|v| v.as_object().cloned())
        .unwrap_or_default()
        .into_iter()
        .map(|(k, v)| (k, v.to_string()))
        .collect()
}

fn labels_of(l: &[usize]) -> Vec<Option<usize>> {
    l.iter().copied().map(Some).collect()
}

pub fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Preprocess {
            data,
            variance_threshold,
            seed,
            out: dir,
        } => preprocess(&data, variance_threshold, seed, &dir, out),
        Command::Cluster {
            data,
            pipeline,
            variance_threshold,
            method,
            fcm,
            eps,
            min_pts,
            linkage,
            rules,
            seed,
            out: dir,
        } => {
            let ds = load(&data)?;
            let pipeline = match &pipeline {
                Some(p) => FittedPipeline::load(p).with_context(|| format!("cannot read pipeline {}", p.display()))?,
                None => FittedPipeline::fit(&ds, variance_threshold)?,
            };
            let config = match method {
                Method::Type2 | Method::Type1 => serde_json::to_value(fcm.config(seed))?,
                Method::Dbscan => json!({ "eps": eps, "min_pts": min_pts }),
                Method::Agglomerative => json!({ "clusters": fcm.clusters, "linkage": fuzzex_core::Linkage::from(linkage).to_string() }),
            };
            echo(
                out,
                seed,
                json!({ "method": format!("{method:?}").to_lowercase(), "input": data.input, "params": config }),
            )?;
            out_dir(&dir)?;
            let z = pipeline.transform(&ds)?;
            let options = rule_options(&rules)?;
            let (stored, report, rules, hist) = match method {
                Method::Type2 => {
                    let cfg = fcm.config(seed);
                    let start = Instant::now();
                    let p = fcm_type2(z.view(), &cfg)?;
                    fuzzy_outputs("type2", start.elapsed().as_secs_f64(), &cfg, &p, z.view(), &pipeline, &options, |p| {
                        PartitionKind::Type2(p)
                    })?
                }
                Method::Type1 => {
                    let cfg = fcm.config(seed);
                    let start = Instant::now();
                    let p = fcm_type1(z.view(), &cfg)?;
                    fuzzy_outputs("type1", start.elapsed().as_secs_f64(), &cfg, &p, z.view(), &pipeline, &options, |p| {
                        PartitionKind::Type1(p)
                    })?
                }
                Method::Dbscan => {
                    let start = Instant::now();
                    let p = dbscan(z.view(), eps, min_pts);
                    let t = start.elapsed().as_secs_f64();
                    let mut params: BTreeMap<String, String> =
                        [("eps".to_string(), eps.to_string()), ("min_pts".to_string(), min_pts.to_string())].into();
                    if let Some(e) = k_distance_elbow(z.view(), min_pts.max(1)) {
                        params.insert("suggested_eps".into(), e.suggested_eps.to_string());
                        writeln!(out, "k-distance elbow suggests eps = {:.4} (k = {})", e.suggested_eps, e.k)?;
                    }
                    crisp_outputs("dbscan", t, params, p, z.view())?
                }
                Method::Agglomerative => {
                    let start = Instant::now();
                    let p = agglomerative(z.view(), fcm.clusters, linkage.into())?;
                    let t = start.elapsed().as_secs_f64();
                    let params = [
                        ("clusters".to_string(), fcm.clusters.to_string()),
                        ("linkage".to_string(), fuzzex_core::Linkage::from(linkage).to_string()),
                    ]
                    .into();
                    crisp_outputs("agglomerative", t, params, p, z.view())?
                }
            };

            pipeline.save(dir.join("pipeline.json"))?;
            stored.save(dir.join("partition.json"))?;
            write(
                &dir,
                "metrics.json",
                &serde_json::to_string_pretty(&MetricsDocument {
                    schema_version: OUTPUT_SCHEMA_VERSION,
                    report: &report,
                })?,
            )?;
            if let Some(r) = &rules {
                write(&dir, "rules.txt", &render_report(r, ReportFormat::Text)?)?;
            }
            write_plot_data(
                &[PlotSeries {
                    method: &report.method,
                    seed,
                    report: &report,
                    histograms: hist.as_deref(),
                    centers: rules.as_ref().map(|r| (r.feature_names.as_slice(), r.center_table.view())),
                }],
                &dir,
            )?;
            write!(out, "{}", compare_methods(std::slice::from_ref(&report)).to_text())?;
            writeln!(out, "wrote {}", dir.display())?;
            Ok(())
        }
        Command::Explain {
            partition,
            pipeline,
            rules,
            report_format,
            seed,
            out: dir,
        } => {
            echo(
                out,
                seed,
                json!({ "partition": partition, "pipeline": pipeline, "theta": rules.theta, "top_features": rules.top_features }),
            )?;
            let stored = StoredPartition::load(&partition)
                .with_context(|| format!("cannot read partition {}", partition.display()))?;
            let pipeline =
                FittedPipeline::load(&pipeline).with_context(|| format!("cannot read pipeline {}", pipeline.display()))?;
            let options = rule_options(&rules)?;
            let set = match &stored.partition {
                PartitionKind::Type2(p) => extract_rules(p, &pipeline, &options)?,
                PartitionKind::Type1(p) => extract_rules(p, &pipeline, &options)?,
                PartitionKind::Crisp(_) => bail!("rules need a fuzzy partition; {} is crisp", partition.display()),
            };
            out_dir(&dir)?;
            let (format, name) = match report_format {
                ReportFormatArg::Text => (ReportFormat::Text, "rules.txt"),
                ReportFormatArg::Json => (ReportFormat::Json, "rules.json"),
                ReportFormatArg::Csv => (ReportFormat::Csv, "rules.csv"),
            };
            write(&dir, name, &render_report(&set, format)?)?;
            write!(out, "{}", render_report(&set, ReportFormat::Text)?)?;
            Ok(())
        }
        Command::Metrics {
            data,
            partition,
            pipeline,
            theta,
            seed,
            out: dir,
        } => {
            echo(out, seed, json!({ "input": data.input, "partition": partition, "pipeline": pipeline, "theta": theta }))?;
            let ds = load(&data)?;
            let stored = StoredPartition::load(&partition)
                .with_context(|| format!("cannot read partition {}", partition.display()))?;
            let pipeline =
                FittedPipeline::load(&pipeline).with_context(|| format!("cannot read pipeline {}", pipeline.display()))?;
            let z = pipeline.transform(&ds)?;
            let labels = stored.labels();
            if labels.len() != z.nrows() {
                bail!("partition has {} labels but the input has {} rows", labels.len(), z.nrows());
            }
            let mut report = MetricsReport::evaluate(&stored.method, z.view(), &labels, 0.0, BTreeMap::new())?;
            let options = RuleOptions {
                theta,
                ..Default::default()
            };
            report.coverage = match &stored.partition {
                PartitionKind::Type2(p) => extract_rules(p, &pipeline, &options)?.best().map(|r| r.coverage),
                PartitionKind::Type1(p) => extract_rules(p, &pipeline, &options)?.best().map(|r| r.coverage),
                PartitionKind::Crisp(_) => None,
            };
            out_dir(&dir)?;
            write(
                &dir,
                "metrics.json",
                &serde_json::to_string_pretty(&MetricsDocument {
                    schema_version: OUTPUT_SCHEMA_VERSION,
                    report: &report,
                })?,
            )?;
            write!(out, "{}", compare_methods(std::slice::from_ref(&report)).to_text())?;
            Ok(())
        }
        Command::Compare(p) => plan_command(
            p,
            Parts {
                comparison: true,
                sensitivity: false,
                scalability: false,
            },
            out,
        ),
        Command::Sensitivity(p) => plan_command(
            p,
            Parts {
                comparison: false,
                sensitivity: true,
                scalability: false,
            },
            out,
        ),
        Command::Scalability(p) => plan_command(
            p,
            Parts {
                comparison: false,
                sensitivity: false,
                scalability: true,
            },
            out,
        ),
    }
}

fn preprocess(data: &DataArgs, threshold: f64, seed: u64, dir: &Path, out: &mut dyn Write) -> Result<()> {
    echo(out, seed, json!({ "input": data.input, "variance_threshold": threshold }))?;
    let ds = load(data)?;
    let pipeline = FittedPipeline::fit(&ds, threshold)?;
    let z = pipeline.transform(&ds)?;
    out_dir(dir)?;
    pipeline.save(dir.join("pipeline.json"))?;
    let mut csv: String = (1..=z.ncols()).map(|j| format!("pc{j}")).collect::<Vec<_>>().join(",");
    csv.push('\n');
    for row in z.outer_iter() {
        csv.push_str(&row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
        csv.push('\n');
    }
    write(dir, "projected.csv", &csv)?;
    writeln!(
        out,
        "{} rows, {} features ({} missing cells) -> {} components retaining {:.4} of variance",
        ds.n_rows(),
        ds.n_features(),
        ds.n_missing(),
        pipeline.n_components(),
        pipeline.retained_variance
    )?;
    Ok(())
}

type Outputs = (StoredPartition, MetricsReport, Option<RuleSet>, Option<Vec<Vec<usize>>>);

#[allow(clippy::too_many_arguments)]
fn fuzzy_outputs<P: FuzzyPartition>(
    name: &str,
    runtime: f64,
    cfg: &FcmConfig,
    p: &P,
    z: ArrayView2<'_, f64>,
    pipeline: &FittedPipeline,
    options: &RuleOptions,
    wrap: impl FnOnce(P) -> PartitionKind,
) -> Result<Outputs>
where
    P: Clone,
{
    let mut report = MetricsReport::evaluate(name, z, &labels_of(p.labels()), runtime, fcm_params(cfg))?;
    let rules = extract_rules(p, pipeline, options)?;
    report.coverage = rules.best().map(|r| r.coverage);
    if !p.converged() {
        report.notes.push("did not converge within max_iter".into());
    }
    let hist = membership_histograms(p.midpoint().view(), HISTOGRAM_BINS);
    Ok((StoredPartition::new(name, wrap(p.clone())), report, Some(rules), Some(hist)))
}

fn crisp_outputs(
    name: &str,
    runtime: f64,
    params: BTreeMap<String, String>,
    p: CrispPartition,
    z: ArrayView2<'_, f64>,
) -> Result<Outputs> {
    let report = MetricsReport::evaluate(name, z, &p.labels, runtime, params)?;
    Ok((StoredPartition::new(name, PartitionKind::Crisp(p)), report, None, None))
}

fn plan_command(args: PlanArgs, parts: Parts, out: &mut dyn Write) -> Result<()> {
    let mut plan = ExperimentPlan::from_file(&args.config)
        .with_context(|| format!("cannot read plan {}", args.config.display()))?;
    if parts.sensitivity && plan.sweep.is_none() {
        plan.sweep = Some(SweepSpec::default());
    }
    if parts.scalability && plan.scalability.is_none() {
        plan.scalability = Some(ScalabilitySpec::default());
    }
    if let Some(seed) = args.seed {
        plan.seeds = vec![seed];
        plan.split_seed = seed;
        if let Some(s) = &mut plan.sweep {
            s.base_seed = seed;
        }
        if let Some(s) = &mut plan.scalability {
            s.seed = seed;
        }
    }
    let seed = match (parts.sensitivity, parts.scalability) {
        (true, _) => plan.sweep.as_ref().map_or(0, |s| s.base_seed).to_string(),
        (_, true) => plan.scalability.as_ref().map_or(0, |s| s.seed).to_string(),
        _ => format!("{:?} (split {})", plan.seeds, plan.split_seed),
    };
    echo(out, seed, serde_json::to_value(&plan)?)?;

    let result = run_parts(&plan, parts)?;
    write_results(&result, &args.out)?;
    if parts.comparison {
        emit_plot_data(&result, &args.out)?;
        write!(out, "{}", compare_methods(&result.train_reports()).to_text())?;
        for cell in result.comparison.iter().filter(|c| c.error.is_some()) {
            writeln!(out, "{} (seed {}) failed: {}", cell.method, cell.seed, cell.error.as_deref().unwrap_or(""))?;
        }
    }
    if let Some(s) = &result.sensitivity {
        writeln!(out, "{:>6} {:>4} {:>10} {:>10}", "m", "c", "mean", "sd")?;
        for c in &s.cells {
            let f = |v: Option<f64>| v.map_or("N/A".to_string(), |x| format!("{x:.4}"));
            writeln!(out, "{:>6} {:>4} {:>10} {:>10}", c.fuzzifier, c.clusters, f(c.mean), f(c.sd))?;
        }
        if let Some(b) = s.best_cell() {
            writeln!(out, "best: m = {}, c = {}", b.fuzzifier, b.clusters)?;
        }
    }
    if let Some(s) = &result.scalability {
        for p in &s.points {
            writeln!(out, "n = {:>6}: median {:.6} s over {} runs", p.size, p.median_seconds, p.timings.len())?;
        }
        match s.fit {
            Some(f) => writeln!(
                out,
                "fit: {:.3e} s/row, intercept {:.3e} s, R^2 {}",
                f.slope,
                f.intercept,
                f.r_squared.map_or("N/A".into(), |r| format!("{r:.4}"))
            )?,
            None => writeln!(out, "fit: N/A")?,
        }
    }
    writeln!(out, "wrote {}", args.out.display())?;
    Ok(())
}
