//! Plot-ready CSV series: per-cluster silhouettes, membership histograms
//! and the center heatmap.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use fuzzex_bench::ExperimentResult;
use fuzzex_core::metrics::MetricsReport;
use fuzzex_core::ndarray::ArrayView2;

pub struct PlotSeries<'a> {
    pub method: &'a str,
    pub seed: u64,
    pub report: &'a MetricsReport,
    /// c × bins counts over [0, 1].
    pub histograms: Option<&'a [Vec<usize>]>,
    /// Feature names and c × d centers in original units.
    pub centers: Option<(&'a [String], ArrayView2<'a, f64>)>,
}

pub fn write_plot_data(series: &[PlotSeries<'_>], dir: &Path) -> Result<()> {
    let mut sil = String::from("method,seed,cluster,size,silhouette\n");
    let mut hist = String::from("method,seed,cluster,bin_low,bin_high,count\n");
    let mut heat = String::from("method,seed,cluster");
    if let Some((names, _)) = series.iter().find_map(|s| s.centers) {
        for n in names {
            let _ = write!(heat, ",{n}");
        }
    }
    heat.push('\n');

    for s in series {
        for c in &s.report.silhouette_per_cluster {
            let _ = writeln!(sil, "{},{},{},{},{}", s.method, s.seed, c.cluster, c.size, c.silhouette);
        }
        if let Some(h) = s.histograms {
            for (cluster, counts) in h.iter().enumerate() {
                let bins = counts.len() as f64;
                for (b, count) in counts.iter().enumerate() {
                    let _ = writeln!(
                        hist,
                        "{},{},{cluster},{},{},{count}",
                        s.method,
                        s.seed,
                        b as f64 / bins,
                        (b + 1) as f64 / bins
                    );
                }
            }
        }
        if let Some((_, centers)) = s.centers {
            for (cluster, row) in centers.outer_iter().enumerate() {
                let _ = write!(heat, "{},{},{cluster}", s.method, s.seed);
                for v in row {
                    let _ = write!(heat, ",{v}");
                }
                heat.push('\n');
            }
        }
    }
    for (name, body) in [
        ("silhouette_per_cluster.csv", sil),
        ("membership_histograms.csv", hist),
        ("centers_heatmap.csv", heat),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

/// Plot series for every successful comparison cell of `result`.
pub fn emit_plot_data(result: &ExperimentResult, dir: &Path) -> Result<()> {
    let series: Vec<PlotSeries<'_>> = result
        .comparison
        .iter()
        .filter_map(|cell| {
            Some(PlotSeries {
                method: &cell.method,
                seed: cell.seed,
                report: cell.train.as_ref()?,
                histograms: cell.membership_histograms.as_deref(),
                centers: cell
                    .rules
                    .as_ref()
                    .map(|r| (r.feature_names.as_slice(), r.center_table.view())),
            })
        })
        .collect();
    write_plot_data(&series, dir)
}
