use std::fmt::Write as _;
use std::path::Path;

use fuzzex_core::explain::{render_report, ReportFormat};
use fuzzex_core::metrics::compare_methods;
use serde_json::Value;

use crate::experiment::ExperimentResult;
use crate::{BenchError, Result};

pub const SENSITIVITY_HEADER: &str = "m,c,mean,sd,repetitions,failures";
pub const SCALABILITY_HEADER: &str = "size,median_seconds,iterations,converged";

/// Keys whose values depend on the clock or the host.
const TIMING_KEYS: [&str; 5] = ["runtime_seconds", "timings", "median_seconds", "fit", "machine"];

fn strip(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for k in TIMING_KEYS {
                map.remove(k);
            }
            map.values_mut().for_each(strip);
        }
        Value::Array(items) => items.iter_mut().for_each(strip),
        _ => {}
    }
}

/// JSON of `value` with timing and host fields removed, for reproducibility checks.
pub fn canonical_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    strip(&mut v);
    Ok(serde_json::to_string(&v)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| BenchError::Io { path, source })
}

/// Write `result.json` plus whichever of `comparison.csv`,
/// `comparison_test.csv`, `rules.txt`, `sensitivity.csv` and
/// `scalability.csv` the result has data for.
pub fn write_results(result: &ExperimentResult, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|source| BenchError::Io {
        path: dir.to_path_buf(),
        source,
    })?;

    if !result.comparison.is_empty() {
        write(dir, "comparison.csv", &compare_methods(&result.train_reports()).to_csv())?;
        write(dir, "comparison_test.csv", &compare_methods(&result.test_reports()).to_csv())?;
    }

    let mut rules = String::new();
    for cell in &result.comparison {
        if let Some(rs) = &cell.rules {
            let _ = writeln!(rules, "== {} (seed {}) ==", cell.method, cell.seed);
            rules.push_str(&render_report(rs, ReportFormat::Text)?);
            rules.push('\n');
        }
        if let Some(e) = &cell.error {
            let _ = writeln!(rules, "== {} (seed {}) failed: {e} ==\n", cell.method, cell.seed);
        }
    }
    if !result.comparison.is_empty() {
        write(dir, "rules.txt", &rules)?;
    }

    if let Some(s) = &result.sensitivity {
        let mut csv = format!("{SENSITIVITY_HEADER}\n");
        for c in &s.cells {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                c.fuzzifier,
                c.clusters,
                opt(c.mean),
                opt(c.sd),
                c.silhouettes.len(),
                c.errors.len()
            );
        }
        write(dir, "sensitivity.csv", &csv)?;
    }
    if let Some(s) = &result.scalability {
        let mut csv = format!("{SCALABILITY_HEADER}\n");
        for p in &s.points {
            let _ = writeln!(csv, "{},{},{},{}", p.size, p.median_seconds, p.iterations, p.converged);
        }
        write(dir, "scalability.csv", &csv)?;
    }
    write(dir, "result.json", &serde_json::to_string_pretty(result)?)?;
    Ok(())
}
