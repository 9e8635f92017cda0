//! Experiment harness around `fuzzex-core`: an 80/20 train/test protocol,
//! method comparison, a fuzzifier × cluster-count sweep and runtime scaling.

mod experiment;
mod output;
mod plan;

use std::path::PathBuf;

pub use experiment::{
    prepare, run_comparison, run_parts, run_plan, run_scalability, run_sensitivity, split, ComparisonCell, ExperimentResult,
    LinearFit, Machine, Parts, Prepared, ScalabilityPoint, ScalabilityResult, SensitivityCell, SensitivityResult, Split,
    RESULT_SCHEMA_VERSION,
};
pub use output::{canonical_json, write_results, SCALABILITY_HEADER, SENSITIVITY_HEADER};
pub use plan::{
    AgglomerativeParams, DataFormat, DatasetSpec, DbscanParams, ExperimentPlan, MethodSpec, ScalabilitySpec, SweepSpec,
};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] fuzzex_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("cannot parse plan: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
