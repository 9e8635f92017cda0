use std::path::{Path, PathBuf};

use fuzzex_core::baselines::Linkage;
use fuzzex_core::fuzzy::FcmConfig;
use fuzzex_core::ingest::{load_csv, load_uci_air_quality, Dataset};
use serde::{Deserialize, Serialize};

use crate::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    #[default]
    Uci,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: DataFormat,
    /// Columns to keep, in this order. All numeric columns when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<String>>,
    /// Field separator for `csv` input.
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    /// Extra cell values read as missing for `csv` input.
    #[serde(default)]
    pub missing_tokens: Vec<String>,
}

fn default_delimiter() -> char {
    ','
}

impl DatasetSpec {
    pub fn new(path: impl Into<PathBuf>, format: DataFormat) -> Self {
        Self {
            path: path.into(),
            format,
            features: None,
            delimiter: default_delimiter(),
            missing_tokens: Vec::new(),
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        let loaded = match self.format {
            DataFormat::Uci => load_uci_air_quality(&self.path, self.features.as_deref())?,
            DataFormat::Csv => {
                if !self.delimiter.is_ascii() {
                    return Err(BenchError::Plan(format!("delimiter {:?} is not ASCII", self.delimiter)));
                }
                let mut l = load_csv(&self.path, self.delimiter as u8, &self.missing_tokens)?;
                if let Some(f) = &self.features {
                    l.dataset = l.dataset.select_features(f)?;
                }
                l
            }
        };
        for w in &loaded.warnings {
            log::warn!("{}: {w}", self.path.display());
        }
        Ok(loaded.dataset)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DbscanParams {
    pub eps: f64,
    pub min_pts: usize,
}

impl Default for DbscanParams {
    fn default() -> Self {
        Self { eps: 0.5, min_pts: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgglomerativeParams {
    pub clusters: usize,
    pub linkage: Linkage,
}

impl Default for AgglomerativeParams {
    fn default() -> Self {
        Self {
            clusters: 3,
            linkage: Linkage::Average,
        }
    }
}

/// One clustering method with its parameters. The fuzzy methods' `seed`
/// is replaced by the plan seed of each run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MethodSpec {
    Type2(FcmConfig),
    Type1(FcmConfig),
    Dbscan(DbscanParams),
    Agglomerative(AgglomerativeParams),
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Type2(_) => "type2",
            MethodSpec::Type1(_) => "type1",
            MethodSpec::Dbscan(_) => "dbscan",
            MethodSpec::Agglomerative(_) => "agglomerative",
        }
    }

    pub fn is_fuzzy(&self) -> bool {
        matches!(self, MethodSpec::Type2(_) | MethodSpec::Type1(_))
    }

    /// Type-2, type-1, DBSCAN and average-linkage agglomerative, all at defaults.
    pub fn standard_set() -> Vec<MethodSpec> {
        vec![
            MethodSpec::Type2(FcmConfig::default()),
            MethodSpec::Type1(FcmConfig::default()),
            MethodSpec::Dbscan(DbscanParams::default()),
            MethodSpec::Agglomerative(AgglomerativeParams::default()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub fuzzifiers: Vec<f64>,
    pub clusters: Vec<usize>,
    pub repetitions: usize,
    pub base_seed: u64,
    /// Everything except `fuzzifier`, `clusters` and `seed`.
    pub base: FcmConfig,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            fuzzifiers: vec![1.5, 2.0, 2.5],
            clusters: vec![2, 3, 4],
            repetitions: 5,
            base_seed: 0,
            base: FcmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalabilitySpec {
    pub sizes: Vec<usize>,
    pub repetitions: usize,
    /// Seeds both the subsample and the clustering.
    pub seed: u64,
    pub config: FcmConfig,
}

impl Default for ScalabilitySpec {
    fn default() -> Self {
        Self {
            sizes: vec![1000, 2000, 4000, 8000],
            repetitions: 3,
            seed: 0,
            config: FcmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub dataset: DatasetSpec,
    #[serde(default = "default_split")]
    pub split_fraction: f64,
    #[serde(default)]
    pub split_seed: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_threshold")]
    pub variance_threshold: f64,
    #[serde(default = "MethodSpec::standard_set")]
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_features: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalability: Option<ScalabilitySpec>,
}

fn default_split() -> f64 {
    0.8
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_threshold() -> f64 {
    fuzzex_core::preprocess::DEFAULT_VARIANCE_THRESHOLD
}
fn default_theta() -> f64 {
    fuzzex_core::explain::DEFAULT_THETA
}

impl ExperimentPlan {
    pub fn new(dataset: DatasetSpec) -> Self {
        Self {
            dataset,
            split_fraction: default_split(),
            split_seed: 0,
            seeds: default_seeds(),
            variance_threshold: default_threshold(),
            methods: MethodSpec::standard_set(),
            theta: default_theta(),
            top_features: None,
            sweep: None,
            scalability: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let plan: Self = toml::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    /// Read a TOML plan. A relative dataset path is taken relative to the
    /// plan file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut plan = Self::from_toml(&text)?;
        if plan.dataset.path.is_relative() {
            if let Some(dir) = path.parent() {
                plan.dataset.path = dir.join(&plan.dataset.path);
            }
        }
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(BenchError::Plan(msg));
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return bad(format!("split_fraction must lie in (0, 1), got {}", self.split_fraction));
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if let Some(s) = &self.sweep {
            if s.fuzzifiers.is_empty() || s.clusters.is_empty() {
                return bad("sweep grid must not be empty".into());
            }
            if s.repetitions == 0 {
                return bad("sweep repetitions must be at least 1".into());
            }
        }
        if let Some(s) = &self.scalability {
            if s.sizes.is_empty() {
                return bad("scalability sizes must not be empty".into());
            }
            if s.sizes.windows(2).any(|w| w[0] > w[1]) {
                return bad("scalability sizes must be ascending".into());
            }
            if s.repetitions == 0 {
                return bad("scalability repetitions must be at least 1".into());
            }
        }
        Ok(())
    }
}
