//! Interval type-2 fuzzy c-means clustering with linguistic explanations.
//!
//! The usual flow: load a [`Dataset`], fit a [`FittedPipeline`] (median
//! imputation, min-max scaling, PCA), cluster the projected points with
//! [`fcm_type2`], then turn the partition into rules with
//! [`extract_rules`].

pub mod baselines;
pub mod error;
pub mod explain;
pub mod fuzzy;
pub mod ingest;
pub mod matrix;
pub mod metrics;
pub mod partition;
pub mod preprocess;

pub use baselines::{agglomerative, dbscan, k_distance_elbow, CrispPartition, KDistanceElbow, Linkage};
pub use error::{Error, Result};
pub use explain::{
    extract_rules, render_report, LinguisticTerm, ReportFormat, Rule, RuleOptions, RuleSet, Term, TermThresholds,
};
pub use fuzzy::{fcm_type1, fcm_type2, FcmConfig, FuzzyPartition, Prediction, Type1Partition, Type2Partition};
pub use ingest::{load_csv, load_uci_air_quality, Dataset, Loaded};
pub use metrics::{assignment_entropy, compare_methods, silhouette, ComparisonTable, MetricsReport};
pub use partition::{PartitionKind, StoredPartition};
pub use preprocess::FittedPipeline;

pub use ndarray;
