//! On-disk form of a fitted partition.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::CrispPartition;
use crate::error::{Error, Result};
use crate::fuzzy::{Type1Partition, Type2Partition};

pub const PARTITION_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PartitionKind {
    Type2(Type2Partition),
    Type1(Type1Partition),
    Crisp(CrispPartition),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredPartition {
    pub schema_version: u32,
    pub method: String,
    pub partition: PartitionKind,
}

impl StoredPartition {
    pub fn new(method: impl Into<String>, partition: PartitionKind) -> Self {
        Self {
            schema_version: PARTITION_SCHEMA_VERSION,
            method: method.into(),
            partition,
        }
    }

    /// Hard labels; `None` marks noise.
    pub fn labels(&self) -> Vec<Option<usize>> {
        match &self.partition {
            PartitionKind::Type2(p) => p.labels.iter().copied().map(Some).collect(),
            PartitionKind::Type1(p) => p.labels.iter().copied().map(Some).collect(),
            PartitionKind::Crisp(p) => p.labels.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            schema_version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.schema_version != PARTITION_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: header.schema_version,
                expected: PARTITION_SCHEMA_VERSION,
            });
        }
        Ok(serde_json::from_str(text)?)
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
