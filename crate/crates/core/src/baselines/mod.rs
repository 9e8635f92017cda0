//! Crisp comparison methods: DBSCAN and agglomerative clustering.

mod agglomerative;
mod dbscan;

use serde::{Deserialize, Serialize};

pub use agglomerative::{agglomerative, Linkage};
pub use dbscan::{dbscan, k_distance_elbow, KDistanceElbow};

/// JSON encoding of a noise label.
pub const NOISE: i64 = -1;

/// Hard cluster assignment. `None` marks a noise point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrispPartition {
    #[serde(with = "noise_labels")]
    pub labels: Vec<Option<usize>>,
    pub n_clusters: usize,
}

impl CrispPartition {
    /// Wrap noise-free labels; `n_clusters` is one past the largest label.
    pub fn from_labels(labels: &[usize]) -> Self {
        Self {
            n_clusters: labels.iter().max().map_or(0, |m| m + 1),
            labels: labels.iter().copied().map(Some).collect(),
        }
    }

    pub fn n_noise(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Renumber labels by order of first appearance, keeping noise as is.
pub(crate) fn canonical_labels(labels: &[Option<usize>]) -> (Vec<Option<usize>>, usize) {
    let mut map = std::collections::HashMap::new();
    let out = labels
        .iter()
        .map(|l| {
            l.map(|v| {
                let next = map.len();
                *map.entry(v).or_insert(next)
            })
        })
        .collect();
    (out, map.len())
}

mod noise_labels {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::NOISE;

    pub fn serialize<S: Serializer>(labels: &[Option<usize>], s: S) -> Result<S::Ok, S::Error> {
        labels
            .iter()
            .map(|l| l.map_or(NOISE, |v| v as i64))
            .collect::<Vec<i64>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<usize>>, D::Error> {
        Vec::<i64>::deserialize(d)?
            .into_iter()
            .map(|v| match v {
                NOISE => Ok(None),
                v if v >= 0 => Ok(Some(v as usize)),
                v => Err(D::Error::custom(format!("invalid cluster label {v}"))),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_serializes_as_minus_one() {
        let p = CrispPartition {
            labels: vec![Some(0), None, Some(1)],
            n_clusters: 2,
        };
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"labels":[0,-1,1],"n_clusters":2}"#);
        assert_eq!(serde_json::from_str::<CrispPartition>(&json).unwrap(), p);
        assert!(serde_json::from_str::<CrispPartition>(r#"{"labels":[-2],"n_clusters":0}"#).is_err());
    }

    #[test]
    fn canonical_renumbering() {
        let (l, n) = canonical_labels(&[Some(5), None, Some(2), Some(5)]);
        assert_eq!(l, vec![Some(0), None, Some(1), Some(0)]);
        assert_eq!(n, 2);
    }
}
