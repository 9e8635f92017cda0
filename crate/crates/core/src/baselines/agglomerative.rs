use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{canonical_labels, CrispPartition};
use crate::error::{Error, Result};
use crate::matrix::euclidean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
}

impl std::str::FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            other => Err(Error::InvalidConfig(format!("unknown linkage `{other}`"))),
        }
    }
}

impl std::fmt::Display for Linkage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
        })
    }
}

impl Linkage {
    /// Lance–Williams update for the distance from the union of `a` and `b` to `k`.
    #[inline]
    fn update(self, d_ak: f64, d_bk: f64, size_a: usize, size_b: usize) -> f64 {
        match self {
            Linkage::Single => d_ak.min(d_bk),
            Linkage::Complete => d_ak.max(d_bk),
            Linkage::Average => (size_a as f64 * d_ak + size_b as f64 * d_bk) / (size_a + size_b) as f64,
        }
    }
}

/// Packed upper triangle of a symmetric distance matrix.
struct Condensed {
    n: usize,
    d: Vec<f64>,
}

impl Condensed {
    fn new(data: ArrayView2<'_, f64>) -> Self {
        let n = data.nrows();
        let mut d = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                d.push(euclidean(data.row(i), data.row(j)));
            }
        }
        Self { n, d }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.n * i - i * (i + 1) / 2 + j - i - 1
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.d[self.idx(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.d[k] = v;
    }
}

struct Merge {
    a: usize,
    b: usize,
    distance: f64,
}

/// Nearest-neighbour-chain construction of the full merge list. Valid for
/// the reducible linkages offered here; the list is returned in merge order
/// of the equivalent greedy procedure (sorted by height).
fn nn_chain(data: ArrayView2<'_, f64>, linkage: Linkage) -> Vec<Merge> {
    let n = data.nrows();
    let mut dist = Condensed::new(data);
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut chain: Vec<usize> = Vec::with_capacity(n);

    while merges.len() + 1 < n {
        if chain.is_empty() {
            chain.push(active.iter().position(|&a| a).expect("an active cluster remains"));
        }
        let a = *chain.last().unwrap();
        let prev = chain.len().checked_sub(2).map(|i| chain[i]);
        let (mut best, mut best_d) = match prev {
            Some(p) => (p, dist.get(a, p)),
            None => (usize::MAX, f64::INFINITY),
        };
        for k in 0..n {
            if k == a || !active[k] {
                continue;
            }
            let d = dist.get(a, k);
            // Strict: on ties keep the chain predecessor, else the lowest index.
            if d < best_d {
                best = k;
                best_d = d;
            }
        }

        if Some(best) == prev {
            chain.pop();
            chain.pop();
            let (keep, gone) = if a < best { (a, best) } else { (best, a) };
            merges.push(Merge {
                a: keep,
                b: gone,
                distance: best_d,
            });
            for k in 0..n {
                if !active[k] || k == keep || k == gone {
                    continue;
                }
                let v = linkage.update(dist.get(keep, k), dist.get(gone, k), size[keep], size[gone]);
                dist.set(keep, k, v);
            }
            size[keep] += size[gone];
            active[gone] = false;
        } else {
            chain.push(best);
        }
    }

    // Stable, so equal heights keep discovery order.
    merges.sort_by(|x, y| x.distance.total_cmp(&y.distance));
    merges
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Bottom-up merging under `linkage` until `c` clusters remain.
///
/// Labels are numbered by first appearance in row order.
pub fn agglomerative(data: ArrayView2<'_, f64>, c: usize, linkage: Linkage) -> Result<CrispPartition> {
    let n = data.nrows();
    if c == 0 || n < c {
        return Err(Error::InvalidConfig(format!(
            "agglomerative clustering needs n >= c >= 1 (n = {n}, c = {c})"
        )));
    }
    crate::matrix::ensure_finite(data)?;
    let merges = nn_chain(data, linkage);
    let mut parent: Vec<usize> = (0..n).collect();
    for m in merges.iter().take(n - c) {
        let (ra, rb) = (find(&mut parent, m.a), find(&mut parent, m.b));
        parent[ra.max(rb)] = ra.min(rb);
    }
    let roots: Vec<Option<usize>> = (0..n).map(|i| Some(find(&mut parent, i))).collect();
    let (labels, n_clusters) = canonical_labels(&roots);
    Ok(CrispPartition { labels, n_clusters })
}
