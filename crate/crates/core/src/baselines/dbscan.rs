use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::CrispPartition;
use crate::matrix::squared_euclidean;

#[derive(Clone, Copy, PartialEq)]
enum State {
    Unvisited,
    Noise,
    Cluster(usize),
}

fn region(data: ArrayView2<'_, f64>, p: usize, eps_sq: f64, out: &mut Vec<usize>) {
    out.clear();
    let x = data.row(p);
    for (q, y) in data.outer_iter().enumerate() {
        if squared_euclidean(x, y) <= eps_sq {
            out.push(q);
        }
    }
}

/// Density-based clustering.
///
/// A point is core when at least `min_pts` points (itself included) lie
/// within `eps`. Clusters are discovered in row order; a border point
/// reachable from several clusters stays with the first one that reaches it.
/// Every point is region-queried at most once, so memory stays O(n).
pub fn dbscan(data: ArrayView2<'_, f64>, eps: f64, min_pts: usize) -> CrispPartition {
    let n = data.nrows();
    let eps_sq = eps * eps;
    let mut state = vec![State::Unvisited; n];
    let mut cluster = 0;
    let mut nbrs = Vec::new();
    let mut queue = Vec::new();

    for p in 0..n {
        if state[p] != State::Unvisited {
            continue;
        }
        region(data, p, eps_sq, &mut nbrs);
        if nbrs.len() < min_pts {
            state[p] = State::Noise;
            continue;
        }
        state[p] = State::Cluster(cluster);
        queue.clear();
        loop {
            for &q in &nbrs {
                match state[q] {
                    State::Unvisited => {
                        state[q] = State::Cluster(cluster);
                        queue.push(q);
                    }
                    // Already queried and found non-core: a border point.
                    State::Noise => state[q] = State::Cluster(cluster),
                    State::Cluster(_) => {}
                }
            }
            let Some(q) = queue.pop() else { break };
            region(data, q, eps_sq, &mut nbrs);
            if nbrs.len() < min_pts {
                nbrs.clear();
            }
        }
        cluster += 1;
    }

    CrispPartition {
        labels: state
            .into_iter()
            .map(|s| match s {
                State::Cluster(c) => Some(c),
                _ => None,
            })
            .collect(),
        n_clusters: cluster,
    }
}

/// Sorted k-nearest-neighbour distances with the knee of the curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KDistanceElbow {
    pub k: usize,
    /// Ascending k-th neighbour distance per point.
    pub sorted_distances: Vec<f64>,
    pub elbow_index: usize,
    pub suggested_eps: f64,
}

/// Suggest an `eps` from the k-distance curve: the point farthest from the
/// chord joining its first and last values. Reported only, never applied.
///
/// Returns `None` when there are not more than `k` points.
pub fn k_distance_elbow(data: ArrayView2<'_, f64>, k: usize) -> Option<KDistanceElbow> {
    let n = data.nrows();
    if k == 0 || n <= k {
        return None;
    }
    let mut kd: Vec<f64> = (0..n)
        .map(|p| {
            let x = data.row(p);
            let mut d: Vec<f64> = data
                .outer_iter()
                .enumerate()
                .filter(|&(q, _)| q != p)
                .map(|(_, y)| squared_euclidean(x, y))
                .collect();
            let (_, kth, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
            kth.sqrt()
        })
        .collect();
    kd.sort_by(f64::total_cmp);

    let last = (n - 1) as f64;
    let (y0, y1) = (kd[0], kd[n - 1]);
    let norm = ((y1 - y0).powi(2) + last * last).sqrt();
    let elbow_index = if norm == 0.0 {
        0
    } else {
        (0..n)
            .map(|i| {
                let x = i as f64;
                ((y1 - y0) * x - last * (kd[i] - y0)).abs() / norm
            })
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) })
            .0
    };
    Some(KDistanceElbow {
        k,
        suggested_eps: kd[elbow_index],
        sorted_distances: kd,
        elbow_index,
    })
}
