//! Independent reference implementations and data generators shared by
//! the integration tests. Everything here is deliberately naive.
#![allow(dead_code)]

use fuzzex_core::fuzzy::init_memberships;
use fuzzex_core::ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const BLOB_MEANS: [[f64; 2]; 3] = [[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]];

/// Uniform points with random labels; about 10% noise when `noise`. Labels
/// 0 and 1 are always present.
pub fn labeled_instance(seed: u64, n: usize, d: usize, c: usize, noise: bool) -> (Array2<f64>, Vec<Option<usize>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = uniform_matrix(&mut rng, n, d, 3.0);
    let mut labels: Vec<Option<usize>> = (0..n)
        .map(|_| {
            if noise && rng.gen_bool(0.1) {
                None
            } else {
                Some(rng.gen_range(0..c))
            }
        })
        .collect();
    // Guarantee two populated clusters.
    labels[0] = Some(0);
    labels[1] = Some(1);
    (data, labels)
}

/// Noisy points around `c` random centers, plus a seeded initial membership matrix.
pub fn fcm_instance(seed: u64, n: usize, d: usize, c: usize) -> (Array2<f64>, Array2<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = uniform_matrix(&mut rng, c, d, 5.0);
    let data = Array2::from_shape_fn((n, d), |(i, j)| centers[(i % c, j)] + rng.gen_range(-1.5..1.5));
    (data, init_memberships(c, n, seed ^ 0x5eed))
}

/// Isotropic Gaussian blobs, `per_blob` points each, rows interleaved by blob.
pub fn blobs(means: &[[f64; 2]], per_blob: usize, sigma: f64, seed: u64) -> (Array2<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let n = means.len() * per_blob;
    let mut data = Array2::zeros((n, 2));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let b = i % means.len();
        data[(i, 0)] = means[b][0] + noise.sample(&mut rng);
        data[(i, 1)] = means[b][1] + noise.sample(&mut rng);
        labels.push(b);
    }
    (data, labels)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| rng.gen_range(-scale..scale))
}

fn dist(data: ArrayView2<'_, f64>, i: usize, j: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..data.ncols() {
        let t = data[(i, k)] - data[(j, k)];
        s += t * t;
    }
    s.sqrt()
}

/// Pairwise-loop silhouette: `(overall, per-point)`; noise points get `None`.
pub fn brute_silhouette(data: ArrayView2<'_, f64>, labels: &[Option<usize>]) -> (f64, Vec<Option<f64>>) {
    let n = labels.len();
    let clusters: Vec<usize> = {
        let mut c: Vec<usize> = labels.iter().flatten().copied().collect();
        c.sort_unstable();
        c.dedup();
        c
    };
    let mut per_point = vec![None; n];
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        let Some(li) = labels[i] else { continue };
        let mut a_sum = 0.0;
        let mut a_n = 0usize;
        let mut b = f64::INFINITY;
        for &c in &clusters {
            let mut s = 0.0;
            let mut m = 0usize;
            for j in 0..n {
                if j != i && labels[j] == Some(c) {
                    s += dist(data, i, j);
                    m += 1;
                }
            }
            if c == li {
                a_sum = s;
                a_n = m;
            } else if m > 0 {
                b = b.min(s / m as f64);
            }
        }
        let s = if a_n == 0 {
            0.0
        } else {
            let a = a_sum / a_n as f64;
            let den = a.max(b);
            if den == 0.0 {
                0.0
            } else {
                (b - a) / den
            }
        };
        per_point[i] = Some(s);
        total += s;
        count += 1;
    }
    (total / count as f64, per_point)
}

/// DBSCAN by explicit reachability closure. Components are ordered by their
/// lowest-index core point; a border point takes the earliest component
/// among its core neighbours.
pub fn dbscan_oracle(data: ArrayView2<'_, f64>, eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = data.nrows();
    let near = |i: usize, j: usize| dist(data, i, j) <= eps;
    let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts).collect();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if !core[s] || comp[s] != usize::MAX {
            continue;
        }
        // Grow the closure until nothing changes.
        comp[s] = next;
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..n {
                if core[i] && comp[i] == next {
                    for j in 0..n {
                        if core[j] && comp[j] == usize::MAX && near(i, j) {
                            comp[j] = next;
                            changed = true;
                        }
                    }
                }
            }
        }
        next += 1;
    }
    (0..n)
        .map(|i| {
            if core[i] {
                Some(comp[i])
            } else {
                (0..n).filter(|&j| core[j] && near(i, j)).map(|j| comp[j]).min()
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub enum OracleLinkage {
    Single,
    Complete,
    Average,
}

/// Greedy merging recomputing every linkage from raw point sets. Ties go
/// to the smallest `(i, j)` pair of cluster slots.
pub fn agglomerative_oracle(data: ArrayView2<'_, f64>, c: usize, linkage: OracleLinkage) -> Vec<usize> {
    let n = data.nrows();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while clusters.len() > c {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let ds: Vec<f64> = clusters[i]
                    .iter()
                    .flat_map(|&p| clusters[j].iter().map(move |&q| (p, q)))
                    .map(|(p, q)| dist(data, p, q))
                    .collect();
                let d = match linkage {
                    OracleLinkage::Single => ds.iter().cloned().fold(f64::INFINITY, f64::min),
                    OracleLinkage::Complete => ds.iter().cloned().fold(0.0, f64::max),
                    OracleLinkage::Average => ds.iter().sum::<f64>() / ds.len() as f64,
                };
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        let (_, i, j) = best;
        let moved = clusters.remove(j);
        clusters[i].extend(moved);
    }
    let mut slot = vec![0; n];
    for (k, members) in clusters.iter().enumerate() {
        for &p in members {
            slot[p] = k;
        }
    }
    canonical(&slot)
}

/// Relabel by first appearance.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Fraction of points on which `a` and `b` agree under the best relabelling of `a`.
pub fn best_permutation_agreement(a: &[usize], b: &[usize], c: usize) -> f64 {
    fn permutations(c: usize) -> Vec<Vec<usize>> {
        if c == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(c - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, c - 1);
                out.push(q);
            }
        }
        out
    }
    let n = a.len();
    permutations(c)
        .iter()
        .map(|perm| a.iter().zip(b).filter(|(&x, &y)| perm[x] == y).count())
        .max()
        .unwrap_or(0) as f64
        / n as f64
}
