//! Δ-ball clustering of a metric into clusters of diameter at most 6Δ.
//!
//! A vertex is a dense center when its closed Δ-ball holds at least `s_Δ`
//! vertices. A greedy maximal set of dense centers with pairwise disjoint
//! balls (ascending vertex order) seeds the initial clusters; every other
//! dense center pours its ball into the lowest-indexed initial cluster its ball
//! touches. Whatever is left lies in no dense ball and becomes a singleton.

use serde::Serialize;

use crate::analytics::s_delta;
use crate::metric::{Distribution, RandomMetric};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringResult {
    pub delta: f64,
    pub s_delta: f64,
    /// Initial-cluster groups first (in independent-set order), then the
    /// sparse singletons ascending. Each cluster is sorted.
    pub clusters: Vec<Vec<usize>>,
    pub dense_centers: Vec<usize>,
    pub sparse_centers: Vec<usize>,
    pub independent_set: Vec<usize>,
}

/// `(dense, sparse)` centers for radius `delta`.
pub fn classify_centers(m: &RandomMetric, delta: f64) -> (Vec<usize>, Vec<usize>) {
    let n = m.n();
    let threshold = s_delta(n, delta);
    let mut dense = Vec::new();
    let mut covered = vec![false; n];
    for v in 0..n {
        let ball = m.ball(v, delta);
        if ball.len() as f64 >= threshold {
            dense.push(v);
            for u in ball {
                covered[u] = true;
            }
        }
    }
    let is_dense = {
        let mut flags = vec![false; n];
        for &v in &dense {
            flags[v] = true;
        }
        flags
    };
    let sparse = (0..n).filter(|&v| !is_dense[v] && !covered[v]).collect();
    (dense, sparse)
}

pub fn build_clusters(m: &RandomMetric, delta: f64) -> ClusteringResult {
    let n = m.n();
    let threshold = s_delta(n, delta);
    let (dense, sparse) = classify_centers(m, delta);
    let balls: Vec<Vec<usize>> = dense.iter().map(|&v| m.ball(v, delta)).collect();

    // initial[x] = index of the initial ball containing x
    let mut initial: Vec<Option<usize>> = vec![None; n];
    let mut independent_set = Vec::new();
    let mut chosen = vec![false; dense.len()];
    for (i, ball) in balls.iter().enumerate() {
        if ball.iter().all(|&x| initial[x].is_none()) {
            let id = independent_set.len();
            for &x in ball {
                initial[x] = Some(id);
            }
            independent_set.push(dense[i]);
            chosen[i] = true;
        }
    }

    let t = independent_set.len();
    let mut assigned: Vec<Option<usize>> = initial.clone();
    for (i, ball) in balls.iter().enumerate() {
        if chosen[i] {
            continue;
        }
        let target = ball
            .iter()
            .filter_map(|&x| initial[x])
            .min()
            .expect("maximal independent set leaves every dense ball touching an initial ball");
        for &x in ball {
            if assigned[x].is_none() {
                assigned[x] = Some(target);
            }
        }
    }

    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); t];
    let mut leftovers = Vec::new();
    for (v, a) in assigned.iter().enumerate() {
        match a {
            Some(c) => clusters[*c].push(v),
            None => leftovers.push(v),
        }
    }
    debug_assert_eq!(leftovers, sparse);
    clusters.extend(leftovers.into_iter().map(|v| vec![v]));

    ClusteringResult {
        delta,
        s_delta: threshold,
        clusters,
        dense_centers: dense,
        sparse_centers: sparse,
        independent_set,
    }
}

/// Largest pairwise distance inside `cluster`.
pub fn cluster_diameter(m: &RandomMetric, cluster: &[usize]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, &u) in cluster.iter().enumerate() {
        for &v in &cluster[i + 1..] {
            worst = worst.max(m.d(u, v));
        }
    }
    worst
}

/// Slack allowed on the `6Δ` diameter check to absorb floating-point rounding
/// in the distance matrix.
pub const DIAMETER_TOLERANCE: f64 = 1e-12;

impl ClusteringResult {
    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Checks every structural guarantee against `m`; returns the first
    /// violation.
    pub fn verify(&self, m: &RandomMetric) -> Result<(), String> {
        let n = m.n();
        let mut seen = vec![false; n];
        for c in &self.clusters {
            if c.is_empty() {
                return Err("empty cluster".into());
            }
            for &v in c {
                if v >= n || seen[v] {
                    return Err(format!("vertex {v} repeated or out of range"));
                }
                seen[v] = true;
            }
            let diam = cluster_diameter(m, c);
            if diam > 6.0 * self.delta + DIAMETER_TOLERANCE {
                return Err(format!(
                    "cluster diameter {diam} exceeds 6Δ = {}",
                    6.0 * self.delta
                ));
            }
        }
        if let Some(v) = seen.iter().position(|&s| !s) {
            return Err(format!("vertex {v} not covered"));
        }
        for &s in &self.sparse_centers {
            if !self.clusters.iter().any(|c| c.as_slice() == [s]) {
                return Err(format!("sparse center {s} is not a singleton"));
            }
        }
        let mut owner = vec![usize::MAX; n];
        for (i, &c) in self.independent_set.iter().enumerate() {
            for u in m.ball(c, self.delta) {
                if owner[u] != usize::MAX {
                    return Err(format!(
                        "balls of {} and {c} intersect at {u}",
                        self.independent_set[owner[u]]
                    ));
                }
                owner[u] = i;
            }
        }
        let t = self.independent_set.len() as f64;
        if t > n as f64 / self.s_delta + 1e-9 {
            return Err(format!(
                "t = {t} exceeds n / s_Δ = {}",
                n as f64 / self.s_delta
            ));
        }
        Ok(())
    }
}

/// `1 + n / e^{Δn/5}`, the growth envelope of the expected cluster count.
pub fn cluster_count_envelope(n: usize, delta: f64) -> f64 {
    1.0 + n as f64 / (delta * n as f64 / 5.0).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub delta: f64,
    pub mean_count: f64,
    pub max_count: usize,
    pub envelope: f64,
}

/// Mean and max cluster counts over `trials` fresh Exp(1) instances, one row
/// per radius. Trial `i` draws its weights from the substream of
/// `(seed, "cluster-curve", "n=<n>", i)`.
pub fn cluster_count_curve(
    n: usize,
    deltas: &[f64],
    trials: usize,
    seed: u64,
) -> crate::Result<Vec<CurveRow>> {
    if trials == 0 {
        return Err(crate::error::invalid("trials must be >= 1"));
    }
    let mut sums = vec![0usize; deltas.len()];
    let mut maxes = vec![0usize; deltas.len()];
    let tuple = format!("n={n}");
    for trial in 0..trials {
        let id = rng::substream_id(seed, "cluster-curve", &tuple, trial as u64);
        let m = RandomMetric::generate(
            n,
            Distribution::Exponential1,
            rng::purpose_seed(id, "weights"),
        )?;
        for (j, &delta) in deltas.iter().enumerate() {
            let count = build_clusters(&m, delta).num_clusters();
            sums[j] += count;
            maxes[j] = maxes[j].max(count);
        }
    }
    Ok(deltas
        .iter()
        .enumerate()
        .map(|(j, &delta)| CurveRow {
            delta,
            mean_count: sums[j] as f64 / trials as f64,
            max_count: maxes[j],
            envelope: cluster_count_envelope(n, delta),
        })
        .collect())
}
