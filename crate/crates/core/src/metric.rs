//! Random edge weights, the induced shortest-path metric, and ball queries.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng;

/// Law of the i.i.d. edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    #[default]
    Exponential1,
    Uniform01,
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distribution::Exponential1 => "exponential1",
            Distribution::Uniform01 => "uniform01",
        })
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exponential1" | "exp" | "exp1" | "exponential" => Ok(Distribution::Exponential1),
            "uniform01" | "uniform" | "unif" => Ok(Distribution::Uniform01),
            other => Err(invalid(format!("unknown distribution `{other}`"))),
        }
    }
}

/// Complete graph with one weight per unordered vertex pair.
///
/// Weights are stored as the strict upper triangle in row order:
/// `(0,1), (0,2), …, (0,n-1), (1,2), …`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    weights: Vec<f64>,
    distribution: Distribution,
    seed: u64,
}

#[inline]
fn triangle_index(n: usize, u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    // rows 0..a hold (n-1) + (n-2) + … + (n-a) entries
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

impl WeightedGraph {
    /// Draws `n(n-1)/2` i.i.d. weights from `dist` using the stream seeded by `seed`.
    pub fn generate(n: usize, dist: Distribution, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("need n >= 2, got {n}")));
        }
        let m = n * (n - 1) / 2;
        let mut stream = rng::stream_from_seed(seed);
        let weights = match dist {
            Distribution::Exponential1 => {
                (0..m).map(|_| rng::exp_sample(&mut stream, 1.0)).collect()
            }
            Distribution::Uniform01 => {
                use rand::Rng;
                (0..m).map(|_| stream.random::<f64>()).collect()
            }
        };
        Ok(WeightedGraph {
            n,
            weights,
            distribution: dist,
            seed,
        })
    }

    /// Hand-built graph from upper-triangle weights (row order). Tagged
    /// `Exponential1` with seed 0.
    pub fn from_weights(n: usize, weights: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("need n >= 2, got {n}")));
        }
        if weights.len() != n * (n - 1) / 2 {
            return Err(invalid(format!(
                "expected {} weights for n={n}, got {}",
                n * (n - 1) / 2,
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(invalid(format!(
                "weight {w} is not a finite nonnegative real"
            )));
        }
        Ok(WeightedGraph {
            n,
            weights,
            distribution: Distribution::Exponential1,
            seed: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn distribution(&self) -> Distribution {
        self.distribution
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_edges(&self) -> usize {
        self.weights.len()
    }

    /// Upper-triangle weights in row order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of `{u, v}`; `u != v`.
    #[inline]
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        debug_assert!(u != v && u < self.n && v < self.n);
        self.weights[triangle_index(self.n, u, v)]
    }

    /// All edges as `(u, v, w)` with `u < v`, in storage order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |u| (u + 1..n).map(move |v| (u, v)))
            .zip(self.weights.iter().copied())
            .map(|((u, v), w)| (u, v, w))
    }

    /// Single-source distances from `source` by array-scan Dijkstra, O(n²).
    pub fn distances_from(&self, source: usize) -> Result<Vec<f64>> {
        if source >= self.n {
            return Err(invalid(format!(
                "vertex {source} out of range for n={}",
                self.n
            )));
        }
        Ok(self.distances_from_set(&[source]))
    }

    /// Distance of every vertex to the nearest vertex of `sources` (all
    /// indices must be in range; an empty set yields infinities).
    pub fn distances_from_set(&self, sources: &[usize]) -> Vec<f64> {
        let n = self.n;
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        for &s in sources {
            dist[s] = 0.0;
        }
        for _ in 0..n {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (v, &d) in dist.iter().enumerate() {
                if !done[v] && d < best {
                    best = d;
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for v in 0..n {
                if !done[v] {
                    let alt = best + self.weight(u, v);
                    if alt < dist[v] {
                        dist[v] = alt;
                    }
                }
            }
        }
        dist
    }

    /// Plain-text dump: header `n seed distribution`, then one `u v w` line per
    /// edge with `u < v` and `w` printed with 17 significant digits.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {} {}", self.n, self.seed, self.distribution)?;
        for (u, v, w) in self.edges() {
            writeln!(out, "{u} {v} {w:.16e}")?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty dump".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("bad header `{header}`")));
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad n `{}`", fields[0])))?;
        let seed: u64 = fields[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad seed `{}`", fields[1])))?;
        let distribution: Distribution = fields[2].parse()?;
        if n < 2 {
            return Err(Error::Parse(format!("need n >= 2, got {n}")));
        }
        let mut weights = vec![f64::NAN; n * (n - 1) / 2];
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parse_err = || Error::Parse(format!("bad edge line `{line}`"));
            if parts.len() != 3 {
                return Err(parse_err());
            }
            let u: usize = parts[0].parse().map_err(|_| parse_err())?;
            let v: usize = parts[1].parse().map_err(|_| parse_err())?;
            let w: f64 = parts[2].parse().map_err(|_| parse_err())?;
            if u >= v || v >= n {
                return Err(parse_err());
            }
            weights[triangle_index(n, u, v)] = w;
        }
        if weights.iter().any(|w| w.is_nan()) {
            return Err(Error::Parse("dump is missing edges".into()));
        }
        let mut g = WeightedGraph::from_weights(n, weights)?;
        g.distribution = distribution;
        g.seed = seed;
        Ok(g)
    }
}

/// Dense symmetric distance matrix of a shortest-path metric.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomMetric {
    n: usize,
    dist: Vec<f64>,
    source: Option<WeightedGraph>,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compressed adjacency of the subgraph of edges with weight `<= limit`.
struct Sparse {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl Sparse {
    fn below(g: &WeightedGraph, limit: f64) -> Sparse {
        let n = g.n;
        let mut degree = vec![0usize; n];
        for (u, v, w) in g.edges() {
            if w <= limit {
                degree[u] += 1;
                degree[v] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let total = offsets[n];
        let mut targets = vec![0u32; total];
        let mut weights = vec![0.0; total];
        let mut fill = offsets[..n].to_vec();
        for (u, v, w) in g.edges() {
            if w <= limit {
                targets[fill[u]] = v as u32;
                weights[fill[u]] = w;
                fill[u] += 1;
                targets[fill[v]] = u as u32;
                weights[fill[v]] = w;
                fill[v] += 1;
            }
        }
        Sparse {
            offsets,
            targets,
            weights,
        }
    }

    fn dijkstra(&self, source: usize, out: &mut [f64], heap: &mut BinaryHeap<HeapEntry>) {
        out.fill(f64::INFINITY);
        out[source] = 0.0;
        heap.clear();
        heap.push(HeapEntry {
            dist: 0.0,
            vertex: source as u32,
        });
        while let Some(HeapEntry { dist, vertex }) = heap.pop() {
            let u = vertex as usize;
            if dist > out[u] {
                continue;
            }
            for i in self.offsets[u]..self.offsets[u + 1] {
                let v = self.targets[i] as usize;
                let alt = dist + self.weights[i];
                if alt < out[v] {
                    out[v] = alt;
                    heap.push(HeapEntry {
                        dist: alt,
                        vertex: v as u32,
                    });
                }
            }
        }
    }
}

/// Exact all-pairs shortest paths: one heap-based Dijkstra per source.
///
/// Dijkstra runs on the subgraph of edges with weight at most a cutoff `L`.
/// If every resulting distance is `<= L`, no excluded edge (weight `> L`) can
/// lie on a shortest path, so the distances are exact; otherwise `L` doubles.
/// The first cutoff keeps roughly `4 n ln n` of the lightest edges.
pub fn all_pairs_shortest_paths(g: &WeightedGraph) -> RandomMetric {
    let n = g.n;
    let m = g.num_edges();
    let keep = ((4.0 * n as f64 * (n as f64).ln()).ceil() as usize).clamp(1, m);
    let mut limit = if keep >= m {
        f64::INFINITY
    } else {
        let mut scratch = g.weights.clone();
        let (_, nth, _) = scratch.select_nth_unstable_by(keep - 1, f64::total_cmp);
        *nth
    };
    let max_weight = g.weights.iter().copied().fold(0.0, f64::max);
    let mut dist = vec![0.0; n * n];
    let mut heap = BinaryHeap::new();
    loop {
        if limit >= max_weight {
            limit = f64::INFINITY;
        }
        let sparse = Sparse::below(g, limit);
        let mut worst: f64 = 0.0;
        for (s, row) in dist.chunks_mut(n).enumerate() {
            sparse.dijkstra(s, row, &mut heap);
            worst = row.iter().copied().fold(worst, f64::max);
            if worst > limit {
                break;
            }
        }
        if worst <= limit {
            break;
        }
        limit = if limit > 0.0 {
            2.0 * limit
        } else {
            f64::MIN_POSITIVE
        };
    }
    // Symmetrize bit-exactly; both directions are equal up to summation order.
    for u in 0..n {
        for v in u + 1..n {
            let d = dist[u * n + v].min(dist[v * n + u]);
            dist[u * n + v] = d;
            dist[v * n + u] = d;
        }
    }
    RandomMetric {
        n,
        dist,
        source: Some(g.clone()),
    }
}

impl RandomMetric {
    /// Generates weights and their shortest-path metric in one step.
    pub fn generate(n: usize, dist: Distribution, seed: u64) -> Result<Self> {
        Ok(all_pairs_shortest_paths(&WeightedGraph::generate(
            n, dist, seed,
        )?))
    }

    /// Wraps an explicit row-major `n×n` matrix. Requires a zero diagonal,
    /// symmetry and finite nonnegative entries; the triangle inequality is not
    /// enforced so fixtures may use arbitrary symmetric costs.
    pub fn from_matrix(n: usize, dist: Vec<f64>) -> Result<Self> {
        if n == 0 || dist.len() != n * n {
            return Err(invalid(format!("matrix must be {n}x{n}")));
        }
        for u in 0..n {
            if dist[u * n + u] != 0.0 {
                return Err(invalid(format!("nonzero diagonal at {u}")));
            }
            for v in 0..n {
                let d = dist[u * n + v];
                if !d.is_finite() || d < 0.0 {
                    return Err(invalid(format!("entry ({u},{v}) = {d}")));
                }
                if d != dist[v * n + u] {
                    return Err(invalid(format!("asymmetric entry ({u},{v})")));
                }
            }
        }
        Ok(RandomMetric {
            n,
            dist,
            source: None,
        })
    }

    /// Matrix computed from `g` by some other route; validated like
    /// [`RandomMetric::from_matrix`].
    pub fn from_parts(n: usize, dist: Vec<f64>, g: WeightedGraph) -> Result<Self> {
        let mut m = Self::from_matrix(n, dist)?;
        m.source = Some(g);
        Ok(m)
    }

    /// Builds a matrix from a distance function on `0..n`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut dist = vec![0.0; n * n];
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    dist[u * n + v] = f(u.min(v), u.max(v));
                }
            }
        }
        Self::from_matrix(n, dist)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self, u: usize, v: usize) -> f64 {
        self.dist[u * self.n + v]
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.dist[v * self.n..(v + 1) * self.n]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.dist
    }

    /// Weighted graph this metric was computed from, if any.
    pub fn source_graph(&self) -> Option<&WeightedGraph> {
        self.source.as_ref()
    }

    /// `Δ_max`, the largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn ball_profile(&self, v: usize) -> Result<BallProfile> {
        if v >= self.n {
            return Err(invalid(format!("vertex {v} out of range for n={}", self.n)));
        }
        Ok(BallProfile::from_row(v, self.row(v).to_vec()))
    }

    /// `B_Δ(v)` as an ascending vertex list (closed ball, `d <= Δ`).
    pub fn ball(&self, v: usize, delta: f64) -> Vec<usize> {
        self.row(v)
            .iter()
            .enumerate()
            .filter(|(_, &d)| d <= delta)
            .map(|(u, _)| u)
            .collect()
    }

    /// Checks zero diagonal, symmetry, `d <= w` edgewise and (for `n <=
    /// triangle_limit`) the full triangle inequality with tolerance `tol`.
    /// Returns a description of the first violation.
    pub fn check_invariants(
        &self,
        triangle_limit: usize,
        tol: f64,
    ) -> std::result::Result<(), String> {
        let n = self.n;
        for u in 0..n {
            if self.d(u, u) != 0.0 {
                return Err(format!("d({u},{u}) = {}", self.d(u, u)));
            }
            for v in u + 1..n {
                if self.d(u, v) != self.d(v, u) {
                    return Err(format!("d({u},{v}) != d({v},{u})"));
                }
                if let Some(g) = &self.source {
                    if self.d(u, v) > g.weight(u, v) + tol {
                        return Err(format!("d({u},{v}) exceeds edge weight"));
                    }
                }
            }
        }
        if n <= triangle_limit {
            for x in 0..n {
                let rx = self.row(x);
                for u in 0..n {
                    let dux = rx[u];
                    let ru = self.row(u);
                    for v in 0..n {
                        if ru[v] > dux + rx[v] + tol {
                            return Err(format!("triangle violated at ({u},{x},{v})"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Distances from one center in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct BallProfile {
    pub center: usize,
    pub sorted_dists: Vec<f64>,
}

impl BallProfile {
    /// Sorts a distance row; `row[center]` must be 0.
    pub fn from_row(center: usize, mut row: Vec<f64>) -> Self {
        row.sort_by(f64::total_cmp);
        BallProfile {
            center,
            sorted_dists: row,
        }
    }

    /// `τ_k(center)`, the smallest radius whose ball holds `k` vertices (1-based).
    pub fn tau(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.sorted_dists.len() {
            return Err(invalid(format!(
                "k={k} outside 1..={}",
                self.sorted_dists.len()
            )));
        }
        Ok(self.sorted_dists[k - 1])
    }

    /// `|B_Δ(center)|`.
    pub fn ball_size(&self, delta: f64) -> usize {
        self.sorted_dists.partition_point(|&d| d <= delta)
    }
}
