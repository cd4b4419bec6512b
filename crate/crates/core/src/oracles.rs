//! Exact baselines for small instances: Held-Karp TSP, subset-DP matching,
//! enumerated k-median, sorted-weight prefixes, Floyd-Warshall APSP, and
//! brute-force enumerations that cross-check the DPs.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::heuristics::{matching_length, tour_length};
use crate::metric::{RandomMetric, WeightedGraph};

pub const HELD_KARP_MAX_N: usize = 18;
pub const MATCHING_MAX_N: usize = 20;
pub const KMEDIAN_MAX_SUBSETS: u128 = 1_000_000;
pub const FULL_RELAXATION_MAX_N: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleMethod {
    HeldKarp,
    MatchingDp,
    ExhaustivePerm,
    ExhaustiveSubset,
    FullRelaxationApsp,
    SortedWeightPrefix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Witness {
    Tour(Vec<usize>),
    Matching(Vec<(usize, usize)>),
    Subset(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub witness: Witness,
    pub method: OracleMethod,
}

impl OracleResult {
    /// Value of the witness recomputed from `m`.
    pub fn evaluate_witness(&self, m: &RandomMetric) -> f64 {
        match &self.witness {
            Witness::Tour(t) => tour_length(m, t),
            Witness::Matching(e) => matching_length(m, e),
            Witness::Subset(s) => kmedian_cost(m, s),
        }
    }
}

/// `Σ_v min_{u ∈ centers} d(v, u)`.
pub fn kmedian_cost(m: &RandomMetric, centers: &[usize]) -> f64 {
    (0..m.n())
        .map(|v| {
            centers
                .iter()
                .map(|&u| m.d(v, u))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// Optimal tour by bitmask DP over subsets of `1..n`, tour anchored at 0.
pub fn held_karp_tsp(m: &RandomMetric) -> Result<OracleResult> {
    let n = m.n();
    if !(3..=HELD_KARP_MAX_N).contains(&n) {
        return Err(Error::Capability(format!(
            "Held-Karp supports 3 <= n <= {HELD_KARP_MAX_N}, got {n}"
        )));
    }
    let k = n - 1; // vertices 1..n mapped to bits 0..k
    let full = (1usize << k) - 1;
    let mut cost = vec![f64::INFINITY; (1 << k) * k];
    let mut parent = vec![u8::MAX; (1 << k) * k];
    for j in 0..k {
        cost[(1 << j) * k + j] = m.d(0, j + 1);
    }
    for mask in 1..=full {
        for j in 0..k {
            if mask & (1 << j) == 0 {
                continue;
            }
            let here = cost[mask * k + j];
            if here.is_infinite() {
                continue;
            }
            let mut rest = full & !mask;
            while rest != 0 {
                let nxt = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let next_mask = mask | (1 << nxt);
                let cand = here + m.d(j + 1, nxt + 1);
                if cand < cost[next_mask * k + nxt] {
                    cost[next_mask * k + nxt] = cand;
                    parent[next_mask * k + nxt] = j as u8;
                }
            }
        }
    }
    let (last, _) = (0..k)
        .map(|j| (j, cost[full * k + j] + m.d(j + 1, 0)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("n >= 3");
    let mut order = Vec::with_capacity(n);
    let (mut mask, mut j) = (full, last);
    loop {
        order.push(j + 1);
        let p = parent[mask * k + j];
        mask &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = p as usize;
    }
    order.push(0);
    order.reverse();
    Ok(OracleResult {
        value: tour_length(m, &order),
        witness: Witness::Tour(order),
        method: OracleMethod::HeldKarp,
    })
}

/// Minimum perfect matching by DP over vertex subsets: the lowest vertex of a
/// subset is paired with each other member in turn.
pub fn exact_min_matching(m: &RandomMetric) -> Result<OracleResult> {
    let n = m.n();
    if !n.is_multiple_of(2) || n == 0 || n > MATCHING_MAX_N {
        return Err(Error::Capability(format!(
            "matching DP supports even 2 <= n <= {MATCHING_MAX_N}, got {n}"
        )));
    }
    let size = 1usize << n;
    let mut best = vec![f64::INFINITY; size];
    let mut partner = vec![u8::MAX; size];
    best[0] = 0.0;
    for mask in 1..size {
        if mask.count_ones() % 2 != 0 {
            continue;
        }
        let i = mask.trailing_zeros() as usize;
        let mut rest = mask & !(1 << i);
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let cand = best[mask & !(1 << i) & !(1 << j)] + m.d(i, j);
            if cand < best[mask] {
                best[mask] = cand;
                partner[mask] = j as u8;
            }
        }
    }
    let mut edges = Vec::with_capacity(n / 2);
    let mut mask = size - 1;
    while mask != 0 {
        let i = mask.trailing_zeros() as usize;
        let j = partner[mask] as usize;
        edges.push((i, j));
        mask &= !(1 << i) & !(1 << j);
    }
    Ok(OracleResult {
        value: matching_length(m, &edges),
        witness: Witness::Matching(edges),
        method: OracleMethod::MatchingDp,
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Optimal k-median by enumerating all `C(n, k)` center sets in
/// lexicographic order (first optimum kept).
pub fn exact_kmedian(m: &RandomMetric, k: usize) -> Result<OracleResult> {
    let n = m.n();
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= k <= n, got n={n}, k={k}")));
    }
    let count = binomial(n, k);
    if count > KMEDIAN_MAX_SUBSETS {
        return Err(Error::Capability(format!(
            "C({n},{k}) = {count} exceeds {KMEDIAN_MAX_SUBSETS}"
        )));
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best = (f64::INFINITY, idx.clone());
    loop {
        let c = kmedian_cost(m, &idx);
        if c < best.0 {
            best = (c, idx.clone());
        }
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(OracleResult {
                    value: best.0,
                    witness: Witness::Subset(best.1),
                    method: OracleMethod::ExhaustiveSubset,
                });
            }
            i -= 1;
            if idx[i] < n - k + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Sum of the `count` smallest edge weights, added in ascending order.
pub fn sorted_weight_prefix(g: &WeightedGraph, count: usize) -> Result<f64> {
    let m = g.num_edges();
    if count == 0 || count > m {
        return Err(invalid(format!(
            "prefix length must lie in 1..={m}, got {count}"
        )));
    }
    let mut w = g.weights().to_vec();
    if count < m {
        w.select_nth_unstable_by(count - 1, f64::total_cmp);
    }
    let prefix = &mut w[..count];
    prefix.sort_unstable_by(f64::total_cmp);
    Ok(prefix.iter().sum())
}

/// Floyd-Warshall on the full weight matrix.
pub fn full_relaxation_apsp(g: &WeightedGraph) -> Result<RandomMetric> {
    let n = g.n();
    if n > FULL_RELAXATION_MAX_N {
        return Err(Error::Capability(format!(
            "full relaxation supports n <= {FULL_RELAXATION_MAX_N}, got {n}"
        )));
    }
    let mut d = vec![0.0; n * n];
    for (u, v, w) in g.edges() {
        d[u * n + v] = w;
        d[v * n + u] = w;
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            for j in 0..n {
                let alt = dik + d[k * n + j];
                if alt < d[i * n + j] {
                    d[i * n + j] = alt;
                }
            }
        }
    }
    RandomMetric::from_parts(n, d, g.clone())
}

/// Optimal tour by scanning every permutation that fixes vertex 0 first.
pub fn exhaustive_tsp(m: &RandomMetric) -> Result<OracleResult> {
    let n = m.n();
    if !(3..=11).contains(&n) {
        return Err(Error::Capability(format!(
            "exhaustive TSP supports 3 <= n <= 11, got {n}"
        )));
    }
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = (f64::INFINITY, Vec::new());
    permute(&mut rest, 0, &mut |p| {
        // each cycle appears in both directions; keep one
        if p[0] < p[p.len() - 1] {
            let mut len = m.d(0, p[0]) + m.d(p[p.len() - 1], 0);
            for w in p.windows(2) {
                len += m.d(w[0], w[1]);
            }
            if len < best.0 {
                best = (len, p.to_vec());
            }
        }
    });
    let mut order = vec![0];
    order.extend(best.1);
    Ok(OracleResult {
        value: tour_length(m, &order),
        witness: Witness::Tour(order),
        method: OracleMethod::ExhaustivePerm,
    })
}

fn permute(xs: &mut [usize], at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == xs.len() {
        visit(xs);
        return;
    }
    for i in at..xs.len() {
        xs.swap(at, i);
        permute(xs, at + 1, visit);
        xs.swap(at, i);
    }
}

/// Minimum perfect matching by listing all `(n-1)!!` matchings.
pub fn exhaustive_matching(m: &RandomMetric) -> Result<OracleResult> {
    let n = m.n();
    if !n.is_multiple_of(2) || n == 0 || n > 12 {
        return Err(Error::Capability(format!(
            "exhaustive matching supports even n <= 12, got {n}"
        )));
    }
    let mut best = (f64::INFINITY, Vec::new());
    let mut current = Vec::new();
    let mut free = vec![true; n];
    enumerate_matchings(m, &mut free, &mut current, 0.0, &mut best);
    Ok(OracleResult {
        value: matching_length(m, &best.1),
        witness: Witness::Matching(best.1),
        method: OracleMethod::ExhaustivePerm,
    })
}

/// Number of perfect matchings visited is `(n-1)!!`.
fn enumerate_matchings(
    m: &RandomMetric,
    free: &mut [bool],
    current: &mut Vec<(usize, usize)>,
    cost: f64,
    best: &mut (f64, Vec<(usize, usize)>),
) {
    let Some(i) = free.iter().position(|&f| f) else {
        if cost < best.0 {
            *best = (cost, current.clone());
        }
        return;
    };
    free[i] = false;
    for j in i + 1..free.len() {
        if free[j] {
            free[j] = false;
            current.push((i, j));
            enumerate_matchings(m, free, current, cost + m.d(i, j), best);
            current.pop();
            free[j] = true;
        }
    }
    free[i] = true;
}

/// k-median by recursive subset enumeration, costing each set with the
/// center loop outside and the vertex loop inside.
pub fn exhaustive_kmedian(m: &RandomMetric, k: usize) -> Result<OracleResult> {
    let n = m.n();
    if k == 0 || k > n || binomial(n, k) > KMEDIAN_MAX_SUBSETS {
        return Err(Error::Capability(format!(
            "exhaustive k-median cannot handle n={n}, k={k}"
        )));
    }
    let mut best = (f64::INFINITY, Vec::new());
    let mut chosen = Vec::with_capacity(k);
    choose(n, k, 0, &mut chosen, &mut |set| {
        let mut nearest = vec![f64::INFINITY; n];
        for &c in set {
            for (v, slot) in nearest.iter_mut().enumerate() {
                *slot = slot.min(m.d(c, v));
            }
        }
        let cost: f64 = nearest.iter().sum();
        if cost < best.0 {
            best = (cost, set.to_vec());
        }
    });
    Ok(OracleResult {
        value: best.0,
        witness: Witness::Subset(best.1),
        method: OracleMethod::ExhaustiveSubset,
    })
}

fn choose(
    n: usize,
    k: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if chosen.len() == k {
        visit(chosen);
        return;
    }
    for v in from..n {
        if n - v < k - chosen.len() {
            break;
        }
        chosen.push(v);
        choose(n, k, v + 1, chosen, visit);
        chosen.pop();
    }
}
