use serde::Serialize;

use crate::error::{invalid, Result};
use crate::metric::RandomMetric;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchingResult {
    /// Matched pairs `(u, v)` with `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub total_length: f64,
    /// Pairs in the order greedy picked them.
    pub pick_order: Vec<(usize, usize)>,
}

impl MatchingResult {
    /// Recomputes the length from the edge set.
    pub fn recompute(&self, m: &RandomMetric) -> f64 {
        matching_length(m, &self.edges)
    }
}

/// Sum of the pair distances, taken in sorted `(min, max)` order so the same
/// edge set always gives the same float.
pub fn matching_length(m: &RandomMetric, edges: &[(usize, usize)]) -> f64 {
    let mut sorted: Vec<(usize, usize)> =
        edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    sorted.sort_unstable();
    sorted.iter().map(|&(u, v)| m.d(u, v)).sum()
}

/// Repeatedly takes the shortest pair of still-unmatched vertices, ties by
/// `(u, v)`. Needs even `n`.
pub fn greedy_matching(m: &RandomMetric) -> Result<MatchingResult> {
    let n = m.n();
    if !n.is_multiple_of(2) {
        return Err(invalid(format!("perfect matching needs even n, got {n}")));
    }
    let mut pairs: Vec<(f64, u32, u32)> = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            pairs.push((m.d(u, v), u as u32, v as u32));
        }
    }
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut matched = vec![false; n];
    let mut pick_order = Vec::with_capacity(n / 2);
    for (_, u, v) in pairs {
        let (u, v) = (u as usize, v as usize);
        if matched[u] || matched[v] {
            continue;
        }
        matched[u] = true;
        matched[v] = true;
        pick_order.push((u, v));
        if pick_order.len() == n / 2 {
            break;
        }
    }
    let mut edges = pick_order.clone();
    edges.sort_unstable();
    let total_length = matching_length(m, &edges);
    Ok(MatchingResult {
        edges,
        total_length,
        pick_order,
    })
}
