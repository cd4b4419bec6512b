//! Greedy matching, nearest-neighbor, insertion, and 2-opt.
//!
//! All tie-breaks are deterministic: lexicographic on vertex pairs, lowest
//! index on vertex selection, earliest tour position on insertion.

mod insertion;
mod matching;
mod nearest;
mod two_opt;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error};
use crate::metric::RandomMetric;

pub use insertion::{insertion_tour, InsertionRule};
pub use matching::{greedy_matching, matching_length, MatchingResult};
pub use nearest::nearest_neighbor_tour;
pub use two_opt::{find_improving_exchange, two_opt, two_opt_observed, PivotRule, CERTIFICATE_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TourAlgorithm {
    NearestNeighbor,
    Insertion,
    TwoOpt,
    /// A tour supplied from outside (e.g. a random permutation).
    Given,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TourMeta {
    pub algorithm: TourAlgorithm,
    pub rule: Option<String>,
    pub pivot: Option<PivotRule>,
    /// Exchanges applied (2-opt) or insertion steps.
    pub iterations: u64,
    /// Smallest applied improvement; 2-opt only, `None` when nothing was applied.
    pub min_improvement: Option<f64>,
    /// `Some(false)` when 2-opt stopped at its iteration cap with an
    /// improving exchange still available.
    pub locally_optimal: Option<bool>,
}

impl TourMeta {
    fn new(algorithm: TourAlgorithm) -> Self {
        TourMeta {
            algorithm,
            rule: None,
            pivot: None,
            iterations: 0,
            min_improvement: None,
            locally_optimal: None,
        }
    }
}

/// A Hamiltonian cycle as a vertex order; the closing edge is implicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TourResult {
    pub order: Vec<usize>,
    pub total_length: f64,
    pub meta: TourMeta,
}

impl TourResult {
    /// Wraps an externally supplied order after checking it is a permutation.
    pub fn from_order(m: &RandomMetric, order: Vec<usize>) -> crate::Result<Self> {
        if !is_permutation(&order, m.n()) {
            return Err(invalid("tour order is not a permutation of the vertices"));
        }
        let total_length = tour_length(m, &order);
        Ok(TourResult {
            order,
            total_length,
            meta: TourMeta::new(TourAlgorithm::Given),
        })
    }
}

/// `Σ d(order[i], order[i+1 mod n])`; a 2-vertex tour traverses its edge twice.
///
/// The sum starts at the lowest vertex and walks toward its lower neighbour,
/// so every rotation and reflection of a cycle gives the same float.
pub fn tour_length(m: &RandomMetric, order: &[usize]) -> f64 {
    let n = order.len();
    if n < 2 {
        return 0.0;
    }
    let start = (0..n).min_by_key(|&i| order[i]).expect("n >= 2");
    let forward = order[(start + 1) % n] <= order[(start + n - 1) % n];
    let at = |step: usize| {
        if forward {
            order[(start + step) % n]
        } else {
            order[(start + n - step % n) % n]
        }
    };
    (0..n).map(|s| m.d(at(s), at(s + 1))).sum()
}

pub fn is_permutation(order: &[usize], n: usize) -> bool {
    if order.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    order
        .iter()
        .all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
}

impl fmt::Display for PivotRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PivotRule::FirstImprovement => "first",
            PivotRule::BestImprovement => "best",
        })
    }
}

impl FromStr for PivotRule {
    type Err = Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "first" | "first-improvement" => Ok(PivotRule::FirstImprovement),
            "best" | "best-improvement" => Ok(PivotRule::BestImprovement),
            other => Err(invalid(format!("unknown pivot rule `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tour_length_small_cases() {
        let m = RandomMetric::from_fn(3, |u, v| (u + v) as f64).unwrap();
        assert_eq!(tour_length(&m, &[0]), 0.0);
        assert_eq!(tour_length(&m, &[0, 2]), 4.0);
        assert_eq!(tour_length(&m, &[0, 1, 2]), 1.0 + 3.0 + 2.0);
    }

    #[test]
    fn tour_length_is_bitwise_invariant_under_rotation_and_reflection() {
        let m = RandomMetric::generate(9, crate::metric::Distribution::Exponential1, 3).unwrap();
        let base = vec![4, 0, 7, 2, 8, 1, 6, 3, 5];
        let want = tour_length(&m, &base);
        let naive: f64 = (0..9).map(|i| m.d(base[i], base[(i + 1) % 9])).sum();
        assert!((want - naive).abs() < 1e-12);
        for r in 0..9 {
            let mut t = base.clone();
            t.rotate_left(r);
            assert_eq!(tour_length(&m, &t).to_bits(), want.to_bits());
            t.reverse();
            assert_eq!(tour_length(&m, &t).to_bits(), want.to_bits());
        }
    }

    #[test]
    fn permutation_check() {
        assert!(is_permutation(&[2, 0, 1], 3));
        assert!(!is_permutation(&[0, 0, 1], 3));
        assert!(!is_permutation(&[0, 1], 3));
        assert!(!is_permutation(&[0, 1, 3], 3));
    }
}
