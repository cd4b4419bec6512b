use serde::{Deserialize, Serialize};

use super::{is_permutation, tour_length, TourAlgorithm, TourMeta, TourResult};
use crate::error::{invalid, Result};
use crate::metric::RandomMetric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PivotRule {
    /// Apply the first improving exchange in lexicographic `(i, j)` order,
    /// then rescan from the start.
    #[default]
    FirstImprovement,
    /// Apply the exchange with the largest improvement (first on ties).
    BestImprovement,
}

/// Improvements at or below this are treated as roundoff, both when choosing
/// exchanges and by the local optimality certificate. Shortest-path metrics
/// have many exact ties, and a zero threshold lets 2-opt cycle on them.
pub const CERTIFICATE_EPS: f64 = 1e-12;

/// Improvement of the exchange on tour positions `i < j`: edges
/// `(t_i, t_{i+1})` and `(t_j, t_{j+1})` become `(t_i, t_j)` and
/// `(t_{i+1}, t_{j+1})`.
#[inline]
fn delta(m: &RandomMetric, t: &[usize], i: usize, j: usize) -> f64 {
    let n = t.len();
    let (v1, v2, v3, v4) = (t[i], t[i + 1], t[j], t[(j + 1) % n]);
    m.d(v1, v2) + m.d(v3, v4) - m.d(v1, v3) - m.d(v2, v4)
}

/// Valid exchanges use two edges with no shared vertex.
fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n.saturating_sub(1)).flat_map(move |i| {
        let last = if i == 0 { n - 1 } else { n };
        (i + 2..last).map(move |j| (i, j))
    })
}

/// First exchange (lexicographic) with improvement `> eps`.
pub fn find_improving_exchange(
    m: &RandomMetric,
    order: &[usize],
    eps: f64,
) -> Option<(usize, usize, f64)> {
    pairs(order.len())
        .map(|(i, j)| (i, j, delta(m, order, i, j)))
        .find(|&(_, _, d)| d > eps)
}

fn best_exchange(m: &RandomMetric, order: &[usize]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (i, j) in pairs(order.len()) {
        let d = delta(m, order, i, j);
        if d > CERTIFICATE_EPS && best.is_none_or(|b| d > b.2) {
            best = Some((i, j, d));
        }
    }
    best
}

/// 2-opt from `initial` until no exchange improves or `max_iters` exchanges
/// were applied.
pub fn two_opt(
    m: &RandomMetric,
    initial: &TourResult,
    pivot: PivotRule,
    max_iters: u64,
) -> Result<TourResult> {
    two_opt_observed(m, initial, pivot, max_iters, |_, _| {})
}

/// As [`two_opt`], calling `observe(tour, δ)` after every applied exchange.
pub fn two_opt_observed(
    m: &RandomMetric,
    initial: &TourResult,
    pivot: PivotRule,
    max_iters: u64,
    mut observe: impl FnMut(&[usize], f64),
) -> Result<TourResult> {
    let n = m.n();
    if !is_permutation(&initial.order, n) {
        return Err(invalid("initial tour is not a permutation of the vertices"));
    }
    let mut tour = initial.order.clone();
    let mut iterations = 0u64;
    let mut min_improvement: Option<f64> = None;
    let mut capped = false;
    loop {
        let step = match pivot {
            PivotRule::FirstImprovement => find_improving_exchange(m, &tour, CERTIFICATE_EPS),
            PivotRule::BestImprovement => best_exchange(m, &tour),
        };
        let Some((i, j, d)) = step else { break };
        if iterations == max_iters {
            capped = true;
            break;
        }
        tour[i + 1..=j].reverse();
        iterations += 1;
        min_improvement = Some(min_improvement.map_or(d, |x: f64| x.min(d)));
        observe(&tour, d);
    }
    let mut meta = TourMeta::new(TourAlgorithm::TwoOpt);
    meta.pivot = Some(pivot);
    meta.iterations = iterations;
    meta.min_improvement = min_improvement;
    meta.locally_optimal = Some(!capped);
    Ok(TourResult {
        total_length: tour_length(m, &tour),
        order: tour,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Distribution;
    use crate::rng;

    /// d(1,2)=d(3,4)=10, every other pair 1 (1-based).
    fn crossed_square() -> RandomMetric {
        RandomMetric::from_fn(4, |u, v| {
            if (u, v) == (0, 1) || (u, v) == (2, 3) {
                10.0
            } else {
                1.0
            }
        })
        .unwrap()
    }

    #[test]
    fn pair_enumeration() {
        assert_eq!(pairs(3).count(), 0);
        assert_eq!(pairs(4).collect::<Vec<_>>(), vec![(0, 2), (1, 3)]);
        // n(n-3)/2 non-adjacent edge pairs
        assert_eq!(pairs(10).count(), 35);
    }

    #[test]
    fn triangle_needs_no_exchange() {
        let m = RandomMetric::from_fn(3, |u, v| (u + v) as f64).unwrap();
        let init = TourResult::from_order(&m, vec![2, 0, 1]).unwrap();
        let r = two_opt(&m, &init, PivotRule::FirstImprovement, 100).unwrap();
        assert_eq!(r.meta.iterations, 0);
        assert_eq!(r.meta.min_improvement, None);
        assert_eq!(r.meta.locally_optimal, Some(true));
    }

    #[test]
    fn crossed_square_resolves_in_one_exchange() {
        let m = crossed_square();
        let init = TourResult::from_order(&m, vec![0, 1, 2, 3]).unwrap();
        assert_eq!(init.total_length, 22.0);
        for pivot in [PivotRule::FirstImprovement, PivotRule::BestImprovement] {
            let r = two_opt(&m, &init, pivot, 100).unwrap();
            assert_eq!(r.meta.iterations, 1);
            assert_eq!(r.meta.min_improvement, Some(18.0));
            assert_eq!(r.total_length, 4.0);
            assert_eq!(r.order, vec![0, 2, 1, 3]);
        }
    }

    #[test]
    fn cap_marks_result_not_locally_optimal() {
        let m = crossed_square();
        let init = TourResult::from_order(&m, vec![0, 1, 2, 3]).unwrap();
        let r = two_opt(&m, &init, PivotRule::FirstImprovement, 0).unwrap();
        assert_eq!(r.meta.iterations, 0);
        assert_eq!(r.meta.locally_optimal, Some(false));
        assert_eq!(r.order, init.order);
    }

    #[test]
    fn rejects_non_permutation() {
        let m = crossed_square();
        let bad = TourResult {
            order: vec![0, 0, 1, 2],
            total_length: 0.0,
            meta: init_meta(),
        };
        assert!(two_opt(&m, &bad, PivotRule::FirstImprovement, 10).is_err());
    }

    fn init_meta() -> TourMeta {
        TourMeta::new(TourAlgorithm::Given)
    }

    #[test]
    fn each_exchange_lowers_length_by_delta() {
        let m = RandomMetric::generate(40, Distribution::Exponential1, 21).unwrap();
        let mut stream = rng::stream_from_seed(4);
        let init = TourResult::from_order(&m, rng::random_permutation(&mut stream, 40)).unwrap();
        for pivot in [PivotRule::FirstImprovement, PivotRule::BestImprovement] {
            let mut last = init.total_length;
            let mut deltas = Vec::new();
            let r = two_opt_observed(&m, &init, pivot, u64::MAX, |t, d| {
                let now = tour_length(&m, t);
                assert!(d > 0.0);
                assert!(((last - now) - d).abs() <= 1e-9);
                last = now;
                deltas.push(d);
            })
            .unwrap();
            assert_eq!(deltas.len() as u64, r.meta.iterations);
            assert!(r.meta.iterations > 0);
            assert_eq!(
                r.meta.min_improvement,
                deltas.iter().copied().reduce(f64::min)
            );
            assert!(find_improving_exchange(&m, &r.order, CERTIFICATE_EPS).is_none());
            assert!((tour_length(&m, &r.order) - r.total_length).abs() <= 1e-9);
        }
    }
}
