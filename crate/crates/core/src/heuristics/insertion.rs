use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::{tour_length, TourAlgorithm, TourMeta, TourResult};
use crate::error::{invalid, Error, Result};
use crate::metric::RandomMetric;
use crate::rng;

/// Which vertex an insertion heuristic adds next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertionRule {
    /// Vertex closest to the current tour.
    Nearest,
    /// Vertex farthest from the current tour.
    Farthest,
    /// Vertex with the cheapest insertion cost.
    Cheapest,
    /// Uniformly random vertex; the start triangle is random too.
    Random { seed: u64 },
    /// Ascending vertex index.
    FixedOrder,
}

impl InsertionRule {
    pub const NAMES: [&'static str; 5] = ["nearest", "farthest", "cheapest", "random", "fixed"];

    pub fn name(&self) -> &'static str {
        match self {
            InsertionRule::Nearest => "nearest",
            InsertionRule::Farthest => "farthest",
            InsertionRule::Cheapest => "cheapest",
            InsertionRule::Random { .. } => "random",
            InsertionRule::FixedOrder => "fixed",
        }
    }

    /// Parses a rule name; `random` takes `seed`.
    pub fn parse_with_seed(name: &str, seed: u64) -> Result<Self> {
        match name {
            "nearest" => Ok(InsertionRule::Nearest),
            "farthest" => Ok(InsertionRule::Farthest),
            "cheapest" => Ok(InsertionRule::Cheapest),
            "random" => Ok(InsertionRule::Random { seed }),
            "fixed" | "fixed-order" => Ok(InsertionRule::FixedOrder),
            other => Err(invalid(format!("unknown insertion rule `{other}`"))),
        }
    }
}

impl fmt::Display for InsertionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InsertionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InsertionRule::parse_with_seed(s, 0)
    }
}

#[inline]
fn insertion_cost(m: &RandomMetric, a: usize, v: usize, b: usize) -> f64 {
    m.d(a, v) + m.d(v, b) - m.d(a, b)
}

/// Cheapest slot for `v`: `(cost, position)` where position `i` is the edge
/// `(tour[i], tour[i+1 mod len])`; earliest position wins ties.
fn cheapest_slot(m: &RandomMetric, tour: &[usize], v: usize) -> (f64, usize) {
    let len = tour.len();
    let mut best = (f64::INFINITY, 0);
    for i in 0..len {
        let c = insertion_cost(m, tour[i], v, tour[(i + 1) % len]);
        if c < best.0 {
            best = (c, i);
        }
    }
    best
}

/// Builds a tour from a 3-vertex start by repeatedly inserting the rule's
/// vertex at its cheapest position.
pub fn insertion_tour(m: &RandomMetric, rule: InsertionRule) -> Result<TourResult> {
    let n = m.n();
    let mut meta = TourMeta::new(TourAlgorithm::Insertion);
    meta.rule = Some(rule.name().to_string());
    if n < 3 {
        let order: Vec<usize> = (0..n).collect();
        return Ok(TourResult {
            total_length: tour_length(m, &order),
            order,
            meta,
        });
    }

    let order = match rule {
        InsertionRule::Cheapest => cheapest_insertion(m),
        InsertionRule::Random { seed } => random_insertion(m, seed),
        InsertionRule::FixedOrder => {
            let mut tour = vec![0, 1, 2];
            for v in 3..n {
                let (_, i) = cheapest_slot(m, &tour, v);
                tour.insert(i + 1, v);
            }
            tour
        }
        InsertionRule::Nearest | InsertionRule::Farthest => {
            proximity_insertion(m, matches!(rule, InsertionRule::Farthest))
        }
    };
    meta.iterations = (n - 3) as u64;
    Ok(TourResult {
        total_length: tour_length(m, &order),
        order,
        meta,
    })
}

fn proximity_insertion(m: &RandomMetric, farthest: bool) -> Vec<usize> {
    let n = m.n();
    let mut tour = vec![0, 1, 2];
    let mut in_tour = vec![false; n];
    // distance from each vertex to the tour
    let mut gap = vec![f64::INFINITY; n];
    for &t in &tour {
        in_tour[t] = true;
    }
    for v in 0..n {
        for &t in &tour {
            gap[v] = gap[v].min(m.d(v, t));
        }
    }
    for _ in 3..n {
        let mut pick = usize::MAX;
        for v in 0..n {
            if in_tour[v] {
                continue;
            }
            let better = pick == usize::MAX
                || if farthest {
                    gap[v] > gap[pick]
                } else {
                    gap[v] < gap[pick]
                };
            if better {
                pick = v;
            }
        }
        let (_, i) = cheapest_slot(m, &tour, pick);
        tour.insert(i + 1, pick);
        in_tour[pick] = true;
        for v in 0..n {
            gap[v] = gap[v].min(m.d(v, pick));
        }
    }
    tour
}

fn random_insertion(m: &RandomMetric, seed: u64) -> Vec<usize> {
    let n = m.n();
    let mut stream = rng::stream_from_seed(seed);
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut tour = Vec::with_capacity(n);
    for _ in 0..3 {
        let j = stream.random_range(0..remaining.len());
        tour.push(remaining.remove(j));
    }
    while !remaining.is_empty() {
        let j = stream.random_range(0..remaining.len());
        let v = remaining.remove(j);
        let (_, i) = cheapest_slot(m, &tour, v);
        tour.insert(i + 1, v);
    }
    tour
}

/// Cheapest insertion with cached per-vertex best slots.
///
/// Each outside vertex keeps its cheapest slot, named by the slot's first
/// vertex. Inserting `v` into edge `(a, b)` only removes that edge and adds
/// `(a, v)` and `(v, b)`, and leaves the relative order of all other edges
/// unchanged, so a cached slot needs a full rescan only when it was `(a, b)`.
fn cheapest_insertion(m: &RandomMetric) -> Vec<usize> {
    let n = m.n();
    let mut tour = vec![0, 1, 2];
    let mut pos = vec![usize::MAX; n];
    for (i, &t) in tour.iter().enumerate() {
        pos[t] = i;
    }
    // (cost, first vertex of the slot)
    let mut best: Vec<(f64, usize)> = vec![(f64::INFINITY, usize::MAX); n];
    for v in 3..n {
        let (c, i) = cheapest_slot(m, &tour, v);
        best[v] = (c, tour[i]);
    }
    for _ in 3..n {
        let mut pick = usize::MAX;
        for v in 0..n {
            if pos[v] == usize::MAX && (pick == usize::MAX || best[v].0 < best[pick].0) {
                pick = v;
            }
        }
        let a = best[pick].1;
        let len = tour.len();
        let b = tour[(pos[a] + 1) % len];
        tour.insert(pos[a] + 1, pick);
        for (i, &t) in tour.iter().enumerate().skip(pos[a] + 1) {
            pos[t] = i;
        }
        let len = tour.len();
        for u in 0..n {
            if pos[u] != usize::MAX {
                continue;
            }
            if best[u].1 == a {
                let (c, i) = cheapest_slot(m, &tour, u);
                best[u] = (c, tour[i]);
                continue;
            }
            for start in [a, pick] {
                let end = tour[(pos[start] + 1) % len];
                let c = insertion_cost(m, start, u, end);
                let (bc, bs) = best[u];
                if c < bc || (c == bc && pos[start] < pos[bs]) {
                    best[u] = (c, start);
                }
            }
        }
        debug_assert_eq!(tour[(pos[pick] + 1) % len], b);
    }
    tour
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::is_permutation;
    use crate::metric::Distribution;
    use proptest::prelude::*;

    /// Textbook cheapest insertion: rescan every (vertex, slot) pair each step.
    fn cheapest_insertion_naive(m: &RandomMetric) -> Vec<usize> {
        let n = m.n();
        let mut tour = vec![0, 1, 2];
        let mut outside: Vec<usize> = (3..n).collect();
        while !outside.is_empty() {
            let mut best = (f64::INFINITY, usize::MAX, 0usize);
            for (j, &v) in outside.iter().enumerate() {
                let len = tour.len();
                for i in 0..len {
                    let c = m.d(tour[i], v) + m.d(v, tour[(i + 1) % len])
                        - m.d(tour[i], tour[(i + 1) % len]);
                    if c < best.0 {
                        best = (c, j, i);
                    }
                }
            }
            let v = outside.remove(best.1);
            tour.insert(best.2 + 1, v);
        }
        tour
    }

    fn all_rules() -> [InsertionRule; 5] {
        [
            InsertionRule::Nearest,
            InsertionRule::Farthest,
            InsertionRule::Cheapest,
            InsertionRule::Random { seed: 3 },
            InsertionRule::FixedOrder,
        ]
    }

    #[test]
    fn triangle_for_every_rule() {
        let m = RandomMetric::from_fn(3, |u, v| [0.2, 0.9, 0.4][u + v - 1]).unwrap();
        for rule in all_rules() {
            let t = insertion_tour(&m, rule).unwrap();
            assert!(is_permutation(&t.order, 3));
            assert!((t.total_length - 1.5).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_distances_give_length_n() {
        let m = RandomMetric::from_fn(4, |_, _| 1.0).unwrap();
        for rule in all_rules() {
            assert_eq!(insertion_tour(&m, rule).unwrap().total_length, 4.0);
        }
    }

    #[test]
    fn degenerate_sizes() {
        let one = RandomMetric::from_matrix(1, vec![0.0]).unwrap();
        assert_eq!(
            insertion_tour(&one, InsertionRule::Nearest).unwrap().order,
            vec![0]
        );
        let two = RandomMetric::from_fn(2, |_, _| 0.5).unwrap();
        let t = insertion_tour(&two, InsertionRule::Cheapest).unwrap();
        assert_eq!(t.order, vec![0, 1]);
        assert_eq!(t.total_length, 1.0);
    }

    #[test]
    fn fixed_order_position_ties_take_earliest_slot() {
        // all slots cost the same, so each new vertex lands right after tour[0]
        let m = RandomMetric::from_fn(6, |_, _| 1.0).unwrap();
        let t = insertion_tour(&m, InsertionRule::FixedOrder).unwrap();
        assert_eq!(t.order, vec![0, 5, 4, 3, 1, 2]);
    }

    #[test]
    fn rules_produce_permutations() {
        let m = RandomMetric::generate(60, Distribution::Exponential1, 12).unwrap();
        for rule in all_rules() {
            let t = insertion_tour(&m, rule).unwrap();
            assert!(is_permutation(&t.order, 60), "{rule}");
            assert!((tour_length(&m, &t.order) - t.total_length).abs() < 1e-9);
        }
    }

    #[test]
    fn random_rule_is_seeded() {
        let m = RandomMetric::generate(30, Distribution::Exponential1, 1).unwrap();
        let a = insertion_tour(&m, InsertionRule::Random { seed: 5 }).unwrap();
        let b = insertion_tour(&m, InsertionRule::Random { seed: 5 }).unwrap();
        assert_eq!(a.order, b.order);
    }

    #[test]
    fn names_round_trip() {
        for name in InsertionRule::NAMES {
            assert_eq!(
                InsertionRule::parse_with_seed(name, 1).unwrap().name(),
                name
            );
        }
        assert!("bogus".parse::<InsertionRule>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cached_cheapest_matches_naive(n in 3usize..40, seed in any::<u64>()) {
            let m = RandomMetric::generate(n, Distribution::Exponential1, seed).unwrap();
            prop_assert_eq!(cheapest_insertion(&m), cheapest_insertion_naive(&m));
        }

        #[test]
        fn cached_cheapest_matches_naive_with_ties(n in 3usize..16, cells in proptest::collection::vec(1u8..4, 256)) {
            // few distinct integer distances force many exact ties
            let m = RandomMetric::from_fn(n, |u, v| cells[u * 16 + v] as f64).unwrap();
            prop_assert_eq!(cheapest_insertion(&m), cheapest_insertion_naive(&m));
        }
    }
}
