use super::{tour_length, TourAlgorithm, TourMeta, TourResult};
use crate::error::{invalid, Result};
use crate::metric::RandomMetric;

/// Walks to the nearest unvisited vertex (lowest index on ties) and closes the
/// cycle back at `start`.
pub fn nearest_neighbor_tour(m: &RandomMetric, start: usize) -> Result<TourResult> {
    let n = m.n();
    if start >= n {
        return Err(invalid(format!(
            "start vertex {start} out of range for n={n}"
        )));
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut current = start;
    visited[start] = true;
    order.push(start);
    for _ in 1..n {
        let row = m.row(current);
        let mut next = usize::MAX;
        let mut best = f64::INFINITY;
        for (v, &d) in row.iter().enumerate() {
            if !visited[v] && (d < best || next == usize::MAX) {
                best = d;
                next = v;
            }
        }
        visited[next] = true;
        order.push(next);
        current = next;
    }
    let total_length = tour_length(m, &order);
    let mut meta = TourMeta::new(TourAlgorithm::NearestNeighbor);
    meta.iterations = (n - 1) as u64;
    Ok(TourResult {
        order,
        total_length,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::is_permutation;
    use crate::metric::Distribution;

    #[test]
    fn triangle_is_the_only_cycle() {
        let m = RandomMetric::from_fn(3, |u, v| [0.5, 0.7, 1.1][u + v - 1]).unwrap();
        for s in 0..3 {
            let t = nearest_neighbor_tour(&m, s).unwrap();
            assert!((t.total_length - (0.5 + 0.7 + 1.1)).abs() < 1e-15);
        }
    }

    #[test]
    fn two_vertices_traverse_edge_twice() {
        let m = RandomMetric::from_fn(2, |_, _| 0.4).unwrap();
        assert_eq!(nearest_neighbor_tour(&m, 1).unwrap().total_length, 0.8);
    }

    #[test]
    fn bad_start_rejected() {
        let m = RandomMetric::from_fn(2, |_, _| 0.4).unwrap();
        assert!(nearest_neighbor_tour(&m, 2).is_err());
    }

    #[test]
    fn ties_pick_lowest_index() {
        let m = RandomMetric::from_fn(5, |_, _| 1.0).unwrap();
        assert_eq!(
            nearest_neighbor_tour(&m, 3).unwrap().order,
            vec![3, 0, 1, 2, 4]
        );
    }

    #[test]
    fn each_step_takes_a_nearest_vertex() {
        let m = RandomMetric::generate(50, Distribution::Exponential1, 4).unwrap();
        let t = nearest_neighbor_tour(&m, 7).unwrap();
        assert!(is_permutation(&t.order, 50));
        assert_eq!(t.order[0], 7);
        for i in 0..49 {
            let here = t.order[i];
            let step = m.d(here, t.order[i + 1]);
            for &later in &t.order[i + 1..] {
                assert!(step <= m.d(here, later));
            }
        }
    }
}
