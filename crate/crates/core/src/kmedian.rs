//! Metric-oblivious k-median and the law of its cost.
//!
//! For any fixed center set `U` of size `k`, `cost(U) ~ Σ_{i=k}^{n-1} Exp(i)`,
//! so `E[cost(U)] = H_{n-1} - H_{k-1}`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::harmonic;
use crate::error::{invalid, Error, Result};
use crate::metric::{RandomMetric, WeightedGraph};
use crate::oracles::{exact_kmedian, kmedian_cost, Witness};
use crate::rng::exp_sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KMedianVariant {
    /// Centers `0..k`.
    TrivialFixed,
    /// `k` distinct centers drawn from the caller's stream.
    TrivialRandom,
    Exact,
}

impl fmt::Display for KMedianVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KMedianVariant::TrivialFixed => "fixed",
            KMedianVariant::TrivialRandom => "random",
            KMedianVariant::Exact => "exact",
        })
    }
}

impl FromStr for KMedianVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" | "trivial-fixed" => Ok(KMedianVariant::TrivialFixed),
            "random" | "trivial-random" => Ok(KMedianVariant::TrivialRandom),
            "exact" => Ok(KMedianVariant::Exact),
            other => Err(invalid(format!("unknown k-median variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMedianResult {
    /// Sorted center set.
    pub chosen: Vec<usize>,
    pub cost: f64,
    pub method: KMedianVariant,
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= k <= n, got n={n}, k={k}")));
    }
    Ok(())
}

/// The center set of a metric-oblivious variant; `None` for
/// [`KMedianVariant::Exact`], which has to look at the distances.
pub fn oblivious_centers<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    variant: KMedianVariant,
    stream: &mut R,
) -> Result<Option<Vec<usize>>> {
    check_k(n, k)?;
    Ok(match variant {
        KMedianVariant::TrivialFixed => Some((0..k).collect()),
        KMedianVariant::TrivialRandom => {
            let mut c = rand::seq::index::sample(stream, n, k).into_vec();
            c.sort_unstable();
            Some(c)
        }
        KMedianVariant::Exact => None,
    })
}

/// Picks `k` centers without looking at the distances (or solves exactly for
/// [`KMedianVariant::Exact`]).
pub fn trivial_kmedian<R: Rng + ?Sized>(
    m: &RandomMetric,
    k: usize,
    variant: KMedianVariant,
    stream: &mut R,
) -> Result<KMedianResult> {
    match oblivious_centers(m.n(), k, variant, stream)? {
        Some(chosen) => {
            let cost = kmedian_cost(m, &chosen);
            Ok(KMedianResult {
                chosen,
                cost,
                method: variant,
            })
        }
        None => {
            let r = exact_kmedian(m, k)?;
            let Witness::Subset(s) = r.witness else {
                unreachable!("k-median oracle returns a subset")
            };
            Ok(KMedianResult {
                chosen: s,
                cost: r.value,
                method: variant,
            })
        }
    }
}

/// `cost(U)` straight from the weights with one multi-source Dijkstra, without
/// building the full metric.
pub fn set_cost_on_graph(g: &WeightedGraph, centers: &[usize]) -> Result<f64> {
    if centers.is_empty() || centers.iter().any(|&c| c >= g.n()) {
        return Err(invalid("center set must be nonempty and in range"));
    }
    Ok(g.distances_from_set(centers).iter().sum())
}

/// `E[TRIVIAL] = H_{n-1} - H_{k-1}`.
pub fn expected_trivial(n: usize, k: usize) -> Result<f64> {
    check_k(n, k)?;
    Ok(harmonic(n - 1) - harmonic(k - 1))
}

/// One draw of `Σ_{i=k}^{n-1} Exp(i)`; zero when `k = n`.
pub fn sample_cost_direct<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<f64> {
    check_k(n, k)?;
    Ok((k..n).map(|i| exp_sample(rng, i as f64)).sum())
}
