//! Seeded trial execution and aggregation.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{CdfSampler, ExperimentConfig, ExperimentKind, Plan, PlanSpec};
use crate::analytics::{
    ball_tail_lower, ball_tail_upper, expected_edge_distance, expected_tau, janson_diameter_bound,
    sample_tau_direct,
};
use crate::clustering::{build_clusters, cluster_count_envelope};
use crate::error::{Error, Result};
use crate::heuristics::{
    find_improving_exchange, greedy_matching, insertion_tour, nearest_neighbor_tour, two_opt,
    InsertionRule, TourResult, CERTIFICATE_EPS,
};
use crate::kmedian::{expected_trivial, oblivious_centers, set_cost_on_graph, KMedianVariant};
use crate::metric::{
    all_pairs_shortest_paths, BallProfile, Distribution, RandomMetric, WeightedGraph,
};
use crate::oracles::{
    exact_kmedian, exact_min_matching, exhaustive_kmedian, exhaustive_matching, exhaustive_tsp,
    full_relaxation_apsp, held_karp_tsp, kmedian_cost, sorted_weight_prefix, OracleResult,
};
use crate::rng::{purpose_seed, purpose_stream, random_permutation, substream_id};
use crate::stats::RunningStats;

/// Parameter tuple of one group of trials: `n`, plus `k` for experiments
/// that sweep it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamTuple {
    pub n: usize,
    pub k: Option<usize>,
}

impl fmt::Display for ParamTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.k {
            None => write!(f, "n={}", self.n),
            Some(k) => write!(f, "n={};k={}", self.n, k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub experiment: ExperimentKind,
    pub param_tuple: String,
    pub trial: u64,
    pub substream: u64,
    pub stats: BTreeMap<String, f64>,
    /// Oracle capability errors hit by this trial; the affected statistics
    /// are absent and `oracle_skipped` is 1.
    pub skipped: Vec<String>,
    /// Seconds; excluded from reproducibility guarantees.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub param_tuple: String,
    pub statistic: String,
    pub count: u64,
    pub mean: f64,
    pub standard_error: f64,
    pub min: f64,
    pub max: f64,
    /// Closed-form expectation or envelope for this statistic, when one exists.
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub records: Vec<ExperimentRecord>,
    pub summary: Vec<SummaryRow>,
}

impl RunOutput {
    /// Values of one statistic for one tuple, in trial order.
    pub fn values(&self, tuple: &str, statistic: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.param_tuple == tuple)
            .filter_map(|r| r.stats.get(statistic).copied())
            .collect()
    }

    pub fn summary_row(&self, tuple: &str, statistic: &str) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.param_tuple == tuple && s.statistic == statistic)
    }
}

pub(crate) fn delta_label(delta: f64) -> String {
    format!("{delta}")
}

pub fn tau_stat(k: usize) -> String {
    format!("tau[k={k}]")
}

pub fn delta_stat(name: &str, delta: f64) -> String {
    format!("{name}[delta={}]", delta_label(delta))
}

pub fn rule_stat(name: &str, rule: &str) -> String {
    format!("{name}[rule={rule}]")
}

/// The sorted, de-duplicated parameter tuples of a plan.
pub fn param_tuples(cfg: &ExperimentConfig, plan: &Plan) -> Vec<ParamTuple> {
    let mut out = Vec::new();
    for &n in &cfg.n {
        match &plan.settings {
            PlanSpec::CdfSandwich { ks, .. } | PlanSpec::Kmedian { ks, .. } => {
                out.extend(ks.iter().map(|&k| ParamTuple { n, k: Some(k) }))
            }
            _ => out.push(ParamTuple { n, k: None }),
        }
    }
    out.sort();
    out.dedup();
    out
}

fn default_tau_ks(n: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = [2, 10, n / 2, n]
        .into_iter()
        .filter(|&k| k >= 1 && k <= n)
        .collect();
    ks.sort_unstable();
    ks.dedup();
    ks
}

fn default_cluster_deltas(n: usize) -> Vec<f64> {
    (0..=20).map(|i| i as f64 / n as f64).collect()
}

struct TrialOutput {
    stats: BTreeMap<String, f64>,
    skipped: Vec<String>,
}

impl TrialOutput {
    fn new() -> Self {
        TrialOutput {
            stats: BTreeMap::new(),
            skipped: Vec::new(),
        }
    }

    fn set(&mut self, key: impl Into<String>, value: f64) {
        self.stats.insert(key.into(), value);
    }

    /// Runs an oracle; capability errors become a skip entry.
    fn oracle(&mut self, r: Result<OracleResult>) -> Result<Option<f64>> {
        match r {
            Ok(o) => Ok(Some(o.value)),
            Err(Error::Capability(msg)) => {
                self.skipped.push(msg);
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }

    fn finish(mut self) -> Self {
        let flag = if self.skipped.is_empty() { 0.0 } else { 1.0 };
        self.set("oracle_skipped", flag);
        self
    }
}

fn bool_stat(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        1.0
    }
}

fn weights(n: usize, dist: Distribution, sub: u64) -> Result<WeightedGraph> {
    WeightedGraph::generate(n, dist, purpose_seed(sub, "weights"))
}

fn metric(n: usize, dist: Distribution, sub: u64) -> Result<RandomMetric> {
    Ok(all_pairs_shortest_paths(&weights(n, dist, sub)?))
}

fn run_trial(plan: &Plan, tuple: ParamTuple, sub: u64) -> Result<TrialOutput> {
    let n = tuple.n;
    let dist = plan.distribution;
    let mut out = TrialOutput::new();
    match &plan.settings {
        PlanSpec::TauStats { ks } => {
            let g = weights(n, dist, sub)?;
            let row = g.distances_from(0)?;
            out.set("mean_distance", row.iter().sum::<f64>() / (n - 1) as f64);
            let profile = BallProfile::from_row(0, row);
            let ks = ks.clone().unwrap_or_else(|| default_tau_ks(n));
            for k in ks {
                out.set(tau_stat(k), profile.tau(k)?);
            }
        }
        PlanSpec::CdfSandwich { sampler, .. } => {
            let k = tuple.k.expect("cdf-sandwich tuples carry k");
            let tau = match sampler {
                CdfSampler::Metric => {
                    let g = weights(n, dist, sub)?;
                    BallProfile::from_row(0, g.distances_from(0)?).tau(k)?
                }
                CdfSampler::Direct => sample_tau_direct(n, k, &mut purpose_stream(sub, "direct"))?,
            };
            out.set("tau", tau);
        }
        PlanSpec::BallTails { deltas, c } => {
            let g = weights(n, dist, sub)?;
            let profile = BallProfile::from_row(0, g.distances_from(0)?);
            for &delta in deltas {
                let size = profile.ball_size(delta) as f64;
                let (threshold, _) = ball_tail_lower(n, delta)?;
                let upper_threshold = (c * delta * n as f64).exp();
                out.set(delta_stat("ball_size", delta), size);
                out.set(
                    delta_stat("lower_violation", delta),
                    bool_stat(size < threshold),
                );
                out.set(
                    delta_stat("upper_violation", delta),
                    bool_stat(size >= upper_threshold),
                );
            }
        }
        PlanSpec::ClusterCurve { deltas } => {
            let m = metric(n, dist, sub)?;
            let deltas = deltas.clone().unwrap_or_else(|| default_cluster_deltas(n));
            let mut violations = 0usize;
            for delta in deltas {
                let c = build_clusters(&m, delta);
                if c.verify(&m).is_err() {
                    violations += 1;
                }
                out.set(delta_stat("clusters", delta), c.num_clusters() as f64);
            }
            out.set("invariant_violations", violations as f64);
        }
        PlanSpec::Matching { oracle } => {
            let g = weights(n, dist, sub)?;
            let m = all_pairs_shortest_paths(&g);
            let greedy = greedy_matching(&m)?;
            out.set("greedy", greedy.total_length);
            out.set("s_half", sorted_weight_prefix(&g, n / 2)?);
            if *oracle {
                if let Some(mm) = out.oracle(exact_min_matching(&m))? {
                    out.set("optimal", mm);
                    out.set("ratio", ratio(greedy.total_length, mm));
                }
            }
        }
        PlanSpec::Nn { start, oracle } => {
            let m = metric(n, dist, sub)?;
            let tour = nearest_neighbor_tour(&m, *start)?;
            out.set("nn", tour.total_length);
            if *oracle {
                if let Some(opt) = out.oracle(held_karp_tsp(&m))? {
                    out.set("optimal", opt);
                    out.set("ratio", ratio(tour.total_length, opt));
                }
            }
        }
        PlanSpec::Insertion { rules, oracle } => {
            let m = metric(n, dist, sub)?;
            let opt = if *oracle {
                out.oracle(held_karp_tsp(&m))?
            } else {
                None
            };
            if let Some(opt) = opt {
                out.set("optimal", opt);
            }
            for name in rules {
                let rule =
                    InsertionRule::parse_with_seed(name, purpose_seed(sub, "insertion-random"))?;
                let tour = insertion_tour(&m, rule)?;
                out.set(rule_stat("length", name), tour.total_length);
                if let Some(opt) = opt {
                    out.set(rule_stat("ratio", name), ratio(tour.total_length, opt));
                }
            }
        }
        PlanSpec::TwoOpt { pivot, max_iters } => {
            let g = weights(n, dist, sub)?;
            let m = all_pairs_shortest_paths(&g);
            let start = random_permutation(&mut purpose_stream(sub, "initial-tour"), n);
            let initial = TourResult::from_order(&m, start)?;
            let result = two_opt(&m, &initial, *pivot, *max_iters)?;
            out.set("initial_length", initial.total_length);
            out.set("length", result.total_length);
            out.set("iterations", result.meta.iterations as f64);
            if let Some(d) = result.meta.min_improvement {
                out.set("delta_min", d);
            }
            out.set(
                "locally_optimal",
                bool_stat(result.meta.locally_optimal.unwrap_or(false)),
            );
            let certified = find_improving_exchange(&m, &result.order, CERTIFICATE_EPS).is_none();
            out.set("certified", bool_stat(certified));
            let s_half = sorted_weight_prefix(&g, (n / 2).max(1))?;
            out.set("s_half", s_half);
            out.set("above_s_half", bool_stat(result.total_length >= s_half));
        }
        PlanSpec::Kmedian {
            variant, oracle, ..
        } => {
            let k = tuple.k.expect("kmedian tuples carry k");
            let g = weights(n, dist, sub)?;
            let centers = oblivious_centers(n, k, *variant, &mut purpose_stream(sub, "centers"))?;
            match (centers, *oracle) {
                // cost straight from the weights; no metric needed
                (Some(c), false) => out.set("cost", set_cost_on_graph(&g, &c)?),
                (centers, _) => {
                    let m = all_pairs_shortest_paths(&g);
                    let opt = out.oracle(exact_kmedian(&m, k))?;
                    let cost = match centers {
                        Some(c) => Some(kmedian_cost(&m, &c)),
                        None => opt,
                    };
                    if let Some(cost) = cost {
                        out.set("cost", cost);
                    }
                    if let (Some(cost), Some(opt), true) = (cost, opt, *oracle) {
                        out.set("optimal", opt);
                        out.set("ratio", ratio(cost, opt));
                    }
                }
            }
        }
        PlanSpec::Diameter { c, .. } => {
            let m = metric(n, dist, sub)?;
            let diameter = m.diameter();
            let scale = (n as f64).ln() / n as f64;
            out.set("diameter", diameter);
            out.set("scaled_diameter", diameter / scale);
            out.set("exceeds", bool_stat(diameter > c * scale));
        }
        PlanSpec::OracleCrosscheck { k } => {
            let g = weights(n, dist, sub)?;
            let m = all_pairs_shortest_paths(&g);
            let fr = full_relaxation_apsp(&g)?;
            let dev = m
                .matrix()
                .iter()
                .zip(fr.matrix())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            out.set("apsp_deviation", dev);
            if n >= 3 {
                if let (Some(a), Some(b)) = (
                    out.oracle(held_karp_tsp(&m))?,
                    out.oracle(exhaustive_tsp(&m))?,
                ) {
                    out.set("tsp_deviation", (a - b).abs());
                }
            }
            if n.is_multiple_of(2) {
                if let (Some(a), Some(b)) = (
                    out.oracle(exact_min_matching(&m))?,
                    out.oracle(exhaustive_matching(&m))?,
                ) {
                    out.set("matching_deviation", (a - b).abs());
                }
            }
            if let (Some(a), Some(b)) = (
                out.oracle(exact_kmedian(&m, *k))?,
                out.oracle(exhaustive_kmedian(&m, *k))?,
            ) {
                out.set("kmedian_deviation", (a - b).abs());
            }
        }
    }
    Ok(out.finish())
}

fn reference(plan: &Plan, tuple: ParamTuple, statistic: &str) -> Option<f64> {
    if plan.distribution != Distribution::Exponential1 {
        return None;
    }
    let n = tuple.n;
    let bracket =
        |prefix: &str| -> Option<&str> { statistic.strip_prefix(prefix)?.strip_suffix(']') };
    match &plan.settings {
        PlanSpec::TauStats { .. } => {
            if statistic == "mean_distance" {
                return expected_edge_distance(n).ok();
            }
            let k: usize = bracket("tau[k=")?.parse().ok()?;
            expected_tau(n, k).ok()
        }
        PlanSpec::CdfSandwich { .. } if statistic == "tau" => expected_tau(n, tuple.k?).ok(),
        PlanSpec::BallTails { c, .. } => {
            if let Some(d) = bracket("lower_violation[delta=") {
                return ball_tail_lower(n, d.parse().ok()?).ok().map(|b| b.1);
            }
            let d: f64 = bracket("upper_violation[delta=")?.parse().ok()?;
            ball_tail_upper(n, d, *c).ok().map(|b| b.value)
        }
        PlanSpec::ClusterCurve { .. } => {
            let d: f64 = bracket("clusters[delta=")?.parse().ok()?;
            Some(cluster_count_envelope(n, d))
        }
        PlanSpec::Kmedian { variant, .. }
            if statistic == "cost" && *variant != KMedianVariant::Exact =>
        {
            expected_trivial(n, tuple.k?).ok()
        }
        PlanSpec::Diameter { c, .. } if statistic == "exceeds" => {
            janson_diameter_bound(n, *c).ok().map(|b| b.value)
        }
        _ => None,
    }
}

/// Runs every (parameter tuple, trial) of `cfg` and aggregates.
///
/// Trials run on a rayon pool sized by `cfg.workers`; records come back in
/// (tuple, trial) order and every statistic value depends only on the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let plan = cfg.plan()?;
    let tuples = param_tuples(cfg, &plan);
    let jobs: Vec<(ParamTuple, String, u64)> = tuples
        .iter()
        .flat_map(|t| {
            let label = t.to_string();
            (0..cfg.trials as u64).map(move |trial| (*t, label.clone(), trial))
        })
        .collect();
    let name = plan.kind.name();
    let run_one = |(tuple, label, trial): &(ParamTuple, String, u64)| -> Result<ExperimentRecord> {
        let started = Instant::now();
        let sub = substream_id(cfg.seed, name, label, *trial);
        let out = run_trial(&plan, *tuple, sub)?;
        Ok(ExperimentRecord {
            experiment: plan.kind,
            param_tuple: label.clone(),
            trial: *trial,
            substream: sub,
            stats: out.stats,
            skipped: out.skipped,
            wall_time: started.elapsed().as_secs_f64(),
        })
    };
    let records: Vec<ExperimentRecord> = match cfg.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            pool.install(|| jobs.par_iter().map(run_one).collect::<Result<_>>())?
        }
        None => jobs.par_iter().map(run_one).collect::<Result<_>>()?,
    };
    let summary = summarize(&plan, &tuples, &records);
    Ok(RunOutput {
        config: cfg.clone(),
        records,
        summary,
    })
}

fn summarize(plan: &Plan, tuples: &[ParamTuple], records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for tuple in tuples {
        let label = tuple.to_string();
        let mut acc: BTreeMap<&str, RunningStats> = BTreeMap::new();
        for r in records.iter().filter(|r| r.param_tuple == label) {
            for (k, &v) in &r.stats {
                acc.entry(k.as_str()).or_default().push(v);
            }
        }
        for (statistic, s) in acc {
            rows.push(SummaryRow {
                param_tuple: label.clone(),
                statistic: statistic.to_string(),
                count: s.count,
                mean: s.mean,
                standard_error: s.standard_error(),
                min: s.min,
                max: s.max,
                reference: reference(plan, *tuple, statistic),
            });
        }
    }
    rows
}
