//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test --test acceptance` (add `-- 3 7` to run a subset).

use std::process::ExitCode;
use std::time::Instant;

use randmetric::analytics::{
    cdf_sum_exp_ci, check_envelope, compare_two_samples, expected_edge_distance, expected_tau,
    sample_sum_exp_ci, EmpiricalCdf, DKW_CONFIDENCE,
};
use randmetric::clustering::cluster_count_envelope;
use randmetric::experiment::{
    delta_stat, rule_stat, run_experiment, tau_stat, verify_bounds, ExperimentConfig,
    ExperimentKind, RunOutput,
};
use randmetric::heuristics::{
    greedy_matching, insertion_tour, nearest_neighbor_tour, InsertionRule,
};
use randmetric::kmedian::{expected_trivial, sample_cost_direct};
use randmetric::metric::all_pairs_shortest_paths;
use randmetric::oracles::{exact_kmedian, exhaustive_kmedian};
use randmetric::rng::{purpose_seed, stream_from_seed, substream_id};
use randmetric::stats::RunningStats;
use randmetric::{Distribution, RandomMetric, WeightedGraph};

const SEED: u64 = 20240601;

type Outcome = Result<String, String>;

fn cfg(kind: ExperimentKind, n: &[usize], trials: usize) -> ExperimentConfig {
    ExperimentConfig::new(kind, n.to_vec(), trials, SEED)
}

fn run(c: &ExperimentConfig) -> Result<RunOutput, String> {
    run_experiment(c).map_err(|e| e.to_string())
}

fn summary_mean(out: &RunOutput, tuple: &str, stat: &str) -> Result<(f64, f64, f64), String> {
    let row = out
        .summary_row(tuple, stat)
        .ok_or_else(|| format!("missing {tuple} {stat}"))?;
    Ok((
        row.mean,
        row.standard_error,
        row.reference.unwrap_or(f64::NAN),
    ))
}

/// `|mean - expected| <= 4 SE`, with a message either way.
fn within_4se(label: &str, mean: f64, se: f64, expected: f64) -> (bool, String) {
    let z = (mean - expected).abs() / se;
    (
        z <= 4.0,
        format!("{label}: mean {mean:.5} vs {expected:.5} ({z:.2} SE)"),
    )
}

fn collect(checks: Vec<(bool, String)>) -> Outcome {
    let msg = checks
        .iter()
        .map(|c| c.1.as_str())
        .collect::<Vec<_>>()
        .join("; ");
    if checks.iter().all(|c| c.0) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_1() -> Outcome {
    let c = cfg(ExperimentKind::TauStats, &[100], 5000).with_param("k", "2,10,50,100");
    let out = run(&c)?;
    let mut checks = Vec::new();
    for k in [2, 10, 50, 100] {
        let (mean, se, _) = summary_mean(&out, "n=100", &tau_stat(k))?;
        checks.push(within_4se(
            &format!("k={k}"),
            mean,
            se,
            expected_tau(100, k).unwrap(),
        ));
    }
    collect(checks)
}

fn criterion_2() -> Outcome {
    let mut checks = Vec::new();
    for (n, k) in [(20, 5), (50, 25), (100, 100)] {
        let metric = run(&cfg(ExperimentKind::CdfSandwich, &[n], 10_000).with_param("k", k))?;
        let direct = run(&cfg(ExperimentKind::CdfSandwich, &[n], 10_000)
            .with_param("k", k)
            .with_param("sampler", "direct"))?;
        let tuple = format!("n={n};k={k}");
        let a = EmpiricalCdf::new(metric.values(&tuple, "tau")).map_err(|e| e.to_string())?;
        let b = EmpiricalCdf::new(direct.values(&tuple, "tau")).map_err(|e| e.to_string())?;
        let check = compare_two_samples(&a, &b, DKW_CONFIDENCE).map_err(|e| e.to_string())?;
        checks.push((
            check.pass,
            format!(
                "({n},{k}) max gap {:.4} <= band {:.4}",
                check.worst_excess, check.band
            ),
        ));
    }
    collect(checks)
}

fn criterion_3() -> Outcome {
    let mut rng = stream_from_seed(SEED);
    let samples: Vec<f64> = (0..100_000)
        .map(|_| sample_sum_exp_ci(5, 2.0, &mut rng))
        .collect();
    let ecdf = EmpiricalCdf::new(samples).map_err(|e| e.to_string())?;
    let check = check_envelope(&ecdf, DKW_CONFIDENCE, |x| {
        let f = cdf_sum_exp_ci(5, 2.0, x)?;
        Ok((f, f))
    })
    .map_err(|e| e.to_string())?;
    let msg = format!(
        "max gap {:.5} <= band {:.5}",
        check.worst_excess, check.band
    );
    if check.pass {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_4() -> Outcome {
    let mut checks = Vec::new();
    for (n, k) in [(50, 10), (100, 50)] {
        let (_, report) =
            verify_bounds(&cfg(ExperimentKind::CdfSandwich, &[n], 10_000).with_param("k", k))
                .map_err(|e| e.to_string())?;
        let worst = report
            .points
            .iter()
            .map(|p| (p.lower - p.empirical).max(p.empirical - p.upper))
            .fold(f64::NEG_INFINITY, f64::max);
        let band = report.points[0].band;
        checks.push((
            report.pass,
            format!("({n},{k}) worst excursion {worst:.4} vs band {band:.4}"),
        ));
    }
    collect(checks)
}

fn criterion_5() -> Outcome {
    let mut checks = Vec::new();
    for (n, deltas) in [(100, "0.1,0.2"), (200, "0.1")] {
        let (_, report) = verify_bounds(
            &cfg(ExperimentKind::BallTails, &[n], 10_000).with_param("delta", deltas),
        )
        .map_err(|e| e.to_string())?;
        for p in &report.points {
            checks.push((
                p.pass,
                format!(
                    "n={n} Δ={} {} {:.4} <= {:.2e}+{:.4}",
                    p.x, p.quantity, p.empirical, p.upper, p.band
                ),
            ));
        }
    }
    collect(checks)
}

/// 250 instances at each of four sizes, Δ = i/n for i in 0..=20.
fn cluster_sweep() -> Result<RunOutput, String> {
    run(&cfg(ExperimentKind::ClusterCurve, &[20, 50, 100, 200], 250))
}

fn criterion_6(sweep: &RunOutput) -> Outcome {
    let cases = sweep.records.len() * 21;
    let violations: f64 = sweep
        .records
        .iter()
        .map(|r| r.stats["invariant_violations"])
        .sum();
    let msg = format!(
        "{} instances, {cases} clusterings, {violations} violations",
        sweep.records.len()
    );
    if violations == 0.0 && sweep.records.len() == 1000 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_7(sweep: &RunOutput) -> Outcome {
    let mut worst: (f64, String) = (0.0, String::new());
    for n in [20usize, 50, 100, 200] {
        for i in 0..=20 {
            let delta = i as f64 / n as f64;
            let (mean, _, _) =
                summary_mean(sweep, &format!("n={n}"), &delta_stat("clusters", delta))?;
            let ratio = mean / cluster_count_envelope(n, delta);
            if ratio > worst.0 {
                worst = (ratio, format!("n={n} i={i}"));
            }
        }
    }
    let msg = format!("max mean/envelope {:.3} at {} (limit 5)", worst.0, worst.1);
    if worst.0 <= 5.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_8() -> Outcome {
    let apsp = run(&cfg(ExperimentKind::OracleCrosscheck, &[64], 100))?;
    let small = run(&cfg(ExperimentKind::OracleCrosscheck, &[8], 50))?;
    let max_of = |out: &RunOutput, tuple: &str, stat: &str| -> Result<(f64, usize), String> {
        let v = out.values(tuple, stat);
        Ok((v.iter().copied().fold(0.0, f64::max), v.len()))
    };
    let (apsp_dev, apsp_n) = max_of(&apsp, "n=64", "apsp_deviation")?;
    let (tsp_dev, tsp_n) = max_of(&small, "n=8", "tsp_deviation")?;
    let (mm_dev, mm_n) = max_of(&small, "n=8", "matching_deviation")?;

    // k-median at n=10, k=2 against the exhaustive enumeration
    let mut km_dev: f64 = 0.0;
    for trial in 0..50u64 {
        let sub = substream_id(SEED, "acceptance-kmedian", "n=10;k=2", trial);
        let m =
            RandomMetric::generate(10, Distribution::Exponential1, purpose_seed(sub, "weights"))
                .map_err(|e| e.to_string())?;
        let a = exact_kmedian(&m, 2).map_err(|e| e.to_string())?.value;
        let b = exhaustive_kmedian(&m, 2).map_err(|e| e.to_string())?.value;
        km_dev = km_dev.max((a - b).abs());
    }
    collect(vec![
        (
            apsp_n == 100 && apsp_dev <= 1e-9,
            format!("APSP {apsp_dev:.1e} over {apsp_n}"),
        ),
        (
            tsp_n == 50 && tsp_dev <= 1e-9,
            format!("Held-Karp {tsp_dev:.1e} over {tsp_n}"),
        ),
        (
            mm_n == 50 && mm_dev <= 1e-9,
            format!("matching {mm_dev:.1e} over {mm_n}"),
        ),
        (km_dev <= 1e-9, format!("k-median {km_dev:.1e} over 50")),
    ])
}

fn criterion_9() -> Outcome {
    let names: Vec<String> = ["greedy", "nn"]
        .into_iter()
        .map(String::from)
        .chain(
            InsertionRule::NAMES
                .iter()
                .map(|r| format!("insertion-{r}")),
        )
        .collect();
    let sizes = [64usize, 128, 256, 512];
    let mut means = vec![vec![0.0; names.len()]; sizes.len()];
    for (si, &n) in sizes.iter().enumerate() {
        let mut stats = vec![RunningStats::new(); names.len()];
        let tuple = format!("n={n}");
        for trial in 0..500u64 {
            let sub = substream_id(SEED, "acceptance-constancy", &tuple, trial);
            let g = WeightedGraph::generate(
                n,
                Distribution::Exponential1,
                purpose_seed(sub, "weights"),
            )
            .map_err(|e| e.to_string())?;
            let m = all_pairs_shortest_paths(&g);
            stats[0].push(greedy_matching(&m).map_err(|e| e.to_string())?.total_length);
            stats[1].push(
                nearest_neighbor_tour(&m, 0)
                    .map_err(|e| e.to_string())?
                    .total_length,
            );
            for (j, r) in InsertionRule::NAMES.iter().enumerate() {
                let rule = InsertionRule::parse_with_seed(r, purpose_seed(sub, "insertion-random"))
                    .map_err(|e| e.to_string())?;
                stats[2 + j].push(
                    insertion_tour(&m, rule)
                        .map_err(|e| e.to_string())?
                        .total_length,
                );
            }
        }
        for (j, s) in stats.iter().enumerate() {
            means[si][j] = s.mean;
        }
    }
    let mut checks = Vec::new();
    for (j, name) in names.iter().enumerate() {
        let in_range = means.iter().all(|row| (0.1..=6.0).contains(&row[j]));
        let growth = means[3][j] / means[0][j];
        checks.push((
            in_range && growth <= 1.25,
            format!(
                "{name} {:.3}->{:.3} (x{growth:.3})",
                means[0][j], means[3][j]
            ),
        ));
    }
    collect(checks)
}

/// Ratios are heuristic/optimum of float sums; distinct tours of equal real
/// length (exact ties are common in shortest-path metrics) can round a few
/// ulps apart, so "ratio >= 1" is checked up to this relative slack.
const RATIO_ROUNDOFF: f64 = 1e-12;

fn ratio_check(
    out: &RunOutput,
    tuple: &str,
    stat: &str,
    label: &str,
) -> Result<(bool, String), String> {
    let v = out.values(tuple, stat);
    if v.len() != 200 {
        return Err(format!("{label}: {} ratios, expected 200", v.len()));
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((
        mean <= 2.5 && min >= 1.0 - RATIO_ROUNDOFF,
        format!("{label} mean {mean:.3} min {min:.17}"),
    ))
}

fn criterion_10() -> Outcome {
    let matching = run(&cfg(ExperimentKind::Matching, &[16], 200))?;
    let nn = run(&cfg(ExperimentKind::Nn, &[12], 200))?;
    let mut checks = vec![
        ratio_check(&matching, "n=16", "ratio", "GREEDY/MM")?,
        ratio_check(&nn, "n=12", "ratio", "NN/TSP")?,
    ];
    let all_rules = run(&cfg(ExperimentKind::Insertion, &[12], 200))?;
    for r in InsertionRule::NAMES {
        checks.push(ratio_check(
            &all_rules,
            "n=12",
            &rule_stat("ratio", r),
            &format!("{r}/TSP"),
        )?);
    }
    collect(checks)
}

fn criterion_11() -> Outcome {
    let out = run(&cfg(ExperimentKind::TwoOpt, &[100], 50))?;
    let all = |stat: &str| out.values("n=100", stat).iter().all(|&x| x == 1.0);
    let mut iters = out.values("n=100", "iterations");
    iters.sort_by(f64::total_cmp);
    let median = (iters[24] + iters[25]) / 2.0;
    let max = iters[49];
    collect(vec![
        (
            iters.len() == 50 && max < 1e7 && all("locally_optimal"),
            format!("T max {max} < cap 1e7"),
        ),
        (all("certified"), "certificate holds".into()),
        (all("above_s_half"), "length >= S_{n/2}".into()),
        (median <= 1e5, format!("median T {median}")),
    ])
}

fn criterion_12() -> Outcome {
    let mut checks = Vec::new();
    for (n, k) in [(50usize, 1usize), (100, 3), (200, 20)] {
        let out = run(&cfg(ExperimentKind::Kmedian, &[n], 2000)
            .with_param("k", k)
            .with_param("oracle", false))?;
        let (mean, se, _) = summary_mean(&out, &format!("n={n};k={k}"), "cost")?;
        checks.push(within_4se(
            &format!("({n},{k})"),
            mean,
            se,
            expected_trivial(n, k).unwrap(),
        ));
    }

    let out = run(&cfg(ExperimentKind::Kmedian, &[50], 10_000)
        .with_param("k", 5)
        .with_param("oracle", false))?;
    let pipeline = EmpiricalCdf::new(out.values("n=50;k=5", "cost")).map_err(|e| e.to_string())?;
    let mut rng = stream_from_seed(SEED ^ 0x5eed);
    let direct: Vec<f64> = (0..10_000)
        .map(|_| sample_cost_direct(50, 5, &mut rng).unwrap())
        .collect();
    let direct = EmpiricalCdf::new(direct).map_err(|e| e.to_string())?;
    let check =
        compare_two_samples(&pipeline, &direct, DKW_CONFIDENCE).map_err(|e| e.to_string())?;
    checks.push((
        check.pass,
        format!(
            "DKW (50,5) gap {:.4} <= {:.4}",
            check.worst_excess, check.band
        ),
    ));

    let out = run(&cfg(ExperimentKind::Kmedian, &[12], 300).with_param("k", 2))?;
    let (mean, _, _) = summary_mean(&out, "n=12;k=2", "ratio")?;
    checks.push((mean <= 1.6, format!("TRIVIAL/KMEDIAN mean {mean:.3}")));
    collect(checks)
}

fn criterion_13() -> Outcome {
    let out = run(&cfg(ExperimentKind::TauStats, &[100], 5000).with_param("k", "100"))?;
    let (mean_d, se_d, _) = summary_mean(&out, "n=100", "mean_distance")?;
    let (mean_t, se_t, _) = summary_mean(&out, "n=100", &tau_stat(100))?;
    let h = (1..100).map(|i| 1.0 / i as f64).sum::<f64>();
    let diam = run(&cfg(ExperimentKind::Diameter, &[1000], 100))?;
    let (scaled, _, _) = summary_mean(&diam, "n=1000", "scaled_diameter")?;
    assert!((expected_edge_distance(100).unwrap() - h / 99.0).abs() < 1e-15);
    collect(vec![
        within_4se("edge distance", mean_d, se_d, h / 99.0),
        within_4se("tau_n", mean_t, se_t, 2.0 * h / 100.0),
        (
            (2.5..=3.5).contains(&scaled),
            format!("Δmax/(ln n/n) {scaled:.3}"),
        ),
    ])
}

fn main() -> ExitCode {
    let wanted: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let selected = |i: usize| wanted.is_empty() || wanted.contains(&i);
    let mut failures = 0;
    let mut report = |i: usize, started: Instant, outcome: Outcome| {
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {i:>2}: PASS ({secs:.1}s) {msg}"),
            Err(msg) => {
                failures += 1;
                println!("criterion {i:>2}: FAIL ({secs:.1}s) {msg}");
            }
        }
    };
    let simple: [(usize, fn() -> Outcome); 5] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
    ];
    for (i, f) in simple {
        if selected(i) {
            let t = Instant::now();
            report(i, t, f());
        }
    }
    if selected(6) || selected(7) {
        let t = Instant::now();
        let sweep = cluster_sweep();
        for (i, f) in [
            (6, criterion_6 as fn(&RunOutput) -> Outcome),
            (7, criterion_7),
        ] {
            if selected(i) {
                report(i, t, sweep.as_ref().map_err(Clone::clone).and_then(f));
            }
        }
    }
    let rest: [(usize, fn() -> Outcome); 6] = [
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
        (12, criterion_12),
        (13, criterion_13),
    ];
    for (i, f) in rest {
        if selected(i) {
            let t = Instant::now();
            report(i, t, f());
        }
    }
    if failures == 0 {
        println!("acceptance: all selected criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria FAILED");
        ExitCode::FAILURE
    }
}
