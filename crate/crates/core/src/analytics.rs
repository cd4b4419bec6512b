//! Closed-form laws of the growth process, tail bounds, and ECDF comparison.
//!
//! Every evaluator here is a pure function. Probabilities that come from
//! bounds which can exceed 1 are returned as a [`BoundValue`] so callers can
//! report when clamping happened.

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::rng::exp_sample;

/// A bound value clamped to `[0, 1]`, plus whether clamping changed it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue {
    pub value: f64,
    pub clamped: bool,
}

impl BoundValue {
    fn clamp(raw: f64) -> Self {
        let value = raw.clamp(0.0, 1.0);
        BoundValue {
            value,
            clamped: value != raw,
        }
    }
}

/// `H_n = Σ_{i=1}^n 1/i`, with `H_0 = 0`.
pub fn harmonic(n: usize) -> f64 {
    // Summing smallest terms first keeps the rounding error minimal.
    (1..=n).rev().map(|i| 1.0 / i as f64).sum()
}

/// `(1 - e^{-x})^p` evaluated in log space.
fn one_minus_exp_pow(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        return 1.0;
    }
    if x <= 0.0 {
        return 0.0;
    }
    (p * (-(-x).exp()).ln_1p()).exp()
}

fn ln_binomial(m: usize, k: usize) -> f64 {
    let k = k.min(m - k);
    (1..=k)
        .map(|i| ((m - k + i) as f64).ln() - (i as f64).ln())
        .sum()
}

fn check_tau_range(n: usize, k: usize) -> Result<()> {
    if n == 0 || k == 0 || k > n {
        return Err(invalid(format!("need 1 <= k <= n, got n={n}, k={k}")));
    }
    Ok(())
}

/// `E[τ_k(v)] = (H_{k-1} + H_{n-1} - H_{n-k}) / n`.
pub fn expected_tau(n: usize, k: usize) -> Result<f64> {
    check_tau_range(n, k)?;
    Ok((harmonic(k - 1) + harmonic(n - 1) - harmonic(n - k)) / n as f64)
}

/// Expected distance of a uniformly random pair, `H_{n-1}/(n-1)`.
pub fn expected_edge_distance(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("need n >= 2, got {n}")));
    }
    Ok(harmonic(n - 1) / (n - 1) as f64)
}

/// One draw of `τ_k` straight from the birth process:
/// `Σ_{i=1}^{k-1} Exp(i(n-i))`.
pub fn sample_tau_direct<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<f64> {
    check_tau_range(n, k)?;
    Ok((1..k).map(|i| exp_sample(rng, (i * (n - i)) as f64)).sum())
}

fn check_sum_exp(n: usize, c: f64, alpha: f64) -> Result<()> {
    if n == 0 || !(c > 0.0) || !(alpha >= 0.0) {
        return Err(invalid(format!(
            "need n >= 1, c > 0, alpha >= 0; got n={n}, c={c}, alpha={alpha}"
        )));
    }
    Ok(())
}

/// `P(X <= α) = (1 - e^{-cα})^n` for `X ~ Σ_{i=1}^n Exp(ci)`.
pub fn cdf_sum_exp_ci(n: usize, c: f64, alpha: f64) -> Result<f64> {
    check_sum_exp(n, c, alpha)?;
    Ok(one_minus_exp_pow(c * alpha, n as f64))
}

/// One draw of `Σ_{i=1}^n Exp(ci)` as a sum.
pub fn sample_sum_exp_ci<R: Rng + ?Sized>(n: usize, c: f64, rng: &mut R) -> f64 {
    (1..=n).map(|i| exp_sample(rng, c * i as f64)).sum()
}

/// One draw of `max_{i<=n} Y_i` with `Y_i ~ Exp(c)`; same law as
/// [`sample_sum_exp_ci`].
pub fn sample_max_exp<R: Rng + ?Sized>(n: usize, c: f64, rng: &mut R) -> f64 {
    (0..n).map(|_| exp_sample(rng, c)).fold(0.0, f64::max)
}

/// Lower and upper bound on `F_k(Δ) = P(τ_k <= Δ)`.
///
/// Upper: `(1 - e^{-nΔ})^{k-1}`. Lower: the larger of
/// `(1 - e^{-(n-k)Δ})^{k-1}` and `(1 - e^{-(n-1)Δ/4})^{4(k-1)/3}`.
pub fn tau_cdf_bounds(n: usize, k: usize, delta: f64) -> Result<(f64, f64)> {
    check_tau_range(n, k)?;
    if !(delta >= 0.0) {
        return Err(invalid(format!("delta must be >= 0, got {delta}")));
    }
    let p = (k - 1) as f64;
    let nf = n as f64;
    let upper = one_minus_exp_pow(nf * delta, p);
    let plain = one_minus_exp_pow((n - k) as f64 * delta, p);
    let refined = one_minus_exp_pow((nf - 1.0) * delta / 4.0, 4.0 * p / 3.0);
    Ok((plain.max(refined), upper))
}

/// Density threshold `s_Δ = min{exp(Δn/5), (n+1)/2}`.
pub fn s_delta(n: usize, delta: f64) -> f64 {
    let nf = n as f64;
    (delta * nf / 5.0).exp().min((nf + 1.0) / 2.0)
}

/// `(s_Δ, e^{-Δn/5})`: `P(|B_Δ(v)| < s_Δ) <= e^{-Δn/5}`, valid for `n >= 5`.
pub fn ball_tail_lower(n: usize, delta: f64) -> Result<(f64, f64)> {
    if n < 5 {
        return Err(invalid(format!(
            "ball tail lower bound needs n >= 5, got {n}"
        )));
    }
    if !(delta >= 0.0) {
        return Err(invalid(format!("delta must be >= 0, got {delta}")));
    }
    Ok((s_delta(n, delta), (-delta * n as f64 / 5.0).exp()))
}

/// `P(|B_Δ(v)| >= e^{cΔn}) < e^{-(c-1)Δn}` for `c > 1`.
pub fn ball_tail_upper(n: usize, delta: f64, c: f64) -> Result<BoundValue> {
    if !(c > 1.0) {
        return Err(invalid(format!("c must be > 1, got {c}")));
    }
    if !(delta >= 0.0) {
        return Err(invalid(format!("delta must be >= 0, got {delta}")));
    }
    Ok(BoundValue::clamp((-(c - 1.0) * delta * n as f64).exp()))
}

/// Reference envelope `n^{3-c} (ln n)^2` for `P(Δ_max > c ln n / n)`, with the
/// hidden constant set to 1.
pub fn janson_diameter_bound(n: usize, c: f64) -> Result<BoundValue> {
    if !(c > 3.0) {
        return Err(invalid(format!("c must be > 3, got {c}")));
    }
    if n < 2 {
        return Err(invalid(format!("need n >= 2, got {n}")));
    }
    let nf = n as f64;
    Ok(BoundValue::clamp(nf.powf(3.0 - c) * nf.ln().powi(2)))
}

/// Density of `Σ_{i=k}^m Exp(i)`: `k C(m,k) e^{-kx} (1-e^{-x})^{m-k}`.
pub fn kmedian_cost_density(m: usize, k: usize, x: f64) -> Result<f64> {
    if k == 0 || k > m {
        return Err(invalid(format!("need 1 <= k <= m, got m={m}, k={k}")));
    }
    if !(x >= 0.0) {
        return Err(invalid(format!("x must be >= 0, got {x}")));
    }
    if m == k {
        return Ok(k as f64 * (-(k as f64) * x).exp());
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let log =
        (k as f64).ln() + ln_binomial(m, k) - k as f64 * x + (m - k) as f64 * (-(-x).exp()).ln_1p();
    Ok(log.exp())
}

/// `P(S_m <= c) <= (e² c / (2α²))^{αn}` for the sum `S_m` of the `m >= αn`
/// lightest edge weights.
pub fn sm_tail_bound(n: usize, alpha: f64, c: f64) -> Result<BoundValue> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha must lie in (0,1], got {alpha}")));
    }
    if !(0.0..=1.0).contains(&c) {
        return Err(invalid(format!("c must lie in [0,1], got {c}")));
    }
    if c == 0.0 {
        return Ok(BoundValue {
            value: 0.0,
            clamped: false,
        });
    }
    let base = std::f64::consts::E.powi(2) * c / (2.0 * alpha * alpha);
    Ok(BoundValue::clamp((alpha * n as f64 * base.ln()).exp()))
}

/// Dvoretzky–Kiefer–Wolfowitz half-width `sqrt(ln(2/(1-conf)) / (2M))`.
pub fn dkw_band(samples: usize, confidence: f64) -> Result<f64> {
    if samples == 0 {
        return Err(invalid("DKW band needs at least one sample"));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid(format!(
            "confidence must lie in (0,1), got {confidence}"
        )));
    }
    Ok(((2.0 / (1.0 - confidence)).ln() / (2.0 * samples as f64)).sqrt())
}

/// Empirical CDF over a sorted sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    /// NaNs are rejected.
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("empirical CDF needs at least one sample"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(invalid("empirical CDF sample contains NaN"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// `#{samples <= x} / M`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    /// Lower empirical quantile at probability `p ∈ [0,1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let m = self.sorted.len();
        let idx = ((p * m as f64).ceil() as usize).clamp(1, m) - 1;
        self.sorted[idx]
    }

    /// Sample quantiles at `p = i/(points+1)`, `i = 1..=points`.
    pub fn quantile_grid(&self, points: usize) -> Vec<f64> {
        (1..=points)
            .map(|i| self.quantile(i as f64 / (points + 1) as f64))
            .collect()
    }
}

/// Number of grid points used by every ECDF comparison.
pub const GRID_POINTS: usize = 32;

/// Confidence level of every DKW band.
pub const DKW_CONFIDENCE: f64 = 0.99;

/// Outcome of comparing an ECDF against a reference on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct CdfCheck {
    pub grid: Vec<f64>,
    pub empirical: Vec<f64>,
    /// Reference value (or lower/upper envelope) at each grid point.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub band: f64,
    /// Largest excursion outside `[lower, upper]`, before subtracting the band.
    pub worst_excess: f64,
    pub pass: bool,
}

impl CdfCheck {
    fn build(
        grid: Vec<f64>,
        empirical: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        band: f64,
    ) -> Self {
        let worst_excess = empirical
            .iter()
            .zip(lower.iter().zip(&upper))
            .map(|(&e, (&lo, &hi))| (lo - e).max(e - hi).max(0.0))
            .fold(0.0, f64::max);
        CdfCheck {
            pass: worst_excess <= band,
            grid,
            empirical,
            lower,
            upper,
            band,
            worst_excess,
        }
    }
}

/// Two-sample check: `|F_a(x) - F_b(x)| <= band_a + band_b` on the quantile
/// grid of the pooled sample.
pub fn compare_two_samples(
    a: &EmpiricalCdf,
    b: &EmpiricalCdf,
    confidence: f64,
) -> Result<CdfCheck> {
    let band = dkw_band(a.len(), confidence)? + dkw_band(b.len(), confidence)?;
    let pooled = EmpiricalCdf::new(a.samples().iter().chain(b.samples()).copied().collect())?;
    let grid = pooled.quantile_grid(GRID_POINTS);
    let fa: Vec<f64> = grid.iter().map(|&x| a.eval(x)).collect();
    let fb: Vec<f64> = grid.iter().map(|&x| b.eval(x)).collect();
    Ok(CdfCheck::build(grid, fa, fb.clone(), fb, band))
}

/// One-sample check against `lower(x) <= F(x) <= upper(x)` within the DKW
/// band, on the sample's own quantile grid.
pub fn check_envelope(
    ecdf: &EmpiricalCdf,
    confidence: f64,
    envelope: impl Fn(f64) -> Result<(f64, f64)>,
) -> Result<CdfCheck> {
    let band = dkw_band(ecdf.len(), confidence)?;
    let grid = ecdf.quantile_grid(GRID_POINTS);
    let empirical: Vec<f64> = grid.iter().map(|&x| ecdf.eval(x)).collect();
    let mut lower = Vec::with_capacity(grid.len());
    let mut upper = Vec::with_capacity(grid.len());
    for &x in &grid {
        let (lo, hi) = envelope(x)?;
        lower.push(lo);
        upper.push(hi);
    }
    Ok(CdfCheck::build(grid, empirical, lower, upper, band))
}
