//! Monte Carlo validation of the analytic bounds: samples S = Σ_k ξ_k A_k,
//! estimates tail probabilities with exact binomial confidence intervals,
//! and joins the empirical estimates against every bound column.
//!
//! Trial i draws from its own generator seeded with `mix(seed, i)`, so each
//! trial is independent of execution order and the whole module produces
//! identical output serially and concurrently.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{Beta, Continuous, ContinuousCDF};

use crate::error::{Error, Result};
use crate::levy_core::{sampler, IdModel};
use crate::matrix_core::{sym_eig_values, MatrixSeries};
use crate::tail_bounds::{bound_report, BoundReport, SeriesScale};

const MODULE: &str = "monte_carlo";
const MIN_TRIALS: u64 = 1000;
const CI_TAIL_MASS: f64 = 0.005;

/// Empirical exceedance estimate at one threshold with a two-sided 99%
/// Clopper-Pearson interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub t: f64,
    pub trials: u64,
    pub exceed_count: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// SplitMix64-style finalizer deriving trial i's seed from the run seed.
/// Trial i's generator is `ChaCha8Rng::seed_from_u64(mix(seed, i))`, so a
/// trial's draw depends only on (seed, i), never on scheduling.
pub fn mix(seed: u64, trial: u64) -> u64 {
    let mut z = seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws ξ_1..ξ_K once and measures the realized series: returns
/// (λ_max(S), ‖S‖) for S = Σ ξ_k A_k. Deterministic per seed.
pub fn sample_series_stat(model: &IdModel, series: &MatrixSeries, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = sampler(model)?;
    let xs: Vec<f64> = (0..series.len()).map(|_| draw(&mut rng)).collect();
    stat_from_draws(series, &xs)
}

/// The measurement half of [`sample_series_stat`] with the draws supplied
/// explicitly; test hook for degenerate coefficient vectors.
pub fn stat_from_draws(series: &MatrixSeries, xs: &[f64]) -> Result<(f64, f64)> {
    let s = series.combination(xs)?;
    let vals = sym_eig_values(&s)?;
    let lmax = vals[0];
    let norm = vals[0].max(-vals[vals.len() - 1]);
    Ok((lmax, norm))
}

/// Exact two-sided 99% Clopper-Pearson interval for `exceed` successes out
/// of `trials`, via Beta quantiles (closed forms at the endpoints).
pub fn clopper_pearson(exceed: u64, trials: u64) -> Result<(f64, f64)> {
    if trials == 0 || exceed > trials {
        return Err(Error::new(MODULE, "domain", format!("invalid counts: {exceed} out of {trials}")));
    }
    let n = trials as f64;
    let k = exceed as f64;
    let lo = if exceed == 0 {
        0.0
    } else if exceed == trials {
        CI_TAIL_MASS.powf(1.0 / n)
    } else {
        beta_quantile(k, n - k + 1.0, CI_TAIL_MASS)?
    };
    let hi = if exceed == trials {
        1.0
    } else if exceed == 0 {
        1.0 - CI_TAIL_MASS.powf(1.0 / n)
    } else {
        beta_quantile(k + 1.0, n - k, 1.0 - CI_TAIL_MASS)?
    };
    Ok((lo, hi))
}

/// Beta(a,b) quantile to full precision: the library inverse is a coarse
/// bisection, so its output is polished by Newton steps on the CDF.
fn beta_quantile(a: f64, b: f64, p: f64) -> Result<f64> {
    let dist = Beta::new(a, b).map_err(|e| Error::new(MODULE, "domain", format!("Beta({a},{b}): {e}")))?;
    let mut x = dist.inverse_cdf(p).clamp(f64::MIN_POSITIVE, 1.0 - 1e-16);
    for _ in 0..64 {
        let f = dist.cdf(x) - p;
        let density = dist.pdf(x);
        if !(density > 0.0) || !density.is_finite() {
            break;
        }
        let step = f / density;
        let next = x - step;
        if next <= 0.0 {
            x *= 0.5;
            continue;
        }
        if next >= 1.0 {
            x = 0.5 * (x + 1.0);
            continue;
        }
        x = next;
        if step.abs() <= 1e-15 * x {
            break;
        }
    }
    Ok(x)
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::new(MODULE, "domain", format!("at least {MIN_TRIALS} trials required, got {trials}")));
    }
    Ok(())
}

/// One norm sample per trial, computed in parallel but collected in trial
/// order. All empirical estimators share these samples.
fn norm_samples(model: &IdModel, series: &MatrixSeries, trials: u64, seed: u64) -> Result<Vec<f64>> {
    let _ = sampler(model)?;
    let norms: Vec<Result<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| sample_series_stat(model, series, mix(seed, i)).map(|(_, norm)| norm))
        .collect();
    norms.into_iter().collect()
}

/// Empirical tail curve on a t-grid: one shared pass of `trials` norm
/// samples, then per-threshold exceedance counts with 99% intervals.
/// Shared samples make `p_hat` non-increasing along an increasing grid.
pub fn empirical_tail(model: &IdModel, series: &MatrixSeries, t_grid: &[f64], trials: u64, seed: u64) -> Result<Vec<TailEstimate>> {
    check_trials(trials)?;
    if t_grid.is_empty() {
        return Err(Error::new(MODULE, "domain", "empty threshold grid"));
    }
    let norms = norm_samples(model, series, trials, seed)?;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !t.is_finite() {
            return Err(Error::new(MODULE, "domain", format!("non-finite threshold {t}")));
        }
        let exceed = norms.iter().filter(|&&x| x > t).count() as u64;
        let p_hat = exceed as f64 / trials as f64;
        let (ci_low, ci_high) = clopper_pearson(exceed, trials)?;
        out.push(TailEstimate { t, trials, exceed_count: exceed, p_hat, ci_low, ci_high });
    }
    Ok(out)
}

/// Sample mean and standard error of ‖Σ ξ_k A_k‖ over `trials` draws.
pub fn empirical_expectation(model: &IdModel, series: &MatrixSeries, trials: u64, seed: u64) -> Result<(f64, f64)> {
    check_trials(trials)?;
    let norms = norm_samples(model, series, trials, seed)?;
    let n = trials as f64;
    let mean = norms.iter().sum::<f64>() / n;
    let ss: f64 = norms.iter().map(|x| (x - mean) * (x - mean)).sum();
    let std_err = (ss / (n * (n - 1.0))).sqrt();
    Ok((mean, std_err))
}

/// One grid row of the joined report: the empirical estimate next to every
/// analytic bound at the same threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub estimate: TailEstimate,
    pub bounds: BoundReport,
}

/// A bound falling below the empirical 99% lower confidence limit; since
/// the bounds are proven, any entry here indicates an implementation bug.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub bound_name: &'static str,
    pub bound_value: f64,
    pub ci_low: f64,
}

/// Full simulation-versus-bounds report over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub violations: Vec<Violation>,
}

/// Joins [`empirical_tail`] with every analytic bound column and flags any
/// bound the empirical lower confidence limit contradicts. The whole grid
/// must satisfy the H_c domain Rt/(ρ(σ²+V)) ≤ c.
pub fn compare_report(model: &IdModel, series: &MatrixSeries, t_grid: &[f64], trials: u64, seed: u64, c: f64) -> Result<CompareReport> {
    let estimates = empirical_tail(model, series, t_grid, trials, seed)?;
    let scale = SeriesScale::of(series);
    let mut rows = Vec::with_capacity(estimates.len());
    let mut violations = Vec::new();
    for est in estimates {
        let bounds = bound_report(model, scale, est.t, c)?;
        let columns = [
            ("exact", bounds.exact),
            ("bennett", bounds.bennett),
            ("bernstein_smooth", bounds.bernstein_smooth),
            ("bernstein_piecewise", bounds.bernstein_piecewise),
            ("hc", bounds.hc),
            ("beta0", bounds.beta0_piecewise),
        ];
        for (bound_name, bound_value) in columns {
            if bound_value < est.ci_low {
                violations.push(Violation { t: est.t, bound_name, bound_value, ci_low: est.ci_low });
            }
        }
        rows.push(CompareRow { estimate: est, bounds });
    }
    Ok(CompareReport { rows, violations })
}
