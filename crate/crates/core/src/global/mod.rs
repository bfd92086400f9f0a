//! Global baselines: a Meinshausen–Rice style lower bound on the total number
//! of false nulls, and the Higher Criticism statistic for the global null.
//! Both are calibrated by Monte Carlo under uniform p-values.
//!
//! The bounding function is `lambda * sqrt(t (1 - t) / m)`. Replicate `r` of
//! a calibration with seed `s` draws its `m` uniforms from stream `(s, r)`.

mod cache;

pub use cache::CalibrationCache;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::derive_stream;
use crate::study::{validate_alpha, PValueStudy};

pub const MIN_CALIBRATION_REPS: usize = 1000;

/// Geometric lambda grid: `LAMBDA_GRID_START * LAMBDA_GRID_RATIO^k`.
pub const LAMBDA_GRID_START: f64 = 0.01;
pub const LAMBDA_GRID_RATIO: f64 = 1.005;

/// Clamp applied to `p_(i)` inside the Higher Criticism denominator.
const HC_LOW: f64 = 1e-300;
const HC_HIGH: f64 = 1.0 - 1e-16;

/// A calibrated bounding function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundingFunctionConfig {
    pub lambda: f64,
    pub alpha: f64,
    pub m: usize,
    pub calibration_reps: usize,
    pub seed: u64,
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < MIN_CALIBRATION_REPS {
        return Err(Error::Contract(format!(
            "calibration needs at least {MIN_CALIBRATION_REPS} replicates, got {reps}"
        )));
    }
    Ok(())
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Contract("calibration needs m >= 1".into()));
    }
    Ok(())
}

fn sorted_copy(p: &[f64]) -> Vec<f64> {
    let mut v = p.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// Calls `f(t, F(t))` once per distinct value `t < 1` of ascending `sorted`,
/// where `F` is the empirical CDF.
fn for_each_jump(sorted: &[f64], mut f: impl FnMut(f64, f64)) {
    let m = sorted.len() as f64;
    for (i, &t) in sorted.iter().enumerate() {
        if t >= 1.0 {
            break;
        }
        let last_of_ties = sorted.get(i + 1).is_none_or(|&next| next != t);
        if last_of_ties {
            f(t, (i + 1) as f64 / m);
        }
    }
}

/// `sup_t (F(t) - t) / sqrt(t (1 - t) / m)` over jump points `t < 1`.
/// Zero p-values give an infinite deviation.
pub fn envelope_statistic(pvalues: &[f64]) -> f64 {
    envelope_statistic_sorted(&sorted_copy(pvalues))
}

fn envelope_statistic_sorted(sorted: &[f64]) -> f64 {
    let m = sorted.len() as f64;
    let mut sup = f64::NEG_INFINITY;
    for_each_jump(sorted, |t, ecdf| {
        let z = if t <= 0.0 {
            f64::INFINITY
        } else {
            (ecdf - t) / (t * (1.0 - t) / m).sqrt()
        };
        sup = sup.max(z);
    });
    sup
}

fn null_statistics(m: usize, reps: usize, seed: u64, stat: impl Fn(&[f64]) -> f64 + Sync) -> Vec<f64> {
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut stream = derive_stream(seed, r as u64);
            let mut u = stream.uniforms(m);
            u.sort_unstable_by(f64::total_cmp);
            stat(&u)
        })
        .collect()
}

/// Finds the smallest grid lambda whose envelope is exceeded in at most an
/// `alpha` fraction of `reps` uniform samples of size `m`.
pub fn calibrate_lambda(m: usize, alpha: f64, reps: usize, seed: u64) -> Result<BoundingFunctionConfig> {
    check_m(m)?;
    validate_alpha(alpha)?;
    check_reps(reps)?;
    let mut stats = null_statistics(m, reps, seed, envelope_statistic_sorted);
    stats.sort_unstable_by(|a, b| b.total_cmp(a));
    let allowed = (alpha * reps as f64 + 1e-9).floor() as usize;
    // Exceedances stay within `allowed` iff lambda >= the (allowed+1)-th largest.
    let needed = stats.get(allowed).copied().unwrap_or(f64::NEG_INFINITY);
    let exceed = |lambda: f64| stats.iter().take_while(|&&s| s > lambda).count();

    let mut k = if needed > LAMBDA_GRID_START {
        ((needed / LAMBDA_GRID_START).ln() / LAMBDA_GRID_RATIO.ln()).ceil() as i32
    } else {
        0
    };
    let grid = |k: i32| LAMBDA_GRID_START * LAMBDA_GRID_RATIO.powi(k);
    while k > 0 && exceed(grid(k - 1)) <= allowed {
        k -= 1;
    }
    while exceed(grid(k)) > allowed {
        k += 1;
    }
    Ok(BoundingFunctionConfig {
        lambda: grid(k),
        alpha,
        m,
        calibration_reps: reps,
        seed,
    })
}

/// Lower confidence bound on the total number of false nulls:
/// `max(0, ceil(m * max_t (F(t) - t - lambda sqrt(t(1-t)/m)) / (1 - t)))`
/// over jump points `t < 1`.
pub fn mr_lower_bound(study: &PValueStudy, config: &BoundingFunctionConfig) -> Result<usize> {
    if study.m() != config.m {
        return Err(Error::Contract(format!(
            "bounding function calibrated for m = {}, study has m = {}",
            config.m,
            study.m()
        )));
    }
    let sorted = sorted_copy(study.pvalues());
    let m = sorted.len() as f64;
    let mut best = 0.0f64;
    for_each_jump(&sorted, |t, ecdf| {
        let envelope = config.lambda * (t * (1.0 - t) / m).sqrt();
        best = best.max((ecdf - t - envelope) / (1.0 - t));
    });
    // Guard against rounding pushing an exact integer over the next one.
    let scaled = m * best - 1e-9;
    Ok(if scaled > 0.0 { scaled.ceil() as usize } else { 0 })
}

/// Higher Criticism over the smaller half of the order statistics.
pub fn higher_criticism(study: &PValueStudy) -> Result<f64> {
    if study.m() < 2 {
        return Err(Error::Contract("Higher Criticism needs m >= 2".into()));
    }
    Ok(hc_sorted(&sorted_copy(study.pvalues())))
}

fn hc_sorted(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    let mf = m as f64;
    (1..=m / 2)
        .map(|i| {
            let p = sorted[i - 1];
            let c = p.clamp(HC_LOW, HC_HIGH);
            mf.sqrt() * (i as f64 / mf - p) / (c * (1.0 - c)).sqrt()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Empirical `1 - alpha` quantile of Higher Criticism under the global null:
/// the `ceil((1 - alpha) * reps)`-th smallest of `reps` simulated values.
pub fn hc_critical_value(m: usize, alpha: f64, reps: usize, seed: u64) -> Result<f64> {
    if m < 2 {
        return Err(Error::Contract("Higher Criticism needs m >= 2".into()));
    }
    validate_alpha(alpha)?;
    check_reps(reps)?;
    let mut stats = null_statistics(m, reps, seed, hc_sorted);
    stats.sort_unstable_by(f64::total_cmp);
    Ok(null_quantile(&stats, alpha))
}

fn null_quantile(sorted_stats: &[f64], alpha: f64) -> f64 {
    let reps = sorted_stats.len();
    let rank = (((1.0 - alpha) * reps as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted_stats[rank.min(reps) - 1]
}
