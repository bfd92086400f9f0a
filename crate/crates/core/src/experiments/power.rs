use std::io::Write;

use rayon::prelude::*;

use super::{join_list, simulate_study, KeyValues};
use crate::error::{Error, Result};
use crate::global::{calibrate_lambda, mr_lower_bound, BoundingFunctionConfig, CalibrationCache};
use crate::rng::{derive_stream, mix64};
use crate::shortcut::preprocess;
use crate::study::{validate_alpha, DEFAULT_ALPHA};

/// Salt separating calibration streams from replicate streams.
const CALIBRATION_SALT: u64 = 0x4D52_4341_4C49_4252;

pub const CLOSED_TESTING: &str = "closed_testing";
pub const MEINSHAUSEN_RICE: &str = "meinshausen_rice";

/// Power comparison over a grid of study sizes.
///
/// Replicate `r` at size `m` uses stream `(seed, m << 32 | r)`. The bounding
/// function for size `m` is calibrated with seed `mix64(seed ^ SALT)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerScenario {
    pub m_grid: Vec<usize>,
    pub n_false: usize,
    pub signal_scale: f64,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
    pub calibration_reps: usize,
}

impl Default for PowerScenario {
    fn default() -> Self {
        PowerScenario {
            m_grid: vec![20, 50, 100, 200, 500, 1000],
            n_false: 10,
            signal_scale: 0.1,
            reps: 500,
            alpha: DEFAULT_ALPHA,
            seed: 1,
            calibration_reps: 10_000,
        }
    }
}

impl PowerScenario {
    /// Parses `key=value` text; missing keys keep their defaults.
    ///
    /// Keys: `m_grid`, `n_false`, `signal_scale`, `reps`, `alpha`, `seed`,
    /// `calibration_reps`.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut kv = KeyValues::parse(text)?;
        let d = PowerScenario::default();
        let s = PowerScenario {
            m_grid: kv.take_list("m_grid")?.unwrap_or(d.m_grid),
            n_false: kv.take("n_false")?.unwrap_or(d.n_false),
            signal_scale: kv.take("signal_scale")?.unwrap_or(d.signal_scale),
            reps: kv.take("reps")?.unwrap_or(d.reps),
            alpha: kv.take("alpha")?.unwrap_or(d.alpha),
            seed: kv.take("seed")?.unwrap_or(d.seed),
            calibration_reps: kv.take("calibration_reps")?.unwrap_or(d.calibration_reps),
        };
        kv.finish()?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        validate_alpha(self.alpha).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(&m) = self.m_grid.iter().find(|&&m| m < self.n_false || m == 0) {
            return Err(Error::Config(format!(
                "grid entry m = {m} is smaller than n_false = {}",
                self.n_false
            )));
        }
        if !(self.signal_scale > 0.0 && self.signal_scale <= 1.0) {
            return Err(Error::Config(format!(
                "signal_scale must lie in (0, 1], got {}",
                self.signal_scale
            )));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be positive".into()));
        }
        Ok(())
    }

    pub fn calibration_seed(&self) -> u64 {
        mix64(self.seed ^ CALIBRATION_SALT)
    }

    fn metadata(&self) -> String {
        format!(
            "# power: m_grid={} n_false={} signal_scale={:?} reps={} alpha={:?} seed={} calibration_reps={} calibration_seed={} (alpha is a declared default, not a reported value)",
            join_list(&self.m_grid),
            self.n_false,
            self.signal_scale,
            self.reps,
            self.alpha,
            self.seed,
            self.calibration_reps,
            self.calibration_seed()
        )
    }
}

/// One CSV row of `power.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerRow {
    pub m: usize,
    pub method: &'static str,
    pub mean_bound: f64,
    pub se: f64,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// Runs the power comparison. For each `m`: the mean (and Monte Carlo
/// standard error) of the closed-testing bound for the full set, computed via
/// the Simes shortcut, and of the Meinshausen–Rice bound.
pub fn run_power_experiment(
    scenario: &PowerScenario,
    mut cache: Option<&mut CalibrationCache>,
) -> Result<Vec<PowerRow>> {
    scenario.validate()?;
    let mut rows = Vec::with_capacity(2 * scenario.m_grid.len());
    for &m in &scenario.m_grid {
        let bounding = match cache.as_deref_mut() {
            Some(c) => c.lambda(
                m,
                scenario.alpha,
                scenario.calibration_reps,
                scenario.calibration_seed(),
            )?,
            None => calibrate_lambda(
                m,
                scenario.alpha,
                scenario.calibration_reps,
                scenario.calibration_seed(),
            )?,
        };
        let pairs = (0..scenario.reps)
            .into_par_iter()
            .map(|r| replicate(scenario, m, r, &bounding))
            .collect::<Result<Vec<(usize, usize)>>>()?;
        let ct: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let mr: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        for (method, values) in [(CLOSED_TESTING, ct), (MEINSHAUSEN_RICE, mr)] {
            let (mean, se) = mean_and_se(&values);
            rows.push(PowerRow {
                m,
                method,
                mean_bound: mean,
                se,
                reps: scenario.reps,
                alpha: scenario.alpha,
                seed: scenario.seed,
            });
        }
    }
    Ok(rows)
}

fn replicate(
    scenario: &PowerScenario,
    m: usize,
    r: usize,
    bounding: &BoundingFunctionConfig,
) -> Result<(usize, usize)> {
    let mut stream = derive_stream(scenario.seed, ((m as u64) << 32) | r as u64);
    let study = simulate_study(m, scenario.n_false, scenario.signal_scale, &mut stream)?;
    let ct = preprocess(&study, scenario.alpha)?.full_bound();
    let mr = mr_lower_bound(&study, bounding)?;
    Ok((ct, mr))
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`).
pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Writes `power.csv`: metadata line, header `m,method,mean_bound,se,reps,alpha,seed`, rows.
pub fn write_power_csv<W: Write>(scenario: &PowerScenario, rows: &[PowerRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", scenario.metadata())?;
    writeln!(out, "m,method,mean_bound,se,reps,alpha,seed")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{},{},{}",
            r.m, r.method, r.mean_bound, r.se, r.reps, r.alpha, r.seed
        )?;
    }
    Ok(())
}
