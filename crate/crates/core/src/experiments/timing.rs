use std::io::Write;
use std::time::{Duration, Instant};

use super::{join_list, simulate_study, KeyValues};
use crate::closure::full_closure;
use crate::error::{Error, Result};
use crate::rng::derive_stream;
use crate::shortcut::preprocess;
use crate::study::{validate_alpha, AnalysisConfig, LocalTest, PValueStudy, DEFAULT_ALPHA, DEFAULT_CLOSURE_CAP};

pub const FULL_CLOSURE: &str = "full_closure";
pub const SHORTCUT: &str = "shortcut";
/// Closure timing p-values stay at or below 1e-3, so at alpha = 0.05 no
/// intersection of up to 50 hypotheses is pruned.
const CLOSURE_SIGNAL_SCALE: f64 = 1e-3;

/// Wall-clock comparison of exact closure against the Simes shortcut.
///
/// Closure studies make every hypothesis a strong signal (scale 1e-3), so
/// every intersection is rejected and the local test runs on all `2^m - 1`
/// of them. Shortcut studies plant 10 signals at scale 0.1. Both use stream
/// `(seed, m)`. Each timing is the
/// median of `runs` samples; a sample repeats the algorithm until at least
/// `min_sample_secs` have elapsed and reports the per-call average.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingScenario {
    pub closure_m_grid: Vec<usize>,
    pub shortcut_m_grid: Vec<usize>,
    pub local_tests: Vec<LocalTest>,
    pub alpha: f64,
    pub seed: u64,
    pub runs: usize,
    pub min_sample_secs: f64,
    pub closure_cap: usize,
}

impl Default for TimingScenario {
    fn default() -> Self {
        TimingScenario {
            closure_m_grid: (2..=12).collect(),
            shortcut_m_grid: (1..=6).map(|k| k * 200_000).collect(),
            local_tests: vec![LocalTest::Simes, LocalTest::Fisher],
            alpha: DEFAULT_ALPHA,
            seed: 1,
            runs: 3,
            min_sample_secs: 0.02,
            closure_cap: DEFAULT_CLOSURE_CAP,
        }
    }
}

impl TimingScenario {
    /// Parses `key=value` text; missing keys keep their defaults.
    ///
    /// Keys: `closure_m_grid`, `shortcut_m_grid`, `local_tests`, `alpha`,
    /// `seed`, `runs`, `min_sample_secs`, `closure_cap`. Empty lists are allowed.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut kv = KeyValues::parse(text)?;
        let d = TimingScenario::default();
        let s = TimingScenario {
            closure_m_grid: kv.take_list("closure_m_grid")?.unwrap_or(d.closure_m_grid),
            shortcut_m_grid: kv.take_list("shortcut_m_grid")?.unwrap_or(d.shortcut_m_grid),
            local_tests: kv.take_list("local_tests")?.unwrap_or(d.local_tests),
            alpha: kv.take("alpha")?.unwrap_or(d.alpha),
            seed: kv.take("seed")?.unwrap_or(d.seed),
            runs: kv.take("runs")?.unwrap_or(d.runs),
            min_sample_secs: kv.take("min_sample_secs")?.unwrap_or(d.min_sample_secs),
            closure_cap: kv.take("closure_cap")?.unwrap_or(d.closure_cap),
        };
        kv.finish()?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        validate_alpha(self.alpha).map_err(|e| Error::Config(e.to_string()))?;
        AnalysisConfig::with_cap(self.alpha, LocalTest::Simes, self.closure_cap)?;
        if let Some(&m) = self.closure_m_grid.iter().find(|&&m| m > self.closure_cap || m == 0) {
            return Err(Error::Config(format!(
                "closure grid entry m = {m} outside 1..={}",
                self.closure_cap
            )));
        }
        if self.shortcut_m_grid.contains(&0) {
            return Err(Error::Config("shortcut grid entries must be positive".into()));
        }
        if self.runs < 3 {
            return Err(Error::Config(format!("runs must be at least 3, got {}", self.runs)));
        }
        if self.min_sample_secs.is_nan() || self.min_sample_secs < 0.0 {
            return Err(Error::Config("min_sample_secs must be non-negative".into()));
        }
        Ok(())
    }

    fn metadata(&self) -> String {
        let tests: Vec<&str> = self.local_tests.iter().map(|t| t.name()).collect();
        format!(
            "# timing: closure_m_grid={} shortcut_m_grid={} local_tests={} alpha={:?} seed={} runs={} min_sample_secs={:?} closure_cap={} (median wall-clock seconds per call)",
            join_list(&self.closure_m_grid),
            join_list(&self.shortcut_m_grid),
            tests.join(";"),
            self.alpha,
            self.seed,
            self.runs,
            self.min_sample_secs,
            self.closure_cap
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub method: &'static str,
    pub local_test: LocalTest,
    pub m: usize,
    pub seconds: f64,
}

/// Times full closure plus defining-family extraction for each local test on
/// the closure grid, then shortcut preprocessing plus a full-set query on the
/// shortcut grid. Runs serially on the calling thread.
pub fn run_timing_experiment(scenario: &TimingScenario) -> Result<Vec<TimingRow>> {
    scenario.validate()?;
    let mut rows = Vec::new();
    for &test in &scenario.local_tests {
        let config = AnalysisConfig::with_cap(scenario.alpha, test, scenario.closure_cap)?;
        for &m in &scenario.closure_m_grid {
            let study = timing_study(scenario, m, m, CLOSURE_SIGNAL_SCALE)?;
            let seconds = median_seconds(scenario, || {
                let closure = full_closure(&study, &config)?;
                std::hint::black_box(closure.defining_family());
                Ok(())
            })?;
            rows.push(TimingRow {
                method: FULL_CLOSURE,
                local_test: test,
                m,
                seconds,
            });
        }
    }
    for &m in &scenario.shortcut_m_grid {
        let study = timing_study(scenario, m, m.min(10), 0.1)?;
        let seconds = median_seconds(scenario, || {
            let state = preprocess(&study, scenario.alpha)?;
            std::hint::black_box(state.full_bound());
            Ok(())
        })?;
        rows.push(TimingRow {
            method: SHORTCUT,
            local_test: LocalTest::Simes,
            m,
            seconds,
        });
    }
    Ok(rows)
}

fn timing_study(scenario: &TimingScenario, m: usize, n_false: usize, scale: f64) -> Result<PValueStudy> {
    simulate_study(m, n_false, scale, &mut derive_stream(scenario.seed, m as u64))
}

fn median_seconds(scenario: &TimingScenario, mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    let min = Duration::from_secs_f64(scenario.min_sample_secs);
    let mut samples = Vec::with_capacity(scenario.runs);
    for _ in 0..scenario.runs {
        let start = Instant::now();
        let mut calls = 0u32;
        loop {
            f()?;
            calls += 1;
            if start.elapsed() >= min {
                break;
            }
        }
        samples.push(start.elapsed().as_secs_f64() / calls as f64);
    }
    samples.sort_by(f64::total_cmp);
    Ok(samples[samples.len() / 2])
}

/// Writes `timing.csv`: metadata line, header `method,local_test,m,seconds`, rows.
pub fn write_timing_csv<W: Write>(scenario: &TimingScenario, rows: &[TimingRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", scenario.metadata())?;
    writeln!(out, "method,local_test,m,seconds")?;
    for r in rows {
        writeln!(out, "{},{},{},{:.6e}", r.method, r.local_test, r.m, r.seconds)?;
    }
    Ok(())
}
