//! Simulation model and the two benchmark experiments (power and timing).
//!
//! Scenarios are read from a `key=value` text format: one pair per line,
//! `#` starts a comment, lists are comma-separated. CSV outputs start with a
//! `#`-prefixed metadata line recording every scenario parameter.

mod power;
mod timing;

pub use power::{run_power_experiment, write_power_csv, PowerRow, PowerScenario};
pub use timing::{run_timing_experiment, write_timing_csv, TimingRow, TimingScenario};

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::study::PValueStudy;

/// Draws `p_i = c_i * u_i` with `u_i` uniform, `c_i = signal_scale / m` for
/// the first `n_false` hypotheses and `c_i = 1` otherwise. Labels are `h1..hm`.
pub fn simulate_study(m: usize, n_false: usize, signal_scale: f64, stream: &mut RngStream) -> Result<PValueStudy> {
    if m == 0 {
        return Err(Error::Config("m must be positive".into()));
    }
    if n_false > m {
        return Err(Error::Config(format!("n_false = {n_false} exceeds m = {m}")));
    }
    if !(signal_scale > 0.0 && signal_scale <= 1.0) {
        return Err(Error::Config(format!(
            "signal_scale must lie in (0, 1], got {signal_scale}"
        )));
    }
    let signal_cap = signal_scale / m as f64;
    let pvalues = (0..m)
        .map(|i| {
            let u = stream.uniform();
            if i < n_false {
                signal_cap * u
            } else {
                u
            }
        })
        .collect();
    PValueStudy::from_pvalues(pvalues)
}

/// Parsed `key=value` configuration.
#[derive(Debug, Default)]
pub(crate) struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub(crate) fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got `{line}`", n + 1)))?;
            let key = key.trim().to_string();
            if entries.insert(key.clone(), (n + 1, value.trim().to_string())).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", n + 1)));
            }
        }
        Ok(KeyValues { entries })
    }

    pub(crate) fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("line {line}: invalid value `{v}` for `{key}`"))),
        }
    }

    pub(crate) fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse()
                        .map_err(|_| Error::Config(format!("line {line}: invalid list item `{s}` for `{key}`")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    pub(crate) fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, (line, _))) => Err(Error::Config(format!("line {line}: unknown key `{key}`"))),
        }
    }
}

pub(crate) fn join_list<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}
