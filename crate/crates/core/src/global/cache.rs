use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use super::{calibrate_lambda, hc_critical_value, BoundingFunctionConfig};
use crate::error::{Error, Result};

const FILE_NAME: &str = "calibration.txt";

/// Text sidecar remembering calibration results.
///
/// One record per line: `kind,m,alpha,reps,seed,value` with `kind` either
/// `lambda` or `hc`. Floats are written in round-trip form.
#[derive(Debug)]
pub struct CalibrationCache {
    path: PathBuf,
    entries: HashMap<Key, f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Key {
    kind: String,
    m: usize,
    alpha_bits: u64,
    reps: usize,
    seed: u64,
}

impl CalibrationCache {
    /// Opens (or starts) the sidecar inside `dir`.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(FILE_NAME);
        let mut entries = HashMap::new();
        if path.exists() {
            let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            for (n, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let (key, value) = parse_line(&line).ok_or_else(|| Error::Parse {
                    path: path.display().to_string(),
                    line: n as u64 + 1,
                    message: format!("malformed calibration record `{line}`"),
                })?;
                entries.insert(key, value);
            }
        }
        Ok(CalibrationCache { path, entries })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lambda(&mut self, m: usize, alpha: f64, reps: usize, seed: u64) -> Result<BoundingFunctionConfig> {
        let lambda = self.get_or_insert("lambda", m, alpha, reps, seed, || {
            calibrate_lambda(m, alpha, reps, seed).map(|c| c.lambda)
        })?;
        Ok(BoundingFunctionConfig {
            lambda,
            alpha,
            m,
            calibration_reps: reps,
            seed,
        })
    }

    pub fn hc_critical_value(&mut self, m: usize, alpha: f64, reps: usize, seed: u64) -> Result<f64> {
        self.get_or_insert("hc", m, alpha, reps, seed, || hc_critical_value(m, alpha, reps, seed))
    }

    fn get_or_insert(
        &mut self,
        kind: &str,
        m: usize,
        alpha: f64,
        reps: usize,
        seed: u64,
        compute: impl FnOnce() -> Result<f64>,
    ) -> Result<f64> {
        let key = Key {
            kind: kind.to_string(),
            m,
            alpha_bits: alpha.to_bits(),
            reps,
            seed,
        };
        if let Some(&v) = self.entries.get(&key) {
            return Ok(v);
        }
        let value = compute()?;
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| Error::io(&self.path, e))?;
        writeln!(file, "{kind},{m},{alpha:?},{reps},{seed},{value:?}").map_err(|e| Error::io(&self.path, e))?;
        self.entries.insert(key, value);
        Ok(value)
    }
}

fn parse_line(line: &str) -> Option<(Key, f64)> {
    let fields: Vec<&str> = line.trim().split(',').collect();
    let [kind, m, alpha, reps, seed, value] = fields.as_slice() else {
        return None;
    };
    let alpha: f64 = alpha.parse().ok()?;
    Some((
        Key {
            kind: kind.to_string(),
            m: m.parse().ok()?,
            alpha_bits: alpha.to_bits(),
            reps: reps.parse().ok()?,
            seed: seed.parse().ok()?,
        },
        value.parse().ok()?,
    ))
}
