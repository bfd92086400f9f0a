//! Domain types shared by every analysis: the labeled p-value study, sets of
//! hypotheses, and the analysis configuration.
//!
//! Hypotheses are indexed `0..m` in file order. Labels are for display and
//! lookup only; every algorithm works on indices.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A labeled vector of p-values, the unit of analysis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PValueStudy {
    labels: Vec<String>,
    pvalues: Vec<f64>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl PValueStudy {
    /// Builds a validated study. Requires at least one hypothesis, unique
    /// labels and every p-value in `[0, 1]`.
    pub fn new(labels: Vec<String>, pvalues: Vec<f64>) -> Result<Self> {
        if labels.len() != pvalues.len() {
            return Err(Error::Validation(format!(
                "{} labels but {} p-values",
                labels.len(),
                pvalues.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::Validation("a study needs at least one hypothesis".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, (label, &p)) in labels.iter().zip(&pvalues).enumerate() {
            if label.is_empty() {
                return Err(Error::Validation(format!("hypothesis {} has an empty label", i + 1)));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!(
                    "p-value of `{label}` is {p}, outside [0, 1]"
                )));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate label `{label}`")));
            }
        }
        Ok(PValueStudy { labels, pvalues, index })
    }

    /// Study with labels `h1..hm`.
    pub fn from_pvalues(pvalues: Vec<f64>) -> Result<Self> {
        let labels = (1..=pvalues.len()).map(|i| format!("h{i}")).collect();
        Self::new(labels, pvalues)
    }

    pub fn m(&self) -> usize {
        self.pvalues.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn pvalues(&self) -> &[f64] {
        &self.pvalues
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Resolves labels to a [`HypothesisSet`], failing on the first unknown label.
    pub fn set_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<HypothesisSet> {
        let indices = labels
            .iter()
            .map(|l| {
                let l = l.as_ref();
                self.index_of(l).ok_or_else(|| Error::UnknownLabel(l.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        HypothesisSet::new(indices, self.m())
    }

    pub fn labels_of(&self, set: &HypothesisSet) -> Vec<String> {
        set.iter().map(|i| self.labels[i].clone()).collect()
    }

    /// The set of all hypotheses.
    pub fn full_set(&self) -> HypothesisSet {
        HypothesisSet::full(self.m())
    }

    /// Reads a `label,p` CSV from any reader. `origin` names the source in
    /// error messages.
    pub fn read_csv<R: Read>(reader: R, origin: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let parse_err = |line: u64, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "label" || &headers[1] != "p" {
            return Err(parse_err(
                1,
                format!(
                    "expected header `label,p`, found `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }

        let mut labels = Vec::new();
        let mut pvalues = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 2 {
                return Err(parse_err(line, format!("expected 2 fields, found {}", record.len())));
            }
            let p: f64 = record[1]
                .parse()
                .map_err(|_| parse_err(line, format!("`{}` is not a number", &record[1])))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(parse_err(
                    line,
                    format!("p-value of `{}` is {p}, outside [0, 1]", &record[0]),
                ));
            }
            labels.push(record[0].to_string());
            pvalues.push(p);
        }
        Self::new(labels, pvalues)
    }

    /// Writes the study as a `label,p` CSV. P-values use the shortest
    /// representation that parses back to the identical `f64`.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["label", "p"])?;
        for (label, p) in self.labels.iter().zip(&self.pvalues) {
            wtr.write_record([label.as_str(), &format!("{p:?}")])?;
        }
        wtr.flush()
    }
}

/// Loads a study from a `label,p` CSV file. Row order becomes hypothesis order.
pub fn load_study(path: impl AsRef<Path>) -> Result<PValueStudy> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    PValueStudy::read_csv(std::io::BufReader::new(file), &path.display().to_string())
}

pub fn write_study(study: &PValueStudy, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    study
        .write_csv(std::io::BufWriter::new(file))
        .map_err(|e| Error::io(path, e))
}

/// A sorted, duplicate-free set of hypothesis indices in `[0, m)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HypothesisSet(Vec<usize>);

impl HypothesisSet {
    /// Sorts the indices; rejects duplicates and indices `>= m`.
    pub fn new(mut indices: Vec<usize>, m: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Contract(format!("hypothesis {} listed twice", w[0])));
        }
        if let Some(&last) = indices.last() {
            if last >= m {
                return Err(Error::Contract(format!(
                    "hypothesis index {last} out of range for m = {m}"
                )));
            }
        }
        Ok(HypothesisSet(indices))
    }

    pub fn empty() -> Self {
        HypothesisSet(Vec::new())
    }

    pub fn full(m: usize) -> Self {
        HypothesisSet((0..m).collect())
    }

    /// Decodes an m-bit mask (bit `i` set means hypothesis `i` is a member).
    pub fn from_mask(mask: u64) -> Self {
        let mut v = Vec::with_capacity(mask.count_ones() as usize);
        let mut rest = mask;
        while rest != 0 {
            v.push(rest.trailing_zeros() as usize);
            rest &= rest - 1;
        }
        HypothesisSet(v)
    }

    /// Encodes as a bitmask. Panics if any index is 64 or larger.
    pub fn to_mask(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &i| {
            assert!(i < 64, "index {i} does not fit a 64-bit mask");
            acc | (1u64 << i)
        })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Canonical order: by cardinality, then lexicographic on indices.
    pub fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for HypothesisSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Local test used for intersection hypotheses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalTest {
    Simes,
    Fisher,
}

impl LocalTest {
    pub fn name(self) -> &'static str {
        match self {
            LocalTest::Simes => "simes",
            LocalTest::Fisher => "fisher",
        }
    }
}

impl fmt::Display for LocalTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LocalTest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simes" => Ok(LocalTest::Simes),
            "fisher" => Ok(LocalTest::Fisher),
            other => Err(Error::Config(format!(
                "unknown local test `{other}` (expected simes or fisher)"
            ))),
        }
    }
}

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_CLOSURE_CAP: usize = 20;
/// Hard ceiling on the number of hypotheses for exact closed testing.
pub const MAX_CLOSURE_CAP: usize = 25;

/// Level, local test and exact-closure cap for an analysis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisConfig {
    alpha: f64,
    local_test: LocalTest,
    closure_cap: usize,
}

impl AnalysisConfig {
    pub fn new(alpha: f64, local_test: LocalTest) -> Result<Self> {
        Self::with_cap(alpha, local_test, DEFAULT_CLOSURE_CAP)
    }

    pub fn with_cap(alpha: f64, local_test: LocalTest, closure_cap: usize) -> Result<Self> {
        validate_alpha(alpha)?;
        if closure_cap > MAX_CLOSURE_CAP {
            return Err(Error::Config(format!(
                "closure cap {closure_cap} exceeds the hard ceiling {MAX_CLOSURE_CAP}"
            )));
        }
        Ok(AnalysisConfig {
            alpha,
            local_test,
            closure_cap,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn local_test(&self) -> LocalTest {
        self.local_test
    }

    pub fn closure_cap(&self) -> usize {
        self.closure_cap
    }
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            alpha: DEFAULT_ALPHA,
            local_test: LocalTest::Simes,
            closure_cap: DEFAULT_CLOSURE_CAP,
        }
    }
}

pub(crate) fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}
