//! Antichains of hypothesis sets and their line-oriented text format.
//!
//! Text format: one set per line, members as comma-separated labels, sets in
//! canonical order. An optional first line `# universe: a,b,c` fixes the
//! label-to-index mapping; without it labels are indexed by first appearance.
//! A blank line denotes the empty set, which only occurs as the sole member
//! of the vacuous transversal family `{∅}`.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::study::HypothesisSet;

/// Largest universe a family can range over (sets are handled as `u64` masks).
pub const MAX_FAMILY_UNIVERSE: usize = 64;

/// An antichain of hypothesis sets over `m` hypotheses, in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFamily {
    m: usize,
    sets: Vec<HypothesisSet>,
}

impl SetFamily {
    /// Validates range and the antichain property and sorts canonically.
    /// The empty set may only appear as the sole member.
    pub fn new(m: usize, sets: Vec<HypothesisSet>) -> Result<Self> {
        if m > MAX_FAMILY_UNIVERSE {
            return Err(Error::Contract(format!(
                "set families support at most {MAX_FAMILY_UNIVERSE} hypotheses, got {m}"
            )));
        }
        for s in &sets {
            if let Some(&last) = s.indices().last() {
                if last >= m {
                    return Err(Error::Contract(format!("member {s} out of range for m = {m}")));
                }
            }
        }
        let masks: Vec<u64> = sets.iter().map(HypothesisSet::to_mask).collect();
        if masks.len() > 1 && masks.contains(&0) {
            return Err(Error::Contract(
                "the empty set can only be the sole member of a family".into(),
            ));
        }
        for (i, &a) in masks.iter().enumerate() {
            for &b in &masks[i + 1..] {
                if a & b == a || a & b == b {
                    return Err(Error::Contract(format!(
                        "not an antichain: {} and {} are nested",
                        HypothesisSet::from_mask(a),
                        HypothesisSet::from_mask(b)
                    )));
                }
            }
        }
        Ok(Self::from_sorted_unchecked(m, sets))
    }

    /// Builds from masks that are already known to form an antichain.
    pub(crate) fn from_antichain_masks(m: usize, masks: impl IntoIterator<Item = u64>) -> Self {
        let sets = masks.into_iter().map(HypothesisSet::from_mask).collect();
        Self::from_sorted_unchecked(m, sets)
    }

    fn from_sorted_unchecked(m: usize, mut sets: Vec<HypothesisSet>) -> Self {
        sets.sort_by(HypothesisSet::canonical_cmp);
        SetFamily { m, sets }
    }

    pub fn empty(m: usize) -> Self {
        SetFamily { m, sets: Vec::new() }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sets(&self) -> &[HypothesisSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn masks(&self) -> Vec<u64> {
        self.sets.iter().map(HypothesisSet::to_mask).collect()
    }

    /// Union of all members.
    pub fn union(&self) -> HypothesisSet {
        HypothesisSet::from_mask(self.masks().into_iter().fold(0, |a, b| a | b))
    }

    /// Members rendered with labels, one `Vec` per set.
    pub fn to_labels(&self, labels: &[String]) -> Vec<Vec<String>> {
        self.sets
            .iter()
            .map(|s| s.iter().map(|i| labels[i].clone()).collect())
            .collect()
    }

    /// Writes the text format, including the universe line.
    pub fn write_text<W: Write>(&self, labels: &[String], mut out: W) -> std::io::Result<()> {
        assert_eq!(labels.len(), self.m, "label count must equal m");
        writeln!(out, "# universe: {}", labels.join(","))?;
        for set in self.to_labels(labels) {
            writeln!(out, "{}", set.join(","))?;
        }
        Ok(())
    }

    pub fn save(&self, labels: &[String], path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_text(labels, &mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// Parses the text format. Returns the family and the label universe.
    pub fn read_text<R: BufRead>(reader: R, origin: &str) -> Result<(SetFamily, Vec<String>)> {
        let mut universe: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut fixed_universe = false;
        let mut raw_sets: Vec<(u64, Vec<String>)> = Vec::new();

        for (n, line) in reader.lines().enumerate() {
            let line_no = n as u64 + 1;
            let line = line.map_err(|e| Error::Parse {
                path: origin.to_string(),
                line: line_no,
                message: e.to_string(),
            })?;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(list) = rest.trim().strip_prefix("universe:") {
                    if n != 0 {
                        return Err(parse_error(origin, line_no, "universe line must come first"));
                    }
                    for label in split_labels(list) {
                        if index.insert(label.clone(), universe.len()).is_some() {
                            return Err(parse_error(
                                origin,
                                line_no,
                                format!("duplicate label `{label}` in universe"),
                            ));
                        }
                        universe.push(label);
                    }
                    fixed_universe = true;
                }
                continue;
            }
            raw_sets.push((line_no, split_labels(line)));
        }

        let mut sets = Vec::with_capacity(raw_sets.len());
        for (line_no, labels) in raw_sets {
            let mut indices = Vec::with_capacity(labels.len());
            for label in labels {
                let idx = match index.get(&label) {
                    Some(&i) => i,
                    None if fixed_universe => {
                        return Err(parse_error(origin, line_no, format!("label `{label}` not in universe")))
                    }
                    None => {
                        index.insert(label.clone(), universe.len());
                        universe.push(label);
                        universe.len() - 1
                    }
                };
                indices.push(idx);
            }
            let set =
                HypothesisSet::new(indices, usize::MAX).map_err(|e| parse_error(origin, line_no, e.to_string()))?;
            sets.push(set);
        }
        let family = SetFamily::new(universe.len(), sets).map_err(|e| Error::Parse {
            path: origin.to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        Ok((family, universe))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(SetFamily, Vec<String>)> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_text(std::io::BufReader::new(file), &path.display().to_string())
    }
}

fn split_labels(line: &str) -> Vec<String> {
    line.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_error(origin: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: origin.to_string(),
        line,
        message: message.into(),
    }
}
