//! The OR–AND view of a defining family: its minimal transversals (minimal
//! hitting sets), and conditioning on hypotheses known to be true nulls.

use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::study::HypothesisSet;

/// Default limit on the number of intermediate transversals.
pub const DEFAULT_EMIT_CAP: usize = 10_000;

/// Minimal transversals with the default emit cap.
pub fn minimal_transversals(family: &SetFamily) -> Result<SetFamily> {
    minimal_transversals_capped(family, DEFAULT_EMIT_CAP)
}

/// Berge dualization: fold in one member at a time, keeping transversals that
/// already hit it and extending the others by each of its elements, then drop
/// non-minimal sets. The empty family dualizes to `{∅}`.
///
/// Fails with [`Error::TooManyTransversals`] once an intermediate family
/// exceeds `cap` sets.
pub fn minimal_transversals_capped(family: &SetFamily, cap: usize) -> Result<SetFamily> {
    let mut members = family.masks();
    // Small members first keeps intermediate families small.
    members.sort_by_key(|d| (d.count_ones(), *d));

    let mut current: Vec<u64> = vec![0];
    for &d in &members {
        let mut next: Vec<u64> = Vec::with_capacity(current.len());
        let mut extended: Vec<u64> = Vec::new();
        for &t in &current {
            if t & d != 0 {
                next.push(t);
            } else {
                let mut bits = d;
                while bits != 0 {
                    let low = bits & bits.wrapping_neg();
                    bits ^= low;
                    extended.push(t | low);
                }
            }
        }
        // Kept sets are already pairwise incomparable; an extension survives
        // only if no kept set or other extension lies inside it.
        extended.sort_unstable_by_key(|t| (t.count_ones(), *t));
        extended.dedup();
        let kept = next.len();
        for t in extended {
            if next.iter().all(|&s| s & !t != 0) {
                next.push(t);
            }
        }
        debug_assert!(next[..kept].iter().all(|&a| next.iter().all(|&b| a == b || a & b != b)));
        if next.len() > cap {
            return Err(Error::TooManyTransversals { cap });
        }
        current = next;
    }
    Ok(SetFamily::from_antichain_masks(family.m(), current))
}

/// Drops transversals touching a known true null. Returns the survivors and
/// the union of their members (hypotheses still implicated).
pub fn condition_on_nulls(transversals: &SetFamily, known_nulls: &HypothesisSet) -> Result<(SetFamily, HypothesisSet)> {
    if let Some(&i) = known_nulls.indices().last() {
        if i >= transversals.m() {
            return Err(Error::Contract(format!(
                "hypothesis {i} out of range for m = {}",
                transversals.m()
            )));
        }
    }
    let nulls = known_nulls.to_mask();
    let survivors: Vec<u64> = transversals.masks().into_iter().filter(|&t| t & nulls == 0).collect();
    let union = survivors.iter().fold(0, |a, &b| a | b);
    Ok((
        SetFamily::from_antichain_masks(transversals.m(), survivors),
        HypothesisSet::from_mask(union),
    ))
}

/// True iff dualizing `transversals` gives back `family`.
pub fn verify_duality(family: &SetFamily, transversals: &SetFamily) -> bool {
    family.m() == transversals.m()
        && minimal_transversals_capped(transversals, usize::MAX)
            .map(|dual| dual == *family)
            .unwrap_or(false)
}
