//! Exact closed testing over every intersection hypothesis.
//!
//! Subsets are m-bit masks. Any strict superset of a mask is numerically
//! larger, so visiting masks from `2^m - 1` down to `1` guarantees that all
//! immediate supersets are decided before the mask itself.

use bitvec::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::local_tests::{fisher_pvalue, simes_rejects_sorted};
use crate::study::{AnalysisConfig, HypothesisSet, LocalTest, PValueStudy};

/// Closed-testing rejections for every nonempty subset of a small study.
#[derive(Clone, Debug)]
pub struct ClosureMap {
    m: usize,
    alpha: f64,
    local_test: LocalTest,
    /// Indexed by mask; bit 0 (the empty set) is never set.
    rejected: BitVec<u64, Lsb0>,
}

/// A set `R` with its simultaneous lower bound `d` on false nulls in `R`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundResult {
    pub set: HypothesisSet,
    pub d: usize,
    pub alpha: f64,
}

/// Runs exact closed testing. Refuses studies larger than the configured cap.
pub fn full_closure(study: &PValueStudy, config: &AnalysisConfig) -> Result<ClosureMap> {
    let m = study.m();
    if m > config.closure_cap() {
        return Err(Error::CapExceeded {
            m,
            cap: config.closure_cap(),
        });
    }
    let alpha = config.alpha();
    let p = study.pvalues();

    // Hypothesis indices in ascending p-value order, so that walking a mask's
    // bits in this order yields its p-values sorted.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));

    let full: u64 = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut rejected: BitVec<u64, Lsb0> = bitvec![u64, Lsb0; 0; (full as usize) + 1];

    for mask in (1..=full).rev() {
        let supersets_rejected = (0..m)
            .filter(|&j| mask & (1 << j) == 0)
            .all(|j| rejected[(mask | (1 << j)) as usize]);
        if !supersets_rejected {
            continue;
        }
        let k = mask.count_ones() as usize;
        let members = order.iter().filter(|&&i| mask & (1 << i) != 0).map(|&i| p[i]);
        let local = match config.local_test() {
            LocalTest::Simes => simes_rejects_sorted(members, k, alpha),
            LocalTest::Fisher => fisher_pvalue(members, k) <= alpha,
        };
        if local {
            rejected.set(mask as usize, true);
        }
    }

    Ok(ClosureMap {
        m,
        alpha,
        local_test: config.local_test(),
        rejected,
    })
}

impl ClosureMap {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn local_test(&self) -> LocalTest {
        self.local_test
    }

    fn full_mask(&self) -> u64 {
        (1u64 << self.m) - 1
    }

    /// Whether the intersection hypothesis for `mask` is rejected by closed
    /// testing. The empty mask is never rejected.
    pub fn is_rejected(&self, mask: u64) -> bool {
        mask != 0 && mask <= self.full_mask() && self.rejected[mask as usize]
    }

    pub fn rejected_count(&self) -> usize {
        self.rejected.count_ones()
    }

    fn check_range(&self, set: &HypothesisSet) -> Result<()> {
        match set.indices().last() {
            Some(&i) if i >= self.m => Err(Error::Contract(format!(
                "hypothesis {i} out of range for m = {}",
                self.m
            ))),
            _ => Ok(()),
        }
    }

    /// `d(R) = |R| - max{|I| : I ⊆ R nonempty, H_I not rejected}`, with the
    /// maximum taken as 0 when every nonempty subset is rejected.
    pub fn discovery_bound(&self, set: &HypothesisSet) -> Result<BoundResult> {
        self.check_range(set)?;
        let r = set.to_mask();
        Ok(BoundResult {
            set: set.clone(),
            d: set.len() - self.largest_unrejected_subset(r),
            alpha: self.alpha,
        })
    }

    pub(crate) fn largest_unrejected_subset(&self, r: u64) -> usize {
        let mut best = 0u32;
        let mut sub = r;
        while sub != 0 {
            let size = sub.count_ones();
            if size > best && !self.rejected[sub as usize] {
                best = size;
            }
            sub = (sub - 1) & r;
        }
        best as usize
    }

    /// Inclusion-minimal rejected subsets. Because rejections are upward
    /// closed, checking the immediate subsets of a mask suffices.
    pub fn defining_family(&self) -> SetFamily {
        let minimal = (1..=self.full_mask()).filter(|&mask| {
            self.rejected[mask as usize] && {
                let mut bits = mask;
                let mut all_below_accepted = true;
                while bits != 0 {
                    let low = bits & bits.wrapping_neg();
                    bits ^= low;
                    let below = mask ^ low;
                    if below != 0 && self.rejected[below as usize] {
                        all_below_accepted = false;
                        break;
                    }
                }
                all_below_accepted
            }
        });
        SetFamily::from_antichain_masks(self.m, minimal)
    }
}

/// Computes `d(R)` from a defining family alone: a subset of `R` is
/// unrejected exactly when it contains no family member, so `d(R)` is the
/// size of a smallest subset of `R` that hits every member contained in `R`.
pub fn bound_from_defining(family: &SetFamily, set: &HypothesisSet, alpha: f64) -> Result<BoundResult> {
    if let Some(&i) = set.indices().last() {
        if i >= family.m() {
            return Err(Error::Contract(format!(
                "hypothesis {i} out of range for m = {}",
                family.m()
            )));
        }
    }
    let r = set.to_mask();
    let inside: Vec<u64> = family.masks().into_iter().filter(|&d| d & r == d).collect();
    Ok(BoundResult {
        set: set.clone(),
        d: min_hitting_set_size(&inside),
        alpha,
    })
}

/// Size of a smallest set meeting every mask in `members` (branch and bound).
fn min_hitting_set_size(members: &[u64]) -> usize {
    fn search(members: &[u64], chosen: u64, size: usize, best: &mut usize) {
        if size >= *best {
            return;
        }
        let unhit = members
            .iter()
            .copied()
            .filter(|&d| d & chosen == 0)
            .min_by_key(|d| d.count_ones());
        let Some(target) = unhit else {
            *best = size;
            return;
        };
        if target == 0 {
            // Only the vacuous family contains the empty set; nothing hits it.
            return;
        }
        let mut bits = target;
        while bits != 0 {
            let low = bits & bits.wrapping_neg();
            bits ^= low;
            search(members, chosen | low, size + 1, best);
        }
    }
    let mut best = usize::MAX;
    search(members, 0, 0, &mut best);
    best
}
