//! Large-scale Simes closed testing without enumerating intersections.
//!
//! Preprocessing sorts the p-values and finds Hommel's `h`, the size of the
//! largest intersection hypothesis that Simes-based closed testing does not
//! reject. Given `h`, the bound for any set `R` is
//!
//! ```text
//! d(R) = max(0, max_{1 <= u <= |R|} 1 - u + #{i in R : p_i <= u * alpha / h})
//! ```
//!
//! and `d(R) = |R|` when `h = 0`. All threshold comparisons go through
//! [`scaled_le`], the same exact predicate the closure engine uses.

use crate::closure::BoundResult;
use crate::error::{Error, Result};
use crate::study::{validate_alpha, HypothesisSet, PValueStudy};
use crate::threshold::{min_rank, scaled_le};

/// Immutable preprocessed state answering bound queries at any scale.
#[derive(Clone, Debug)]
pub struct SimesShortcutState {
    alpha: f64,
    pvalues: Vec<f64>,
    sorted: Vec<f64>,
    order: Vec<usize>,
    h: usize,
}

/// Sorts the p-values and computes `h` in a single scan over the sorted list.
pub fn preprocess(study: &PValueStudy, alpha: f64) -> Result<SimesShortcutState> {
    validate_alpha(alpha)?;
    let pvalues = study.pvalues().to_vec();
    let mut order: Vec<usize> = (0..pvalues.len()).collect();
    order.sort_unstable_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| pvalues[i]).collect();
    let h = hommel_h(&sorted, alpha);
    Ok(SimesShortcutState {
        alpha,
        pvalues,
        sorted,
        order,
        h,
    })
}

/// `h = max{i : p_(m-i+j) > j * alpha / i for all j = 1..i}` over ascending `sorted`.
///
/// Whether `i` is feasible is monotone in `i`. Adding the `i`-th largest
/// p-value `p` (with `s = i - 1` values above it) imposes `i < s * alpha / (alpha - p)`
/// on every larger `i`, so a scan keeping the tightest such bound finds `h`.
/// The scan runs in floating point; the candidate is then confirmed (and
/// nudged if rounding misled it) with the exact predicate.
pub(crate) fn hommel_h(sorted: &[f64], alpha: f64) -> usize {
    let m = sorted.len();
    let mut bound = f64::INFINITY;
    let mut candidate = 0;
    for i in 1..=m {
        let p = sorted[m - i];
        let s = (i - 1) as f64;
        let limit = if p > alpha {
            f64::INFINITY
        } else if i == 1 {
            0.0
        } else if p == alpha {
            f64::INFINITY
        } else {
            s * alpha / (alpha - p)
        };
        bound = bound.min(limit);
        if (i as f64) < bound {
            candidate = i;
        } else {
            break;
        }
    }

    let mut h = candidate;
    while h > 0 && !h_feasible(sorted, alpha, h) {
        h -= 1;
    }
    while h < m && h_feasible(sorted, alpha, h + 1) {
        h += 1;
    }
    h
}

fn h_feasible(sorted: &[f64], alpha: f64, i: usize) -> bool {
    let top = &sorted[sorted.len() - i..];
    top.iter()
        .enumerate()
        .all(|(j, &p)| !scaled_le(p, i as u64, alpha, j as u64 + 1))
}

impl SimesShortcutState {
    pub fn m(&self) -> usize {
        self.pvalues.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Size of the largest intersection not rejected by closed testing.
    pub fn h(&self) -> usize {
        self.h
    }

    /// P-values in ascending order.
    pub fn sorted_pvalues(&self) -> &[f64] {
        &self.sorted
    }

    /// Original hypothesis index of each entry of [`Self::sorted_pvalues`].
    pub fn sorted_order(&self) -> &[usize] {
        &self.order
    }

    fn check_ids(&self, ids: &[usize]) -> Result<()> {
        if let Some(&bad) = ids.iter().find(|&&i| i >= self.m()) {
            return Err(Error::Contract(format!(
                "hypothesis {bad} out of range for m = {}",
                self.m()
            )));
        }
        Ok(())
    }

    /// Lower bound on false nulls in `set`, identical to exact Simes closed testing.
    pub fn shortcut_bound(&self, set: &HypothesisSet) -> Result<BoundResult> {
        self.check_ids(set.indices())?;
        let mut q: Vec<f64> = set.iter().map(|i| self.pvalues[i]).collect();
        q.sort_unstable_by(f64::total_cmp);
        Ok(BoundResult {
            set: set.clone(),
            d: self.bound_sorted(&q),
            alpha: self.alpha,
        })
    }

    /// Bound over the full study.
    pub fn full_bound(&self) -> usize {
        self.bound_sorted(&self.sorted)
    }

    fn bound_sorted(&self, q: &[f64]) -> usize {
        let r = q.len();
        if self.h == 0 {
            return r;
        }
        let h = self.h as u64;
        let mut count = 0usize;
        let mut best = 0i64;
        for u in 1..=r {
            while count < r && scaled_le(q[count], h, self.alpha, u as u64) {
                count += 1;
            }
            best = best.max(1 + count as i64 - u as i64);
            if count == r {
                // Later u only subtract.
                break;
            }
        }
        best as usize
    }

    /// Bounds for every prefix of a ranking: element `k` is the bound for the
    /// first `k + 1` ids. Runs in `O(n log n)` with a range-add/range-max tree.
    pub fn bound_curve(&self, ordered_ids: &[usize]) -> Result<Vec<usize>> {
        self.check_ids(ordered_ids)?;
        let mut seen = vec![false; self.m()];
        for &i in ordered_ids {
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Contract(format!("hypothesis {i} appears twice in the ranking")));
            }
        }
        let n = ordered_ids.len();
        if self.h == 0 {
            return Ok((1..=n).collect());
        }
        // Slot u-1 holds 1 - u + c(u), where c(u) counts added ids with
        // p <= u * alpha / h. An id first counts at its minimal rank.
        let mut tree = MaxAddTree::new((1..=n).map(|u| 1 - u as i64).collect());
        let mut curve = Vec::with_capacity(n);
        for (k, &i) in ordered_ids.iter().enumerate() {
            if let Some(u) = min_rank(self.pvalues[i], self.h as u64, self.alpha, n as u64) {
                tree.add(u as usize - 1, n, 1);
            }
            curve.push(tree.max(0, k + 1).max(0) as usize);
        }
        Ok(curve)
    }
}

/// Segment tree over `i64` with range add and range max (half-open ranges).
struct MaxAddTree {
    n: usize,
    max: Vec<i64>,
    lazy: Vec<i64>,
}

impl MaxAddTree {
    fn new(values: Vec<i64>) -> Self {
        let n = values.len();
        let mut t = MaxAddTree {
            n,
            max: vec![i64::MIN; 4 * n.max(1)],
            lazy: vec![0; 4 * n.max(1)],
        };
        if n > 0 {
            t.build(1, 0, n, &values);
        }
        t
    }

    fn build(&mut self, node: usize, lo: usize, hi: usize, values: &[i64]) {
        if hi - lo == 1 {
            self.max[node] = values[lo];
            return;
        }
        let mid = (lo + hi) / 2;
        self.build(2 * node, lo, mid, values);
        self.build(2 * node + 1, mid, hi, values);
        self.max[node] = self.max[2 * node].max(self.max[2 * node + 1]);
    }

    fn add(&mut self, from: usize, to: usize, delta: i64) {
        if from < to {
            self.add_rec(1, 0, self.n, from, to, delta);
        }
    }

    fn add_rec(&mut self, node: usize, lo: usize, hi: usize, from: usize, to: usize, delta: i64) {
        if to <= lo || hi <= from {
            return;
        }
        if from <= lo && hi <= to {
            self.max[node] += delta;
            self.lazy[node] += delta;
            return;
        }
        let mid = (lo + hi) / 2;
        self.add_rec(2 * node, lo, mid, from, to, delta);
        self.add_rec(2 * node + 1, mid, hi, from, to, delta);
        self.max[node] = self.max[2 * node].max(self.max[2 * node + 1]) + self.lazy[node];
    }

    fn max(&self, from: usize, to: usize) -> i64 {
        self.max_rec(1, 0, self.n, from, to)
    }

    fn max_rec(&self, node: usize, lo: usize, hi: usize, from: usize, to: usize) -> i64 {
        if to <= lo || hi <= from {
            return i64::MIN;
        }
        if from <= lo && hi <= to {
            return self.max[node];
        }
        let mid = (lo + hi) / 2;
        let best = self
            .max_rec(2 * node, lo, mid, from, to)
            .max(self.max_rec(2 * node + 1, mid, hi, from, to));
        best.saturating_add(self.lazy[node])
    }
}
