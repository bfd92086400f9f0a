//! Brute-force oracles shared by the integration suites. Nothing here calls
//! the closure, shortcut or dualization code paths under test.

#![allow(dead_code)]

use discovery_bounds::{derive_stream, fisher_local, LocalTest, RngStream};
use num::rational::BigRational;
use num::BigInt;

/// Simes local test in exact rational arithmetic: some `p_(i) * k <= i * alpha`.
pub fn simes_exact(pvalues: &[f64], alpha: f64) -> bool {
    let mut sorted: Vec<BigRational> = pvalues.iter().map(|&p| rational(p)).collect();
    sorted.sort();
    let a = rational(alpha);
    let k = BigInt::from(sorted.len());
    sorted
        .iter()
        .enumerate()
        .any(|(i, p)| p * BigRational::from_integer(k.clone()) <= &a * BigRational::from_integer(BigInt::from(i + 1)))
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Closed testing by definition: `I` is rejected iff the local test rejects
/// every `J ⊇ I`. Returns a vector indexed by mask.
pub fn closure_oracle(pvalues: &[f64], alpha: f64, test: LocalTest) -> Vec<bool> {
    let m = pvalues.len();
    let full = (1usize << m) - 1;
    let local: Vec<bool> = (0..=full)
        .map(|mask| {
            if mask == 0 {
                return false;
            }
            let ps: Vec<f64> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| pvalues[i]).collect();
            match test {
                LocalTest::Simes => simes_exact(&ps, alpha),
                LocalTest::Fisher => fisher_local(&ps, alpha).unwrap().rejected,
            }
        })
        .collect();
    (0..=full)
        .map(|mask| {
            if mask == 0 {
                return false;
            }
            // Enumerate supersets J = mask | extra, extra ⊆ complement.
            let comp = full & !mask;
            let mut extra = comp;
            loop {
                if !local[mask | extra] {
                    return false;
                }
                if extra == 0 {
                    return true;
                }
                extra = (extra - 1) & comp;
            }
        })
        .collect()
}

/// `d(R)` straight from the definition.
pub fn bound_oracle(rejected: &[bool], r: usize) -> usize {
    let mut best = 0;
    for (i, &rej) in rejected.iter().enumerate().skip(1) {
        if i & !r == 0 && !rej {
            best = best.max(i.count_ones() as usize);
        }
    }
    r.count_ones() as usize - best
}

/// Minimal rejected masks.
pub fn minimal_rejected(rejected: &[bool]) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for a in 1..rejected.len() {
        if rejected[a] && !(1..rejected.len()).any(|b| b != a && b & a == b && rejected[b]) {
            out.push(a as u64);
        }
    }
    out
}

/// All inclusion-minimal sets over `m` hypotheses meeting every member.
pub fn brute_transversals(members: &[u64], m: usize) -> Vec<u64> {
    let hitting: Vec<u64> = (0..1u64 << m)
        .filter(|&t| members.iter().all(|&d| d & t != 0))
        .collect();
    let mut minimal: Vec<u64> = hitting
        .iter()
        .copied()
        .filter(|&t| !hitting.iter().any(|&s| s != t && s & t == s))
        .collect();
    minimal.sort_by_key(|&t| (t.count_ones(), mask_indices(t)));
    minimal
}

pub fn mask_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

/// Random p-value drawn from a mixture with exact ties, zeros, ones and
/// values sitting exactly on Simes thresholds.
pub fn mixture_pvalue(stream: &mut RngStream, alpha: f64, m: usize) -> f64 {
    let u = stream.uniform();
    let v = stream.uniform();
    if u < 0.10 {
        0.0
    } else if u < 0.20 {
        1.0
    } else if u < 0.40 {
        let k = 1 + (v * m as f64) as usize % m.max(1);
        let j = 1 + (stream.uniform() * k as f64) as usize % k;
        j as f64 * alpha / k as f64
    } else if u < 0.50 {
        [0.001, 0.005, 0.01, 0.02][(v * 4.0) as usize % 4]
    } else if u < 0.80 {
        v * alpha
    } else {
        v
    }
}

pub fn random_instance(seed: u64, id: u64, max_m: usize, alpha: f64) -> Vec<f64> {
    let mut s = derive_stream(seed, id);
    let m = 1 + (s.next_u64() % max_m as u64) as usize;
    (0..m).map(|_| mixture_pvalue(&mut s, alpha, m)).collect()
}

/// A random antichain of nonempty sets over `m` hypotheses.
pub fn random_antichain(stream: &mut RngStream, m: usize) -> Vec<u64> {
    let n = 1 + (stream.next_u64() % 8) as usize;
    let density = 0.15 + 0.5 * stream.uniform();
    let mut sets: Vec<u64> = (0..n)
        .map(|_| {
            let mut s = 0u64;
            for i in 0..m {
                if stream.uniform() < density {
                    s |= 1 << i;
                }
            }
            if s == 0 {
                s = 1 << (stream.next_u64() % m as u64);
            }
            s
        })
        .collect();
    sets.sort_unstable();
    sets.dedup();
    let minimal: Vec<u64> = sets
        .iter()
        .copied()
        .filter(|&a| !sets.iter().any(|&b| b != a && b & a == b))
        .collect();
    minimal
}

/// Tail of the chi-square density with `2k` df over `[x, 400]` by composite
/// Simpson integration on panels of width 0.5 (50 subintervals each),
/// evaluated on the grid `x = 0, 0.5, ..., 100`.
pub fn chisq_tail_by_quadrature(k: usize) -> Vec<(f64, f64)> {
    let log_norm = -(k as f64) * 2f64.ln() - (1..k).map(|j| (j as f64).ln()).sum::<f64>();
    let density = |y: f64| {
        if y <= 0.0 {
            return if k == 1 { 0.5 } else { 0.0 };
        }
        (log_norm + (k as f64 - 1.0) * y.ln() - y / 2.0).exp()
    };
    let panel = |a: f64| {
        let n = 50;
        let h = 0.5 / n as f64;
        let mut s = density(a) + density(a + 0.5);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * density(a + i as f64 * h);
        }
        s * h / 3.0
    };
    let mut tail = 0.0;
    let mut out = Vec::new();
    let mut a = 399.5;
    while a >= -1e-9 {
        tail += panel(a);
        if a <= 100.0 + 1e-9 {
            out.push(((a * 2.0).round() / 2.0, tail));
        }
        a -= 0.5;
    }
    out.reverse();
    out
}
