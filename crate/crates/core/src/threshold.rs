//! Exact evaluation of Simes-type threshold comparisons `p <= i * alpha / k`.
//!
//! Both `p` and `alpha` are binary fractions, so the comparison
//! `p * k <= alpha * i` has an exact answer. Evaluating it in integer
//! arithmetic keeps every Simes decision identical whichever algebraic route
//! (closure, Hommel's h, the shortcut formula) produced the threshold.

/// Returns `p <= rank * alpha / size` evaluated exactly.
///
/// `p` must be finite and non-negative, `alpha` finite and positive.
#[inline]
pub fn scaled_le(p: f64, size: u64, alpha: f64, rank: u64) -> bool {
    debug_assert!(p >= 0.0 && p.is_finite());
    debug_assert!(alpha > 0.0 && alpha.is_finite());
    debug_assert!((1..1 << 32).contains(&size) && rank < (1 << 32));
    if p == 0.0 {
        return true;
    }
    if rank == 0 {
        return false;
    }
    let (mp, ep) = decompose(p);
    let (ma, ea) = decompose(alpha);
    let lhs = mp as u128 * size as u128;
    let rhs = ma as u128 * rank as u128;
    // Compare lhs * 2^ep against rhs * 2^ea.
    let top_l = bit_len(lhs) as i64 + ep;
    let top_r = bit_len(rhs) as i64 + ea;
    if top_l != top_r {
        return top_l < top_r;
    }
    // Equal magnitudes: the exponent gap is at most the operand bit length,
    // so the shift stays within 128 bits.
    if ep >= ea {
        (lhs << (ep - ea)) <= rhs
    } else {
        lhs <= (rhs << (ea - ep))
    }
}

/// `x = mantissa * 2^exponent` for finite positive `x`.
fn decompose(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    }
}

fn bit_len(x: u128) -> u32 {
    128 - x.leading_zeros()
}

/// Smallest `rank >= 1` with `p <= rank * alpha / size`, or `None` if it
/// exceeds `limit`.
pub fn min_rank(p: f64, size: u64, alpha: f64, limit: u64) -> Option<u64> {
    if limit == 0 {
        return None;
    }
    let guess = (p * size as f64 / alpha).ceil();
    if guess.is_nan() || guess > limit as f64 + 1.0 {
        // Far beyond the limit; confirm at the limit itself.
        return scaled_le(p, size, alpha, limit).then_some(limit);
    }
    let mut r = (guess as u64).clamp(1, limit);
    while r > 1 && scaled_le(p, size, alpha, r - 1) {
        r -= 1;
    }
    while r <= limit && !scaled_le(p, size, alpha, r) {
        r += 1;
    }
    (r <= limit).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_ties_count_as_le() {
        assert!(scaled_le(0.025, 2, 0.05, 1));
        assert!(scaled_le(0.05, 1, 0.05, 1));
        assert!(!scaled_le(0.03, 2, 0.05, 1));
        // 0.1 * 3 is not exactly 0.3 in binary; the stored values decide.
        assert_eq!(scaled_le(0.1, 3, 0.3, 1), exact_slow(0.1, 3, 0.3, 1));
        assert!(!scaled_le(0.1, 3, 0.3, 1));
    }

    fn exact_slow(p: f64, size: u64, alpha: f64, rank: u64) -> bool {
        // Rational comparison through scaling both sides by 2^1100.
        let (mp, ep) = decompose(p);
        let (ma, ea) = decompose(alpha);
        let l = num_like(mp as u128 * size as u128, ep);
        let r = num_like(ma as u128 * rank as u128, ea);
        l <= r
    }

    /// Big-ish fixed point: value * 2^1100 as a vector of u64 limbs (little endian).
    fn num_like(m: u128, e: i64) -> Vec<u64> {
        let shift = (e + 1100) as usize;
        let mut limbs = vec![0u64; 40];
        let word = shift / 64;
        let bit = shift % 64;
        let lo = m as u64;
        let hi = (m >> 64) as u64;
        let add = |limbs: &mut Vec<u64>, idx: usize, v: u64| {
            limbs[idx] |= v;
        };
        add(&mut limbs, word, lo << bit);
        if bit > 0 {
            add(&mut limbs, word + 1, (lo >> (64 - bit)) | (hi << bit));
            add(&mut limbs, word + 2, hi >> (64 - bit));
        } else {
            add(&mut limbs, word + 1, hi);
        }
        limbs.reverse();
        limbs
    }

    proptest! {
        #[test]
        fn matches_wide_fixed_point(p in 0.0f64..=1.0, alpha in 1e-6f64..0.999,
                                    size in 1u64..5000, rank in 1u64..5000) {
            prop_assert_eq!(scaled_le(p, size, alpha, rank), exact_slow(p, size, alpha, rank));
        }

        #[test]
        fn agrees_with_float_away_from_ties(p in 0.0f64..=1.0, alpha in 1e-4f64..0.9,
                                             size in 1u64..1000, rank in 1u64..1000) {
            let t = rank as f64 * alpha / size as f64;
            prop_assume!((p - t).abs() > 1e-12 * t.max(1e-300));
            prop_assert_eq!(scaled_le(p, size, alpha, rank), p <= t);
        }

        #[test]
        fn min_rank_is_minimal(p in 0.0f64..=1.0, alpha in 1e-4f64..0.9, size in 1u64..2000) {
            let limit = 3000;
            match min_rank(p, size, alpha, limit) {
                Some(r) => {
                    prop_assert!(scaled_le(p, size, alpha, r));
                    prop_assert!(r == 1 || !scaled_le(p, size, alpha, r - 1));
                }
                None => prop_assert!(!scaled_le(p, size, alpha, limit)),
            }
        }
    }

    #[test]
    fn subnormals_and_extremes() {
        assert!(scaled_le(f64::MIN_POSITIVE / 4.0, 1_000_000, 1e-300, 1));
        assert!(!scaled_le(1.0, 1, 0.999_999, 1));
        assert!(scaled_le(1e-300, 1, 1e-300, 1));
        assert!(!scaled_le(1e-300, 2, 1e-300, 1));
    }
}
