//! Lower and upper bounds on the number of weighings, in exact integer arithmetic.
//!
//! `lower_g(n)` is the least `k` with `3^k ≥ 2^n`. Computing `⌈n·log₃2⌉` in
//! floating point is off by one near integer boundaries, so the value is
//! bracketed with two rational approximations of `log₃2` whose direction is
//! proven by big-integer comparison, and settled by a direct `3^k` vs `2^n`
//! comparison whenever the bracket straddles an integer.

use std::sync::OnceLock;

use num_bigint::BigUint;
use serde::Serialize;

/// Continued-fraction convergents of `log₃2` on either side of it.
const LOG3_2_BELOW: (u128, u128) = (190_537, 301_994);
const LOG3_2_ABOVE: (u128, u128) = (111_202, 176_251);

/// `3^k ≥ 2^n`, decided on bit lengths (`3^k` is odd, so never equal for `n ≥ 1`).
fn pow3_reaches_pow2(k: u64, n: u64) -> bool {
    if n == 0 {
        return true;
    }
    BigUint::from(3u32).pow(k as u32).bits() > n
}

fn bracket() -> ((u128, u128), (u128, u128)) {
    static CHECKED: OnceLock<bool> = OnceLock::new();
    let ok = *CHECKED.get_or_init(|| {
        // p/q < log₃2  ⇔  3^p < 2^q
        let (p, q) = LOG3_2_BELOW;
        let below = !pow3_reaches_pow2(p as u64, q as u64);
        let (p, q) = LOG3_2_ABOVE;
        let above = pow3_reaches_pow2(p as u64, q as u64);
        below && above
    });
    assert!(ok, "log3(2) bracket failed its exact check");
    (LOG3_2_BELOW, LOG3_2_ABOVE)
}

fn ceil_div(a: u128, b: u128) -> u128 {
    a.div_ceil(b)
}

/// Least `k` with `3^k ≥ 2^n`: the information bound with reference coins.
pub fn lower_g(n: u64) -> u64 {
    let ((pl, ql), (ph, qh)) = bracket();
    let n128 = n as u128;
    let lo = ceil_div(n128 * pl, ql) as u64;
    let hi = ceil_div(n128 * ph, qh) as u64;
    if lo == hi {
        return lo;
    }
    (lo..=hi)
        .find(|&k| pow3_reaches_pow2(k, n))
        .expect("bracket contains the answer")
}

/// Least `k` with `3^k ≥ 2^n − 1`: the information bound for sorting.
pub fn lower_gbar(n: u64) -> u64 {
    let k = lower_g(n);
    if k == 0 {
        return 0;
    }
    // 3^(k-1) < 2^n; it reaches 2^n - 1 only by equality. For n ≥ 3 the right side
    // is 7 mod 8 while powers of 3 are 1 or 3 mod 8.
    if n >= 3 {
        return k;
    }
    let lhs = BigUint::from(3u32).pow((k - 1) as u32);
    let rhs = (BigUint::from(1u32) << n) - 1u32;
    if lhs == rhs {
        k - 1
    } else {
        k
    }
}

/// `⌈7n/11⌉`.
pub fn upper(n: u64) -> u64 {
    (7 * n).div_ceil(11)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundsRow {
    pub n: u64,
    pub lower_g: u64,
    pub lower_gbar: u64,
    pub upper: u64,
}

impl BoundsRow {
    pub fn new(n: u64) -> BoundsRow {
        BoundsRow {
            n,
            lower_g: lower_g(n),
            lower_gbar: lower_gbar(n),
            upper: upper(n),
        }
    }

    /// Tab-separated: `n  lower_g  lower_gbar  upper`.
    pub fn to_tsv(&self) -> String {
        format!("{}\t{}\t{}\t{}", self.n, self.lower_g, self.lower_gbar, self.upper)
    }
}

pub fn table(from: u64, to: u64) -> Vec<BoundsRow> {
    (from..=to).map(BoundsRow::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent check: repeated multiplication on big integers.
    fn brute_lower(n: u64, minus_one: bool) -> u64 {
        let target = (BigUint::from(1u32) << n) - if minus_one { 1u32 } else { 0u32 };
        let mut p = BigUint::from(1u32);
        let mut k = 0;
        while p < target {
            p *= 3u32;
            k += 1;
        }
        k
    }

    #[test]
    fn examples() {
        assert_eq!(lower_g(1), 1);
        assert_eq!(lower_g(11), 7);
        assert_eq!(lower_g(3), 2);
        assert_eq!(lower_gbar(1), 0);
        assert_eq!(lower_gbar(11), 7);
        assert_eq!(lower_gbar(2), 1);
        assert_eq!(upper(11), 7);
        assert_eq!(upper(25), 16);
        assert_eq!(upper(3), 2);
        assert_eq!(BoundsRow::new(19).to_tsv(), "19\t12\t12\t13");
    }

    #[test]
    fn matches_brute_force_to_600() {
        for n in 1..=600 {
            assert_eq!(lower_g(n), brute_lower(n, false), "lower_g({n})");
            assert_eq!(lower_gbar(n), brute_lower(n, true), "lower_gbar({n})");
        }
    }

    #[test]
    fn bracket_straddles_are_settled_exactly() {
        // multiples of the convergent denominators sit closest to integers
        for n in [176_251u64, 301_994, 478_245, 603_988] {
            let k = lower_g(n) as u32;
            let two = BigUint::from(1u32) << n;
            assert!(BigUint::from(3u32).pow(k) >= two, "n = {n}");
            assert!(BigUint::from(3u32).pow(k - 1) < two, "n = {n}");
        }
    }

    #[test]
    fn upper_steps_by_seven_per_block() {
        for n in 1..5000 {
            assert_eq!(upper(n + 11), upper(n) + 7);
        }
    }
}
