//! k-generalized Fibonacci sequences over arbitrary-precision integers.
//!
//! Each term past the seed window is the sum of the `k` terms before it.
//! Ratios of successive terms are formed as exact big-integer quotients and
//! only then rounded to `f64`, so their convergence to the k-nacci constant
//! can be observed down to binary64 resolution.

use std::ops::Range;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};

use crate::{Error, Result};

/// Hard stop for [`converged_ratio`] when no limit is given.
pub const DEFAULT_MAX_TERMS: usize = 10_000;

const RATIO_FRACTION_BITS: u64 = 128;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnacciSequence {
    k: usize,
    terms: Vec<BigUint>,
}

impl KnacciSequence {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seeds(&self) -> &[BigUint] {
        &self.terms[..self.k]
    }

    pub fn terms(&self) -> &[BigUint] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Appends terms until the sequence holds `count` of them.
    pub fn extend_to(&mut self, count: usize) {
        if count <= self.terms.len() {
            return;
        }
        self.terms.reserve(count - self.terms.len());
        let n = self.terms.len();
        let mut window: BigUint = self.terms[n - self.k..].iter().sum();
        while self.terms.len() < count {
            let n = self.terms.len();
            let next = window.clone();
            window += &next;
            window -= &self.terms[n - self.k];
            self.terms.push(next);
        }
    }

    /// First index `n ≥ k` whose `k` predecessors are all positive.
    pub fn positive_window_start(&self) -> Option<usize> {
        let k = self.k;
        let mut run = 0;
        for (i, t) in self.terms.iter().enumerate() {
            run = if t.is_zero() { 0 } else { run + 1 };
            if run >= k && i + 1 >= k && i + 1 < self.terms.len() {
                return Some(i + 1);
            }
        }
        None
    }

    /// First index from which `F_{n−1} < F_n < 2 F_{n−1}` is guaranteed for
    /// `k > 1`: both `F_n` and `F_{n−1}` are sums over positive windows.
    pub fn ratio_bound_start(&self) -> Option<usize> {
        self.positive_window_start()
            .map(|n| n + 1)
            .filter(|&n| n < self.terms.len())
    }

    /// `F_n / F_{n−1}` rounded to the nearest `f64`.
    pub fn ratio(&self, n: usize) -> Result<f64> {
        if n == 0 || n >= self.terms.len() {
            return Err(Error::InvalidSeeds(format!(
                "ratio index {n} outside 1..{}",
                self.terms.len()
            )));
        }
        exact_ratio(&self.terms[n], &self.terms[n - 1]).ok_or(Error::ZeroDenominator(n - 1))
    }

    /// Indices `n` with `F_n == 2 F_{n−1}` and `F_{n−1} > 0`, as one
    /// contiguous run starting at the first such index.
    pub fn exact_doubling_run(&self) -> Range<usize> {
        let doubles = |n: usize| {
            let prev = &self.terms[n - 1];
            !prev.is_zero() && self.terms[n] == prev << 1u32
        };
        let start = (1..self.terms.len()).find(|&n| doubles(n));
        match start {
            Some(start) => {
                let end = (start..self.terms.len())
                    .find(|&n| !doubles(n))
                    .unwrap_or(self.terms.len());
                start..end
            }
            None => 0..0,
        }
    }
}

/// The first `count` terms of the order-`k` recurrence started from `seeds`.
pub fn generate(k: usize, seeds: &[BigInt], count: usize) -> Result<KnacciSequence> {
    if k == 0 {
        return Err(Error::InvalidSeeds("order k must be at least 1".into()));
    }
    if seeds.len() != k {
        return Err(Error::InvalidSeeds(format!(
            "expected {k} seeds, got {}",
            seeds.len()
        )));
    }
    if count < k {
        return Err(Error::InvalidSeeds(format!(
            "count {count} is shorter than the seed window {k}"
        )));
    }
    let mut terms = Vec::with_capacity(count);
    for s in seeds {
        match s.sign() {
            Sign::Minus => return Err(Error::InvalidSeeds(format!("negative seed {s}"))),
            _ => terms.push(s.magnitude().clone()),
        }
    }
    if terms.iter().all(Zero::is_zero) {
        return Err(Error::InvalidSeeds("all seeds are zero".into()));
    }
    let mut seq = KnacciSequence { k, terms };
    seq.extend_to(count);
    Ok(seq)
}

/// Seeds `1, 1, …, 1`.
pub fn ones_seeds(k: usize) -> Vec<BigInt> {
    vec![BigInt::from(1); k]
}

/// Seeds `0, …, 0, 1` (`k − 1` zeros).
pub fn doubling_seeds(k: usize) -> Vec<BigInt> {
    let mut seeds = vec![BigInt::zero(); k.saturating_sub(1)];
    seeds.push(BigInt::from(1));
    seeds
}

/// The sequence seeded with `k − 1` zeros and a single 1, together with the
/// index range over which successive ratios are exactly 2.
///
/// The run of exact doublings lasts `k − 1` steps, until the leading zeros
/// have left the window.
pub fn doubling_prefix(k: usize, count: usize) -> Result<(KnacciSequence, Range<usize>)> {
    let seq = generate(k, &doubling_seeds(k), count.max(k))?;
    let run = seq.exact_doubling_run();
    Ok((seq, run))
}

/// Limit of successive ratios for the `0, …, 0, 1` seeded sequence.
pub fn converged_ratio(k: usize, tol: f64, max_terms: usize) -> Result<f64> {
    converged_ratio_from(k, &doubling_seeds(k), tol, max_terms)
}

/// Extends the sequence until `|r_n − r_{n−1}| < tol` holds for `k`
/// consecutive indices past the positive window, and returns the last ratio.
pub fn converged_ratio_from(
    k: usize,
    seeds: &[BigInt],
    tol: f64,
    max_terms: usize,
) -> Result<f64> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let mut seq = generate(k, seeds, k)?;
    let mut previous: Option<f64> = None;
    let mut settled = 0;
    let mut n = k;
    while n < max_terms {
        seq.extend_to(n + 1);
        let window_positive = seq.terms[n - k..n].iter().all(|t| !t.is_zero());
        if window_positive {
            let r = seq.ratio(n)?;
            if let Some(prev) = previous {
                if (r - prev).abs() < tol {
                    settled += 1;
                    if settled >= k {
                        return Ok(r);
                    }
                } else {
                    settled = 0;
                }
            }
            previous = Some(r);
        }
        n += 1;
    }
    Err(Error::NotConverged { max_terms })
}

/// `num / den` rounded to nearest, or `None` when `den` is zero.
fn exact_ratio(num: &BigUint, den: &BigUint) -> Option<f64> {
    if den.is_zero() {
        return None;
    }
    let shifted = num << RATIO_FRACTION_BITS;
    let mut quotient = &shifted / den;
    // Sticky bit: `to_f64` rounds to nearest from the high bits and this
    // keeps an inexact quotient from looking like an exact tie.
    if !(&shifted % den).is_zero() {
        quotient |= BigUint::from(1u32);
    }
    let value = quotient.to_f64()?;
    Some(value * 2f64.powi(-(RATIO_FRACTION_BITS as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance_poly::knacci_constant;
    use proptest::prelude::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn as_u64(seq: &KnacciSequence) -> Vec<u64> {
        seq.terms().iter().map(|t| t.to_u64().unwrap()).collect()
    }

    #[test]
    fn fibonacci_and_tribonacci() {
        let fib = generate(2, &big(&[1, 1]), 9).unwrap();
        assert_eq!(as_u64(&fib), vec![1, 1, 2, 3, 5, 8, 13, 21, 34]);
        let trib = generate(3, &big(&[0, 0, 1]), 9).unwrap();
        assert_eq!(as_u64(&trib), vec![0, 0, 1, 1, 2, 4, 7, 13, 24]);
    }

    #[test]
    fn rejects_bad_seeds() {
        assert!(matches!(generate(3, &big(&[0, 0, 0]), 9), Err(Error::InvalidSeeds(_))));
        assert!(matches!(generate(3, &big(&[0, 0, 0, 1]), 9), Err(Error::InvalidSeeds(_))));
        assert!(matches!(generate(2, &big(&[1, -1]), 9), Err(Error::InvalidSeeds(_))));
        assert!(matches!(generate(2, &big(&[1, 1]), 1), Err(Error::InvalidSeeds(_))));
        assert!(matches!(generate(0, &[], 3), Err(Error::InvalidSeeds(_))));
    }

    #[test]
    fn doubling_presets() {
        let (s4, run4) = doubling_prefix(4, 9).unwrap();
        assert_eq!(as_u64(&s4)[..8], [0, 0, 0, 1, 1, 2, 4, 8]);
        assert_eq!(run4, 5..8);
        let (s2, _) = doubling_prefix(2, 6).unwrap();
        assert_eq!(as_u64(&s2), vec![0, 1, 1, 2, 3, 5]);
        let (s1, run1) = doubling_prefix(1, 5).unwrap();
        assert_eq!(as_u64(&s1), vec![1, 1, 1, 1, 1]);
        assert!(run1.is_empty());
        for k in 2..=12 {
            let (_, run) = doubling_prefix(k, 3 * k).unwrap();
            assert_eq!(run.len(), k - 1, "k = {k}");
        }
    }

    #[test]
    fn ratio_examples() {
        let fib = generate(2, &big(&[1, 1]), 9).unwrap();
        assert_eq!(fib.ratio(8).unwrap(), 34.0 / 21.0);
        assert_eq!(fib.ratio(2).unwrap(), 2.0);
        let trib = generate(3, &big(&[0, 0, 1]), 9).unwrap();
        assert_eq!(trib.ratio(8).unwrap(), 24.0 / 13.0);
        assert!(matches!(trib.ratio(1), Err(Error::ZeroDenominator(0))));
    }

    #[test]
    fn ratio_of_huge_terms_stays_finite() {
        let fib = generate(2, &big(&[1, 1]), 3000).unwrap();
        let r = fib.ratio(2999).unwrap();
        assert_eq!(r, (1.0 + 5f64.sqrt()) / 2.0);
    }

    #[test]
    fn converged_ratio_examples() {
        let phi = converged_ratio(2, 1e-12, DEFAULT_MAX_TERMS).unwrap();
        assert!((phi - 1.618_033_988_749_895).abs() < 1e-11);
        let trib = converged_ratio(3, 1e-10, DEFAULT_MAX_TERMS).unwrap();
        let root = knacci_constant(3, 1e-12).unwrap().value;
        assert!((trib - root).abs() < 1e-9);
        assert_eq!(converged_ratio(1, 1e-12, DEFAULT_MAX_TERMS).unwrap(), 1.0);
    }

    #[test]
    fn converged_ratio_errors() {
        assert!(matches!(converged_ratio(5, 1e-12, 20), Err(Error::NotConverged { .. })));
        assert!(matches!(converged_ratio(2, 0.0, 100), Err(Error::InvalidTolerance(_))));
    }

    #[test]
    fn matches_polynomial_root() {
        for k in 1..=10 {
            let from_seq = converged_ratio(k, 1e-12, DEFAULT_MAX_TERMS).unwrap();
            let root = knacci_constant(k, 1e-12).unwrap().value;
            assert!((from_seq - root).abs() < 1e-9, "k = {k}");
        }
    }

    #[test]
    fn positive_window() {
        let (s, _) = doubling_prefix(4, 12).unwrap();
        assert_eq!(s.positive_window_start(), Some(7));
        let fib = generate(2, &big(&[1, 1]), 5).unwrap();
        assert_eq!(fib.positive_window_start(), Some(2));
    }

    proptest! {
        #[test]
        fn recurrence_and_bounds(
            k in 1usize..=8,
            seeds in proptest::collection::vec(1u64..1_000_000, 8),
            count in 20usize..120,
        ) {
            let seeds: Vec<BigInt> = seeds[..k].iter().map(|&s| BigInt::from(s)).collect();
            let seq = generate(k, &seeds, count).unwrap();
            let t = seq.terms();
            for n in k..t.len() {
                let sum: BigUint = t[n - k..n].iter().sum();
                prop_assert_eq!(&t[n], &sum);
                prop_assert!(t[n] >= t[n - 1]);
                if k > 1 {
                    prop_assert!(t[n] > t[n - 1]);
                }
            }
            let start = seq.ratio_bound_start().unwrap();
            prop_assert_eq!(start, k + 1);
            for n in start..t.len() {
                if k > 1 {
                    prop_assert!(t[n] < &t[n - 1] << 1u32);
                }
            }
        }

        #[test]
        fn limit_is_seed_independent(
            k in 2usize..=6,
            a in proptest::collection::vec(1u64..1000, 6),
            b in proptest::collection::vec(1u64..1000, 6),
        ) {
            let sa: Vec<BigInt> = a[..k].iter().map(|&s| BigInt::from(s)).collect();
            let sb: Vec<BigInt> = b[..k].iter().map(|&s| BigInt::from(s)).collect();
            let ra = converged_ratio_from(k, &sa, 1e-13, DEFAULT_MAX_TERMS).unwrap();
            let rb = converged_ratio_from(k, &sb, 1e-13, DEFAULT_MAX_TERMS).unwrap();
            prop_assert!((ra - rb).abs() < 1e-9);
        }
    }
}
