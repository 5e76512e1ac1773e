//! Limiting probabilities for the cokernel of a random integer matrix,
//! evaluated as truncated infinite products with an explicit bound on the
//! omitted tail.
//!
//! Every product has the form `prod_j (1 - x_j)` with `0 < x_j < 1` and
//! `x_j` decaying geometrically. Truncation stops at the first `j` with
//! `|ln(1 - x_j)| < 1e-14`; the omitted log-mass is bounded by a geometric
//! series, and since the exact value equals the truncated value times
//! `exp(-tail)`, the absolute error is at most `value * tail`.

use alloc::vec::Vec;

use crate::{arith, Error, Result};

/// Stop multiplying once a pending factor changes the log by less than this.
pub const LOG_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub value: f64,
    /// Upper bound on `|value - exact|`, including a float rounding allowance.
    pub truncation_bound: f64,
    pub terms_used: usize,
}

/// Partial log-product `sum_{j >= start} ln(1 - r^j)` for `0 < r < 1`,
/// truncated by [`LOG_CUTOFF`]. Returns `(log, tail_bound, terms)` where
/// `tail_bound` bounds the omitted `|sum ln(1 - r^j)|`.
fn log_geometric_product(r: f64, start: u64) -> (f64, f64, usize) {
    let mut log = 0.0;
    let mut terms = 0;
    let mut j = start;
    loop {
        let x = libm::pow(r, j as f64);
        let l = libm::log1p(-x);
        if -l < LOG_CUTOFF {
            // |ln(1 - x)| <= x / (1 - x); summed over x = r^j, r^{j+1}, ...
            let tail = x / ((1.0 - x) * (1.0 - r));
            return (log, tail, terms);
        }
        log += l;
        terms += 1;
        j += 1;
    }
}

fn rounding_allowance(terms: usize) -> f64 {
    4.0 * f64::EPSILON * (terms as f64 + 4.0)
}

/// `prod_{p in primes} prod_{k >= 1} (1 - p^{-k-u})`: the limiting
/// probability that the cokernel of an `n x (n + u)` matrix has trivial
/// `p`-part for every listed prime. Duplicates are ignored.
pub fn trivial_cokernel_prediction(primes: &[u64], u: u32) -> Result<Prediction> {
    let mut ps: Vec<u64> = primes.to_vec();
    ps.sort_unstable();
    ps.dedup();
    if let Some(&bad) = ps.iter().find(|&&p| !arith::is_prime_u64(p)) {
        return Err(Error::NotPrime(alloc::format!("{bad}")));
    }
    let (mut log, mut tail, mut terms) = (0.0, 0.0, 0);
    for p in ps {
        let (l, t, n) = log_geometric_product(1.0 / p as f64, u as u64 + 1);
        log += l;
        tail += t;
        terms += n;
    }
    let value = libm::exp(log);
    Ok(Prediction { value, truncation_bound: value * (tail + rounding_allowance(terms)), terms_used: terms })
}

/// Number of plain Dirichlet terms before the Euler-Maclaurin correction.
const ZETA_TERMS: u32 = 64;

/// `zeta(s) - 1` for integer `s >= 2`, with a bound on the error of the
/// Euler-Maclaurin remainder.
pub fn zeta_minus_one(s: u32) -> (f64, f64) {
    assert!(s >= 2, "zeta diverges at s = 1");
    let sf = s as f64;
    let n = ZETA_TERMS as f64;
    // Smallest terms first for accuracy.
    let mut sum = 0.0;
    for k in (2..ZETA_TERMS).rev() {
        sum += libm::pow(k as f64, -sf);
    }
    let ns = libm::pow(n, -sf);
    let rising = |len: u32| (0..len).map(|i| sf + i as f64).product::<f64>();
    let correction = libm::pow(n, 1.0 - sf) / (sf - 1.0) + ns / 2.0 + rising(1) * ns / (12.0 * n)
        - rising(3) * ns / (720.0 * n * n * n)
        + rising(5) * ns / (30240.0 * libm::pow(n, 5.0));
    // The remainder is dominated by the first omitted term, B_8 / 8!.
    let err = rising(7) * ns / (1209600.0 * libm::pow(n, 7.0));
    (sum + correction, err + 4.0 * f64::EPSILON * (sum + correction))
}

/// `prod_{j >= u+1} zeta(j)^{-1}`, the limiting probability that an
/// `n x (n + u)` random integer matrix is surjective onto `Z^n`.
/// For `u = 0` the product diverges to zero; the result is exactly zero.
pub fn trivial_cokernel_all_primes(u: u32) -> Prediction {
    if u == 0 {
        return Prediction { value: 0.0, truncation_bound: 0.0, terms_used: 0 };
    }
    let mut log = 0.0;
    let mut err = 0.0;
    let mut terms = 0;
    let mut j = u.saturating_add(1);
    let tail = loop {
        let (z1, e) = zeta_minus_one(j);
        let l = libm::log1p(z1);
        if l < LOG_CUTOFF {
            // sum_{i >= j} ln zeta(i) <= sum_{i >= j} (zeta(i) - 1)
            //   <= sum_{i >= j} 2^{-i} (1 + 2/(i-1)) <= 2^{1-j} (1 + 2/(j-1)).
            let jf = j as f64;
            break libm::pow(2.0, 1.0 - jf) * (1.0 + 2.0 / (jf - 1.0));
        }
        log -= l;
        err += e;
        terms += 1;
        j += 1;
    };
    let value = libm::exp(log);
    Prediction { value, truncation_bound: value * (tail + err + rounding_allowance(terms)), terms_used: terms }
}

/// `q^{-k^2} prod_{i=1}^k (1 - q^{-i})^{-1} prod_{i > k} (1 - q^{-i})`: the
/// limiting probability that an `n x n` matrix over `F_q` has corank `k`.
pub fn corank_prediction(q: u64, k: u32) -> Result<Prediction> {
    if arith::prime_power(q).is_none() {
        return Err(Error::InvalidParameter("q must be a prime power"));
    }
    let qf = q as f64;
    let r = 1.0 / qf;
    let mut log = -(k as f64) * (k as f64) * libm::log(qf);
    for i in 1..=k {
        log -= libm::log1p(-libm::pow(r, i as f64));
    }
    let (l, tail, terms) = log_geometric_product(r, k as u64 + 1);
    log += l;
    let terms = terms + k as usize;
    let value = libm::exp(log);
    Ok(Prediction { value, truncation_bound: value * (tail + rounding_allowance(terms)), terms_used: terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // Independent oracle: plain partial products far past the cutoff.
    fn naive_product(r: f64, start: i32, end: i32) -> f64 {
        (start..end).map(|j| 1.0 - r.powi(j)).product()
    }

    #[test]
    fn trivial_examples() {
        assert_eq!(trivial_cokernel_prediction(&[], 3).unwrap().value, 1.0);
        let p = trivial_cokernel_prediction(&[2], 0).unwrap();
        assert!(close(p.value, 0.288788, 1e-5));
        assert!(close(p.value, naive_product(0.5, 1, 200), 1e-13));
        assert!(p.truncation_bound > 0.0 && p.truncation_bound < 1e-12);
        let p = trivial_cokernel_prediction(&[2], 1).unwrap();
        assert!(close(p.value, 0.577576, 1e-5));
        assert!(trivial_cokernel_prediction(&[2, 4], 1).is_err());
        let pair = trivial_cokernel_prediction(&[2, 3], 1).unwrap().value;
        assert!(close(pair, naive_product(0.5, 2, 200) * naive_product(1.0 / 3.0, 2, 200), 1e-13));
    }

    #[test]
    fn zeta_values() {
        let pi = core::f64::consts::PI;
        let (z2, e2) = zeta_minus_one(2);
        assert!(close(z2 + 1.0, pi * pi / 6.0, 1e-14));
        assert!(e2 < 1e-13);
        let (z4, _) = zeta_minus_one(4);
        assert!(close(z4 + 1.0, pi.powi(4) / 90.0, 1e-14));
        // Direct summation oracle for a large exponent.
        let direct: f64 = (2..200).map(|n| (n as f64).powi(-30)).sum();
        assert!(close(zeta_minus_one(30).0, direct, 1e-24));
    }

    #[test]
    fn all_primes_examples() {
        assert_eq!(trivial_cokernel_all_primes(0).value, 0.0);
        let p = trivial_cokernel_all_primes(2);
        // Oracle: Euler product over primes below 10^4 of prod_{k>=3}(1-p^{-k}).
        let mut oracle = 1.0;
        for q in 2u64..10_000 {
            if arith::is_prime_u64(q) {
                oracle *= naive_product(1.0 / q as f64, 3, 80);
            }
        }
        assert!(close(p.value, oracle, 1e-7), "{} vs {}", p.value, oracle);
        assert!(close(p.value, 0.716791660453522, 1e-12));
        assert!(trivial_cokernel_all_primes(60).value >= 1.0 - 1e-15);
        assert_eq!(trivial_cokernel_all_primes(u32::MAX).value, 1.0);
    }

    #[test]
    fn corank_examples() {
        let c = |q, k| corank_prediction(q, k).unwrap().value;
        assert!(close(c(2, 0), 0.288788, 1e-5));
        assert!(close(c(2, 1), 0.577576, 1e-5));
        assert!(close(c(2, 2), 0.128350, 1e-5));
        assert!(close(c(3, 1), 0.420095, 1e-5));
        assert!(corank_prediction(6, 0).is_err());
        assert!(corank_prediction(4, 1).is_ok());
    }

    #[test]
    fn corank_distribution_sums_to_one_and_decreases() {
        for q in [2u64, 3, 4, 5, 7, 8, 9] {
            let vals: Vec<f64> = (0..=40).map(|k| corank_prediction(q, k).unwrap().value).collect();
            let total: f64 = vals.iter().sum();
            assert!(close(total, 1.0, 1e-9), "q={q}: {total}");
            assert!(vals[1..].windows(2).all(|w| w[1] < w[0] || w[1] == 0.0));
        }
    }

    #[test]
    fn trivial_prediction_monotonicity() {
        let sets: [&[u64]; 4] = [&[2], &[2, 3], &[2, 3, 5], &[2, 3, 5, 7, 11]];
        for u in 0..5 {
            let vals: Vec<f64> = sets.iter().map(|s| trivial_cokernel_prediction(s, u).unwrap().value).collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]));
            for s in sets {
                let a = trivial_cokernel_prediction(s, u).unwrap().value;
                let b = trivial_cokernel_prediction(s, u + 1).unwrap().value;
                assert!(b > a);
            }
        }
    }
}
