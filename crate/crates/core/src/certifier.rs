//! Certified decision of surjectivity `M(Z^m) = Z^n`.
//!
//! `M` is surjective over `Z` exactly when it is surjective modulo every
//! prime. Only primes dividing every maximal minor can fail, so it suffices
//! to test the primes of `gcd(d1, d2)` for two nonsingular `n x n` minors.
//! When that gcd resists factoring the certifier falls back to the Smith
//! normal form.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::linalg::{self, product_of_powers};
use crate::modp::{self, det_mod_word, reduce_mod};
use crate::{arith, factor, Error, IntMatrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Surjective,
    NotSurjective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    PrimeReduction,
    SnfFallback,
}

/// A square submatrix given by its column indices, with its determinant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Minor {
    pub columns: Vec<usize>,
    pub det: BigInt,
}

/// `columns` of `M` are linearly independent modulo `prime`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeCheck {
    pub prime: BigInt,
    pub columns: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Nonsingular minors whose determinants have gcd `gcd = prod p^e`, and
    /// for each such `p` a set of columns of full rank mod `p`.
    Minors { minors: Vec<Minor>, gcd: BigInt, factorization: Vec<(BigInt, u32)>, prime_checks: Vec<PrimeCheck> },
    /// Integer `X` with `M X = I`.
    RightInverse { inverse: IntMatrix },
    /// `y^T M = 0 (mod modulus)` with `y` not identically zero mod `modulus`.
    /// Surjectivity would force `y = y^T M X = 0 (mod modulus)`.
    Annihilator { modulus: BigInt, vector: Vec<BigInt> },
    /// Nonzero `y` with `y^T M = 0` over `Z`: the rank is below `n`.
    RationalKernel { vector: Vec<BigInt> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub verdict: Verdict,
    pub method: Method,
    pub witness: Witness,
}

impl Certificate {
    pub fn is_surjective(&self) -> bool {
        self.verdict == Verdict::Surjective
    }

    /// Primes tested by reduction, for minor-based certificates.
    pub fn primes(&self) -> Vec<BigInt> {
        match &self.witness {
            Witness::Minors { factorization, .. } => factorization.iter().map(|(p, _)| p.clone()).collect(),
            Witness::Annihilator { modulus, .. } => alloc::vec![modulus.clone()],
            _ => Vec::new(),
        }
    }
}

/// `rank(M mod p) = rows`.
pub fn surjective_mod_p(m: &IntMatrix, p: &BigInt) -> Result<bool> {
    if !arith::is_prime_int(p) {
        return Err(Error::NotPrime(alloc::format!("{p}")));
    }
    if m.cols() < m.rows() {
        return Ok(false);
    }
    Ok(modp::rank_mod_p(&reduce_mod(m, p.magnitude())?) == m.rows())
}

fn reference_prime() -> u64 {
    arith::word_primes().next().expect("there are primes below 2^62")
}

/// Greedy first `rows` independent columns. A set that is independent
/// modulo a prime is independent over `Q`, so the word-prime pass settles
/// the common case and exact elimination only runs when it comes up short.
fn choose_columns(m: &IntMatrix, p: u64) -> Vec<usize> {
    let mp = reduce_mod(m, &BigUint::from(p)).expect("reference modulus is prime");
    let cols = modp::pivot_columns(&mp);
    if cols.len() == m.rows() {
        return cols;
    }
    linalg::independent_columns(m)
}

/// A second nonsingular column set, made by swapping one non-pivot column
/// into `base`.
fn second_columns(m: &IntMatrix, base: &[usize], p: u64) -> Option<Vec<usize>> {
    let spare: Vec<usize> = (0..m.cols()).filter(|c| !base.contains(c)).collect();
    for &c in spare.iter().take(4) {
        for pos in (0..base.len()).rev() {
            let mut cols = base.to_vec();
            cols[pos] = c;
            let sub = m.select_columns(&cols).ok()?;
            if det_mod_word(&sub, p) != 0 {
                return Some(cols);
            }
        }
    }
    None
}

pub fn is_surjective(m: &IntMatrix) -> Certificate {
    let n = m.rows();
    let not_surjective = |witness| Certificate { verdict: Verdict::NotSurjective, method: Method::PrimeReduction, witness };

    let p_ref = reference_prime();
    let cols1 = choose_columns(m, p_ref);
    if cols1.len() < n {
        let vector = linalg::rational_left_kernel(m).expect("rank below row count");
        return not_surjective(Witness::RationalKernel { vector });
    }
    let d1 = linalg::det(&m.select_columns(&cols1).unwrap()).unwrap();
    let mut minors = alloc::vec![Minor { columns: cols1.clone(), det: d1.clone() }];
    if let Some(cols2) = second_columns(m, &cols1, p_ref) {
        let d2 = linalg::det(&m.select_columns(&cols2).unwrap()).unwrap();
        minors.push(Minor { columns: cols2, det: d2 });
    }
    let g = minors.iter().fold(BigInt::zero(), |acc, mi| acc.gcd(&mi.det));

    let f = factor::factorize(g.magnitude());
    if !f.is_complete() {
        return snf_certificate(m);
    }
    let factorization: Vec<(BigInt, u32)> = f.primes.into_iter().map(|(p, e)| (BigInt::from(p), e)).collect();
    let mut prime_checks = Vec::with_capacity(factorization.len());
    for (p, _) in &factorization {
        let mp = reduce_mod(m, p.magnitude()).expect("factor is prime");
        let cols = modp::pivot_columns(&mp);
        if cols.len() < n {
            let y = modp::left_annihilator(&mp).expect("rank below row count");
            return not_surjective(Witness::Annihilator {
                modulus: p.clone(),
                vector: y.into_iter().map(BigInt::from).collect(),
            });
        }
        prime_checks.push(PrimeCheck { prime: p.clone(), columns: cols });
    }
    Certificate {
        verdict: Verdict::Surjective,
        method: Method::PrimeReduction,
        witness: Witness::Minors { minors, gcd: g, factorization, prime_checks },
    }
}

/// Decide from `U M V = D`. With all invariant factors 1, `X = V[:, :n] U`
/// is a right inverse; otherwise the last row of `U` annihilates `M` modulo
/// the last invariant factor.
pub fn snf_certificate(m: &IntMatrix) -> Certificate {
    let n = m.rows();
    if m.cols() < n {
        let vector = linalg::rational_left_kernel(m).expect("more rows than columns");
        return Certificate {
            verdict: Verdict::NotSurjective,
            method: Method::SnfFallback,
            witness: Witness::RationalKernel { vector },
        };
    }
    let snf = linalg::smith_normal_form(m);
    let diag = snf.diagonal();
    let last = &diag[n - 1];
    if last.is_one() {
        let head: Vec<usize> = (0..n).collect();
        let vn = snf.right.select_columns(&head).unwrap();
        let inverse = vn.mul(&snf.left).unwrap();
        return Certificate { verdict: Verdict::Surjective, method: Method::SnfFallback, witness: Witness::RightInverse { inverse } };
    }
    let y = snf.left.row(n - 1).to_vec();
    let witness = if last.is_zero() {
        Witness::RationalKernel { vector: y }
    } else {
        Witness::Annihilator { modulus: last.clone(), vector: y }
    };
    Certificate { verdict: Verdict::NotSurjective, method: Method::SnfFallback, witness }
}

fn distinct_in_range(cols: &[usize], n: usize, bound: usize) -> bool {
    let mut sorted = cols.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.len() == n && cols.iter().all(|&c| c < bound)
}

/// Recheck every claim in `c` against `m` from scratch.
pub fn verify_certificate(m: &IntMatrix, c: &Certificate) -> bool {
    let n = m.rows();
    match (&c.witness, c.verdict) {
        (Witness::Minors { minors, gcd, factorization, prime_checks }, Verdict::Surjective) => {
            if c.method != Method::PrimeReduction || minors.is_empty() {
                return false;
            }
            for mi in minors {
                if !distinct_in_range(&mi.columns, n, m.cols()) || mi.det.is_zero() {
                    return false;
                }
                match linalg::det(&m.select_columns(&mi.columns).unwrap()) {
                    Ok(d) if d == mi.det => {}
                    _ => return false,
                }
            }
            let g = minors.iter().fold(BigInt::zero(), |acc, mi| acc.gcd(&mi.det));
            if &g != gcd {
                return false;
            }
            let mut primes: Vec<&BigInt> = factorization.iter().map(|(p, _)| p).collect();
            primes.sort();
            primes.dedup();
            if primes.len() != factorization.len()
                || factorization.iter().any(|(p, e)| *e == 0 || !arith::is_prime_int(p))
                || product_of_powers(factorization) != g
            {
                return false;
            }
            let mut checked: Vec<&BigInt> = prime_checks.iter().map(|pc| &pc.prime).collect();
            checked.sort();
            if checked != primes {
                return false;
            }
            prime_checks.iter().all(|pc| {
                distinct_in_range(&pc.columns, n, m.cols())
                    && reduce_mod(&m.select_columns(&pc.columns).unwrap(), pc.prime.magnitude())
                        .is_ok_and(|mp| modp::rank_mod_p(&mp) == n)
            })
        }
        (Witness::RightInverse { inverse }, Verdict::Surjective) => {
            m.mul(inverse).is_ok_and(|prod| prod == IntMatrix::identity(n))
        }
        (Witness::Annihilator { modulus, vector }, Verdict::NotSurjective) => {
            if modulus <= &BigInt::one() || vector.len() != n {
                return false;
            }
            if c.method == Method::PrimeReduction && !arith::is_prime_int(modulus) {
                return false;
            }
            let image = m.left_apply(vector).unwrap();
            image.iter().all(|x| x.is_multiple_of(modulus)) && vector.iter().any(|y| !y.is_multiple_of(modulus))
        }
        (Witness::RationalKernel { vector }, Verdict::NotSurjective) => {
            vector.len() == n
                && vector.iter().any(|y| !y.is_zero())
                && m.left_apply(vector).unwrap().iter().all(Zero::is_zero)
        }
        _ => false,
    }
}

/// Convenience: the verdict alone, by the Smith normal form.
pub fn cokernel_is_trivial(m: &IntMatrix) -> bool {
    linalg::cokernel(m).is_trivial()
}

/// `|det|` of the witness minor with the fewest prime factors to worry
/// about: any prime not dividing it is guaranteed to pass.
pub fn witness_determinant(c: &Certificate) -> Option<BigInt> {
    match &c.witness {
        Witness::Minors { minors, .. } => minors.iter().map(|m| m.det.abs()).min(),
        _ => None,
    }
}
