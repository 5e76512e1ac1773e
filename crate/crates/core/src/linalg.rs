//! Exact integer matrix algebra: determinants, Smith normal form and the
//! cokernel `Z^rows / M(Z^cols)`.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::modp::det_mod_word;
use crate::{arith, Error, IntMatrix, Result};

fn require_square(m: &IntMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    Ok(())
}

/// Exact determinant. Uses the multi-modular route of [`det_mod_crt`].
pub fn det(m: &IntMatrix) -> Result<BigInt> {
    det_mod_crt(m)
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn det_bareiss(m: &IntMatrix) -> Result<BigInt> {
    require_square(m)?;
    let n = m.rows();
    let mut a = m.clone().into_rows();
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(pr) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return Ok(BigInt::zero());
        };
        if pr != k {
            a.swap(pr, k);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Ok(if sign { -d } else { d })
}

/// Determinant from residues modulo word-size primes whose product exceeds
/// twice the Hadamard bound for the actual largest entry.
pub fn det_mod_crt(m: &IntMatrix) -> Result<BigInt> {
    require_square(m)?;
    let k0 = m.max_abs();
    if k0.is_zero() {
        return Ok(BigInt::zero());
    }
    // Columns have Euclidean norm at most K0 * sqrt(n), so |det| <= (K0^2 n)^{n/2}.
    let k0_sq = k0.magnitude() * k0.magnitude();
    let target = hadamard_bound_big(m.rows(), &k0_sq) * 2u32;
    let mut crt = arith::Crt::new();
    for p in arith::word_primes() {
        if crt.modulus() > &target {
            break;
        }
        crt.push(det_mod_word(m, p), p);
    }
    Ok(crt.symmetric())
}

/// `det(m) == 0`. A nonzero determinant modulo one word prime settles the
/// question after a single elimination; otherwise the exact determinant is
/// computed.
pub fn is_singular(m: &IntMatrix) -> Result<bool> {
    require_square(m)?;
    let p = arith::word_primes().next().expect("there are primes below 2^62");
    if det_mod_word(m, p) != 0 {
        return Ok(false);
    }
    Ok(det_mod_crt(m)?.is_zero())
}

/// `ceil((k0 * n)^{n/2})`; exact for even `n`.
pub fn hadamard_bound(n: usize, k0: u64) -> BigUint {
    hadamard_bound_big(n, &BigUint::from(k0))
}

fn hadamard_bound_big(n: usize, k0: &BigUint) -> BigUint {
    let base = k0 * BigUint::from(n);
    if n.is_multiple_of(2) {
        base.pow((n / 2) as u32)
    } else {
        arith::ceil_sqrt(&base.pow(n as u32))
    }
}

/// Unimodular `left`, `right` with `left * M * right = diag`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfDecomposition {
    pub left: IntMatrix,
    pub diag: IntMatrix,
    pub right: IntMatrix,
}

impl SnfDecomposition {
    /// Diagonal entries `diag[i][i]` for `i < min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.diag.rows().min(self.diag.cols())).map(|i| self.diag.get(i, i).clone()).collect()
    }
}

struct Snf {
    a: Vec<Vec<BigInt>>,
    left: Option<Vec<Vec<BigInt>>>,
    right: Option<Vec<Vec<BigInt>>>,
}

fn identity_rows(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

impl Snf {
    fn row_sub(&mut self, dst: usize, src: usize, q: &BigInt) {
        let (a, b) = pair_mut(&mut self.a, dst, src);
        sub_scaled(a, b, q);
        if let Some(l) = self.left.as_mut() {
            let (a, b) = pair_mut(l, dst, src);
            sub_scaled(a, b, q);
        }
    }

    fn col_sub(&mut self, dst: usize, src: usize, q: &BigInt) {
        for row in self.a.iter_mut() {
            let t = q * &row[src];
            row[dst] -= t;
        }
        if let Some(r) = self.right.as_mut() {
            for row in r.iter_mut() {
                let t = q * &row[src];
                row[dst] -= t;
            }
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        if let Some(l) = self.left.as_mut() {
            l.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in self.a.iter_mut() {
            row.swap(i, j);
        }
        if let Some(r) = self.right.as_mut() {
            for row in r.iter_mut() {
                row.swap(i, j);
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in self.a[i].iter_mut() {
            *x = -core::mem::take(x);
        }
        if let Some(l) = self.left.as_mut() {
            for x in l[i].iter_mut() {
                *x = -core::mem::take(x);
            }
        }
    }

    fn run(&mut self) {
        let rows = self.a.len();
        let cols = self.a[0].len();
        for t in 0..rows.min(cols) {
            loop {
                // Minimum-absolute-value pivot in the trailing block.
                let mut best: Option<(usize, usize)> = None;
                for i in t..rows {
                    for j in t..cols {
                        let x = &self.a[i][j];
                        if !x.is_zero() && best.is_none_or(|(bi, bj)| x.magnitude() < self.a[bi][bj].magnitude()) {
                            best = Some((i, j));
                        }
                    }
                }
                let Some((pi, pj)) = best else {
                    return;
                };
                self.swap_rows(t, pi);
                self.swap_cols(t, pj);

                let mut clean = true;
                for i in t + 1..rows {
                    if !self.a[i][t].is_zero() {
                        let q = &self.a[i][t] / &self.a[t][t];
                        if !q.is_zero() {
                            self.row_sub(i, t, &q);
                        }
                        clean &= self.a[i][t].is_zero();
                    }
                }
                for j in t + 1..cols {
                    if !self.a[t][j].is_zero() {
                        let q = &self.a[t][j] / &self.a[t][t];
                        if !q.is_zero() {
                            self.col_sub(j, t, &q);
                        }
                        clean &= self.a[t][j].is_zero();
                    }
                }
                if !clean {
                    continue;
                }
                // Row and column cleared; enforce divisibility of the rest.
                let pivot = self.a[t][t].clone();
                let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !self.a[i][j].is_multiple_of(&pivot)));
                match offender {
                    Some(i) => self.row_sub(t, i, &BigInt::from(-1)),
                    None => break,
                }
            }
            if self.a[t][t].is_negative() {
                self.negate_row(t);
            }
        }
    }
}

fn pair_mut<T>(v: &mut [T], dst: usize, src: usize) -> (&mut T, &T) {
    debug_assert_ne!(dst, src);
    if dst < src {
        let (a, b) = v.split_at_mut(src);
        (&mut a[dst], &b[0])
    } else {
        let (a, b) = v.split_at_mut(dst);
        (&mut b[0], &a[src])
    }
}

fn sub_scaled(a: &mut [BigInt], b: &[BigInt], q: &BigInt) {
    for (x, y) in a.iter_mut().zip(b) {
        if !y.is_zero() {
            *x -= q * y;
        }
    }
}

/// Smith normal form with transforms. Pivots on the smallest nonzero entry
/// of the remaining block each round.
pub fn smith_normal_form(m: &IntMatrix) -> SnfDecomposition {
    let (rows, cols) = (m.rows(), m.cols());
    let mut s = Snf { a: m.clone().into_rows(), left: Some(identity_rows(rows)), right: Some(identity_rows(cols)) };
    s.run();
    SnfDecomposition {
        left: IntMatrix::from_row_vecs(s.left.unwrap()).unwrap(),
        diag: IntMatrix::from_row_vecs(s.a).unwrap(),
        right: IntMatrix::from_row_vecs(s.right.unwrap()).unwrap(),
    }
}

/// Smith diagonal without tracking transforms.
pub fn smith_diagonal(m: &IntMatrix) -> Vec<BigInt> {
    let mut s = Snf { a: m.clone().into_rows(), left: None, right: None };
    s.run();
    (0..m.rows().min(m.cols())).map(|i| s.a[i][i].clone()).collect()
}

/// Structure of `Z^rows / M(Z^cols)`: `Z^free_rank` times the cyclic groups
/// `Z/d` for the listed invariant factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CokernelStructure {
    /// Factors `>= 2`, each dividing the next.
    pub invariant_factors: Vec<BigInt>,
    pub free_rank: usize,
}

impl CokernelStructure {
    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty() && self.free_rank == 0
    }

    /// Order of the torsion part.
    pub fn torsion_order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }
}

pub fn cokernel(m: &IntMatrix) -> CokernelStructure {
    cokernel_from_diagonal(m.rows(), &smith_diagonal(m))
}

fn cokernel_from_diagonal(rows: usize, diag: &[BigInt]) -> CokernelStructure {
    let rank = diag.iter().filter(|d| !d.is_zero()).count();
    let invariant_factors = diag.iter().filter(|d| !d.is_zero() && !d.is_one()).cloned().collect();
    CokernelStructure { invariant_factors, free_rank: rows - rank }
}

/// The `p`-primary part of the cokernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PPart {
    /// Exponent of `p` in each invariant factor it divides, in chain order.
    pub exponents: Vec<u32>,
    pub free_rank: usize,
}

impl PPart {
    /// Corank of `M mod p`.
    pub fn corank(&self) -> usize {
        self.exponents.len() + self.free_rank
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.is_empty() && self.free_rank == 0
    }
}

pub fn cokernel_p_part(m: &IntMatrix, p: &BigInt) -> Result<PPart> {
    if !arith::is_prime_int(p) {
        return Err(Error::NotPrime(alloc::format!("{p}")));
    }
    Ok(p_part_of(&cokernel(m), p))
}

pub fn p_part_of(c: &CokernelStructure, p: &BigInt) -> PPart {
    let exponents = c
        .invariant_factors
        .iter()
        .filter_map(|d| {
            let mut d = d.clone();
            let mut e = 0;
            while d.is_multiple_of(p) {
                d /= p;
                e += 1;
            }
            (e > 0).then_some(e)
        })
        .collect();
    PPart { exponents, free_rank: c.free_rank }
}

/// Greedy first independent columns over the rationals, by fraction-free
/// elimination. Their count is the rank.
pub fn independent_columns(m: &IntMatrix) -> Vec<usize> {
    let mut a = m.clone().into_rows();
    let (rows, cols) = (m.rows(), m.cols());
    let mut prev = BigInt::one();
    let mut r = 0;
    let mut pivots = Vec::new();
    for j in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !a[i][j].is_zero()) else {
            continue;
        };
        a.swap(r, pr);
        for i in r + 1..rows {
            for k in j + 1..cols {
                let v = &a[r][j] * &a[i][k] - &a[i][j] * &a[r][k];
                a[i][k] = v / &prev;
            }
            a[i][j] = BigInt::zero();
        }
        prev = a[r][j].clone();
        pivots.push(j);
        r += 1;
    }
    pivots
}

/// Rank over the rationals.
pub fn rank(m: &IntMatrix) -> usize {
    independent_columns(m).len()
}

/// A primitive nonzero integer vector `y` with `y^T M = 0`, if `M` has
/// deficient row rank.
pub fn rational_left_kernel(m: &IntMatrix) -> Option<Vec<BigInt>> {
    // Solve M^T y = 0 by rational reduced echelon form.
    let (rows, cols) = (m.rows(), m.cols());
    let mut t: Vec<Vec<BigRational>> =
        (0..cols).map(|j| (0..rows).map(|i| BigRational::from_integer(m.get(i, j).clone())).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for j in 0..rows {
        if r == cols {
            break;
        }
        let Some(pr) = (r..cols).find(|&i| !t[i][j].is_zero()) else {
            continue;
        };
        t.swap(r, pr);
        let inv = t[r][j].recip();
        for x in t[r].iter_mut() {
            *x *= &inv;
        }
        let prow = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && !row[j].is_zero() {
                let c = row[j].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= &c * y;
                }
            }
        }
        pivots.push(j);
        r += 1;
    }
    let free = (0..rows).find(|c| !pivots.contains(c))?;
    let mut y = alloc::vec![BigRational::zero(); rows];
    y[free] = BigRational::one();
    for (r, &pc) in pivots.iter().enumerate() {
        y[pc] = -t[r][free].clone();
    }
    let lcm = y.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = y.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    Some(ints.into_iter().map(|x| x / &g).collect())
}

/// Product of `p^e` over a factorization.
pub(crate) fn product_of_powers(factors: &[(BigInt, u32)]) -> BigInt {
    factors.iter().map(|(p, e)| num_traits::pow(p.clone(), e.to_usize().unwrap())).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn mat<const C: usize>(rows: &[[i64; C]]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn det_examples() {
        assert_eq!(det(&IntMatrix::identity(3)).unwrap(), BigInt::one());
        assert_eq!(det(&mat(&[[2, 1], [1, 1]])).unwrap(), BigInt::one());
        assert_eq!(det(&mat(&[[1, 2, 3], [0, 0, 0], [4, 5, 6]])).unwrap(), BigInt::zero());
        assert_eq!(det(&IntMatrix::identity(5)).unwrap(), BigInt::one());
        assert_eq!(det(&mat(&[[0]])).unwrap(), BigInt::zero());
        assert_eq!(det(&mat(&[[1, 2, 3]])), Err(Error::NotSquare { rows: 1, cols: 3 }));
        assert_eq!(det_bareiss(&mat(&[[1, 2, 3]])), Err(Error::NotSquare { rows: 1, cols: 3 }));
    }

    #[test]
    fn singularity_shortcut() {
        assert!(!is_singular(&mat(&[[2, 1], [1, 1]])).unwrap());
        assert!(is_singular(&mat(&[[1, 2], [2, 4]])).unwrap());
        // det = p for the word prime p: zero mod p but not singular.
        let p = arith::word_primes().next().unwrap();
        let m = IntMatrix::diagonal(&[BigInt::one(), BigInt::from(p)], 2, 2);
        assert!(!is_singular(&m).unwrap());
        assert!(is_singular(&mat(&[[1, 2, 3]])).is_err());
    }

    #[test]
    fn crt_handles_entries_beyond_the_naive_bound() {
        // (K0 n)^{n/2} = 18 here, but |det| = 162.
        let m = mat(&[[9, -9], [9, 9]]);
        assert_eq!(det_mod_crt(&m).unwrap(), BigInt::from(162));
        assert_eq!(det_bareiss(&m).unwrap(), BigInt::from(162));
    }

    #[test]
    fn hadamard_examples() {
        assert_eq!(hadamard_bound(1, 1), BigUint::from(1u32));
        assert_eq!(hadamard_bound(4, 3), BigUint::from(144u32));
        assert_eq!(hadamard_bound(2, 1), BigUint::from(2u32));
        // ceil(sqrt(27)) = 6
        assert_eq!(hadamard_bound(3, 1), BigUint::from(6u32));
    }

    #[test]
    fn snf_examples() {
        let d = smith_normal_form(&mat(&[[2, 0], [0, 3]]));
        assert_eq!(d.diagonal(), ints(&[1, 6]));
        let d = smith_normal_form(&IntMatrix::identity(4));
        assert_eq!(d.diagonal(), ints(&[1, 1, 1, 1]));
        let d = smith_normal_form(&mat(&[[1, 0, 0], [0, 2, 0]]));
        assert_eq!(d.diag, mat(&[[1, 0, 0], [0, 2, 0]]));
    }

    #[test]
    fn cokernel_examples() {
        assert!(cokernel(&IntMatrix::identity(3)).is_trivial());
        let c = cokernel(&mat(&[[2, 0], [0, 3]]));
        assert_eq!(c, CokernelStructure { invariant_factors: ints(&[6]), free_rank: 0 });
        let c = cokernel(&mat(&[[1, 0, 0], [0, 2, 0]]));
        assert_eq!(c, CokernelStructure { invariant_factors: ints(&[2]), free_rank: 0 });
        let c = cokernel(&mat(&[[1, 1], [2, 2]]));
        assert_eq!(c.free_rank, 1);
    }

    #[test]
    fn p_part_examples() {
        let two = BigInt::from(2);
        assert_eq!(cokernel_p_part(&mat(&[[2, 0], [0, 3]]), &two).unwrap().exponents, vec![1]);
        assert!(cokernel_p_part(&IntMatrix::identity(3), &BigInt::from(7)).unwrap().is_trivial());
        assert_eq!(cokernel_p_part(&mat(&[[4, 0], [0, 8]]), &two).unwrap().exponents, vec![2, 3]);
        assert!(matches!(cokernel_p_part(&IntMatrix::identity(2), &BigInt::from(6)), Err(Error::NotPrime(_))));
    }

    #[test]
    fn left_kernel_annihilates() {
        let m = mat(&[[1, 2, 3], [2, 4, 6], [0, 1, 1]]);
        let y = rational_left_kernel(&m).unwrap();
        assert!(m.left_apply(&y).unwrap().iter().all(Zero::is_zero));
        assert!(y.iter().any(|x| !x.is_zero()));
        assert_eq!(rational_left_kernel(&IntMatrix::identity(3)), None);
        assert_eq!(independent_columns(&m), vec![0, 1]);
    }
}
