//! Residue-ring backends shared by the elimination routines.
//!
//! Moduli are normally prime. The routines also run over `Z/N` for an
//! unfactored composite `N`: as long as every pivot is a unit the result is
//! valid modulo every prime factor of `N`, and the first non-unit pivot is
//! reported as `Err(g)` with `1 < g < N` a factor of `N`.

use alloc::vec::Vec;
use core::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith;

pub(crate) trait Ring: Clone {
    type E: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    /// Inverse, or the nontrivial gcd with the modulus.
    fn inv(&self, a: &Self::E) -> Result<Self::E, BigUint>;
    fn reduce_int(&self, x: &BigInt) -> Self::E;

    /// `a - c * b`, elementwise over `a`.
    fn axpy_neg(&self, a: &mut [Self::E], c: &Self::E, b: &[Self::E]) {
        for (x, y) in a.iter_mut().zip(b) {
            if !self.is_zero(y) {
                *x = self.sub(x, &self.mul(c, y));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct WordRing(pub u64);

impl Ring for WordRing {
    type E = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.0
    }
    #[inline]
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        arith::sub_mod(*a, *b, self.0)
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        arith::mul_mod(*a, *b, self.0)
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.0 - a
        }
    }
    fn inv(&self, a: &u64) -> Result<u64, BigUint> {
        arith::inv_mod(*a, self.0).map_err(BigUint::from)
    }
    fn reduce_int(&self, x: &BigInt) -> u64 {
        arith::reduce_word(x, self.0)
    }

    fn axpy_neg(&self, a: &mut [u64], c: &u64, b: &[u64]) {
        let p = self.0;
        if *c == 0 {
            return;
        }
        if p < (1 << 32) {
            for (x, &y) in a.iter_mut().zip(b) {
                let prod = (*c * y) % p;
                *x = arith::sub_mod(*x, prod, p);
            }
        } else {
            for (x, &y) in a.iter_mut().zip(b) {
                *x = arith::sub_mod(*x, arith::mul_mod(*c, y, p), p);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BigRing(pub BigUint);

impl Ring for BigRing {
    type E = BigUint;

    fn zero(&self) -> BigUint {
        BigUint::zero()
    }
    fn one(&self) -> BigUint {
        BigUint::one() % &self.0
    }
    fn is_zero(&self, a: &BigUint) -> bool {
        a.is_zero()
    }
    fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.0 - (b - a)
        }
    }
    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.0
    }
    fn neg(&self, a: &BigUint) -> BigUint {
        if a.is_zero() {
            BigUint::zero()
        } else {
            &self.0 - a
        }
    }
    fn inv(&self, a: &BigUint) -> Result<BigUint, BigUint> {
        let ai = BigInt::from(a.clone());
        let mi = BigInt::from(self.0.clone());
        let ext = ai.extended_gcd(&mi);
        if !ext.gcd.is_one() {
            return Err(ext.gcd.magnitude().clone());
        }
        Ok(ext.x.mod_floor(&mi).magnitude().clone())
    }
    fn reduce_int(&self, x: &BigInt) -> BigUint {
        arith::reduce_big(x, &self.0)
    }
}

/// Row-echelon elimination in place. Returns the pivot columns; their
/// count is the rank. Pivot rows are not normalized.
pub(crate) fn echelon<R: Ring>(ring: &R, rows: &mut [Vec<R::E>]) -> Result<Vec<usize>, BigUint> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for j in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(pr) = (r..nrows).find(|&i| !ring.is_zero(&rows[i][j])) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = ring.inv(&rows[r][j])?;
        let (top, rest) = rows.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest.iter_mut() {
            if !ring.is_zero(&row[j]) {
                let c = ring.mul(&row[j], &inv);
                ring.axpy_neg(&mut row[j..], &c, &pivot_row[j..]);
            }
        }
        pivots.push(j);
        r += 1;
    }
    Ok(pivots)
}

/// Reduced row-echelon form in place (pivots normalized to one).
pub(crate) fn rref<R: Ring>(ring: &R, rows: &mut [Vec<R::E>]) -> Result<Vec<usize>, BigUint> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for j in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(pr) = (r..nrows).find(|&i| !ring.is_zero(&rows[i][j])) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = ring.inv(&rows[r][j])?;
        for x in rows[r].iter_mut() {
            *x = ring.mul(x, &inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !ring.is_zero(&row[j]) {
                let c = row[j].clone();
                ring.axpy_neg(row, &c, &pivot_row);
            }
        }
        pivots.push(j);
        r += 1;
    }
    Ok(pivots)
}

/// Determinant of a square matrix given by rows.
pub(crate) fn determinant<R: Ring>(ring: &R, mut rows: Vec<Vec<R::E>>) -> Result<R::E, BigUint> {
    let n = rows.len();
    let mut det = ring.one();
    for j in 0..n {
        let Some(pr) = (j..n).find(|&i| !ring.is_zero(&rows[i][j])) else {
            return Ok(ring.zero());
        };
        if pr != j {
            rows.swap(pr, j);
            det = ring.neg(&det);
        }
        det = ring.mul(&det, &rows[j][j]);
        let inv = ring.inv(&rows[j][j])?;
        let (top, rest) = rows.split_at_mut(j + 1);
        let pivot_row = &top[j];
        for row in rest.iter_mut() {
            if !ring.is_zero(&row[j]) {
                let c = ring.mul(&row[j], &inv);
                ring.axpy_neg(&mut row[j..], &c, &pivot_row[j..]);
            }
        }
    }
    Ok(det)
}

/// A nonzero `y` with `y^T A = 0`, if one exists.
pub(crate) fn left_kernel_vector<R: Ring>(ring: &R, rows: &[Vec<R::E>]) -> Result<Option<Vec<R::E>>, BigUint> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    // Solve A^T y = 0.
    let mut t: Vec<Vec<R::E>> = (0..ncols).map(|j| (0..nrows).map(|i| rows[i][j].clone()).collect()).collect();
    let pivots = rref(ring, &mut t)?;
    let Some(free) = (0..nrows).find(|c| !pivots.contains(c)) else {
        return Ok(None);
    };
    let mut y = alloc::vec![ring.zero(); nrows];
    y[free] = ring.one();
    for (r, &pc) in pivots.iter().enumerate() {
        y[pc] = ring.neg(&t[r][free]);
    }
    Ok(Some(y))
}
