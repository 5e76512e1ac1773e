//! Linear algebra over prime fields `F_p`: reduction of integer matrices,
//! rank, incremental column spaces and sparse-annihilator search.
//!
//! Moduli below 2^62 use native word arithmetic; larger primes (typically
//! factors of a big determinant) fall back to `BigUint`. The prime 2 gets a
//! bit-packed elimination.

mod ring;

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

pub(crate) use ring::{BigRing, Ring, WordRing};
use crate::{arith, Error, IntMatrix, Result};

fn split(factor: BigUint) -> Error {
    Error::ModulusSplit { factor }
}

fn check_prime(p: &BigUint) -> Result<()> {
    if arith::is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(alloc::format!("{p}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Residues {
    Word(Vec<u64>),
    Big(Vec<BigUint>),
}

/// An integer matrix reduced modulo a prime, entries in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModMatrix {
    modulus: BigUint,
    rows: usize,
    cols: usize,
    data: Residues,
}

/// Entrywise reduction of `m` modulo the prime `p`.
pub fn reduce_mod(m: &IntMatrix, p: &BigUint) -> Result<ModMatrix> {
    check_prime(p)?;
    Ok(reduce_unchecked(m, p))
}

pub(crate) fn reduce_unchecked(m: &IntMatrix, p: &BigUint) -> ModMatrix {
    let data = match p.to_u64().filter(|&w| w < arith::WORD_LIMIT) {
        Some(w) => Residues::Word(m.entries().iter().map(|x| arith::reduce_word(x, w)).collect()),
        None => Residues::Big(m.entries().iter().map(|x| arith::reduce_big(x, p)).collect()),
    };
    ModMatrix { modulus: p.clone(), rows: m.rows(), cols: m.cols(), data }
}

impl ModMatrix {
    /// Build from word-size entries modulo the prime `p`; entries are reduced.
    pub fn from_words(p: u64, rows: usize, cols: usize, entries: Vec<u64>) -> Result<Self> {
        check_prime(&BigUint::from(p))?;
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if entries.len() != rows * cols {
            return Err(Error::Shape { rows, cols, found: entries.len() });
        }
        let data = if p < arith::WORD_LIMIT {
            Residues::Word(entries.into_iter().map(|x| x % p).collect())
        } else {
            Residues::Big(entries.into_iter().map(|x| BigUint::from(x % p)).collect())
        };
        Ok(ModMatrix { modulus: BigUint::from(p), rows, cols, data })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> BigUint {
        match &self.data {
            Residues::Word(v) => BigUint::from(v[i * self.cols + j]),
            Residues::Big(v) => v[i * self.cols + j].clone(),
        }
    }

    /// Submatrix made of the listed columns.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.cols) {
            return Err(Error::DimensionMismatch { expected: self.cols, found: bad + 1 });
        }
        let pick = |i: usize| columns.iter().map(move |&j| i * self.cols + j);
        let data = match &self.data {
            Residues::Word(v) => Residues::Word((0..self.rows).flat_map(pick).map(|k| v[k]).collect()),
            Residues::Big(v) => Residues::Big((0..self.rows).flat_map(pick).map(|k| v[k].clone()).collect()),
        };
        Ok(ModMatrix { modulus: self.modulus.clone(), rows: self.rows, cols: columns.len(), data })
    }

    fn word_rows(&self) -> Option<(WordRing, Vec<Vec<u64>>)> {
        match &self.data {
            Residues::Word(v) => {
                let p = self.modulus.to_u64().unwrap();
                Some((WordRing(p), v.chunks(self.cols).map(<[u64]>::to_vec).collect()))
            }
            Residues::Big(_) => None,
        }
    }

    fn big_rows(&self) -> Vec<Vec<BigUint>> {
        match &self.data {
            Residues::Big(v) => v.chunks(self.cols).map(<[BigUint]>::to_vec).collect(),
            Residues::Word(v) => v.chunks(self.cols).map(|r| r.iter().map(|&x| BigUint::from(x)).collect()).collect(),
        }
    }

    fn try_rank(&self) -> core::result::Result<usize, BigUint> {
        if self.modulus == BigUint::from(2u32) {
            if let Residues::Word(v) = &self.data {
                return Ok(gf2_rank(self.rows, self.cols, v));
            }
        }
        Ok(self.try_pivot_columns()?.len())
    }

    fn try_pivot_columns(&self) -> core::result::Result<Vec<usize>, BigUint> {
        match self.word_rows() {
            Some((ring, mut rows)) => ring::echelon(&ring, &mut rows),
            None => ring::echelon(&BigRing(self.modulus.clone()), &mut self.big_rows()),
        }
    }

    fn try_left_kernel(&self) -> core::result::Result<Option<Vec<BigUint>>, BigUint> {
        match self.word_rows() {
            Some((ring, rows)) => {
                Ok(ring::left_kernel_vector(&ring, &rows)?.map(|y| y.into_iter().map(BigUint::from).collect()))
            }
            None => ring::left_kernel_vector(&BigRing(self.modulus.clone()), &self.big_rows()),
        }
    }
}

/// Rank over `F_p`.
pub fn rank_mod_p(m: &ModMatrix) -> usize {
    m.try_rank().expect("prime modulus never splits")
}

/// `rows - rank`: the codimension of the column space in `F_p^rows`.
pub fn corank_mod_p(m: &ModMatrix) -> usize {
    m.rows - rank_mod_p(m)
}

/// Greedy first independent columns (leftmost pivot in each echelon step).
pub fn pivot_columns(m: &ModMatrix) -> Vec<usize> {
    m.try_pivot_columns().expect("prime modulus never splits")
}

/// A nonzero row vector `y` with `y^T M = 0 (mod p)`, if any.
pub fn left_annihilator(m: &ModMatrix) -> Option<Vec<BigUint>> {
    m.try_left_kernel().expect("prime modulus never splits")
}

/// Determinant of a square integer matrix modulo a word-size modulus.
pub(crate) fn det_mod_word(m: &IntMatrix, p: u64) -> u64 {
    let ring = WordRing(p);
    let rows: Vec<Vec<u64>> = (0..m.rows()).map(|i| m.row(i).iter().map(|x| arith::reduce_word(x, p)).collect()).collect();
    ring::determinant(&ring, rows).expect("prime modulus never splits")
}

/// Rank of `m` modulo `n`, where `n` need not be known prime. Fails with
/// `Error::ModulusSplit` when a factor of `n` is discovered.
#[cfg(test)]
fn rank_mod_unchecked(m: &IntMatrix, n: &BigUint) -> Result<usize> {
    reduce_unchecked(m, n).try_rank().map_err(split)
}

fn gf2_rank(rows: usize, cols: usize, v: &[u64]) -> usize {
    let words = cols.div_ceil(64);
    let mut packed: Vec<Vec<u64>> = v
        .chunks(cols)
        .map(|r| {
            let mut w = alloc::vec![0u64; words];
            for (j, &x) in r.iter().enumerate() {
                if x & 1 == 1 {
                    w[j / 64] |= 1 << (j % 64);
                }
            }
            w
        })
        .collect();
    let mut rank = 0;
    for j in 0..cols {
        if rank == rows {
            break;
        }
        let (wi, bit) = (j / 64, 1u64 << (j % 64));
        let Some(pr) = (rank..rows).find(|&i| packed[i][wi] & bit != 0) else {
            continue;
        };
        packed.swap(rank, pr);
        let (top, rest) = packed.split_at_mut(rank + 1);
        let pivot = &top[rank];
        for row in rest.iter_mut() {
            if row[wi] & bit != 0 {
                for (a, b) in row[wi..].iter_mut().zip(&pivot[wi..]) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Fully reduced echelon basis, grown one vector at a time.
#[derive(Debug, Clone)]
pub(crate) struct Echelon<R: Ring> {
    ring: R,
    ambient: usize,
    basis: Vec<Vec<R::E>>,
    pivots: Vec<usize>,
}

impl<R: Ring> Echelon<R> {
    fn new(ring: R, ambient: usize) -> Self {
        Echelon { ring, ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    fn residual(&self, mut x: Vec<R::E>) -> Vec<R::E> {
        for (b, &pc) in self.basis.iter().zip(&self.pivots) {
            if !self.ring.is_zero(&x[pc]) {
                let c = x[pc].clone();
                self.ring.axpy_neg(&mut x, &c, b);
            }
        }
        x
    }

    fn contains(&self, x: Vec<R::E>) -> core::result::Result<bool, BigUint> {
        let r = self.residual(x);
        match r.iter().find(|e| !self.ring.is_zero(e)) {
            None => Ok(true),
            Some(e) => self.ring.inv(e).map(|_| false),
        }
    }

    fn insert(&mut self, x: Vec<R::E>) -> core::result::Result<bool, BigUint> {
        let mut r = self.residual(x);
        let Some(j) = r.iter().position(|e| !self.ring.is_zero(e)) else {
            return Ok(false);
        };
        let inv = self.ring.inv(&r[j])?;
        for e in r.iter_mut() {
            *e = self.ring.mul(e, &inv);
        }
        for b in self.basis.iter_mut() {
            if !self.ring.is_zero(&b[j]) {
                let c = b[j].clone();
                self.ring.axpy_neg(b, &c, &r);
            }
        }
        self.basis.push(r);
        self.pivots.push(j);
        Ok(true)
    }
}

#[derive(Debug, Clone)]
enum Space {
    Word(Echelon<WordRing>),
    Big(Echelon<BigRing>),
}

/// Span of a set of vectors in `F_p^n`, kept in fully reduced echelon form
/// so membership costs `O(n * dim)`.
#[derive(Debug, Clone)]
pub struct ColumnSpace {
    modulus: BigUint,
    space: Space,
}

impl ColumnSpace {
    /// The zero subspace of `F_p^ambient`.
    pub fn new(p: &BigUint, ambient: usize) -> Result<Self> {
        check_prime(p)?;
        Ok(Self::new_unchecked(p, ambient))
    }

    pub(crate) fn new_unchecked(p: &BigUint, ambient: usize) -> Self {
        let space = match p.to_u64().filter(|&w| w < arith::WORD_LIMIT) {
            Some(w) => Space::Word(Echelon::new(WordRing(w), ambient)),
            None => Space::Big(Echelon::new(BigRing(p.clone()), ambient)),
        };
        ColumnSpace { modulus: p.clone(), space }
    }

    /// Span of the columns of `m`.
    pub fn from_matrix(m: &ModMatrix) -> Self {
        let mut s = Self::new_unchecked(&m.modulus, m.rows);
        for j in 0..m.cols {
            let col: Vec<BigUint> = (0..m.rows).map(|i| m.get(i, j)).collect();
            s.insert(&col).expect("prime modulus never splits");
        }
        s
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn ambient(&self) -> usize {
        match &self.space {
            Space::Word(e) => e.ambient,
            Space::Big(e) => e.ambient,
        }
    }

    pub fn dimension(&self) -> usize {
        match &self.space {
            Space::Word(e) => e.basis.len(),
            Space::Big(e) => e.basis.len(),
        }
    }

    pub fn codimension(&self) -> usize {
        self.ambient() - self.dimension()
    }

    /// Reduced echelon basis vectors.
    pub fn basis(&self) -> Vec<Vec<BigUint>> {
        match &self.space {
            Space::Word(e) => e.basis.iter().map(|b| b.iter().map(|&x| BigUint::from(x)).collect()).collect(),
            Space::Big(e) => e.basis.clone(),
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.ambient() {
            return Err(Error::DimensionMismatch { expected: self.ambient(), found: len });
        }
        Ok(())
    }

    fn check_reduced(&self, x: &[BigUint]) -> Result<()> {
        self.check_len(x.len())?;
        if x.iter().any(|e| e >= &self.modulus) {
            return Err(Error::InvalidParameter("vector entries must be reduced modulo p"));
        }
        Ok(())
    }

    /// Membership of a reduced vector.
    pub fn contains(&self, x: &[BigUint]) -> Result<bool> {
        self.check_reduced(x)?;
        match &self.space {
            Space::Word(e) => e.contains(x.iter().map(|v| v.to_u64().unwrap()).collect()),
            Space::Big(e) => e.contains(x.to_vec()),
        }
        .map_err(split)
    }

    /// Membership of an integer vector, reduced on the fly.
    pub fn contains_int(&self, x: &[BigInt]) -> Result<bool> {
        self.check_len(x.len())?;
        match &self.space {
            Space::Word(e) => e.contains(x.iter().map(|v| e.ring.reduce_int(v)).collect()),
            Space::Big(e) => e.contains(x.iter().map(|v| e.ring.reduce_int(v)).collect()),
        }
        .map_err(split)
    }

    /// Add a reduced vector; returns whether the dimension grew.
    pub fn insert(&mut self, x: &[BigUint]) -> Result<bool> {
        self.check_reduced(x)?;
        match &mut self.space {
            Space::Word(e) => e.insert(x.iter().map(|v| v.to_u64().unwrap()).collect()),
            Space::Big(e) => e.insert(x.to_vec()),
        }
        .map_err(split)
    }

    pub fn insert_int(&mut self, x: &[BigInt]) -> Result<bool> {
        self.check_len(x.len())?;
        match &mut self.space {
            Space::Word(e) => {
                let v = x.iter().map(|v| e.ring.reduce_int(v)).collect();
                e.insert(v)
            }
            Space::Big(e) => {
                let v = x.iter().map(|v| e.ring.reduce_int(v)).collect();
                e.insert(v)
            }
        }
        .map_err(split)
    }

    /// A new space spanned by `self` and `x`; `self` is left untouched.
    pub fn extended(&self, x: &[BigUint]) -> Result<ColumnSpace> {
        let mut next = self.clone();
        next.insert(x)?;
        Ok(next)
    }
}

/// Most rows accepted by [`has_sparse_annihilator`].
pub const SPARSE_SEARCH_MAX_ROWS: usize = 24;

/// Search for a nonzero `w` with `w^T M = 0` and `|supp(w)| <= delta * rows`,
/// trying supports in increasing size. Returns the first witness found.
pub fn has_sparse_annihilator(m: &ModMatrix, delta: f64) -> Result<Option<Vec<BigUint>>> {
    if m.rows > SPARSE_SEARCH_MAX_ROWS {
        return Err(Error::EnumerationLimit { rows: m.rows, limit: SPARSE_SEARCH_MAX_ROWS });
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter("delta must lie in [0, 1]"));
    }
    let max_support = libm::floor(delta * m.rows as f64 + 1e-9) as usize;
    let rows = m.big_rows();
    let ring = BigRing(m.modulus.clone());
    for size in 1..=max_support.min(m.rows) {
        let mut found = None;
        for_each_combination(m.rows, size, |support| {
            let sub: Vec<Vec<BigUint>> = support.iter().map(|&i| rows[i].clone()).collect();
            if let Some(y) = ring::left_kernel_vector(&ring, &sub).expect("prime modulus never splits") {
                let mut w = alloc::vec![BigUint::zero(); m.rows];
                for (&i, yi) in support.iter().zip(y) {
                    w[i] = yi;
                }
                found = Some(w);
                return true;
            }
            false
        });
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Visit the `k`-subsets of `0..n` in lexicographic order until `f` returns true.
pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if f(&idx) {
            return;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every subspace of `F_p^n`, each given by its reduced row-echelon basis.
/// The zero subspace has an empty basis.
pub fn enumerate_subspaces(p: u64, n: usize) -> Vec<Vec<Vec<u64>>> {
    let mut out = Vec::new();
    for dim in 0..=n {
        for_each_combination(n, dim, |pivots| {
            // Free positions: row r, column c > pivots[r] with c not a pivot.
            let free: Vec<(usize, usize)> = pivots
                .iter()
                .enumerate()
                .flat_map(|(r, &pc)| (pc + 1..n).filter(|c| !pivots.contains(c)).map(move |c| (r, c)))
                .collect();
            let count = (p as usize).pow(free.len() as u32);
            for code in 0..count {
                let mut basis: Vec<Vec<u64>> = pivots
                    .iter()
                    .map(|&pc| {
                        let mut v = alloc::vec![0u64; n];
                        v[pc] = 1;
                        v
                    })
                    .collect();
                let mut c = code;
                for &(r, col) in &free {
                    basis[r][col] = (c % p as usize) as u64;
                    c /= p as usize;
                }
                out.push(basis);
            }
            false
        });
    }
    out
}

/// Elements of the span of `basis` in `F_p^n`, each encoded in base `p`
/// with coordinate 0 least significant.
fn span_codes(p: u64, n: usize, basis: &[Vec<u64>]) -> Vec<usize> {
    let mut members = alloc::vec![alloc::vec![0u64; n]];
    for b in basis {
        let mut next = Vec::with_capacity(members.len() * p as usize);
        for c in 0..p {
            next.extend(members.iter().map(|m| m.iter().zip(b).map(|(&x, &y)| (x + c * y) % p).collect::<Vec<_>>()));
        }
        members = next;
    }
    members.iter().map(|v| v.iter().rev().fold(0usize, |acc, &x| acc * p as usize + x as usize)).collect()
}

/// Exact `P(X in H)` for `X` with iid coordinates of residue law
/// `residues[r] / denom`, as the numerator over `denom^n`.
pub fn subspace_probability(p: u64, n: usize, basis: &[Vec<u64>], residues: &[u64]) -> Result<u128> {
    if residues.len() != p as usize {
        return Err(Error::DimensionMismatch { expected: p as usize, found: residues.len() });
    }
    let mut total: u128 = 0;
    for code in span_codes(p, n, basis) {
        let mut c = code;
        let mut prod: u128 = 1;
        for _ in 0..n {
            prod = prod.checked_mul(residues[c % p as usize] as u128).ok_or(Error::Overflow)?;
            c /= p as usize;
        }
        total = total.checked_add(prod).ok_or(Error::Overflow)?;
    }
    Ok(total)
}

/// Totals of an exhaustive check of `P(X in H) <= (1 - alpha)^{n - dim H}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OdlyzkoReport {
    pub subspaces: u64,
    pub violations: u64,
    /// Largest `P(X in H) / (1 - alpha)^{n - dim H}`.
    pub worst_ratio: f64,
}

/// Check every subspace of `F_p^n` against one residue law. With
/// `c = max residues` and `D = sum residues` the bound reads
/// `a <= c^{n-d} D^d` for `P(X in H) = a / D^n`, decided exactly.
pub fn odlyzko_check(p: u64, n: usize, residues: &[u64]) -> Result<OdlyzkoReport> {
    if !arith::is_prime_u64(p) {
        return Err(Error::NotPrime(alloc::format!("{p}")));
    }
    let denom: u64 = residues.iter().sum();
    let c = residues.iter().copied().max().unwrap_or(0);
    if denom == 0 {
        return Err(Error::InvalidDistribution("residue weights sum to zero"));
    }
    let mut report = OdlyzkoReport::default();
    for basis in enumerate_subspaces(p, n) {
        let d = basis.len();
        let a = subspace_probability(p, n, &basis, residues)?;
        let bound = (c as u128)
            .checked_pow((n - d) as u32)
            .and_then(|x| x.checked_mul((denom as u128).checked_pow(d as u32)?))
            .ok_or(Error::Overflow)?;
        report.subspaces += 1;
        if a > bound {
            report.violations += 1;
        }
        if bound > 0 {
            report.worst_ratio = report.worst_ratio.max(a as f64 / bound as f64);
        }
    }
    Ok(report)
}
