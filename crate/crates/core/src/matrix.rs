use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::{Error, Result};

/// Dense row-major matrix of arbitrary-precision integers.
///
/// Values are immutable once built; every transformation returns a new
/// matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if entries.len() != rows * cols {
            return Err(Error::Shape { rows, cols, found: entries.len() });
        }
        Ok(IntMatrix { rows, cols, entries })
    }

    /// Build from nested rows of anything convertible to `BigInt`.
    pub fn from_rows<T, R>(rows: &[R]) -> Result<Self>
    where
        T: Clone + Into<BigInt>,
        R: AsRef<[T]>,
    {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(nrows * ncols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(Error::Shape { rows: nrows, cols: ncols, found: r.len() });
            }
            entries.extend(r.iter().cloned().map(Into::into));
        }
        Self::new(nrows, ncols, entries)
    }

    /// Build from column vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Result<Self> {
        let cols = columns.len();
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut entries = alloc::vec![BigInt::zero(); rows * cols];
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch { expected: rows, found: c.len() });
            }
            for (i, x) in c.iter().enumerate() {
                entries[i * cols + j] = x.clone();
            }
        }
        Self::new(rows, cols, entries)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&alloc::vec![BigInt::from(1); n], n, n)
    }

    /// `rows x cols` matrix with `diag` on the main diagonal.
    pub fn diagonal(diag: &[BigInt], rows: usize, cols: usize) -> Self {
        let mut entries = alloc::vec![BigInt::zero(); rows * cols];
        for (i, d) in diag.iter().enumerate().take(rows.min(cols)) {
            entries[i * cols + i] = d.clone();
        }
        IntMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> BigInt {
        self.entries.iter().map(|x| x.abs()).max().unwrap_or_default()
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        IntMatrix { rows: self.cols, cols: self.rows, entries }
    }

    /// Submatrix made of the listed columns, in the listed order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.cols) {
            return Err(Error::DimensionMismatch { expected: self.cols, found: bad + 1 });
        }
        let mut entries = Vec::with_capacity(self.rows * columns.len());
        for i in 0..self.rows {
            for &j in columns {
                entries.push(self.get(i, j).clone());
            }
        }
        Self::new(self.rows, columns.len(), entries)
    }

    /// Submatrix made of the listed rows.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut entries = Vec::with_capacity(self.cols * rows.len());
        for &i in rows {
            if i >= self.rows {
                return Err(Error::DimensionMismatch { expected: self.rows, found: i + 1 });
            }
            entries.extend_from_slice(self.row(i));
        }
        Self::new(rows.len(), self.cols, entries)
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &IntMatrix) -> Result<Self> {
        if other.rows != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: other.rows });
        }
        let cols = self.cols + other.cols;
        let mut entries = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            entries.extend_from_slice(self.row(i));
            entries.extend_from_slice(other.row(i));
        }
        Self::new(self.rows, cols, entries)
    }

    pub fn mul(&self, rhs: &IntMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: rhs.rows });
        }
        let mut entries = alloc::vec![BigInt::zero(); self.rows * rhs.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    entries[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        Self::new(self.rows, rhs.cols, entries)
    }

    /// Row vector times matrix: `y^T M`.
    pub fn left_apply(&self, y: &[BigInt]) -> Result<Vec<BigInt>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: y.len() });
        }
        let mut out = alloc::vec![BigInt::zero(); self.cols];
        for (i, yi) in y.iter().enumerate() {
            if yi.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(self.row(i)) {
                *o += yi * x;
            }
        }
        Ok(out)
    }

    pub(crate) fn into_rows(self) -> Vec<Vec<BigInt>> {
        let cols = self.cols;
        let mut it = self.entries.into_iter();
        (0..self.rows).map(|_| it.by_ref().take(cols).collect()).collect()
    }

    pub(crate) fn from_row_vecs(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let entries: Vec<BigInt> = rows.into_iter().flatten().collect();
        Self::new(nrows, ncols, entries)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for x in self.row(i) {
                write!(f, "{x} ")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
