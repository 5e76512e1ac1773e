use alloc::string::String;

use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix entry count {found} does not match {rows}x{cols}")]
    Shape { rows: usize, cols: usize, found: usize },
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("modulus splits: found nontrivial factor {factor}")]
    ModulusSplit { factor: BigUint },
    #[error("factoring budget exhausted with unfactored cofactor {cofactor}")]
    FactoringFailed { cofactor: BigUint },
    #[error("{rows} rows exceeds the enumeration limit of {limit}")]
    EnumerationLimit { rows: usize, limit: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("distribution is degenerate (alpha = 0)")]
    Degenerate,
    #[error("matrix is singular")]
    Singular,
    #[error("field of order {p}^{f} is not supported")]
    UnsupportedField { p: u64, f: u32 },
    #[error("arithmetic overflow in exact computation")]
    Overflow,
}
