//! Sparse symmetric linear algebra: CSR storage, fill-reducing orderings,
//! Cholesky factorization with a reusable symbolic phase, and sampling from
//! canonical-form Gaussians.

mod cholesky;
mod csr;
mod gaussian;
pub mod ordering;

pub use cholesky::{CholeskyFactor, SymbolicCholesky, PIVOT_TOL};
pub use csr::SparseMatrix;
pub use gaussian::{sample_canonical_normal, sample_canonical_normal_with, sample_with_factor};
pub use ordering::Ordering;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparseError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("invalid CSR layout: {0}")]
    InvalidLayout(&'static str),
    #[error("invalid permutation")]
    InvalidPermutation,
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("numeric input does not share the analysed sparsity pattern")]
    PatternMismatch,
    #[error("empty matrix")]
    Empty,
}
