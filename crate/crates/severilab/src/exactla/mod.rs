//! Exact linear algebra over the rationals and over prime fields.
//!
//! Everything downstream reduces to ranks and kernels of the matrices built
//! here, so this module is deliberately small and deterministic: first-nonzero
//! pivoting, reduced echelon form, kernel bases normalized with a unit at
//! their free column. No floating point anywhere.

mod matrix;
mod scalar;

pub use matrix::{guarded_int_rank, int_matrix, Matrix};
pub use scalar::{is_prime_u64, FieldSpec, Scalar};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinAlgError {
    #[error("entry count {got} does not match {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, got: usize },
    #[error("mixed fields in one matrix: {0} vs {1}")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error("right-hand side length {got}, expected {expected}")]
    RhsLength { expected: usize, got: usize },
    #[error("rank over F_{p1} is {r1} but over F_{p2} is {r2}; pick different primes")]
    BadPrime { p1: u64, p2: u64, r1: usize, r2: usize },
    #[error("field must be a prime field for this operation")]
    NotPrimeField,
}
