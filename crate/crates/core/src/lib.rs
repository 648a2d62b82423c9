//! Kinetically constrained spin chains (PXP family), exact matrix-product
//! zero modes with algebraic certificates, and the nullspace rank
//! minimization pipeline that distills them.

pub mod catalog;
pub mod certify;
pub mod distill;
pub mod dynamics;
pub mod hilbert;
pub mod linalg;
pub mod model;
pub mod mps;

pub use num_complex::Complex64 as C64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("kinetic constraint violated: {0}")]
    Constraint(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("unknown name: {0}")]
    Unknown(String),
    #[error("split invariant failed: {0}")]
    Split(String),
}

pub type Result<T> = std::result::Result<T, Error>;
