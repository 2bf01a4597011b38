//! Error types shared across the kernel.

use thiserror::Error;

/// Errors raised by the exact-arithmetic kernel and the geometric layers.
#[derive(Debug, Error)]
pub enum KernelError {
    #[error("residue characteristic {0} is not allowed (need a prime p >= 5, p < 2^31)")]
    BadResidueField(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not invertible")]
    NotInvertible,
    #[error("field has no extension generator")]
    NoExtension,
    #[error("zero polynomial where a nonzero one is required")]
    ZeroPolynomial,
    #[error("ambient spaces do not match")]
    AmbientMismatch,
    #[error("coefficient fields do not match")]
    FieldMismatch,
    #[error("cannot scale the parameter t itself")]
    ScaleParameter,
    #[error("inhomogeneous polynomial: saw weighted degrees {0} and {1}")]
    Inhomogeneous(i64, i64),
    #[error("initial part requested at order {requested}, actual order is {actual}")]
    OrderMismatch { requested: i64, actual: i64 },
    #[error("factorization supported only up to degree 4 in at most 4 variables (got degree {degree}, {vars} variables)")]
    FactorOutOfRange { degree: i64, vars: usize },
    #[error("extension tower degree {0} exceeds the supported cap of {1}")]
    TowerTooDeep(usize, usize),
    #[error("polynomial is not squarefree where a squarefree one is required")]
    NotSquarefree,
    #[error("{0}")]
    Geometry(String),
    #[error("undecided: {0}")]
    Undecided(String),
}

impl KernelError {
    pub fn geometry(msg: impl Into<String>) -> Self {
        KernelError::Geometry(msg.into())
    }
}
