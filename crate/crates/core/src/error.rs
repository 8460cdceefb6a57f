use alloc::string::String;
use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^H| = {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {eig:e} below -{tol:e})")]
    NotPsd { eig: f64, tol: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("dimension {dim} exceeds the size cap {cap}")]
    SizeLimit { dim: usize, cap: usize },
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("eigensolver did not converge after {iterations} sweeps (dimension {dim}, norm {norm:e})")]
    NoConvergence { iterations: usize, dim: usize, norm: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("derivative {index} leaks into the kernel of the state (kernel block norm {leak:e})")]
    ModelInconsistent { index: usize, leak: f64 },
    #[error("SLD Fisher matrix is singular (min eigenvalue {0:e})")]
    SingularFisher(f64),
    #[error("state is rank deficient; a full-rank state is required")]
    SingularState,
    #[error("operation requires {expected} parameters, model has {found}")]
    WrongArity { expected: usize, found: usize },
    #[error("operation requires Hilbert dimension {expected}, model has {found}")]
    WrongDim { expected: usize, found: usize },
    #[error("parameter outside its domain: {0}")]
    Domain(String),
    #[error("POVM elements do not sum to the identity (defect {0:e})")]
    PovmIncomplete(f64),
    #[error("random model generation exhausted {0} redraws")]
    Exhausted(usize),
    #[error("inner conic solve ended with status {0}")]
    Solver(&'static str),
    #[error("malformed conic program: {0}")]
    Program(String),
}

pub type Result<T> = core::result::Result<T, Error>;
