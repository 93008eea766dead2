use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("label `{0}` appears on both operands")]
    LabelCollision(String),
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("labels must be distinct, `{0}` repeated")]
    DuplicateLabel(String),
    #[error("{0:?} is not a permutation of the state labels")]
    NotPermutation(Vec<String>),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian: |M - M†| = {deviation:.3e} at ({row}, {col}) exceeds 1e-9")]
    NotHermitian { deviation: f64, row: usize, col: usize },
    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:.3e} below -{tolerance:e}")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },
    #[error("trace {trace} deviates from 1 by more than 1e-6")]
    BadTrace { trace: f64 },
    #[error("vector norm {norm} deviates from 1 by more than 1e-10")]
    BadNorm { norm: f64 },
    #[error("state is not pure: Tr(rho^2) = {purity}")]
    NotPure { purity: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("channel is not trace preserving: |Tr_out J - I| = {0:.3e}")]
    NotTracePreserving(f64),
    #[error("POVM effects do not sum to the identity: deviation {0:.3e}")]
    IncompletePovm(f64),
    #[error("not an isometry: |V†V - I| = {0:.3e}")]
    NotIsometry(f64),
    #[error("solver did not converge after {iterations} iterations (primal residual {primal_residual:.3e}, dual residual {dual_residual:.3e}, gap {gap:.3e})")]
    NonConvergence { iterations: usize, primal_residual: f64, dual_residual: f64, gap: f64 },
    #[error("budget violated: {0}")]
    BudgetViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
