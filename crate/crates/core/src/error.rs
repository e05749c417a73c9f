use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("vector is not normalised (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("functional is not a state: {0}")]
    NotAState(String),
    #[error("state is not normal for the representation (residual {residual:e})")]
    NotPiNormal { residual: f64 },
    #[error("subalgebra is not contained in the center (residual {residual:e})")]
    NotSubcentral { residual: f64 },
    #[error("unknown sector label `{0}`")]
    UnknownLabel(String),
    #[error("operator is not in the algebra (residual {residual:e})")]
    NotInAlgebra { residual: f64 },
    #[error("unknown outcome {0}")]
    UnknownOutcome(f64),
    #[error("outcome labels cannot be aligned: {0}")]
    LabelMismatch(String),
    #[error("measurement-process condition fails (violation {violation:e})")]
    MppcFailed { violation: f64 },
    #[error("state is not a factor state (center dimension {center_dim})")]
    NotFactorState { center_dim: usize },
    #[error("operator is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
