use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rotation axis is zero but angle is {0}")]
    ZeroAxis(f64),

    #[error("matrix is not a rotation: orthogonality defect {orthogonality:.3e}, det {det}")]
    NotARotation { orthogonality: f64, det: f64 },

    #[error("singular configuration: charges {body1} (body 1) and {body2} (body 2) coincide")]
    SingularConfiguration { body1: usize, body2: usize },

    #[error("step size underflow at t = {t}: h = {h:.3e}")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("non-finite state encountered at t = {t}")]
    Divergence { t: f64 },

    #[error("rollout diverged at step {step}")]
    RolloutDivergence { step: usize },

    #[error("integration of trajectory {index} failed: {source}")]
    Trajectory {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown case `{0}` (expected so2, so3 or se3)")]
    UnknownCase(String),

    #[error("case mismatch: expected {expected}, found {found}")]
    CaseMismatch { expected: String, found: String },

    #[error("unknown layer kind {0}")]
    UnknownLayerKind(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("gradient check failed: residual {residual:.3e} exceeds {tolerance:.0e}")]
    GradientCheck { residual: f64, tolerance: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::CaseMismatch { .. } => 2,
            Error::NonFiniteLoss { .. } => 3,
            Error::GradientCheck { .. } => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
