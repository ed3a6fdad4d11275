use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Each variant belongs to one of three classes that the CLI maps onto
/// process exit codes: validation (2), numerical failure (3) and
/// verification failure (4).
#[derive(Debug, Error)]
pub enum RwaError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |H - H^dagger| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("Bethe root {index} is zero")]
    ZeroRoot { index: usize },

    #[error("Bethe roots {first} and {second} collide (distance {distance:e})")]
    RootCollision { first: usize, second: usize, distance: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian at Newton step {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("eigen-residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("photon cutoff {n_max} is below the required {required}")]
    CutoffTooSmall { n_max: usize, required: usize },

    #[error("root sum has imaginary part {imag:e}; energy would not be real")]
    NonRealEnergy { imag: f64 },

    #[error("factorial range exceeded: M + 2S = {value} > {limit}")]
    OutOfRange { value: u32, limit: u32 },

    #[error("quadrature did not converge: step halving changed the integral by {relative_change:e}")]
    QuadratureNonConvergence { relative_change: f64 },

    #[error("ODE norm drift {drift:e} too large; increase the step count")]
    NormDrift { drift: f64 },

    #[error("plot domain is empty: {0}")]
    EmptyDomain(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RwaError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        RwaError::InvalidArgument(msg.into())
    }

    /// Short machine-readable tag, used in CSV status columns.
    pub fn code(&self) -> &'static str {
        match self {
            RwaError::InvalidArgument(_) => "InvalidArgument",
            RwaError::DimensionMismatch { .. } => "DimensionMismatch",
            RwaError::NotHermitian { .. } => "NotHermitian",
            RwaError::ZeroRoot { .. } => "ZeroRoot",
            RwaError::RootCollision { .. } => "RootCollision",
            RwaError::NonConvergence { .. } => "NonConvergence",
            RwaError::SingularJacobian { .. } => "SingularJacobian",
            RwaError::ResidualTooLarge { .. } => "ResidualTooLarge",
            RwaError::CutoffTooSmall { .. } => "CutoffTooSmall",
            RwaError::NonRealEnergy { .. } => "NonRealEnergy",
            RwaError::OutOfRange { .. } => "OutOfRange",
            RwaError::QuadratureNonConvergence { .. } => "QuadratureNonConvergence",
            RwaError::NormDrift { .. } => "NormDrift",
            RwaError::EmptyDomain(_) => "EmptyDomain",
            RwaError::MissingColumn(_) => "MissingColumn",
            RwaError::Config { .. } => "Config",
            RwaError::Verification(_) => "Verification",
            RwaError::Io(_) => "Io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RwaError::InvalidArgument(_)
            | RwaError::DimensionMismatch { .. }
            | RwaError::NotHermitian { .. }
            | RwaError::CutoffTooSmall { .. }
            | RwaError::OutOfRange { .. }
            | RwaError::EmptyDomain(_)
            | RwaError::MissingColumn(_)
            | RwaError::Config { .. }
            | RwaError::Io(_) => 2,
            RwaError::Verification(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, RwaError>;
