use thiserror::Error;

pub type Result<T> = std::result::Result<T, QfitError>;

#[derive(Debug, Error)]
pub enum QfitError {
    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("embedded dimension {dim} exceeds simulator cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("F^dagger F is singular (smallest singular value {sigma_min:e}); the quadratic form has a degenerate direction")]
    Singular { sigma_min: f64 },

    #[error("eigensolver failed to converge")]
    EigenFailure,

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("basis evaluation produced a non-finite value at x = {x}")]
    BasisEvaluation { x: String },

    #[error("invalid problem spec: {0}")]
    InvalidSpec(String),

    #[error("condition target {target} is infeasible: {reason}")]
    InfeasibleCondition { target: f64, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("aliasing: sigma_max * t0 / 2pi = {cycles:.4} must be below T/2 = {half}")]
    Aliasing { cycles: f64, half: usize },

    #[error("rotation constant C = {c} exceeds bound {bound} for {mode} mode")]
    RotationBound { c: f64, bound: f64, mode: &'static str },

    #[error("postselection branch has zero probability")]
    EmptyPostselection,

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("reference amplitude {amplitude:.4} is below {threshold:.4}; phase readout is ill-conditioned")]
    WeakReference { amplitude: f64, threshold: f64 },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl QfitError {
    /// Stable machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            QfitError::NonFinite => "non_finite",
            QfitError::Dimension(_) => "dimension",
            QfitError::DimensionOverflow { .. } => "dimension_overflow",
            QfitError::Singular { .. } => "singular",
            QfitError::EigenFailure => "eigen_failure",
            QfitError::ZeroVector => "zero_vector",
            QfitError::BasisEvaluation { .. } => "basis_evaluation",
            QfitError::InvalidSpec(_) => "invalid_spec",
            QfitError::InfeasibleCondition { .. } => "infeasible_condition",
            QfitError::InvalidConfig(_) => "invalid_config",
            QfitError::Aliasing { .. } => "aliasing",
            QfitError::RotationBound { .. } => "rotation_bound",
            QfitError::EmptyPostselection => "empty_postselection",
            QfitError::ZeroShots => "zero_shots",
            QfitError::WeakReference { .. } => "weak_reference",
            QfitError::Schema(_) => "schema_mismatch",
            QfitError::Io(e) if e.kind() == std::io::ErrorKind::NotFound => "file_not_found",
            QfitError::Io(_) => "io",
            QfitError::Json(_) => "schema_mismatch",
        }
    }
}
