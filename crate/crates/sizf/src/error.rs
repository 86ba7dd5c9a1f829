use thiserror::Error;

/// Errors produced by the toolkit.
///
/// The CLI maps these onto exit codes: configuration/usage problems exit
/// with 2, mathematical degeneracies (rank-deficient Riesz systems) with 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown group preset `{0}`")]
    UnknownPreset(String),

    #[error("group `{0}` has no printed group law")]
    NoGroupLaw(String),

    #[error("translation coordinate {value} is not on the grid (spacing {spacing})")]
    OffGrid { value: f64, spacing: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("invalid operation: {0}")]
    Invalid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("field file error: {0}")]
    FieldFile(String),

    #[error("rank-deficient Gramian at sigma = {sigma:?}: system is linearly dependent and not Riesz")]
    RankDeficient { sigma: Vec<f64> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code for the CLI: 2 for usage/config errors, 3 for mathematical
    /// degeneracy. Check failures (exit 1) are not errors and are handled by
    /// the verify flow directly.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::RankDeficient { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
