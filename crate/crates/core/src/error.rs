use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("evaluation at a pole: entry ({row}, {col}) at s = {at}")]
    PoleEvaluation { row: usize, col: usize, at: Complex64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("unsupported multiplicity at {at}: {what}")]
    UnsupportedMultiplicity { at: Complex64, what: String },

    #[error("location {at} is not a zero of the factored matrix (sigma_min/norm = {ratio:.3e})")]
    NotAZero { at: Complex64, ratio: f64 },

    #[error("ill-conditioned extraction: locations {a} and {b} nearly coincide")]
    IllConditioned { a: Complex64, b: Complex64 },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("performance diverges: {what} at {a} collides with {b}")]
    Divergence { what: String, a: Complex64, b: Complex64 },

    #[error("corollary hypothesis violated ({case}): {reason}")]
    CaseMismatch { case: String, reason: String },

    #[error("coprime construction failed: {0}")]
    Construction(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergence { .. })
    }
}
