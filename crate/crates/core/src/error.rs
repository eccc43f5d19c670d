use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole: {0}")]
    PoleError(String),
    #[error("zero argument: {0}")]
    ZeroArgument(String),
    #[error("alpha vanishes: {0}")]
    AlphaZero(String),
    #[error("f vanishes in a 1/f prefactor: {0}")]
    FZero(String),
    #[error("sampling exhausted after {0} draws")]
    ExhaustedSampling(usize),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("leg mismatch: {0}")]
    LegMismatch(String),
    #[error("no vacuum among the product candidates")]
    NoVacuumFound,
    #[error("not an eigenvector: {0}")]
    NotAnEigenvector(String),
    #[error("no root found: {0}")]
    NoRootFound(String),
    #[error("Bethe vector vanishes")]
    ZeroBetheVector,
    #[error("config error: {0}")]
    ConfigError(String),
    #[error("dimension {0} too large for dense conversion")]
    DimensionTooLarge(usize),
    #[error("family does not commute (defect {0:e})")]
    NotCommuting(f64),
}

impl Error {
    /// Errors caused by an unlucky sample point; the harness resamples on these.
    pub fn is_singular_point(&self) -> bool {
        matches!(
            self,
            Error::PoleError(_) | Error::ZeroArgument(_) | Error::AlphaZero(_) | Error::FZero(_)
        )
    }

    pub fn with_context(self, ctx: &str) -> Error {
        match self {
            Error::PoleError(m) => Error::PoleError(format!("{ctx}: {m}")),
            Error::ZeroArgument(m) => Error::ZeroArgument(format!("{ctx}: {m}")),
            Error::AlphaZero(m) => Error::AlphaZero(format!("{ctx}: {m}")),
            Error::FZero(m) => Error::FZero(format!("{ctx}: {m}")),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
