use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants are split into two families: input validation problems and
/// numerical failures. The CLI maps them onto distinct exit codes through
/// [`Error::is_numerical`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("branch domain error: {0}")]
    Domain(String),

    #[error("price {price} violates the {bound} no-arbitrage bound {limit}")]
    PriceOutOfBounds { price: f64, bound: Bound, limit: f64 },

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("unsupported alpha {0}: only 0 (gamma) and 1/2 (inverse gaussian) are sampled")]
    UnsupportedAlpha(f64),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("implausible discount factor {0}")]
    ImplausibleDiscount(f64),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("no tenor at maturity {0}")]
    MissingTenor(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Which side of the no-arbitrage band a price fell out of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Lower,
    Upper,
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Lower => f.write_str("lower (intrinsic)"),
            Bound::Upper => f.write_str("upper"),
        }
    }
}

impl Error {
    /// True for failures of a numerical routine as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::NonConvergence(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
