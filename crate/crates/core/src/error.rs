use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("excited channel closed: delta = {delta} rad/s <= critical {critical} rad/s")]
    ClosedChannel { delta: f64, critical: f64 },

    #[error("dressed basis is singular for a vanishing Rabi frequency")]
    DegenerateBasis,

    #[error("transmission extraction denominator vanished (|F| = {0:e})")]
    SingularExtraction(f64),

    #[error("transfer/amplitude conversion denominator vanished (|{name}| = {value:e})")]
    SingularConversion { name: &'static str, value: f64 },

    #[error("no phase law is known for path {0}")]
    UnknownPhaseLaw(String),

    #[error("fringe has {count} minima within {tolerance:e} of the global minimum")]
    AmbiguousMinimum { count: usize, tolerance: f64 },

    #[error("|A2| - |A3| does not change sign on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("visibility undefined: maximum probability is zero")]
    Undefined,

    #[error("matrix is not invertible")]
    SingularMatrix,
}

pub type Result<T> = std::result::Result<T, Error>;
