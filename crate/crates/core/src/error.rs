//! Error types used by `explab`.

use thiserror::Error;

/// `explab` `Result` type.
pub type Result<T> = core::result::Result<T, Error>;

/// `explab` error.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An alphabet was declared with zero symbols or with inconsistent labels.
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    /// A probability vector or matrix row is negative or does not sum to one.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    /// Two objects that must share a shape do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    /// `D(p‖q|marg)` is infinite because `q` vanishes where `p` does not.
    #[error("absolute continuity violated at given={given}, symbol={symbol}")]
    AbsoluteContinuity { given: usize, symbol: usize },
    /// A sequence contains a symbol outside its alphabet.
    #[error("symbol {symbol} at position {position} outside alphabet of size {size}")]
    SymbolOutOfRange {
        symbol: usize,
        position: usize,
        size: usize,
    },
    /// Two sequences that must have the same length do not.
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    /// A sequence or block length of zero was supplied.
    #[error("empty input: {0}")]
    Empty(String),
    /// Counts do not form a valid type.
    #[error("invalid type: {0}")]
    InvalidType(String),
    /// A codebook row does not have the shared composition.
    #[error("codeword {row} does not have the codebook composition")]
    CompositionViolated { row: usize },
    /// An enumeration or simulation would exceed its configured cap.
    #[error("resource limit exceeded: {what} needs {needed:.3e}, cap is {cap:.3e}")]
    ResourceLimit { what: String, needed: f64, cap: f64 },
    /// The channel gives zero tilted mass to every output.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),
    /// An optimizer stopped before meeting its tolerance.
    #[error("no convergence after {iterations} iterations (gradient norm {grad_norm:.3e})")]
    NonConvergence { iterations: usize, grad_norm: f64 },
    /// A parameter is outside its allowed range.
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    /// A JSCC composition is too small to index its source class.
    #[error("class {class}: log|T(Q)| = {log_type_class:.6} < log|A| = {log_class:.6}")]
    InfeasibleComposition {
        class: usize,
        log_type_class: f64,
        log_class: f64,
    },
    /// Too few usable points for an exponent fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// A channel or configuration string could not be parsed.
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
}

impl Error {
    pub(crate) fn resource(what: impl Into<String>, needed: f64, cap: f64) -> Self {
        Error::ResourceLimit {
            what: what.into(),
            needed,
            cap,
        }
    }
}
