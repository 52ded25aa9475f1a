use core::fmt;

/// Errors shared across the core modules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Error {
    /// Invalid construction parameters (probability, window, distribution).
    Config(&'static str),
    /// A site or edge query fell outside the field's window.
    OutOfWindow,
    /// A step was requested at a site whose maximizer set is empty.
    EmptyMaximizerSet,
    /// The requested path length exceeds the longest open path at the origin.
    InsufficientLength,
    /// The origin does not carry the window-escape status.
    OriginNotPercolating,
    /// The anti-diagonal scan reached the censored region before a hit.
    CensoredBeforeFound,
    /// Joint-path origins do not share an anti-diagonal.
    PreconditionDiagonal,
    /// The queried site is not a bi-directional percolation point.
    NotBidirectional,
    /// A path handed to the oriented-geodesic verifier contains a step that
    /// is not an open oriented edge.
    NotOrientedOpen,
    /// No path exists inside the allowed region.
    Disconnected,
    /// The construction ran out of safe window before completing.
    WindowExhausted,
    /// Fewer samples than the estimator's documented minimum.
    InsufficientSamples,
    /// The empirical survival curve left too few points to fit.
    DegenerateFit,
    /// Too few origins escape the window for a supercritical estimate.
    SubcriticalSuspected,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::OutOfWindow => write!(f, "site or edge outside the window"),
            Error::EmptyMaximizerSet => write!(f, "maximizer set is empty"),
            Error::InsufficientLength => {
                write!(f, "longest open path at origin is shorter than requested")
            }
            Error::OriginNotPercolating => write!(f, "origin does not escape the window"),
            Error::CensoredBeforeFound => {
                write!(f, "scan entered the censored margin before finding a hit")
            }
            Error::PreconditionDiagonal => {
                write!(f, "origins do not lie on a common anti-diagonal")
            }
            Error::NotBidirectional => write!(f, "site is not bi-directional"),
            Error::NotOrientedOpen => write!(f, "path step is not an open oriented edge"),
            Error::Disconnected => write!(f, "no path inside the allowed set"),
            Error::WindowExhausted => write!(f, "window too small for this construction"),
            Error::InsufficientSamples => write!(f, "not enough samples"),
            Error::DegenerateFit => write!(f, "survival curve too short for a tail fit"),
            Error::SubcriticalSuspected => {
                write!(f, "escape rate below the supercritical floor")
            }
        }
    }
}

impl core::error::Error for Error {}
