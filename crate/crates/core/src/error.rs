use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside the domain of {op}")]
    Domain {
        op: &'static str,
        name: &'static str,
        value: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("point ({x}, {y}) nm lies on an atomic string")]
    Singularity { x: f64, y: f64 },

    #[error("channel curvature {curvature} eV/nm^2 at the axis is not positive")]
    DegenerateChannel { curvature: f64 },

    #[error("probe trajectory dechanneled at depth {depth} nm")]
    Dechanneled { depth: f64 },

    #[error("not enough samples for {what}: need {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("window has zero area")]
    DegenerateWindow,

    #[error("profile is flat, FWHM is undefined")]
    UndefinedFwhm,

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("state norm deviates from 1 by {0:e}")]
    NotNormalized(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("malformed record data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
