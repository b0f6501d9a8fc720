use thiserror::Error;

/// Failure modes shared by the thermodynamic, sampling, dynamics and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("partition function diverges: lambda3 = {l3} must be positive")]
    NonConvergent { l3: f64 },

    #[error("quadrature failed to reach tolerance: {0}")]
    QuadratureFailure(String),

    #[error("state is not admissible: {0}")]
    NotAdmissible(String),

    #[error("not strictly hyperbolic: c^2 = {c2}")]
    NotHyperbolic { c2: f64 },

    #[error("rejection envelope failure: acceptance {accepted}/{trials} below 1e-3")]
    EnvelopeFailure { accepted: u64, trials: u64 },

    #[error("non-finite coordinate at microscopic time {t_micro}")]
    NonFinite { t_micro: f64 },

    #[error("index {index} out of range {lo}..={hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("swap audit failed at event {event}: {what} changed")]
    SwapAudit { event: u64, what: &'static str },

    #[error("CFL violation: dt = {dt} exceeds {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("incompatible corner data ({condition}): residual {residual:.3e} > {tolerance:.1e}")]
    IncompatibleCorner {
        condition: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("shock detected at t = {t_shock} before horizon {horizon}")]
    ShockBeforeHorizon { t_shock: f64, horizon: f64 },

    #[error("block of width {k}+1 around site {site} does not fit in 1..={n}")]
    BlockOutOfRange { site: usize, k: usize, n: usize },

    #[error("snapshot times misaligned: micro {micro:?} vs macro {macro_times:?}")]
    TimeMisalignment {
        micro: Vec<f64>,
        macro_times: Vec<f64>,
    },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures of the numerical pipeline (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::Config { .. } | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
