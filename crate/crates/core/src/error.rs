use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("altitude band [{lo}, {hi}] km needs 0 <= lo <= hi <= {height}")]
    InvalidBand { lo: f64, hi: f64, height: f64 },

    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("transmitter co-located with the ground station")]
    SingularDistance,

    #[error("no target UAV available")]
    NoTarget,

    #[error("analytic evaluation requires Rayleigh fading (shape 1), got shape {shape}")]
    UnsupportedFading { shape: f64 },

    #[error("quadrature did not reach tolerance {requested:e}: achieved error estimate {achieved:e} on value {value:e}")]
    IntegrationAccuracy {
        value: f64,
        achieved: f64,
        requested: f64,
    },

    #[error("range bucket {bucket} has no probability mass")]
    EmptyBucket { bucket: &'static str },

    #[error("distance {distance} km cannot be reached inside the UAV altitude band")]
    Placement { distance: f64 },

    #[error("parse error at `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("invalid `{field}`: {constraint}")]
    Validation { field: String, constraint: String },

    #[error("{0}")]
    Io(String),

    #[error("sweep point {x_name}={x_value}{series}: {source}")]
    SweepPoint {
        x_name: String,
        x_value: f64,
        series: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: impl Into<f64>) -> Self {
        Error::Domain {
            what,
            value: value.into(),
        }
    }

    /// True for failures of the numerical engines rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::IntegrationAccuracy { .. } => true,
            Error::SweepPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
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
