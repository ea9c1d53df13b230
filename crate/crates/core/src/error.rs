use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: String,
    },

    #[error("shape mismatch at index {index}: {param} is {found}, expected {expected}")]
    ShapeMismatch {
        index: usize,
        param: &'static str,
        found: f64,
        expected: f64,
    },

    #[error("sample is empty")]
    EmptySample,

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("changepoint is not identifiable: {0}")]
    Unidentifiable(String),

    #[error("simulation failed: {0}")]
    Simulation(String),

    #[error("{failed} of {total} bootstrap replicates failed")]
    BootstrapFailures { failed: usize, total: usize },

    #[error("no feasible point in the search grid")]
    InfeasibleGrid,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, domain: impl Into<String>) -> Error {
    Error::Domain {
        name,
        value,
        domain: domain.into(),
    }
}
