use thiserror::Error;

/// Crate-wide error type. Invariant breaches in numerical kernels abort the
/// run with a module-tagged message so the driver can fail closed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spectral: {0}")]
    Spectral(String),

    #[error("target: {0}")]
    Target(String),

    #[error("heatflow: {0}")]
    HeatFlow(String),

    #[error("gauge: {0}")]
    Gauge(String),

    #[error("slflow: {0}")]
    SlFlow(String),

    #[error("diagnostics: {0}")]
    Diagnostics(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
