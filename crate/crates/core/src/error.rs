use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("degenerate mode pair at k={k}, m={m}: |<adj, mode>| = {product:e}")]
    Degenerate { k: f64, m: usize, product: f64 },
    #[error("blow-up at t={t}: max |A| = {max_abs:e} at k={k}, m={m}")]
    BlowUp {
        t: f64,
        max_abs: f64,
        k: f64,
        m: usize,
    },
    #[error("undefined phase: amplitude below {threshold:e} at k={k}, m={m}")]
    UndefinedPhase { k: f64, m: usize, threshold: f64 },
    #[error("diagnostic error: {0}")]
    Diagnostic(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
