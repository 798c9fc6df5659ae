use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid does not resolve the requested profile: scale {scale:.3e} below the resolution floor {spacing:.3e}")]
    Resolution { scale: f64, spacing: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("spectral consistency check failed: {0}")]
    Consistency(String),

    #[error("modulation fit did not converge after {iters} iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("sign ambiguity: distances to +W and -W differ by less than {threshold:.0}% ({plus:.4e} vs {minus:.4e})")]
    SignAmbiguity { plus: f64, minus: f64, threshold: f64 },

    #[error("sign functional undefined for this state: {0}")]
    UndefinedRegion(String),

    #[error("sign rules disagree in the overlap region (lambda1 = {lambda1:.3e}, K = {k_value:.3e})")]
    SignConflict { lambda1: f64, k_value: f64 },

    #[error("ejection window too short: {0} usable samples")]
    WindowTooShort(usize),

    #[error("unknown {kind} '{name}' (known: {known})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
