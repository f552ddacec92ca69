//! Error taxonomy shared by the library and the CLI exit-code mapping.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed potential expression or config value.
    #[error("syntax error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    /// The problem instance falls outside the regime a theorem requires
    /// (critical point on the boundary, degenerate Hessian, J <= 0, ...).
    #[error("regime violation: {0}")]
    Regime(String),

    /// A computation produced results that cannot be trusted
    /// (refinement disagreement, non-converged iteration, ...).
    #[error("numerical instability: {0}")]
    Instability(String),

    #[error(
        "infeasible resolution: {requested} interior points needed, cap is {cap}; \
         smallest feasible h is {min_h:.6e}"
    )]
    InfeasibleResolution {
        requested: usize,
        cap: usize,
        min_h: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code: 1 config, 2 regime violation, 3 numerical trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Config(_) | Error::Io(_) => 1,
            Error::Regime(_) | Error::Precondition(_) => 2,
            Error::Instability(_) | Error::InfeasibleResolution { .. } | Error::Numerical(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Regime(_) => "regime",
            Error::Instability(_) => "instability",
            Error::InfeasibleResolution { .. } => "infeasible_resolution",
            Error::Precondition(_) => "precondition",
            Error::Numerical(_) => "numerical",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
