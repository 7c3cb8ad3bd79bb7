use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("register needs {requested} amplitudes, budget is {budget}")]
    MemoryBudget { requested: u128, budget: usize },

    #[error("register needs {sites} sites, at most {max} fit the budget")]
    SiteBudget { sites: usize, max: usize },

    #[error("invalid register layout: {0}")]
    InvalidLayout(String),

    #[error("invalid subsystem mask: {0}")]
    InvalidMask(String),

    #[error("subsystems overlap at site {0}")]
    Overlap(usize),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("eigensolver failed to converge")]
    EigenNoConvergence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bound formula outside its domain: log argument {0}")]
    FormulaDomain(f64),

    #[error("no valid ramp scheme: {0}")]
    NoValidScheme(String),

    #[error("gap {gap} is smaller than the secret size {secret}")]
    GapTooSmall { gap: usize, secret: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the failure is a resource-budget rejection rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::MemoryBudget { .. } | Error::SiteBudget { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
