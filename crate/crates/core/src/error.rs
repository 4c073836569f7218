use thiserror::Error;

/// Errors raised by the constructors and operations of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value must be finite, got {0}")]
    NonFinite(f64),
    #[error("mean photon number must be non-negative, got {0}")]
    NegativePhotonNumber(f64),
    #[error("mode index {index} out of range for a {modes}-mode state")]
    ModeIndex { index: usize, modes: usize },
    #[error("beam splitter needs two distinct modes, got {0} twice")]
    RepeatedMode(usize),
    #[error("transmissivity must lie in [0, 1], got {0}")]
    Transmissivity(f64),
    #[error("mode selection must not be empty")]
    EmptyModeSet,
    #[error("homodyne marginal supports 1 or 2 modes, got {0}")]
    UnsupportedModeCount(usize),
    #[error("covariance is degenerate or not positive definite (smallest eigenvalue {0:e})")]
    DegenerateCovariance(f64),
    #[error("covariance violates the uncertainty relation (smallest eigenvalue {0:e})")]
    Unphysical(f64),
    #[error("mode count mismatch: {0}")]
    ModeCountMismatch(String),
    #[error("power budget needs E > 0 and P > 0, got E = {e}, P = {p}")]
    InvalidBudget { e: f64, p: f64 },
    #[error("jammer strategy uses energy {used} above the budget P = {budget}")]
    InfeasibleJammer { used: f64, budget: f64 },
    #[error("sender symbol uses energy {used} above the budget E = {budget}")]
    InfeasibleSymbol { used: f64, budget: f64 },
    #[error("replay attack needs P >= E, got E = {e}, P = {p}")]
    AttackInfeasible { e: f64, p: f64 },
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("correlation must lie in [-1, 1], got {0}")]
    InvalidCorrelation(f64),
    #[error("not a stochastic matrix: {0}")]
    NotStochastic(String),
    #[error("search grid is empty")]
    EmptyGrid,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
