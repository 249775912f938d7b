use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which model assumption failed during validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    /// F must map nonnegative histories to nonnegative vectors.
    A1Positivity,
    /// -V must be cooperative (quasimonotone).
    A2Cooperativity,
    /// -V-hat must be exponentially stable.
    A2Stability,
}

impl std::fmt::Display for Assumption {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Assumption::A1Positivity => write!(f, "A1 (F positive)"),
            Assumption::A2Cooperativity => write!(f, "A2 (-V cooperative)"),
            Assumption::A2Stability => write!(f, "A2 (s(-V-hat) < 0)"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("eigenvalue iteration exceeded the cap of {cap} sweeps (dim {dim})")]
    NonConvergence { dim: usize, cap: usize },

    #[error("matrix numerically singular: pivot {pivot:.3e} below floor {floor:.3e}")]
    Singular { pivot: f64, floor: f64 },

    #[error("matrix is not Metzler: entry ({i},{j}) = {value}")]
    NotMetzler { i: usize, j: usize, value: f64 },

    #[error("history spans tau = {history_tau} but the operator reaches back {max_delay}")]
    DelayExceedsHistory { history_tau: f64, max_delay: f64 },

    #[error("operator is not cooperative")]
    NotCooperative,

    #[error("no sign change for the characteristic root within [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("exp(-lambda*tau) overflows for lambda = {lambda}, tau = {tau}; narrow the bracket")]
    Overflow { lambda: f64, tau: f64 },

    #[error("trajectory norm exceeded the overflow guard {guard:.1e} at t = {t}")]
    BlowUp { t: f64, guard: f64 },

    #[error("power iteration did not settle after {cap} iterations; last estimates {last0} / {last1}")]
    NoConvergence { cap: usize, last0: f64, last1: f64 },

    #[error("-V-hat is not stable: s(-V-hat) = {s}")]
    NotStable { s: f64 },

    #[error("model violates assumption {which}")]
    AssumptionViolated { which: Assumption },

    #[error("F-hat is zero: R0 = 0 and no bracket in mu exists")]
    ZeroR0,

    #[error("horizon cap T = {cap} reached before trajectories settled")]
    HorizonExceeded { cap: f64 },

    #[error("invalid model spec: {0}")]
    BadSpec(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),
}
