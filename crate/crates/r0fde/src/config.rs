//! Tolerances and iteration caps, centralized so no module carries ad-hoc
//! magic numbers.

/// QR sweep cap is `QR_ITER_FACTOR * m^2`.
pub const QR_ITER_FACTOR: usize = 100;

/// Pivots below `PIVOT_FLOOR * ||M||_inf` are treated as singular.
pub const PIVOT_FLOOR: f64 = 1e-12;

/// Entrywise slack for the order predicates (nonnegative / Metzler).
/// Zero by default: the cones are sharp. CLI can relax it for file round-off.
pub const ORDER_EPS: f64 = 0.0;

/// Bisection width tolerance on the principal characteristic root. Tighter
/// than the 1e-10 residual contract so that |g(lambda*)| lands inside it.
pub const ROOT_TOL: f64 = 1e-12;
pub const ROOT_ITER_CAP: usize = 200;

/// Values within this band of zero classify as "critical (~0)" in sign tests.
pub const ZERO_BAND: f64 = 1e-8;

/// Power-iteration defaults for the monodromy radius.
pub const POWER_TOL: f64 = 1e-8;
pub const POWER_ITER_CAP: usize = 2000;

/// Iterate sup-norms below this collapse to a zero spectral radius.
pub const ZERO_RADIUS_FLOOR: f64 = 1e-300;

/// Trajectory overflow guard. High on purpose: unstable linear systems are
/// legitimate inputs over short horizons.
pub const BLOWUP_GUARD: f64 = 1e151;

/// Default tolerance on mu for the bisection route to R0.
pub const MU_TOL: f64 = 1e-4;

/// Eigenvalue residual contract: ||Mv - lambda v|| <= RESIDUAL_FACTOR * ||M||.
pub const RESIDUAL_FACTOR: f64 = 1e-8;
