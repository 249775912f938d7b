//! Time integration of autonomous DDEs by the method of steps (fixed-step
//! RK4 with cubic Hermite dense output for delayed lookups), a
//! finite-dimensional discretization of the time-t0 solution map on history
//! space, power iteration for its spectral radius, and the numerical checks
//! built on top of them.

use crate::config;
use crate::delay_op::{DelayLinearOperator, HistorySegment};
use crate::error::{Error, Result};
use crate::linalg;
use crate::spectral;

/// Right-hand side u'(t) = f(u(t), u(t - tau_1), ..., u(t - tau_K)).
pub trait DelayRhs {
    fn dim(&self) -> usize;
    /// Delays, strictly positive, fixed for the lifetime of the system.
    fn delays(&self) -> &[f64];
    fn eval(&self, current: &[f64], delayed: &[Vec<f64>]) -> Vec<f64>;
}

/// Linear rhs u' = L(u_t) + forcing.
pub struct LinearRhs {
    op: DelayLinearOperator,
    delays: Vec<f64>,
    forcing: Option<Vec<f64>>,
}

impl LinearRhs {
    pub fn new(op: DelayLinearOperator) -> Self {
        let delays = op.delays();
        LinearRhs { op, delays, forcing: None }
    }

    pub fn forced(op: DelayLinearOperator, forcing: Vec<f64>) -> Self {
        assert_eq!(forcing.len(), op.dim());
        let delays = op.delays();
        LinearRhs { op, delays, forcing: Some(forcing) }
    }
}

impl DelayRhs for LinearRhs {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn delays(&self) -> &[f64] {
        &self.delays
    }

    fn eval(&self, current: &[f64], delayed: &[Vec<f64>]) -> Vec<f64> {
        let mut out = self.op.apply_values(current, delayed);
        if let Some(f) = &self.forcing {
            for (o, fi) in out.iter_mut().zip(f) {
                *o += fi;
            }
        }
        out
    }
}

/// Solution of a DDE on [0, T_end] with C1 dense output.
#[derive(Debug, Clone)]
pub struct DdeTrajectory {
    dim: usize,
    step: f64,
    t_grid: Vec<f64>,
    states: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
    initial: HistorySegment,
}

impl DdeTrajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_end(&self) -> f64 {
        *self.t_grid.last().unwrap()
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn initial(&self) -> &HistorySegment {
        &self.initial
    }

    /// u(t): the initial segment for t <= 0, cubic Hermite between step
    /// nodes for t in (0, T_end], Hermite extrapolation of the last step a
    /// hair beyond T_end.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        if t <= 0.0 {
            return self.initial.value_at(t);
        }
        let n = self.t_grid.len() - 1;
        if n == 0 {
            return self.states[0].clone();
        }
        let j = ((t / self.step).floor() as usize).min(n - 1);
        let t0 = self.t_grid[j];
        let h = self.t_grid[j + 1] - t0;
        let s = (t - t0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        (0..self.dim)
            .map(|i| {
                h00 * self.states[j][i]
                    + h10 * h * self.derivs[j][i]
                    + h01 * self.states[j + 1][i]
                    + h11 * h * self.derivs[j + 1][i]
            })
            .collect()
    }

    /// Sample the history segment u_t on [t - tau, t] with n intervals.
    pub fn history_at(&self, t: f64, tau: f64, n: usize) -> HistorySegment {
        HistorySegment::from_fn(self.dim, tau, n, |theta| self.eval(t + theta))
    }

    /// CSV with header t,u1,...,um.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 1..=self.dim {
            out.push_str(&format!(",u{i}"));
        }
        out.push('\n');
        for (t, u) in self.t_grid.iter().zip(&self.states) {
            out.push_str(&format!("{t}"));
            for v in u {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Fixed-step RK4 with Hermite dense output for the delayed lookups. The
/// step is snapped so that T_end is hit exactly.
pub fn integrate(
    rhs: &dyn DelayRhs,
    phi0: &HistorySegment,
    t_end: f64,
    step: f64,
) -> Result<DdeTrajectory> {
    assert!(t_end > 0.0 && step > 0.0);
    let dim = rhs.dim();
    assert_eq!(phi0.dim(), dim);
    let delays = rhs.delays().to_vec();
    let max_delay = delays.iter().cloned().fold(0.0f64, f64::max);
    if phi0.tau() + 1e-12 * max_delay.max(1.0) < max_delay {
        return Err(Error::DelayExceedsHistory {
            history_tau: phi0.tau(),
            max_delay,
        });
    }
    let steps = (t_end / step).round().max(1.0) as usize;
    let steps = if (steps as f64) * step < t_end - 1e-9 * t_end {
        steps + 1
    } else {
        steps
    };
    let h = t_end / steps as f64;

    let mut traj = DdeTrajectory {
        dim,
        step: h,
        t_grid: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        derivs: Vec::with_capacity(steps + 1),
        initial: phi0.clone(),
    };
    let u0 = phi0.value_at(0.0);
    let f0 = eval_rhs(rhs, &delays, &traj, 0.0, &u0);
    traj.t_grid.push(0.0);
    traj.states.push(u0);
    traj.derivs.push(f0);

    for j in 0..steps {
        let t = j as f64 * h;
        let u = traj.states[j].clone();
        let k1 = traj.derivs[j].clone();
        let k2 = eval_rhs(rhs, &delays, &traj, t + 0.5 * h, &axpy(&u, 0.5 * h, &k1));
        let k3 = eval_rhs(rhs, &delays, &traj, t + 0.5 * h, &axpy(&u, 0.5 * h, &k2));
        let k4 = eval_rhs(rhs, &delays, &traj, t + h, &axpy(&u, h, &k3));
        let mut next = u;
        for i in 0..dim {
            next[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = (j + 1) as f64 * h;
        let sup = next.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if !sup.is_finite() || sup > config::BLOWUP_GUARD {
            return Err(Error::BlowUp { t: t_next, guard: config::BLOWUP_GUARD });
        }
        let f_next = eval_rhs(rhs, &delays, &traj, t_next, &next);
        traj.t_grid.push(t_next);
        traj.states.push(next);
        traj.derivs.push(f_next);
    }
    Ok(traj)
}

fn axpy(u: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    u.iter().zip(k).map(|(ui, ki)| ui + a * ki).collect()
}

/// rhs evaluation at time `t` with state `u`; delayed values come from the
/// trajectory built so far (extrapolating the last Hermite piece for
/// sub-delay stage lookups).
fn eval_rhs(
    rhs: &dyn DelayRhs,
    delays: &[f64],
    traj: &DdeTrajectory,
    t: f64,
    u: &[f64],
) -> Vec<f64> {
    let delayed: Vec<Vec<f64>> = delays.iter().map(|tau| traj.eval(t - tau)).collect();
    rhs.eval(u, &delayed)
}

/// Finite-dimensional stand-in for the time-t0 solution map on history
/// space: phi |-> u_{t0}(phi), sampled on a uniform grid.
pub struct DiscretizedOperator {
    op: DelayLinearOperator,
    t0: f64,
    n: usize,
    tau: f64,
    step: f64,
}

impl DiscretizedOperator {
    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn grid(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn source(&self) -> &DelayLinearOperator {
        &self.op
    }

    /// Fresh segment of ones on this operator's grid.
    pub fn ones(&self) -> HistorySegment {
        HistorySegment::constant(self.op.dim(), self.tau, self.n, &vec![1.0; self.op.dim()])
    }

    pub fn apply(&self, phi: &HistorySegment) -> Result<HistorySegment> {
        let traj = integrate(&LinearRhs::new(self.op.clone()), phi, self.t0, self.step)?;
        Ok(traj.history_at(self.t0, self.tau, self.n))
    }
}

/// Discretize T(t0) for the linear system u' = L(u_t) with n grid intervals
/// on the history window. The window spans max(max delay, t0) so that the
/// segment is well defined even for delay-free systems.
pub fn solution_operator(l: &DelayLinearOperator, t0: f64, n: usize) -> DiscretizedOperator {
    assert!(t0 > 0.0, "t0 must be positive");
    assert!(n >= 8, "need at least 8 grid intervals");
    let tau = l.max_delay().max(t0);
    // Integration step aligned with the history grid.
    let target = tau / n as f64;
    let steps = (t0 / target).ceil().max(1.0) as usize;
    let step = t0 / steps as f64;
    DiscretizedOperator { op: l.clone(), t0, n, tau, step }
}

/// Spectral radius of the discretized solution map by power iteration from
/// the constant segment of ones, sup-norm normalized.
pub fn monodromy_radius(op: &DiscretizedOperator) -> Result<f64> {
    monodromy_radius_with(op, config::POWER_TOL, config::POWER_ITER_CAP)
}

pub fn monodromy_radius_with(op: &DiscretizedOperator, tol: f64, cap: usize) -> Result<f64> {
    let mut phi = op.ones();
    let mut r_prev = f64::NAN;
    for _ in 0..cap {
        let psi = op.apply(&phi)?;
        let r = psi.sup_norm();
        if r < config::ZERO_RADIUS_FLOOR {
            return Ok(0.0);
        }
        phi = psi.scale(1.0 / r);
        if (r - r_prev).abs() <= tol * r.max(1.0) {
            return Ok(r);
        }
        r_prev = r;
    }
    Err(Error::NoConvergence { cap, last0: r_prev, last1: r_prev })
}

/// Both sides of r(T(t0)) = e^{s(L) t0} for a cooperative system.
#[derive(Debug, Clone, Copy)]
pub struct SpectralMappingCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

pub fn spectral_mapping_check(
    l: &DelayLinearOperator,
    t0: f64,
    n: usize,
) -> Result<SpectralMappingCheck> {
    let lhs = monodromy_radius_with(&solution_operator(l, t0, n), 1e-12, 10_000)?;
    let rhs = (spectral::principal_eigenvalue(l)? * t0).exp();
    Ok(SpectralMappingCheck { lhs, rhs, gap: (lhs - rhs).abs() })
}

/// Numeric-vs-exact check of V-hat^{-1} x through the forced equilibrium:
/// u' = -V(u_t) + x settles to V-hat^{-1} x when -V is cooperative and
/// stable.
#[derive(Debug, Clone)]
pub struct VhatInverseCheck {
    pub numeric: Vec<f64>,
    pub exact: Vec<f64>,
    pub gap: f64,
}

pub fn verify_vhat_inverse(
    v: &DelayLinearOperator,
    x: &[f64],
    t_end: f64,
) -> Result<VhatInverseCheck> {
    let neg_v = v.negate();
    if !neg_v.is_cooperative(config::ORDER_EPS) {
        return Err(Error::NotCooperative);
    }
    let s = linalg::stability_modulus(&neg_v.hat())?;
    if s >= 0.0 {
        return Err(Error::NotStable { s });
    }
    let exact = linalg::lu_solve(&v.hat(), x)?;
    let tau = v.max_delay();
    let phi0 = if tau > 0.0 {
        HistorySegment::zeros(v.dim(), tau, 64)
    } else {
        HistorySegment::zeros(v.dim(), 0.0, 0)
    };
    let step = if tau > 0.0 { (tau / 64.0).min(0.01) } else { 0.01 };
    let traj = integrate(&LinearRhs::forced(neg_v, x.to_vec()), &phi0, t_end, step)?;
    let numeric = traj.states().last().unwrap().clone();
    let gap = numeric
        .iter()
        .zip(&exact)
        .fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
    Ok(VhatInverseCheck { numeric, exact, gap })
}
