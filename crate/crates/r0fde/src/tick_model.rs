//! The black-legged tick stage-structured model: four compartments
//! (larvae L, nymphs N, questing adults A_q, fed adult females A_f), two
//! maturation delays, and a saturating egg-to-larva recruitment
//! g(L) = N_cap L / (h + L). Provides the linearization at zero as an
//! (F, V) pair, the closed-form R0, the positive equilibrium, nonlinear
//! simulation, and the threshold-dichotomy harness.

use serde::{Deserialize, Serialize};

use crate::delay_op::{DelayLinearOperator, HistorySegment};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::r0_engine::NextGenModel;
use crate::semigroup::{self, DdeTrajectory, DelayRhs};

/// Model parameters; all strictly positive.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TickParams {
    pub b: f64,
    pub r: [f64; 4],
    pub d: [f64; 4],
    pub tau1: f64,
    pub tau2: f64,
    #[serde(rename = "N_cap")]
    pub n_cap: f64,
    pub h: f64,
}

impl TickParams {
    pub fn validate(&self) -> Result<()> {
        let mut vals = vec![self.b, self.tau1, self.tau2, self.n_cap, self.h];
        vals.extend_from_slice(&self.r);
        vals.extend_from_slice(&self.d);
        if vals.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::BadSpec(
                "all tick parameters must be strictly positive and finite".into(),
            ));
        }
        Ok(())
    }

    pub fn max_delay(&self) -> f64 {
        self.tau1.max(self.tau2)
    }

    /// Recruitment nonlinearity.
    pub fn g(&self, l: f64) -> f64 {
        self.n_cap * l / (self.h + l)
    }

    pub fn g_prime_zero(&self) -> f64 {
        self.n_cap / self.h
    }

    /// Scale b so the closed-form R0 hits `target`, leaving the rest fixed.
    pub fn with_r0(&self, target: f64) -> TickParams {
        let mut p = self.clone();
        p.b = self.b * target / r0_closed_form(self);
        p
    }
}

/// (L, N, A_q, A_f).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TickState {
    pub l: f64,
    pub n: f64,
    pub a_q: f64,
    pub a_f: f64,
}

impl TickState {
    pub fn to_vec(self) -> Vec<f64> {
        vec![self.l, self.n, self.a_q, self.a_f]
    }

    pub fn from_slice(u: &[f64]) -> Self {
        TickState { l: u[0], n: u[1], a_q: u[2], a_f: u[3] }
    }
}

/// The four stage equations; `delayed` carries A_f(t - tau1) and
/// A_q(t - tau2).
pub fn rhs(p: &TickParams, current: &TickState, af_tau1: f64, aq_tau2: f64) -> TickState {
    TickState {
        l: p.b * p.r[3] * (-p.d[3] * p.tau1).exp() * af_tau1 - (p.d[0] + p.r[0]) * current.l,
        n: p.r[0] * p.g(current.l) - (p.d[1] + p.r[1]) * current.n,
        a_q: p.r[1] * current.n - (p.d[2] + p.r[2]) * current.a_q,
        a_f: p.r[2] / 2.0 * (-p.d[2] * p.tau2).exp() * aq_tau2 - (p.d[3] + p.r[3]) * current.a_f,
    }
}

pub struct TickRhs {
    p: TickParams,
    delays: [f64; 2],
}

impl TickRhs {
    pub fn new(p: TickParams) -> Self {
        let delays = [p.tau1, p.tau2];
        TickRhs { p, delays }
    }
}

impl DelayRhs for TickRhs {
    fn dim(&self) -> usize {
        4
    }

    fn delays(&self) -> &[f64] {
        &self.delays
    }

    fn eval(&self, current: &[f64], delayed: &[Vec<f64>]) -> Vec<f64> {
        let cur = TickState::from_slice(current);
        rhs(&self.p, &cur, delayed[0][3], delayed[1][2]).to_vec()
    }
}

/// Linearization at the origin as a next-generation (F, V) pair: F holds
/// the single delayed birth entry, V everything else (with its one delayed
/// maturation entry at tau2).
pub fn linearize(p: &TickParams) -> NextGenModel {
    let birth = p.b * p.r[3] * (-p.d[3] * p.tau1).exp();
    let mut f_delayed = DenseMatrix::zeros(4);
    f_delayed.set(0, 3, birth);
    let f = DelayLinearOperator::new(DenseMatrix::zeros(4), vec![(p.tau1, f_delayed)]);

    let mut v0 = DenseMatrix::zeros(4);
    v0.set(0, 0, p.d[0] + p.r[0]);
    v0.set(1, 0, -p.r[0] * p.g_prime_zero());
    v0.set(1, 1, p.d[1] + p.r[1]);
    v0.set(2, 1, -p.r[1]);
    v0.set(2, 2, p.d[2] + p.r[2]);
    v0.set(3, 3, p.d[3] + p.r[3]);
    let mut v_delayed = DenseMatrix::zeros(4);
    v_delayed.set(3, 2, -p.r[2] / 2.0 * (-p.d[2] * p.tau2).exp());
    let v = DelayLinearOperator::new(v0, vec![(p.tau2, v_delayed)]);

    NextGenModel::unchecked(f, v)
}

/// R0 = (1/2) b g'(0) e^{-(d4 tau1 + d3 tau2)} prod_i r_i / (d_i + r_i).
pub fn r0_closed_form(p: &TickParams) -> f64 {
    let mut prod = 1.0;
    for i in 0..4 {
        prod *= p.r[i] / (p.d[i] + p.r[i]);
    }
    0.5 * p.b * p.g_prime_zero() * (-(p.d[3] * p.tau1 + p.d[2] * p.tau2)).exp() * prod
}

/// The unique positive equilibrium when R0 > 1, through the chain
/// L* = h (R0 - 1); see docs/tick_equilibrium.md for the elimination.
pub fn equilibrium(p: &TickParams) -> Option<TickState> {
    let r0 = r0_closed_form(p);
    if r0 <= 1.0 {
        return None;
    }
    let l = p.h * (r0 - 1.0);
    let n = p.r[0] * p.g(l) / (p.d[1] + p.r[1]);
    let a_q = p.r[1] * n / (p.d[2] + p.r[2]);
    let a_f = p.r[2] / 2.0 * (-p.d[2] * p.tau2).exp() * a_q / (p.d[3] + p.r[3]);
    let star = TickState { l, n, a_q, a_f };
    let res = rhs(p, &star, star.a_f, star.a_q).to_vec();
    let scale = star.to_vec().iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let res_norm = res.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    assert!(
        res_norm <= 1e-10 * scale,
        "equilibrium residual {res_norm} exceeds tolerance"
    );
    Some(star)
}

/// Nonlinear simulation from a nonnegative 4-dim history segment.
pub fn simulate(
    p: &TickParams,
    phi0: &HistorySegment,
    t_end: f64,
    step: f64,
) -> Result<DdeTrajectory> {
    p.validate()?;
    assert_eq!(phi0.dim(), 4);
    assert!(phi0.is_nonnegative(), "initial history must be nonnegative");
    semigroup::integrate(&TickRhs::new(p.clone()), phi0, t_end, step)
}

#[derive(Debug, Clone, Serialize)]
pub enum TrialVerdict {
    StayedZero,
    Extinct { final_norm: f64 },
    ConvergedToEquilibrium { final_gap: f64 },
    Nonconforming { detail: String },
    Inconclusive { detail: String },
}

impl TrialVerdict {
    pub fn conforms(&self) -> bool {
        !matches!(
            self,
            TrialVerdict::Nonconforming { .. } | TrialVerdict::Inconclusive { .. }
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub r0: f64,
    /// |R0 - 1| <= 1e-6: numerics cannot certify the dichotomy either way.
    pub critical: bool,
    pub verdicts: Vec<TrialVerdict>,
    pub pass: bool,
}

/// Run the threshold dichotomy on a set of initial segments: every nonzero
/// trial must go extinct when R0 <= 1 and must converge to the positive
/// equilibrium when R0 > 1. The horizon doubles (up to 16x) while
/// trajectories are still moving.
pub fn threshold_verdict(
    p: &TickParams,
    trials: &[HistorySegment],
    t_end: f64,
    tol: f64,
) -> Result<ThresholdReport> {
    p.validate()?;
    let r0 = r0_closed_form(p);
    if (r0 - 1.0).abs() <= 1e-6 {
        return Ok(ThresholdReport { r0, critical: true, verdicts: Vec::new(), pass: true });
    }
    let star = equilibrium(p);
    let step = (p.tau1.min(p.tau2) / 8.0).min(0.05);
    let horizon_cap = t_end * 16.0;
    let mut verdicts = Vec::with_capacity(trials.len());
    for phi in trials {
        if phi.sup_norm() == 0.0 {
            let traj = simulate(p, phi, t_end, step)?;
            let end = traj.states().last().unwrap();
            let norm = end.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            verdicts.push(if norm == 0.0 {
                TrialVerdict::StayedZero
            } else {
                TrialVerdict::Nonconforming { detail: format!("zero trial moved to {norm:e}") }
            });
            continue;
        }
        let mut horizon = t_end;
        let verdict = loop {
            let traj = simulate(p, phi, horizon, step)?;
            let end = traj.states().last().unwrap().clone();
            // Still moving? Compare against the trajectory over the last 10%.
            let settled = {
                let t1 = traj.t_end();
                let t0 = 0.9 * t1;
                let mut moving = 0.0f64;
                let mut t = t0;
                while t < t1 {
                    let u = traj.eval(t);
                    let gap = u
                        .iter()
                        .zip(&end)
                        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
                    moving = moving.max(gap);
                    t += step.max((t1 - t0) / 64.0);
                }
                let scale = end.iter().fold(1.0f64, |a, x| a.max(x.abs()));
                moving <= tol * scale
            };
            let norm = end.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if r0 < 1.0 {
                if norm < tol {
                    break TrialVerdict::Extinct { final_norm: norm };
                }
            } else {
                let star = star.as_ref().unwrap().to_vec();
                let scale = star.iter().fold(1.0f64, |a, x| a.max(x.abs()));
                let gap = end
                    .iter()
                    .zip(&star)
                    .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
                    / scale;
                if gap < tol {
                    break TrialVerdict::ConvergedToEquilibrium { final_gap: gap };
                }
            }
            if settled {
                break TrialVerdict::Nonconforming {
                    detail: format!("settled away from the predicted limit at T = {horizon}"),
                };
            }
            if horizon * 2.0 > horizon_cap {
                return Err(Error::HorizonExceeded { cap: horizon_cap });
            }
            horizon *= 2.0;
        };
        verdicts.push(verdict);
    }
    let pass = verdicts.iter().all(|v| v.conforms());
    Ok(ThresholdReport { r0, critical: false, verdicts, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::r0_engine;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn demo_params() -> TickParams {
        TickParams {
            b: 3.0,
            r: [1.0; 4],
            d: [1.0; 4],
            tau1: 0.5,
            tau2: 0.5,
            n_cap: 20.0,
            h: 1.0,
        }
    }

    #[test]
    fn rhs_zero_is_equilibrium() {
        let p = demo_params();
        let zero = TickState { l: 0.0, n: 0.0, a_q: 0.0, a_f: 0.0 };
        assert_eq!(rhs(&p, &zero, 0.0, 0.0).to_vec(), vec![0.0; 4]);
    }

    #[test]
    fn rhs_larva_birth_entry() {
        let p = demo_params();
        let zero = TickState { l: 0.0, n: 0.0, a_q: 0.0, a_f: 0.0 };
        let out = rhs(&p, &zero, 1.0, 0.0);
        let want = p.b * p.r[3] * (-p.d[3] * p.tau1).exp();
        assert!((out.l - want).abs() < 1e-15);
    }

    #[test]
    fn linearize_hat_matrices() {
        let p = demo_params();
        let m = linearize(&p);
        let f_hat = m.f().hat();
        let birth = p.b * p.r[3] * (-p.d[3] * p.tau1).exp();
        for i in 0..4 {
            for j in 0..4 {
                let want = if (i, j) == (0, 3) { birth } else { 0.0 };
                assert_eq!(f_hat.get(i, j), want);
            }
        }
        let v_hat = m.v().hat();
        assert_eq!(v_hat.get(0, 0), p.d[0] + p.r[0]);
        assert_eq!(v_hat.get(1, 0), -p.r[0] * p.g_prime_zero());
        assert_eq!(v_hat.get(2, 1), -p.r[1]);
        assert_eq!(v_hat.get(3, 2), -p.r[2] / 2.0 * (-p.d[2] * p.tau2).exp());
        assert_eq!(v_hat.get(3, 3), p.d[3] + p.r[3]);
        assert_eq!(v_hat.get(0, 3), 0.0);
    }

    #[test]
    fn linearization_validates() {
        let p = demo_params();
        assert!(r0_engine::validate(linearize(&p)).is_ok());
    }

    #[test]
    fn closed_form_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = crate::sampling::random_tick_params(&mut rng);
            let model = r0_engine::validate(linearize(&p)).unwrap();
            let direct = r0_engine::r0_direct(&model).unwrap();
            let closed = r0_closed_form(&p);
            assert!(
                (direct - closed).abs() <= 1e-10 * closed.max(1.0),
                "direct {direct} vs closed {closed}"
            );
        }
    }

    #[test]
    fn closed_form_scalings() {
        let p = demo_params();
        let base = r0_closed_form(&p);
        let mut doubled = p.clone();
        doubled.b *= 2.0;
        assert!((r0_closed_form(&doubled) - 2.0 * base).abs() < 1e-12 * base);
        let mut tiny = p.clone();
        tiny.b = 1e-12;
        assert!(r0_closed_form(&tiny) < 1e-9);
    }

    #[test]
    fn equilibrium_boundary_and_chain() {
        let mut p = demo_params().with_r0(1.0);
        // Nudge b down by ulps until the closed form is exactly <= 1.
        while r0_closed_form(&p) > 1.0 {
            p.b = f64::from_bits(p.b.to_bits() - 1);
        }
        assert!(equilibrium(&p).is_none());

        let p2 = demo_params().with_r0(2.0);
        let star = equilibrium(&p2).unwrap();
        assert!((star.l - p2.h).abs() < 1e-9, "L* = {} vs h = {}", star.l, p2.h);
    }

    #[test]
    fn equilibrium_matches_fixed_point_oracle() {
        // Independent oracle: bisect L = K g(L) directly from the four
        // steady-state equations, then rebuild the chain.
        let p = demo_params().with_r0(1.7);
        let k = p.b * p.r[3] * (-p.d[3] * p.tau1).exp() / (p.d[0] + p.r[0])
            * p.r[2] / 2.0 * (-p.d[2] * p.tau2).exp() / (p.d[3] + p.r[3])
            * p.r[1] / (p.d[2] + p.r[2])
            * p.r[0] / (p.d[1] + p.r[1]);
        let f = |l: f64| k * p.g(l) - l;
        let mut lo = 1e-12;
        let mut hi = 1e6;
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let l_oracle = 0.5 * (lo + hi);
        let star = equilibrium(&p).unwrap();
        assert!(
            (star.l - l_oracle).abs() <= 1e-8 * l_oracle.max(1.0),
            "L* {} vs oracle {}",
            star.l,
            l_oracle
        );
    }

    #[test]
    fn g_is_strictly_sublinear() {
        let p = demo_params();
        for &l in &[0.1, 1.0, 7.3, 50.0] {
            for &s in &[0.1, 0.5, 0.9] {
                assert!(p.g(s * l) > s * p.g(l));
            }
        }
    }

    #[test]
    fn r0_monotone_in_parameters() {
        let p = demo_params();
        let base = r0_closed_form(&p);
        let bump = |f: &dyn Fn(&mut TickParams)| {
            let mut q = p.clone();
            f(&mut q);
            r0_closed_form(&q)
        };
        assert!(bump(&|q| q.b *= 1.01) > base);
        assert!(bump(&|q| q.n_cap *= 1.01) > base);
        assert!(bump(&|q| q.h *= 1.01) < base);
        assert!(bump(&|q| q.tau1 *= 1.01) < base);
        assert!(bump(&|q| q.tau2 *= 1.01) < base);
        assert!(bump(&|q| q.d[2] *= 1.01) < base);
        assert!(bump(&|q| q.d[3] *= 1.01) < base);
    }

    #[test]
    fn simulate_zero_stays_zero() {
        let p = demo_params();
        let phi = HistorySegment::zeros(4, p.max_delay(), 16);
        let traj = simulate(&p, &phi, 10.0, 0.05).unwrap();
        for u in traj.states() {
            assert!(u.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn simulate_preserves_cone() {
        let p = demo_params().with_r0(1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = crate::sampling::random_nonneg_segment(&mut rng, 4, p.max_delay(), 32, 1.0);
        let traj = simulate(&p, &phi, 30.0, 0.05).unwrap();
        for u in traj.states() {
            assert!(u.iter().all(|&x| x >= -1e-12));
        }
    }

    #[test]
    fn simulate_holds_equilibrium() {
        let p = demo_params().with_r0(1.5);
        let star = equilibrium(&p).unwrap().to_vec();
        let phi = HistorySegment::constant(4, p.max_delay(), 32, &star);
        let traj = simulate(&p, &phi, 20.0, 0.02).unwrap();
        let end = traj.states().last().unwrap();
        for (a, b) in end.iter().zip(&star) {
            assert!((a - b).abs() < 1e-6 * b.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn threshold_dichotomy_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let below = demo_params().with_r0(0.8);
        let trials: Vec<_> = (0..3)
            .map(|_| crate::sampling::random_nonneg_segment(&mut rng, 4, below.max_delay(), 16, 0.5))
            .collect();
        let rep = threshold_verdict(&below, &trials, 300.0, 1e-6).unwrap();
        assert!(rep.pass, "{:?}", rep.verdicts);
        assert!(rep
            .verdicts
            .iter()
            .all(|v| matches!(v, TrialVerdict::Extinct { .. })));

        let above = demo_params().with_r0(1.5);
        let trials: Vec<_> = (0..3)
            .map(|_| crate::sampling::random_nonneg_segment(&mut rng, 4, above.max_delay(), 16, 0.5))
            .collect();
        let rep = threshold_verdict(&above, &trials, 300.0, 1e-4).unwrap();
        assert!(rep.pass, "{:?}", rep.verdicts);
    }

    #[test]
    fn threshold_critical_band_skips() {
        let p = demo_params().with_r0(1.0);
        let rep = threshold_verdict(&p, &[], 10.0, 1e-6).unwrap();
        assert!(rep.critical && rep.pass);
    }

    #[test]
    fn with_r0_hits_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let p = crate::sampling::random_tick_params(&mut rng);
            let q = p.with_r0(1.3);
            assert!((r0_closed_form(&q) - 1.3).abs() < 1e-12);
        }
    }
}
