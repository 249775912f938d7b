//! The next-generation R0 engine: model validation against the positivity
//! and stability assumptions, the direct matrix formula r(F-hat V-hat^{-1}),
//! the principal-root sign test, bisection on the mu-scaled monodromy
//! radius, and a mutual-consistency report.

use serde::Serialize;

use crate::config;
use crate::delay_op::DelayLinearOperator;
use crate::error::{Assumption, Error, Result};
use crate::linalg::{self, DenseMatrix, LuFactors};
use crate::semigroup;
use crate::spectral;

/// The pair (F, V) of the split system u' = F(u_t) - V(u_t).
#[derive(Debug, Clone)]
pub struct NextGenModel {
    f: DelayLinearOperator,
    v: DelayLinearOperator,
    pub a1_ok: bool,
    pub a2_cooperative_ok: bool,
    pub a2_stable_ok: bool,
    /// Set by `force_validated`: internal sanity guards that presume
    /// (A1)/(A2) are downgraded to best-effort computation.
    pub forced: bool,
}

impl NextGenModel {
    /// Build without validating; all flags start false.
    pub fn unchecked(f: DelayLinearOperator, v: DelayLinearOperator) -> Self {
        assert_eq!(f.dim(), v.dim(), "F and V must share a dimension");
        NextGenModel {
            f,
            v,
            a1_ok: false,
            a2_cooperative_ok: false,
            a2_stable_ok: false,
            forced: false,
        }
    }

    pub fn f(&self) -> &DelayLinearOperator {
        &self.f
    }

    pub fn v(&self) -> &DelayLinearOperator {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    /// The combined generator F - V of the linearized system.
    pub fn combined(&self) -> DelayLinearOperator {
        self.f.sub(&self.v)
    }

    pub fn max_delay(&self) -> f64 {
        self.f.max_delay().max(self.v.max_delay())
    }

    /// Mark the model validated without checking anything. Outside (A1)/(A2)
    /// the R0 outputs carry no guarantee; the CLI pairs this with a loud
    /// warning behind --force.
    pub fn force_validated(mut self) -> Self {
        self.a1_ok = true;
        self.a2_cooperative_ok = true;
        self.a2_stable_ok = true;
        self.forced = true;
        self
    }
}

/// Check (A1): F positive; (A2): -V cooperative and s(-V-hat) < 0. The
/// stability side goes through the matrix -V-hat, which carries the same
/// sign as the delay system's modulus.
pub fn validate(model: NextGenModel) -> Result<NextGenModel> {
    validate_with(model, config::ORDER_EPS)
}

/// As `validate`, with a relaxed entrywise tolerance for the cone checks
/// (absorbs file-parsing round-off when the caller opts in).
pub fn validate_with(mut model: NextGenModel, eps: f64) -> Result<NextGenModel> {
    model.a1_ok = model.f.is_positive(eps);
    if !model.a1_ok {
        return Err(Error::AssumptionViolated { which: Assumption::A1Positivity });
    }
    model.a2_cooperative_ok = model.v.negate().is_cooperative(eps);
    if !model.a2_cooperative_ok {
        return Err(Error::AssumptionViolated { which: Assumption::A2Cooperativity });
    }
    let s = linalg::stability_modulus(&model.v.negate().hat())?;
    model.a2_stable_ok = s < 0.0;
    if !model.a2_stable_ok {
        return Err(Error::AssumptionViolated { which: Assumption::A2Stability });
    }
    Ok(model)
}

fn require_validated(model: &NextGenModel) -> Result<()> {
    if model.a1_ok && model.a2_cooperative_ok && model.a2_stable_ok {
        Ok(())
    } else {
        Err(Error::Internal("model must pass validate() first".into()))
    }
}

/// R0 = r(F-hat V-hat^{-1}).
pub fn r0_direct(model: &NextGenModel) -> Result<f64> {
    require_validated(model)?;
    let n = model.dim();
    let f_hat = model.f.hat();
    let v_hat = model.v.hat();
    let lu = LuFactors::factor(&v_hat)?;
    // Columns of V-hat^{-1}, then the product K = F-hat V-hat^{-1}.
    let mut k = DenseMatrix::zeros(n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = lu.solve(&e);
        e[j] = 0.0;
        for i in 0..n {
            let mut acc = 0.0;
            for l in 0..n {
                acc += f_hat.get(i, l) * col[l];
            }
            k.set(i, j, acc);
        }
    }
    // Under (A1)/(A2) the next-generation matrix is entrywise nonnegative.
    let floor = -1e-10 * k.norm_inf().max(1.0);
    if !model.forced && !k.entries().iter().all(|&x| x >= floor) {
        return Err(Error::Internal(
            "next-generation matrix has a negative entry despite validation".into(),
        ));
    }
    linalg::spectral_radius(&k)
}

/// lambda* = s(F - V), the principal root of the combined cooperative system.
pub fn lambda_star(model: &NextGenModel) -> Result<f64> {
    require_validated(model)?;
    spectral::principal_eigenvalue(&model.combined())
}

/// R0 as the unique mu > 0 with r(Q_mu(t0)) = 1, Q_mu generated by
/// u' = F(u_t)/mu - V(u_t). Bisection from mu = 1, bracket by doubling or
/// halving; the radius is nonincreasing in mu.
pub fn r0_bisection(model: &NextGenModel, t0: f64, n: usize, tol_mu: f64) -> Result<f64> {
    r0_bisection_with(model, t0, n, tol_mu, config::POWER_TOL, config::POWER_ITER_CAP)
}

pub fn r0_bisection_with(
    model: &NextGenModel,
    t0: f64,
    n: usize,
    tol_mu: f64,
    power_tol: f64,
    power_cap: usize,
) -> Result<f64> {
    require_validated(model)?;
    if model.f.hat().entries().iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroR0);
    }
    let radius = |mu: f64| -> Result<f64> {
        let q = model.f.scale(1.0 / mu).sub(&model.v);
        let op = semigroup::solution_operator(&q, t0, n);
        semigroup::monodromy_radius_with(&op, power_tol, power_cap)
    };

    let mut lo = 1.0; // r(lo) >= 1
    let mut hi = 1.0; // r(hi) <= 1
    let r1 = radius(1.0)?;
    if (r1 - 1.0).abs() <= power_tol {
        return Ok(1.0);
    }
    if r1 > 1.0 {
        loop {
            hi *= 2.0;
            if radius(hi)? <= 1.0 {
                break;
            }
            if hi > 1e12 {
                return Err(Error::BracketFailure { lo, hi });
            }
        }
        lo = hi / 2.0;
    } else {
        loop {
            lo *= 0.5;
            if radius(lo)? >= 1.0 {
                break;
            }
            if lo < 1e-12 {
                return Err(Error::BracketFailure { lo, hi });
            }
        }
        hi = lo * 2.0;
    }
    while hi - lo > tol_mu {
        let mid = 0.5 * (lo + hi);
        if radius(mid)? >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All three routes to R0 plus the sign-consistency verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct R0Report {
    pub r0_direct: f64,
    pub lambda_star: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0_bisection: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// sign(r0_direct - 1) == sign(lambda_star), zero band 1e-8.
    pub threshold_sign_consistent: bool,
    /// |r0_bisection - r0_direct| <= 1e-3 when the bisection ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bisection_consistent: Option<bool>,
    /// True when either quantity sits inside the zero band around the
    /// threshold, where float signs cannot be certified.
    pub critical: bool,
}

fn band_sign(x: f64) -> i8 {
    if x.abs() <= config::ZERO_BAND {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

/// Run the direct formula, the principal root and (optionally) the
/// bisection, and report mutual consistency.
pub fn consistency_report(
    model: &NextGenModel,
    bisection: Option<(f64, usize)>,
) -> Result<R0Report> {
    let r0 = r0_direct(model)?;
    let lam = lambda_star(model)?;
    let threshold_sign_consistent = band_sign(r0 - 1.0) == band_sign(lam);
    let critical = band_sign(r0 - 1.0) == 0 || band_sign(lam) == 0;
    let (r0_bis, t0, grid, bis_ok) = match bisection {
        Some((t0, n)) => {
            let mu = r0_bisection(model, t0, n, config::MU_TOL)?;
            let ok = (mu - r0).abs() <= 1e-3 * r0.max(1.0);
            (Some(mu), Some(t0), Some(n), Some(ok))
        }
        None => (None, None, None, None),
    };
    Ok(R0Report {
        r0_direct: r0,
        lambda_star: lam,
        r0_bisection: r0_bis,
        t0,
        grid,
        threshold_sign_consistent,
        bisection_consistent: bis_ok,
        critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    /// u' = beta u(t - tau) - gamma u(t).
    fn scalar_model(beta: f64, gamma: f64, tau: f64) -> NextGenModel {
        let f = DelayLinearOperator::new(
            DenseMatrix::new(1, vec![0.0]),
            vec![(tau, DenseMatrix::new(1, vec![beta]))],
        );
        let v = DelayLinearOperator::undelayed(DenseMatrix::new(1, vec![gamma]));
        NextGenModel::unchecked(f, v)
    }

    #[test]
    fn validate_scalar_passes() {
        let m = validate(scalar_model(2.0, 1.0, 1.0)).unwrap();
        assert!(m.a1_ok && m.a2_cooperative_ok && m.a2_stable_ok);
    }

    #[test]
    fn validate_rejects_negative_f() {
        let m = scalar_model(-1.0, 1.0, 1.0);
        match validate(m) {
            Err(Error::AssumptionViolated { which }) => {
                assert_eq!(which, Assumption::A1Positivity)
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_zero_v() {
        let f = DelayLinearOperator::undelayed(DenseMatrix::new(1, vec![1.0]));
        let v = DelayLinearOperator::undelayed(DenseMatrix::zeros(1));
        match validate(NextGenModel::unchecked(f, v)) {
            Err(Error::AssumptionViolated { which }) => {
                assert_eq!(which, Assumption::A2Stability)
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn r0_direct_scalar_ratio() {
        let m = validate(scalar_model(2.0, 1.0, 1.0)).unwrap();
        assert!((r0_direct(&m).unwrap() - 2.0).abs() < 1e-12);
        let m = validate(scalar_model(0.0, 1.0, 1.0)).unwrap();
        assert_eq!(r0_direct(&m).unwrap(), 0.0);
    }

    #[test]
    fn lambda_star_scalar_cases() {
        let crit = validate(scalar_model(1.0, 1.0, 0.7)).unwrap();
        assert!(lambda_star(&crit).unwrap().abs() < 1e-9);
        let sup = validate(scalar_model(2.0, 1.0, 1.0)).unwrap();
        let lam = lambda_star(&sup).unwrap();
        assert!((lam - 0.3748).abs() < 1e-3);
        let sub = validate(scalar_model(1.0, 2.0, 1.0)).unwrap();
        assert!(lambda_star(&sub).unwrap() < 0.0);
    }

    #[test]
    fn mu_homogeneity() {
        let m = validate(scalar_model(3.0, 1.5, 0.8)).unwrap();
        let base = r0_direct(&m).unwrap();
        for &mu in &[0.5, 2.0, 7.25] {
            let scaled = validate(NextGenModel::unchecked(
                m.f().scale(1.0 / mu),
                m.v().clone(),
            ))
            .unwrap();
            let got = r0_direct(&scaled).unwrap();
            assert!((got - base / mu).abs() <= 1e-14 * base.max(1.0));
        }
    }

    #[test]
    fn bisection_zero_f_rejected() {
        let f = DelayLinearOperator::undelayed(DenseMatrix::zeros(1));
        let v = DelayLinearOperator::undelayed(DenseMatrix::new(1, vec![1.0]));
        let m = validate(NextGenModel::unchecked(f, v)).unwrap();
        assert!(matches!(
            r0_bisection(&m, 1.0, 32, 1e-3),
            Err(Error::ZeroR0)
        ));
    }

    #[test]
    fn bisection_matches_direct_scalar() {
        let m = validate(scalar_model(2.0, 1.0, 1.0)).unwrap();
        let mu = r0_bisection(&m, 1.0, 128, 1e-4).unwrap();
        assert!((mu - 2.0).abs() < 1e-3, "mu = {mu}");
    }

    #[test]
    fn radius_at_direct_r0_is_one() {
        let m = validate(scalar_model(2.0, 1.0, 1.0)).unwrap();
        let r0 = r0_direct(&m).unwrap();
        let q = m.f().scale(1.0 / r0).sub(m.v());
        let op = semigroup::solution_operator(&q, 1.0, 128);
        let r = semigroup::monodromy_radius(&op).unwrap();
        assert!((r - 1.0).abs() < 1e-3, "r(Q_R0) = {r}");
    }

    #[test]
    fn consistency_scalar_cases() {
        let sub = validate(scalar_model(0.5, 1.0, 1.0)).unwrap();
        let rep = consistency_report(&sub, None).unwrap();
        assert!((rep.r0_direct - 0.5).abs() < 1e-12);
        assert!(rep.lambda_star < 0.0);
        assert!(rep.threshold_sign_consistent && !rep.critical);

        let crit = validate(scalar_model(1.0, 1.0, 1.0)).unwrap();
        let rep = consistency_report(&crit, None).unwrap();
        assert!((rep.r0_direct - 1.0).abs() < 1e-10);
        assert!(rep.critical && rep.threshold_sign_consistent);
    }

    #[test]
    fn randomized_threshold_sign_equivalence() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let model = crate::sampling::random_nextgen_model(&mut rng, 4);
            let model = validate(model).unwrap();
            let rep = consistency_report(&model, None).unwrap();
            assert!(
                rep.threshold_sign_consistent,
                "r0 = {}, lambda* = {}",
                rep.r0_direct, rep.lambda_star
            );
        }
    }

    #[test]
    fn radius_nonincreasing_in_mu() {
        let m = validate(scalar_model(2.0, 1.0, 1.0)).unwrap();
        let mut prev = f64::INFINITY;
        for &mu in &[0.5, 1.0, 2.0, 4.0] {
            let q = m.f().scale(1.0 / mu).sub(m.v());
            let op = semigroup::solution_operator(&q, 1.0, 64);
            let r = semigroup::monodromy_radius(&op).unwrap();
            assert!(r <= prev + 1e-9, "radius increased at mu = {mu}");
            prev = r;
        }
    }
}
