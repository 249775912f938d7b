//! Stability modulus of a linear delay system through its characteristic
//! equation. For cooperative operators the rightmost characteristic root is
//! real and is found by bracketed bisection on
//! g(lambda) = s(A0 + sum_k A_k e^{-lambda tau_k}) - lambda.

use crate::config;
use crate::delay_op::DelayLinearOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};

/// A0 + sum_k A_k e^{-lambda tau_k}.
pub fn char_matrix(l: &DelayLinearOperator, lambda: f64) -> Result<DenseMatrix> {
    let mut m = l.a0().clone();
    for (tau, a) in l.terms() {
        let expo = -lambda * tau;
        if expo > 700.0 {
            return Err(Error::Overflow { lambda, tau: *tau });
        }
        m = m.add(&a.scale(expo.exp()));
    }
    Ok(m)
}

fn g(l: &DelayLinearOperator, lambda: f64) -> Result<f64> {
    Ok(linalg::stability_modulus(&char_matrix(l, lambda)?)? - lambda)
}

/// The unique real root lambda* of g, which equals s(L) for cooperative L.
pub fn principal_eigenvalue(l: &DelayLinearOperator) -> Result<f64> {
    if !l.is_cooperative(config::ORDER_EPS) {
        return Err(Error::NotCooperative);
    }
    let s_hat = linalg::stability_modulus(&l.hat())?;

    // For lambda >= 0 the delayed part only shrinks, so g(s_hat + 1) < 0
    // whenever s_hat >= -1; otherwise walk the upper end rightward.
    let mut hi = s_hat + 1.0;
    let mut step = 1.0;
    while g(l, hi)? > 0.0 {
        hi += step;
        step *= 2.0;
        if step > 1e8 {
            return Err(Error::BracketFailure { lo: s_hat, hi });
        }
    }
    // Walk the lower end left by doubling until g turns positive. On Metzler
    // matrices s(.) is monotone in the entries, so g(lambda) >= s(A0) - lambda
    // and the walk stops before exp(-lambda tau) can overflow in practice.
    let mut lo = hi - 1.0;
    step = 1.0;
    loop {
        match g(l, lo) {
            Ok(v) if v > 0.0 => break,
            Ok(_) => {
                lo -= step;
                step *= 2.0;
                if step > 1e8 {
                    return Err(Error::BracketFailure { lo, hi });
                }
            }
            Err(Error::Overflow { .. }) => {
                return Err(Error::BracketFailure { lo, hi });
            }
            Err(e) => return Err(e),
        }
    }

    for _ in 0..config::ROOT_ITER_CAP {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= config::ROOT_TOL * mid.abs().max(1.0) {
            break;
        }
        if g(l, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Side-by-side sign check of s(L) against s(L-hat).
#[derive(Debug, Clone, Copy)]
pub struct SignEquivalence {
    pub s_l: f64,
    pub s_hat: f64,
    pub consistent: bool,
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

/// The sign-equivalence statement for a cooperative operator: s(L) and
/// s(L-hat) agree in sign (zero band 1e-8).
pub fn sign_equivalence_report(l: &DelayLinearOperator) -> Result<SignEquivalence> {
    let s_l = principal_eigenvalue(l)?;
    let s_hat = linalg::stability_modulus(&l.hat())?;
    Ok(SignEquivalence {
        s_l,
        s_hat,
        consistent: band_sign(s_l) == band_sign(s_hat),
    })
}
