//! Bounded linear operators on history space, restricted to the finite
//! discrete-delay form A0 phi(0) + sum_k A_k phi(-tau_k), plus the sampled
//! history segments they act on.

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};

/// L(phi) = A0 phi(0) + sum_k A_k phi(-tau_k), with all tau_k > 0 distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLinearOperator {
    dim: usize,
    a0: DenseMatrix,
    /// Sorted by delay, delays strictly positive and distinct.
    terms: Vec<(f64, DenseMatrix)>,
}

impl DelayLinearOperator {
    /// Duplicate delays are merged by summing their matrices.
    pub fn new(a0: DenseMatrix, terms: Vec<(f64, DenseMatrix)>) -> Self {
        let dim = a0.dim();
        let mut merged: Vec<(f64, DenseMatrix)> = Vec::new();
        for (tau, a) in terms {
            assert!(tau > 0.0 && tau.is_finite(), "delays must be positive and finite");
            assert_eq!(a.dim(), dim, "delay matrices must match A0's dimension");
            if let Some(slot) = merged.iter_mut().find(|(t, _)| *t == tau) {
                slot.1 = slot.1.add(&a);
            } else {
                merged.push((tau, a));
            }
        }
        merged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        DelayLinearOperator { dim, a0, terms: merged }
    }

    pub fn undelayed(a0: DenseMatrix) -> Self {
        Self::new(a0, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a0(&self) -> &DenseMatrix {
        &self.a0
    }

    pub fn terms(&self) -> &[(f64, DenseMatrix)] {
        &self.terms
    }

    pub fn max_delay(&self) -> f64 {
        self.terms.last().map(|(t, _)| *t).unwrap_or(0.0)
    }

    pub fn delays(&self) -> Vec<f64> {
        self.terms.iter().map(|(t, _)| *t).collect()
    }

    /// Apply to an explicit (current, delayed values) pair. `delayed[k]` is
    /// phi(-tau_k) in delay order.
    pub fn apply_values(&self, current: &[f64], delayed: &[Vec<f64>]) -> Vec<f64> {
        debug_assert_eq!(delayed.len(), self.terms.len());
        let mut out = self.a0.matvec(current);
        for ((_, a), vals) in self.terms.iter().zip(delayed) {
            let contrib = a.matvec(vals);
            for (o, c) in out.iter_mut().zip(&contrib) {
                *o += c;
            }
        }
        out
    }

    /// L(phi) with delayed values interpolated from the sampled segment.
    pub fn evaluate(&self, phi: &HistorySegment) -> Result<Vec<f64>> {
        if phi.tau() + 1e-12 * self.max_delay().max(1.0) < self.max_delay() {
            return Err(Error::DelayExceedsHistory {
                history_tau: phi.tau(),
                max_delay: self.max_delay(),
            });
        }
        let current = phi.value_at(0.0);
        let delayed: Vec<Vec<f64>> = self.terms.iter().map(|(t, _)| phi.value_at(-t)).collect();
        Ok(self.apply_values(&current, &delayed))
    }

    /// L-hat: the matrix acting on constant histories, A0 + sum_k A_k.
    pub fn hat(&self) -> DenseMatrix {
        let mut m = self.a0.clone();
        for (_, a) in &self.terms {
            m = m.add(a);
        }
        m
    }

    /// Condition (K) for the discrete-delay class: A0 Metzler and every
    /// delayed matrix entrywise nonnegative. See docs/cooperativity.md for
    /// the derivation of this equivalence.
    pub fn is_cooperative(&self, eps: f64) -> bool {
        linalg::is_metzler(&self.a0, eps)
            && self.terms.iter().all(|(_, a)| linalg::is_nonnegative(a, eps))
    }

    /// Positivity: all coefficient matrices entrywise nonnegative, so the
    /// operator maps the nonnegative cone into itself.
    pub fn is_positive(&self, eps: f64) -> bool {
        linalg::is_nonnegative(&self.a0, eps)
            && self.terms.iter().all(|(_, a)| linalg::is_nonnegative(a, eps))
    }

    pub fn scale(&self, c: f64) -> Self {
        DelayLinearOperator {
            dim: self.dim,
            a0: self.a0.scale(c),
            terms: self.terms.iter().map(|(t, a)| (*t, a.scale(c))).collect(),
        }
    }

    pub fn negate(&self) -> Self {
        self.scale(-1.0)
    }

    /// Pointwise sum; shared delays merge.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(self.a0.add(&other.a0), terms)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.negate())
    }
}

/// A function on [-tau, 0] into R^m, sampled on the uniform grid
/// theta_j = -tau + j * tau / n. For tau = 0 the segment is a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct HistorySegment {
    dim: usize,
    tau: f64,
    /// node values, index 0 at theta = -tau, last at theta = 0.
    values: Vec<Vec<f64>>,
}

impl HistorySegment {
    pub fn new(dim: usize, tau: f64, values: Vec<Vec<f64>>) -> Self {
        assert!(tau >= 0.0 && tau.is_finite());
        if tau == 0.0 {
            assert_eq!(values.len(), 1, "a zero-span segment has a single node");
        } else {
            assert!(values.len() >= 2, "need n >= 1 grid intervals when tau > 0");
        }
        for v in &values {
            assert_eq!(v.len(), dim);
            assert!(v.iter().all(|x| x.is_finite()));
        }
        HistorySegment { dim, tau, values }
    }

    pub fn constant(dim: usize, tau: f64, n: usize, value: &[f64]) -> Self {
        assert_eq!(value.len(), dim);
        let nodes = if tau == 0.0 { 1 } else { n + 1 };
        Self::new(dim, tau, vec![value.to_vec(); nodes])
    }

    pub fn zeros(dim: usize, tau: f64, n: usize) -> Self {
        Self::constant(dim, tau, n, &vec![0.0; dim])
    }

    /// Sample `f(theta)` on the grid.
    pub fn from_fn<F: Fn(f64) -> Vec<f64>>(dim: usize, tau: f64, n: usize, f: F) -> Self {
        if tau == 0.0 {
            return Self::new(dim, tau, vec![f(0.0)]);
        }
        let values = (0..=n)
            .map(|j| f(-tau + j as f64 * tau / n as f64))
            .collect();
        Self::new(dim, tau, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Number of grid intervals n.
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn node_values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn node_theta(&self, j: usize) -> f64 {
        if self.tau == 0.0 {
            0.0
        } else {
            -self.tau + j as f64 * self.tau / self.intervals() as f64
        }
    }

    /// phi(theta), cubic interpolation through the 4 nearest grid samples
    /// (window clamped at the ends). theta outside [-tau, 0] is clamped.
    pub fn value_at(&self, theta: f64) -> Vec<f64> {
        let n = self.values.len() - 1;
        if n == 0 || self.tau == 0.0 {
            return self.values[0].clone();
        }
        let h = self.tau / n as f64;
        let pos = ((theta + self.tau) / h).clamp(0.0, n as f64);
        let j = (pos.floor() as usize).min(n - 1);
        // Stencil j-1..j+2, clamped.
        let lo = j.saturating_sub(1).min(n.saturating_sub(3));
        let hi = (lo + 3).min(n);
        let lo = hi.saturating_sub(3);
        let stencil: Vec<usize> = (lo..=hi).collect();
        let thetas: Vec<f64> = stencil.iter().map(|&k| self.node_theta(k)).collect();
        let mut out = vec![0.0; self.dim];
        for (si, &k) in stencil.iter().enumerate() {
            // Lagrange basis at theta.
            let mut w = 1.0;
            for (sj, &tj) in thetas.iter().enumerate() {
                if sj != si {
                    w *= (theta - tj) / (thetas[si] - tj);
                }
            }
            for (o, v) in out.iter_mut().zip(&self.values[k]) {
                *o += w * v;
            }
        }
        out
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|&x| x >= 0.0))
    }

    /// Sup over nodes and components.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |a, x| a.max(x.abs()))
    }

    pub fn scale(&self, c: f64) -> Self {
        HistorySegment {
            dim: self.dim,
            tau: self.tau,
            values: self
                .values
                .iter()
                .map(|v| v.iter().map(|x| c * x).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.values.len(), other.values.len());
        HistorySegment {
            dim: self.dim,
            tau: self.tau,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_op(a0: f64, terms: &[(f64, f64)]) -> DelayLinearOperator {
        DelayLinearOperator::new(
            DenseMatrix::new(1, vec![a0]),
            terms
                .iter()
                .map(|&(t, a)| (t, DenseMatrix::new(1, vec![a])))
                .collect(),
        )
    }

    #[test]
    fn evaluate_instantaneous() {
        let l = DelayLinearOperator::undelayed(DenseMatrix::identity(2).scale(-1.0));
        let phi = HistorySegment::constant(2, 1.0, 8, &[1.0, 1.0]);
        assert_eq!(l.evaluate(&phi).unwrap(), vec![-1.0, -1.0]);
    }

    #[test]
    fn evaluate_exponential_history() {
        // A0 = 0, one term (tau=1, I): L(phi) = phi(-1); phi(theta) = e^theta.
        let l = scalar_op(0.0, &[(1.0, 1.0)]);
        let phi = HistorySegment::from_fn(1, 1.0, 64, |th| vec![th.exp()]);
        let v = l.evaluate(&phi).unwrap();
        assert!((v[0] - (-1.0f64).exp()).abs() < 1e-6, "got {}", v[0]);
    }

    #[test]
    fn evaluate_linearity() {
        let l = scalar_op(-0.3, &[(0.7, 2.0), (1.0, 0.5)]);
        let phi = HistorySegment::from_fn(1, 1.0, 32, |th| vec![th * th - 0.2 * th]);
        let v1 = l.evaluate(&phi).unwrap();
        let v2 = l.evaluate(&phi.scale(2.0)).unwrap();
        assert!((v2[0] - 2.0 * v1[0]).abs() < 1e-12);
    }

    #[test]
    fn evaluate_rejects_short_history() {
        let l = scalar_op(0.0, &[(2.0, 1.0)]);
        let phi = HistorySegment::constant(1, 1.0, 8, &[1.0]);
        assert!(matches!(
            l.evaluate(&phi),
            Err(Error::DelayExceedsHistory { .. })
        ));
    }

    #[test]
    fn hat_collapses_delays() {
        let l = scalar_op(-1.0, &[(1.0, 2.0)]);
        assert_eq!(l.hat().get(0, 0), 1.0);
        let no_delay = scalar_op(-3.5, &[]);
        assert_eq!(no_delay.hat().get(0, 0), -3.5);
    }

    #[test]
    fn hat_matches_evaluate_on_constants() {
        let l = DelayLinearOperator::new(
            DenseMatrix::from_rows(&[vec![-1.0, 0.5], vec![0.2, -2.0]]),
            vec![(0.8, DenseMatrix::from_rows(&[vec![0.1, 0.3], vec![0.4, 0.0]]))],
        );
        let x = vec![1.3, -0.7];
        let phi = HistorySegment::constant(2, 1.0, 16, &x);
        let via_eval = l.evaluate(&phi).unwrap();
        let via_hat = l.hat().matvec(&x);
        for (a, b) in via_eval.iter().zip(&via_hat) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cooperative_checks() {
        let coop = DelayLinearOperator::new(
            DenseMatrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, -1.0]]),
            vec![(1.0, DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]))],
        );
        assert!(coop.is_cooperative(0.0));
        let not_coop = DelayLinearOperator::undelayed(DenseMatrix::from_rows(&[
            vec![-1.0, -0.5],
            vec![0.0, -1.0],
        ]));
        assert!(!not_coop.is_cooperative(0.0));
    }

    #[test]
    fn positivity_checks() {
        let neg = DelayLinearOperator::undelayed(DenseMatrix::identity(2).scale(-1.0));
        assert!(!neg.is_positive(0.0));
        let zero = DelayLinearOperator::undelayed(DenseMatrix::zeros(2));
        assert!(zero.is_positive(0.0));
    }

    #[test]
    fn scale_roundtrip() {
        let f = scalar_op(0.0, &[(1.0, 2.0)]);
        assert_eq!(f.scale(1.0), f);
        assert_eq!(f.scale(2.0).scale(0.5), f);
        let c = 3.25;
        let hatc = f.scale(c).hat();
        assert_eq!(hatc.get(0, 0), c * f.hat().get(0, 0));
    }

    #[test]
    fn duplicate_delays_merge() {
        let l = scalar_op(0.0, &[(1.0, 2.0), (1.0, 3.0)]);
        assert_eq!(l.terms().len(), 1);
        assert_eq!(l.terms()[0].1.get(0, 0), 5.0);
    }

    #[test]
    fn cooperativity_implies_quasimonotone_evaluations() {
        // phi >= 0 with phi_i(0) = 0 must give L(phi)_i >= 0.
        let l = DelayLinearOperator::new(
            DenseMatrix::from_rows(&[vec![-2.0, 0.7], vec![0.3, -1.0]]),
            vec![(0.5, DenseMatrix::from_rows(&[vec![0.2, 0.1], vec![0.0, 0.4]]))],
        );
        assert!(l.is_cooperative(0.0));
        for trial in 0..20 {
            let s = trial as f64 * 0.37;
            let phi = HistorySegment::from_fn(2, 1.0, 16, |th| {
                // Component 0 vanishes at theta = 0, both stay nonnegative.
                vec![-th * (1.0 + (s + th).sin().abs()), 0.5 + (s * th).cos().abs()]
            });
            assert!(phi.is_nonnegative());
            let v = l.evaluate(&phi).unwrap();
            assert!(v[0] >= -1e-12, "quasimonotonicity violated: {}", v[0]);
        }
    }

    #[test]
    fn segment_interpolation_is_exact_on_cubics() {
        let phi = HistorySegment::from_fn(1, 2.0, 10, |th| vec![1.0 + th + th * th + th * th * th]);
        for &theta in &[-1.97, -1.3, -0.777, -0.1, 0.0] {
            let want = 1.0 + theta + theta * theta + theta * theta * theta;
            let got = phi.value_at(theta)[0];
            assert!((got - want).abs() < 1e-10, "theta {theta}: {got} vs {want}");
        }
    }
}
