//! Seeded random generators for the property suites: cooperative delay
//! operators, validated next-generation models, tick parameter sets and
//! nonnegative history segments.

use rand::Rng;

use crate::delay_op::{DelayLinearOperator, HistorySegment};
use crate::linalg::DenseMatrix;
use crate::tick_model::TickParams;

/// Random cooperative operator: Metzler A0, nonnegative delayed matrices,
/// delays in (0, 2]. Spans both stable and unstable samples.
pub fn random_cooperative_operator<R: Rng>(
    rng: &mut R,
    dim: usize,
    max_delays: usize,
) -> DelayLinearOperator {
    let mut a0 = DenseMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            if i == j {
                a0.set(i, j, rng.gen_range(-4.0..0.5));
            } else {
                a0.set(i, j, rng.gen_range(0.0..0.8));
            }
        }
    }
    let k = rng.gen_range(1..=max_delays.max(1));
    let terms = (0..k)
        .map(|_| {
            let tau = rng.gen_range(0.05..=2.0);
            let mut a = DenseMatrix::zeros(dim);
            for i in 0..dim {
                for j in 0..dim {
                    a.set(i, j, rng.gen_range(0.0..0.6));
                }
            }
            (tau, a)
        })
        .collect();
    DelayLinearOperator::new(a0, terms)
}

/// Random (F, V) pair satisfying the validation assumptions: F entrywise
/// nonnegative (one delayed term), -V cooperative, V-hat strictly row
/// diagonally dominant so that s(-V-hat) < 0.
pub fn random_nextgen_model<R: Rng>(rng: &mut R, dim: usize) -> crate::r0_engine::NextGenModel {
    let mut f0 = DenseMatrix::zeros(dim);
    let mut fd = DenseMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            f0.set(i, j, rng.gen_range(0.0..0.5));
            fd.set(i, j, rng.gen_range(0.0..0.5));
        }
    }
    let f = DelayLinearOperator::new(f0, vec![(rng.gen_range(0.1..=1.5), fd)]);

    // V = V0 + delayed term with nonpositive entries; diagonal dominance of
    // V-hat keeps -V-hat stable.
    let mut v0 = DenseMatrix::zeros(dim);
    let mut vd = DenseMatrix::zeros(dim);
    let mut off_sums = vec![0.0; dim];
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                let x = rng.gen_range(0.0..0.4);
                v0.set(i, j, -x);
                off_sums[i] += x;
            }
            let y = rng.gen_range(0.0..0.3);
            vd.set(i, j, -y);
            off_sums[i] += y;
        }
    }
    for i in 0..dim {
        v0.set(i, i, off_sums[i] + rng.gen_range(0.5..3.0));
    }
    let v = DelayLinearOperator::new(v0, vec![(rng.gen_range(0.1..=1.5), vd)]);
    crate::r0_engine::NextGenModel::unchecked(f, v)
}

/// Random strictly positive tick parameter set.
pub fn random_tick_params<R: Rng>(rng: &mut R) -> TickParams {
    TickParams {
        b: rng.gen_range(0.1..10.0),
        r: [(); 4].map(|_| rng.gen_range(0.05..5.0)),
        d: [(); 4].map(|_| rng.gen_range(0.05..5.0)),
        tau1: rng.gen_range(0.1..3.0),
        tau2: rng.gen_range(0.1..3.0),
        n_cap: rng.gen_range(1.0..100.0),
        h: rng.gen_range(0.5..20.0),
    }
}

/// Random smooth nonnegative history segment with sup norm around `scale`.
pub fn random_nonneg_segment<R: Rng>(
    rng: &mut R,
    dim: usize,
    tau: f64,
    n: usize,
    scale: f64,
) -> HistorySegment {
    let amps: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.1..1.0) * scale).collect();
    let freqs: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.5..4.0)).collect();
    let phases: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..6.28)).collect();
    HistorySegment::from_fn(dim, tau, n, |th| {
        (0..dim)
            .map(|i| amps[i] * (0.55 + 0.45 * (freqs[i] * th + phases[i]).sin()))
            .collect()
    })
}
