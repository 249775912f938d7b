//! Dense real matrix arithmetic: LU solves with partial pivoting, full
//! eigenvalue computation via Hessenberg reduction + shifted QR, spectral
//! radius, stability modulus, a Perron power-iteration cross-check for
//! Metzler matrices, and the order predicates.

use num_complex::Complex64;

use crate::config;
use crate::error::{Error, Result};

/// Square real matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(dim: usize, entries: Vec<f64>) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        assert_eq!(entries.len(), dim * dim, "entry count must be dim^2");
        assert!(entries.iter().all(|x| x.is_finite()), "entries must be finite");
        DenseMatrix { dim, entries }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "rows must all have length dim");
            entries.extend_from_slice(row);
        }
        Self::new(dim, entries)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1);
        DenseMatrix { dim, entries: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.entries[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn scale(&self, c: f64) -> Self {
        DenseMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|x| c * x).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        DenseMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.get(i, j).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Computed spectrum of a real matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// All eigenvalues with multiplicity; complex ones in exact conjugate pairs.
    pub eigenvalues: Vec<Complex64>,
    /// Max over eigenvalues of min_v ||Mv - lambda v|| (unit v), estimated by
    /// inverse iteration.
    pub residual_bound: f64,
}

impl Spectrum {
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn stability_modulus(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// All eigenvalues of `m` (with multiplicity), Hessenberg + shifted QR with
/// Wilkinson shifts, iteration cap `100 * dim^2`.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Spectrum> {
    let n = m.dim;
    let mut eigs = if n == 1 {
        vec![Complex64::new(m.get(0, 0), 0.0)]
    } else {
        let mut h: Vec<Complex64> = m
            .entries
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        hessenberg(&mut h, n);
        qr_eigenvalues(&mut h, n, config::QR_ITER_FACTOR * n * n)?
    };
    pair_conjugates(&mut eigs);
    let residual_bound = eigs
        .iter()
        .map(|&lam| eigen_residual(m, lam))
        .fold(0.0, f64::max);
    Ok(Spectrum { eigenvalues: eigs, residual_bound })
}

/// Max |lambda| over the spectrum.
pub fn spectral_radius(m: &DenseMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.spectral_radius())
}

/// Max Re(lambda) over the spectrum: s(M).
pub fn stability_modulus(m: &DenseMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.stability_modulus())
}

/// Entrywise `>= -eps`.
pub fn is_nonnegative(m: &DenseMatrix, eps: f64) -> bool {
    m.entries.iter().all(|&x| x >= -eps)
}

/// Off-diagonal entries `>= -eps`.
pub fn is_metzler(m: &DenseMatrix, eps: f64) -> bool {
    let n = m.dim;
    (0..n).all(|i| (0..n).all(|j| i == j || m.get(i, j) >= -eps))
}

/// Principal spectral bound of a Metzler matrix by shifted power iteration:
/// r(M + aI) - a with a = max(0, -min diag) + 1. Independent of the QR path;
/// agrees with `stability_modulus` for irreducible M.
pub fn perron_value_metzler(m: &DenseMatrix) -> Result<f64> {
    let n = m.dim;
    for i in 0..n {
        for j in 0..n {
            if i != j && m.get(i, j) < 0.0 {
                return Err(Error::NotMetzler { i, j, value: m.get(i, j) });
            }
        }
    }
    let min_diag = (0..n).map(|i| m.get(i, i)).fold(f64::INFINITY, f64::min);
    let a = f64::max(0.0, -min_diag) + 1.0;
    let mut b = m.clone();
    for i in 0..n {
        b.set(i, i, b.get(i, i) + a);
    }
    // B is nonnegative with diagonal >= 1, so iterates never collapse.
    let mut v = vec![1.0; n];
    let mut r_prev = f64::NAN;
    for _ in 0..200_000 {
        let w = b.matvec(&v);
        let r = w.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / r;
        }
        if (r - r_prev).abs() <= 1e-13 * r.max(1.0) {
            return Ok(r - a);
        }
        r_prev = r;
    }
    Ok(r_prev - a)
}

/// Solve `M x = b` by LU with partial pivoting. Pivots below
/// `PIVOT_FLOOR * ||M||_inf` signal a singular matrix.
pub fn lu_solve(m: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(b.len(), m.dim);
    let lu = LuFactors::factor(m)?;
    Ok(lu.solve(b))
}

/// Inverse of `M`, columnwise via one factorization.
pub fn invert(m: &DenseMatrix) -> Result<DenseMatrix> {
    let n = m.dim;
    let lu = LuFactors::factor(m)?;
    let mut out = DenseMatrix::zeros(n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = lu.solve(&e);
        e[j] = 0.0;
        for i in 0..n {
            out.set(i, j, col[i]);
        }
    }
    Ok(out)
}

/// Shared LU factorization for repeated solves.
pub struct LuFactors {
    dim: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        let n = m.dim;
        let floor = config::PIVOT_FLOOR * m.norm_inf().max(f64::MIN_POSITIVE);
        let mut lu = m.entries.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut pmax = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax < floor {
                return Err(Error::Singular { pivot: pmax, floor });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / piv;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Ok(LuFactors { dim: n, lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

// ---------------------------------------------------------------------------
// Eigenvalue machinery (complex Hessenberg + Wilkinson-shifted QR)
// ---------------------------------------------------------------------------

const ZERO_C: Complex64 = Complex64::new(0.0, 0.0);

/// Householder reduction to upper Hessenberg form, in place.
fn hessenberg(h: &mut [Complex64], n: usize) {
    for k in 0..n.saturating_sub(2) {
        // Reflect column k below the subdiagonal.
        let mut norm2 = 0.0;
        for i in k + 1..n {
            norm2 += h[i * n + k].norm_sqr();
        }
        let x0 = h[(k + 1) * n + k];
        if norm2 - x0.norm_sqr() == 0.0 {
            continue;
        }
        let norm = norm2.sqrt();
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        // v = x - alpha * e1, normalized.
        let mut v = vec![ZERO_C; n - k - 1];
        v[0] = x0 - alpha;
        for i in k + 2..n {
            v[i - k - 1] = h[i * n + k];
        }
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // Left: H <- (I - 2 v v^H) H on rows k+1..n.
        for j in k..n {
            let mut dot = ZERO_C;
            for i in k + 1..n {
                dot += v[i - k - 1].conj() * h[i * n + j];
            }
            let dot = dot * 2.0;
            for i in k + 1..n {
                h[i * n + j] -= v[i - k - 1] * dot;
            }
        }
        // Right: H <- H (I - 2 v v^H) on columns k+1..n.
        for i in 0..n {
            let mut dot = ZERO_C;
            for j in k + 1..n {
                dot += h[i * n + j] * v[j - k - 1];
            }
            let dot = dot * 2.0;
            for j in k + 1..n {
                h[i * n + j] -= dot * v[j - k - 1].conj();
            }
        }
        // Exact zeros below the subdiagonal in column k.
        h[(k + 1) * n + k] = alpha;
        for i in k + 2..n {
            h[i * n + k] = ZERO_C;
        }
    }
}

/// Complex Givens rotation: G = [[c, s], [-conj(s), c]] with real c such that
/// G * (a, b)^T has a zero second component.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        (1.0, ZERO_C)
    } else if na == 0.0 {
        (0.0, Complex64::new(1.0, 0.0))
    } else {
        let r = (na * na + nb * nb).sqrt();
        let c = na / r;
        let s = (a / na) * b.conj() / r;
        (c, s)
    }
}

/// Eigenvalue of [[a, b], [c, d]] closest to d (Wilkinson shift).
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    let r1 = (tr + disc) * 0.5;
    let r2 = (tr - disc) * 0.5;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Shifted QR on an upper Hessenberg matrix, deflating from the bottom.
fn qr_eigenvalues(h: &mut [Complex64], n: usize, cap: usize) -> Result<Vec<Complex64>> {
    let hnorm = h.iter().map(|z| z.norm()).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut eigs = vec![ZERO_C; n];
    let mut p = n; // active leading block is 0..p
    let mut iters_since_deflation = 0usize;
    let mut total = 0usize;
    while p > 0 {
        if p == 1 {
            eigs[0] = h[0];
            break;
        }
        // Scan for a negligible subdiagonal, bottom-up.
        let mut l = p - 1;
        while l > 0 {
            let s = h[(l - 1) * n + (l - 1)].norm() + h[l * n + l].norm();
            let s = if s == 0.0 { hnorm } else { s };
            if h[l * n + (l - 1)].norm() <= f64::EPSILON * s {
                h[l * n + (l - 1)] = ZERO_C;
                break;
            }
            l -= 1;
        }
        if l == p - 1 {
            eigs[p - 1] = h[(p - 1) * n + (p - 1)];
            p -= 1;
            iters_since_deflation = 0;
            continue;
        }
        if l == p - 2 {
            let (r1, r2) = two_by_two_eigs(
                h[l * n + l],
                h[l * n + l + 1],
                h[(l + 1) * n + l],
                h[(l + 1) * n + l + 1],
            );
            eigs[p - 2] = r1;
            eigs[p - 1] = r2;
            p -= 2;
            iters_since_deflation = 0;
            continue;
        }
        if total >= cap {
            return Err(Error::NonConvergence { dim: n, cap });
        }
        total += 1;
        iters_since_deflation += 1;
        let sigma = if iters_since_deflation % 12 == 0 {
            // Exceptional shift to break symmetry stalls.
            let s = h[(p - 1) * n + (p - 2)].norm() + h[(p - 2) * n + (p - 3)].norm();
            Complex64::new(h[(p - 1) * n + (p - 1)].re + 0.75 * s, 0.0)
        } else {
            wilkinson_shift(
                h[(p - 2) * n + (p - 2)],
                h[(p - 2) * n + (p - 1)],
                h[(p - 1) * n + (p - 2)],
                h[(p - 1) * n + (p - 1)],
            )
        };
        // One explicit shifted QR step on the block l..p.
        for i in l..p {
            h[i * n + i] -= sigma;
        }
        let mut rots = Vec::with_capacity(p - l - 1);
        for i in l..p - 1 {
            let (c, s) = givens(h[i * n + i], h[(i + 1) * n + i]);
            for j in i..p {
                let t1 = h[i * n + j];
                let t2 = h[(i + 1) * n + j];
                h[i * n + j] = t1 * c + s * t2;
                h[(i + 1) * n + j] = -s.conj() * t1 + t2 * c;
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let i = l + idx;
            for r in l..(i + 2).min(p) {
                let t1 = h[r * n + i];
                let t2 = h[r * n + i + 1];
                h[r * n + i] = t1 * c + t2 * s.conj();
                h[r * n + i + 1] = -(t1 * s) + t2 * c;
            }
        }
        for i in l..p {
            h[i * n + i] += sigma;
        }
    }
    Ok(eigs)
}

fn two_by_two_eigs(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
) -> (Complex64, Complex64) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    ((tr + disc) * 0.5, (tr - disc) * 0.5)
}

/// Symmetrize the spectrum of a real matrix: snap near-real eigenvalues to the
/// real axis and pair the rest into exact conjugates.
fn pair_conjugates(eigs: &mut [Complex64]) {
    let scale = eigs.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for z in eigs.iter_mut() {
        if z.im.abs() <= 1e-10 * scale {
            z.im = 0.0;
        }
    }
    let n = eigs.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] || eigs[i].im == 0.0 {
            continue;
        }
        used[i] = true;
        let target = eigs[i].conj();
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if used[j] || eigs[j].im == 0.0 {
                continue;
            }
            let d = (eigs[j] - target).norm();
            if d < best_d {
                best_d = d;
                best = Some(j);
            }
        }
        if let Some(j) = best {
            used[j] = true;
            let mean = (eigs[i] + eigs[j].conj()) * 0.5;
            eigs[i] = mean;
            eigs[j] = mean.conj();
        } else {
            // No partner: a spurious imaginary part from roundoff.
            eigs[i].im = 0.0;
        }
    }
}

/// min_{unit v} ||Mv - lambda v||, estimated by complex inverse iteration.
pub fn eigen_residual(m: &DenseMatrix, lambda: Complex64) -> f64 {
    let n = m.dim;
    let scale = m.norm_inf().max(1.0);
    let mut shift = lambda;
    for attempt in 0..4 {
        let mut b = vec![ZERO_C; n * n];
        for i in 0..n {
            for j in 0..n {
                b[i * n + j] = Complex64::new(m.get(i, j), 0.0);
            }
            b[i * n + i] -= shift;
        }
        if let Some(lu) = complex_lu(&mut b, n) {
            let mut v = vec![Complex64::new(1.0, 0.0); n];
            normalize_c(&mut v);
            for _ in 0..3 {
                v = complex_lu_solve(&lu, n, &v);
                normalize_c(&mut v);
            }
            let mut res = 0.0;
            for i in 0..n {
                let mut acc = ZERO_C;
                for j in 0..n {
                    acc += Complex64::new(m.get(i, j), 0.0) * v[j];
                }
                acc -= lambda * v[i];
                res += acc.norm_sqr();
            }
            return res.sqrt();
        }
        // Exactly singular shift: perturb a hair off the eigenvalue.
        let eps = f64::EPSILON * scale * 10f64.powi(attempt);
        shift = lambda + Complex64::new(eps, eps);
    }
    0.0
}

struct ComplexLu {
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

fn complex_lu(a: &mut [Complex64], n: usize) -> Option<ComplexLu> {
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut pmax = a[k * n + k].norm();
        for i in k + 1..n {
            let v = a[i * n + k].norm();
            if v > pmax {
                pmax = v;
                p = i;
            }
        }
        if pmax == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        let piv = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / piv;
            a[i * n + k] = f;
            for j in k + 1..n {
                let sub = f * a[k * n + j];
                a[i * n + j] -= sub;
            }
        }
    }
    Some(ComplexLu { lu: a.to_vec(), perm })
}

fn complex_lu_solve(f: &ComplexLu, n: usize, b: &[Complex64]) -> Vec<Complex64> {
    let mut x: Vec<Complex64> = f.perm.iter().map(|&p| b[p]).collect();
    for i in 1..n {
        for j in 0..i {
            let sub = f.lu[i * n + j] * x[j];
            x[i] -= sub;
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let sub = f.lu[i * n + j] * x[j];
            x[i] -= sub;
        }
        x[i] /= f.lu[i * n + i];
    }
    x
}

fn normalize_c(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
}
