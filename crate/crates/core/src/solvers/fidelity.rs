//! Euclidean projection onto the data-fidelity set `{z : |B z - y|_2 <= eps}`.
//!
//! With the thin SVD `B = U S V^*` (rank `r`), `z = V c + z_perp` and
//! `|B z - y|^2 = |S c - U^* y|^2 + |y_perp|^2`, so only the `r` coordinates
//! `c = V^* z` are constrained. Outside the set the projection is
//! `c_i = (c_i + mu s_i y_i) / (1 + mu s_i^2)` with `mu > 0` the root of a
//! scalar secular equation; `eps = 0` is the limit `c_i = y_i / s_i`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::Result;
use crate::linop::{vec, LinearOperator, C64};

/// Singular values below this fraction of the largest are treated as zero.
const RANK_TOL: f64 = 1e-6;
const SECULAR_TOL: f64 = 1e-14;
const SECULAR_MAX_ITERS: usize = 200;

/// Right singular vectors, `n x r`, in real arithmetic when `B` is real.
enum Basis {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

impl Basis {
    /// `V^* z`.
    fn coords(&self, z: &[C64]) -> Vec<C64> {
        match self {
            Basis::Complex(v) => v.ad_mul(&DVector::from_column_slice(z)).as_slice().to_vec(),
            Basis::Real(v) => {
                let re = v.tr_mul(&DVector::from_iterator(z.len(), z.iter().map(|x| x.re)));
                if z.iter().all(|x| x.im == 0.0) {
                    return re.iter().map(|&r| C64::new(r, 0.0)).collect();
                }
                let im = v.tr_mul(&DVector::from_iterator(z.len(), z.iter().map(|x| x.im)));
                re.iter().zip(im.iter()).map(|(&r, &i)| C64::new(r, i)).collect()
            }
        }
    }

    /// `z + V delta`.
    fn add_combination(&self, z: &[C64], delta: &[C64]) -> Vec<C64> {
        match self {
            Basis::Complex(v) => {
                let mut out = DVector::from_column_slice(z);
                out.gemv(C64::new(1.0, 0.0), v, &DVector::from_column_slice(delta), C64::new(1.0, 0.0));
                out.as_slice().to_vec()
            }
            Basis::Real(v) => {
                let re = v * DVector::from_iterator(delta.len(), delta.iter().map(|x| x.re));
                let mut out = z.to_vec();
                out.iter_mut().zip(re.iter()).for_each(|(o, r)| o.re += r);
                if delta.iter().any(|x| x.im != 0.0) {
                    let im = v * DVector::from_iterator(delta.len(), delta.iter().map(|x| x.im));
                    out.iter_mut().zip(im.iter()).for_each(|(o, i)| o.im += i);
                }
                out
            }
        }
    }
}

pub(crate) struct FidelitySet {
    v: Basis,
    sigma: Vec<f64>,
    /// `U^* y`.
    y_u: Vec<C64>,
    /// `|y - U U^* y|^2`, the part of the residual no `z` can remove.
    y_perp_sq: f64,
    eps: f64,
    /// Squared radius left for the constrained coordinates.
    radius_sq: f64,
}

/// `op` as a dense matrix, built from `m` adjoint applications.
fn dense_via_adjoint(op: &dyn LinearOperator) -> Result<DMatrix<C64>> {
    let (m, n) = (op.rows(), op.cols());
    if m.saturating_mul(n) > crate::linop::DEFAULT_MATERIALIZATION_CAP {
        return Err(crate::Error::MaterializationCap { rows: m, cols: n, cap: crate::linop::DEFAULT_MATERIALIZATION_CAP });
    }
    let mut out = DMatrix::zeros(m, n);
    let mut e = vec::zeros(m);
    for i in 0..m {
        e[i] = C64::new(1.0, 0.0);
        let row = op.adjoint(&e);
        e[i] = C64::new(0.0, 0.0);
        for (j, v) in row.iter().enumerate() {
            out[(i, j)] = v.conj();
        }
    }
    Ok(out)
}

/// Singular values above `RANK_TOL` of the largest, with the matching left
/// and right singular vectors, from the eigendecomposition of `B B^*`.
fn thin_svd<T>(b: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>, DMatrix<T>)
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    let eig = SymmetricEigen::new(b * b.adjoint());
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| lambda_max > 0.0 && eig.eigenvalues[i] > RANK_TOL * RANK_TOL * lambda_max)
        .collect();
    let sigma: Vec<f64> = keep.iter().map(|&i| eig.eigenvalues[i].sqrt()).collect();
    let u = eig.eigenvectors.select_columns(&keep);
    // V = B^* U S^{-1}.
    let mut v = b.ad_mul(&u);
    for (k, &s) in sigma.iter().enumerate() {
        v.column_mut(k).iter_mut().for_each(|x| *x = x.clone().unscale(s));
    }
    (sigma, u, v)
}

impl FidelitySet {
    pub(crate) fn new(b: &dyn LinearOperator, y: &[C64], eps: f64) -> Result<Self> {
        let bm = dense_via_adjoint(b)?;
        let (sigma, u, v) = if bm.iter().all(|x| x.im == 0.0) {
            let (sigma, u, v) = thin_svd(&bm.map(|x| x.re));
            (sigma, u.map(|x| C64::new(x, 0.0)), Basis::Real(v))
        } else {
            let (sigma, u, v) = thin_svd(&bm);
            (sigma, u, Basis::Complex(v))
        };
        let y_u: Vec<C64> = (0..sigma.len()).map(|k| vec::inner(u.column(k).as_slice(), y)).collect();
        let y_perp_sq = (vec::norm2_sq(y) - vec::norm2_sq(&y_u)).max(0.0);
        Ok(Self { v, sigma, y_u, y_perp_sq, eps, radius_sq: (eps * eps - y_perp_sq).max(0.0) })
    }

    fn coords(&self, z: &[C64]) -> Vec<C64> {
        self.v.coords(z)
    }

    /// `|B z - y|_2`.
    pub(crate) fn residual(&self, z: &[C64]) -> f64 {
        let c = self.coords(z);
        let inside: f64 = c.iter().zip(&self.sigma).zip(&self.y_u).map(|((ci, s), yi)| (ci * s - yi).norm_sqr()).sum();
        (inside + self.y_perp_sq).sqrt()
    }

    pub(crate) fn eps(&self) -> f64 {
        self.eps
    }

    pub(crate) fn project(&self, v: &[C64]) -> Vec<C64> {
        let c = self.coords(v);
        let w: Vec<C64> = c.iter().zip(&self.sigma).zip(&self.y_u).map(|((ci, s), yi)| ci * s - yi).collect();
        let w_sq: Vec<f64> = w.iter().map(|x| x.norm_sqr()).collect();
        if w_sq.iter().sum::<f64>() <= self.radius_sq {
            return v.to_vec();
        }
        let target: Vec<C64> = if self.radius_sq == 0.0 {
            self.y_u.iter().zip(&self.sigma).map(|(yi, s)| yi / s).collect()
        } else {
            let mu = self.secular_root(&w_sq);
            c.iter()
                .zip(&self.sigma)
                .zip(&self.y_u)
                .map(|((ci, s), yi)| (ci + yi * (mu * s)) / (1.0 + mu * s * s))
                .collect()
        };
        let delta: Vec<C64> = target.iter().zip(&c).map(|(t, ci)| t - ci).collect();
        self.v.add_combination(v, &delta)
    }

    /// `mu > 0` with `sum_i w_i^2 / (1 + mu s_i^2)^2 = radius^2`.
    fn secular_root(&self, w_sq: &[f64]) -> f64 {
        let radius = self.radius_sq.sqrt();
        let norm_at = |mu: f64| -> (f64, f64) {
            let mut val = 0.0;
            let mut deriv = 0.0;
            for (wi, s) in w_sq.iter().zip(&self.sigma) {
                let den = 1.0 + mu * s * s;
                val += wi / (den * den);
                deriv -= 2.0 * wi * s * s / (den * den * den);
            }
            let nrm = val.sqrt();
            (nrm, deriv / (2.0 * nrm))
        };
        let (mut lo, mut hi) = (0.0, 1.0 / self.sigma.iter().cloned().fold(f64::INFINITY, f64::min).powi(2));
        while norm_at(hi).0 > radius {
            lo = hi;
            hi *= 2.0;
        }
        // Newton on 1/|s(mu)| - 1/radius, which is nearly linear in mu,
        // safeguarded by the bracket [lo, hi].
        let mut mu = lo;
        for _ in 0..SECULAR_MAX_ITERS {
            let (nrm, d_nrm) = norm_at(mu);
            if (nrm - radius).abs() <= SECULAR_TOL * radius {
                return mu;
            }
            if nrm > radius {
                lo = mu;
            } else {
                hi = mu;
            }
            let phi = 1.0 / radius - 1.0 / nrm;
            let d_phi = d_nrm / (nrm * nrm);
            let step = mu - phi / d_phi;
            mu = if step > lo && step < hi && d_phi.is_finite() && d_phi != 0.0 { step } else { 0.5 * (lo + hi) };
        }
        mu
    }
}
