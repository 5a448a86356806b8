//! Matrix-free linear operators on complex vectors.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default cap on `rows * cols` for dense materialization (2^24 entries).
pub const DEFAULT_MATERIALIZATION_CAP: usize = 1 << 24;

/// A linear map `C^cols -> C^rows` together with its conjugate transpose.
pub trait LinearOperator: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Vec<C64>;
    fn adjoint(&self, y: &[C64]) -> Vec<C64>;

    fn to_dense(&self) -> Result<DMatrix<C64>> {
        self.to_dense_capped(DEFAULT_MATERIALIZATION_CAP)
    }

    /// Materializes the operator column by column.
    fn to_dense_capped(&self, cap: usize) -> Result<DMatrix<C64>> {
        let (rows, cols) = (self.rows(), self.cols());
        if rows.saturating_mul(cols) > cap {
            return Err(Error::MaterializationCap { rows, cols, cap });
        }
        let mut out = DMatrix::zeros(rows, cols);
        let mut e = vec![C64::new(0.0, 0.0); cols];
        for j in 0..cols {
            e[j] = C64::new(1.0, 0.0);
            let col = self.apply(&e);
            e[j] = C64::new(0.0, 0.0);
            out.column_mut(j).copy_from_slice(&col);
        }
        Ok(out)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        (**self).apply(x)
    }
    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        (**self).adjoint(y)
    }
}

impl LinearOperator for DMatrix<C64> {
    fn rows(&self) -> usize {
        self.nrows()
    }
    fn cols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.nrows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.column(j).iter()) {
                *o += a * xj;
            }
        }
        out
    }
    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        (0..self.ncols())
            .map(|j| self.column(j).iter().zip(y).map(|(a, &v)| a.conj() * v).sum())
            .collect()
    }
    fn to_dense_capped(&self, cap: usize) -> Result<DMatrix<C64>> {
        if self.nrows().saturating_mul(self.ncols()) > cap {
            return Err(Error::MaterializationCap { rows: self.nrows(), cols: self.ncols(), cap });
        }
        Ok(self.clone())
    }
}

/// The conjugate transpose of a borrowed operator.
pub struct Adjoint<'a>(pub &'a dyn LinearOperator);

impl LinearOperator for Adjoint<'_> {
    fn rows(&self) -> usize {
        self.0.cols()
    }
    fn cols(&self) -> usize {
        self.0.rows()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.0.adjoint(x)
    }
    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        self.0.apply(y)
    }
}

/// `outer ∘ inner`.
pub struct Composed<'a> {
    pub outer: &'a dyn LinearOperator,
    pub inner: &'a dyn LinearOperator,
}

impl LinearOperator for Composed<'_> {
    fn rows(&self) -> usize {
        self.outer.rows()
    }
    fn cols(&self) -> usize {
        self.inner.cols()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.outer.apply(&self.inner.apply(x))
    }
    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        self.inner.adjoint(&self.outer.adjoint(y))
    }
}

/// `factor * op`.
pub struct Scaled<'a> {
    pub op: &'a dyn LinearOperator,
    pub factor: f64,
}

impl LinearOperator for Scaled<'_> {
    fn rows(&self) -> usize {
        self.op.rows()
    }
    fn cols(&self) -> usize {
        self.op.cols()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        vec::scale(&self.op.apply(x), self.factor)
    }
    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        vec::scale(&self.op.adjoint(y), self.factor)
    }
}

/// The identity on `C^n`.
#[derive(Clone, Copy, Debug)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn rows(&self) -> usize {
        self.0
    }
    fn cols(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        x.to_vec()
    }
    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        y.to_vec()
    }
}

/// Small dense-vector helpers shared across modules.
pub mod vec {
    use super::C64;

    pub fn zeros(n: usize) -> Vec<C64> {
        vec![C64::new(0.0, 0.0); n]
    }

    pub fn from_real(x: &[f64]) -> Vec<C64> {
        x.iter().map(|&r| C64::new(r, 0.0)).collect()
    }

    /// `<u, v> = sum conj(u_i) v_i`.
    pub fn inner(u: &[C64], v: &[C64]) -> C64 {
        u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm2(x: &[C64]) -> f64 {
        norm2_sq(x).sqrt()
    }

    pub fn norm2_sq(x: &[C64]) -> f64 {
        x.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm1(x: &[C64]) -> f64 {
        x.iter().map(|z| z.norm()).sum()
    }

    /// Quasi-norm `(sum |x_i|^p)^(1/p)`.
    pub fn norm_p(x: &[C64], p: f64) -> f64 {
        x.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn scale(a: &[C64], s: f64) -> Vec<C64> {
        a.iter().map(|x| x * s).collect()
    }

    pub fn dist2(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    }
}
