//! Redundant dictionaries (frames) as linear operators `C^d -> C^n`.
//!
//! A [`Dictionary`] maps a coefficient vector `x` to the signal `D x`; its
//! adjoint produces the analysis coefficients `D^* f`. Structured dictionaries
//! (oversampled DFT, Gabor) run on FFTs and never materialize their atoms.

mod analysis;
mod gabor;

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{self, LinearOperator, C64};

pub use analysis::{coherence, frame_bounds, frame_operator, gram_pnorm_factor, tighten, BlockHermitian};
pub use gabor::GaborParams;
use gabor::GaborOperator;

/// Tolerance used when deciding whether a frame is tight from its bounds.
pub const TIGHT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryKind {
    Identity,
    Dense,
    OversampledDft,
    Gabor,
    Concat,
    /// Canonical tight frame `(DD^*)^{-1/2} D` of another dictionary.
    Whitened,
}

#[derive(Clone)]
enum Repr {
    Identity,
    Dense(DMatrix<C64>),
    OversampledDft(DftPlan),
    Gabor(GaborOperator),
    Concat { parts: Vec<Dictionary>, scale: f64 },
    Whitened { inner: Box<Dictionary>, whitener: BlockHermitian },
}

#[derive(Clone)]
struct DftPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl DftPlan {
    fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { len, forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len) }
    }
}

#[derive(Clone)]
pub struct Dictionary {
    n: usize,
    d: usize,
    kind: DictionaryKind,
    tight: bool,
    bounds: OnceLock<(f64, f64)>,
    repr: Repr,
}

impl fmt::Debug for Dictionary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dictionary")
            .field("n", &self.n)
            .field("d", &self.d)
            .field("kind", &self.kind)
            .field("tight", &self.tight)
            .finish()
    }
}

impl Dictionary {
    fn new(n: usize, d: usize, kind: DictionaryKind, tight: bool, repr: Repr) -> Self {
        let bounds = OnceLock::new();
        if tight {
            let _ = bounds.set((1.0, 1.0));
        }
        Self { n, d, kind, tight, bounds, repr }
    }

    /// The `n x n` identity, an orthonormal basis.
    pub fn identity(n: usize) -> Self {
        Self::new(n, n, DictionaryKind::Identity, true, Repr::Identity)
    }

    /// Wraps an explicit `n x d` matrix whose columns are the atoms.
    pub fn from_dense(matrix: DMatrix<C64>) -> Self {
        let (n, d) = matrix.shape();
        let gram = &matrix * matrix.adjoint();
        let tight = (gram - DMatrix::<C64>::identity(n, n)).norm() <= TIGHT_TOL * (n as f64).sqrt();
        Self::new(n, d, DictionaryKind::Dense, tight, Repr::Dense(matrix))
    }

    /// Oversampled DFT with `d = c n` atoms
    /// `d_k(t) = exp(-2 pi i k t / (c n)) / sqrt(c n)`.
    ///
    /// The `1/sqrt(c n)` normalization makes the frame tight (`DD^* = I`), so
    /// every atom has norm `1/sqrt(c)`. For `c = 1` this is the unitary DFT.
    pub fn oversampled_dft(n: usize, c: usize) -> Result<Self> {
        if n == 0 || c == 0 {
            return Err(Error::InvalidParameter(format!("oversampled DFT needs n >= 1 and c >= 1, got n={n}, c={c}")));
        }
        let d = n * c;
        Ok(Self::new(n, d, DictionaryKind::OversampledDft, true, Repr::OversampledDft(DftPlan::new(d))))
    }

    /// The unitary `n`-point DFT.
    pub fn dft(n: usize) -> Result<Self> {
        Self::oversampled_dft(n, 1)
    }

    /// Gabor system of circularly shifted, modulated Gaussian windows with
    /// unit-norm atoms. The result is a general frame; its bounds are attached.
    pub fn gabor(n: usize, params: GaborParams) -> Result<Self> {
        let op = GaborOperator::new(n, params)?;
        let d = op.num_atoms();
        let dict = Self::new(n, d, DictionaryKind::Gabor, false, Repr::Gabor(op));
        let (lo, hi) = analysis::frame_bounds(&dict)?;
        if lo <= 0.0 {
            return Err(Error::NotAFrame(format!("Gabor system {params:?} has lower frame bound {lo:e}")));
        }
        let tight = (hi / lo - 1.0).abs() <= TIGHT_TOL && (hi - 1.0).abs() <= TIGHT_TOL;
        let _ = dict.bounds.set((lo, hi));
        Ok(Self { tight, ..dict })
    }

    /// Concatenation `scale * [D1 D2]`.
    pub fn concat(first: &Dictionary, second: &Dictionary, scale: f64) -> Result<Self> {
        if first.n != second.n {
            return Err(Error::DimensionMismatch(format!(
                "concat needs equal signal dimensions, got n={} and n={}",
                first.n, second.n
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("concat scale must be positive, got {scale}")));
        }
        let tight = first.tight && second.tight && (2.0 * scale * scale - 1.0).abs() <= TIGHT_TOL;
        Ok(Self::new(
            first.n,
            first.d + second.d,
            DictionaryKind::Concat,
            tight,
            Repr::Concat { parts: vec![first.clone(), second.clone()], scale },
        ))
    }

    /// `[I F] / sqrt(2)`: spikes and sinusoids, a tight frame with `d = 2n`.
    pub fn identity_fourier(n: usize) -> Result<Self> {
        Self::concat(&Self::identity(n), &Self::dft(n)?, std::f64::consts::FRAC_1_SQRT_2)
    }

    pub(crate) fn whitened(inner: &Dictionary, whitener: BlockHermitian) -> Self {
        Self::new(
            inner.n,
            inner.d,
            DictionaryKind::Whitened,
            true,
            Repr::Whitened { inner: Box::new(inner.clone()), whitener },
        )
    }

    /// Signal dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of atoms.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> DictionaryKind {
        self.kind
    }

    pub fn is_tight(&self) -> bool {
        self.tight
    }

    /// Gabor lattice parameters, if this is (or whitens) a Gabor system.
    pub fn gabor_params(&self) -> Option<GaborParams> {
        match &self.repr {
            Repr::Gabor(op) => Some(op.params()),
            Repr::Whitened { inner, .. } => inner.gabor_params(),
            _ => None,
        }
    }

    pub(crate) fn cached_bounds(&self) -> &OnceLock<(f64, f64)> {
        &self.bounds
    }

    /// Analysis coefficients `D^* f`.
    pub fn analyze(&self, f: &[C64]) -> Vec<C64> {
        self.adjoint(f)
    }

    /// Synthesis `D x`.
    pub fn synthesize(&self, x: &[C64]) -> Vec<C64> {
        self.apply(x)
    }
}

impl LinearOperator for Dictionary {
    fn rows(&self) -> usize {
        self.n
    }

    fn cols(&self) -> usize {
        self.d
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.d, "coefficient vector length must equal d");
        match &self.repr {
            Repr::Identity => x.to_vec(),
            Repr::Dense(m) => LinearOperator::apply(m, x),
            Repr::OversampledDft(plan) => {
                let mut buf = x.to_vec();
                plan.forward.process(&mut buf);
                let s = 1.0 / (plan.len as f64).sqrt();
                buf.truncate(self.n);
                buf.iter_mut().for_each(|z| *z *= s);
                buf
            }
            Repr::Gabor(op) => op.synthesize(x),
            Repr::Concat { parts, scale } => {
                let mut out = linop::vec::zeros(self.n);
                let mut offset = 0;
                for part in parts {
                    let y = part.apply(&x[offset..offset + part.d]);
                    out.iter_mut().zip(&y).for_each(|(o, v)| *o += v * *scale);
                    offset += part.d;
                }
                out
            }
            Repr::Whitened { inner, whitener } => whitener.apply(&inner.apply(x)),
        }
    }

    fn adjoint(&self, f: &[C64]) -> Vec<C64> {
        assert_eq!(f.len(), self.n, "signal length must equal n");
        match &self.repr {
            Repr::Identity => f.to_vec(),
            Repr::Dense(m) => LinearOperator::adjoint(m, f),
            Repr::OversampledDft(plan) => {
                let mut buf = linop::vec::zeros(plan.len);
                buf[..self.n].copy_from_slice(f);
                plan.inverse.process(&mut buf);
                let s = 1.0 / (plan.len as f64).sqrt();
                buf.iter_mut().for_each(|z| *z *= s);
                buf
            }
            Repr::Gabor(op) => op.analyze(f),
            Repr::Concat { parts, scale } => {
                let mut out = Vec::with_capacity(self.d);
                for part in parts {
                    out.extend(part.adjoint(f).into_iter().map(|v| v * *scale));
                }
                out
            }
            Repr::Whitened { inner, whitener } => inner.adjoint(&whitener.apply(f)),
        }
    }

    fn to_dense_capped(&self, cap: usize) -> Result<DMatrix<C64>> {
        match &self.repr {
            Repr::Dense(m) => m.to_dense_capped(cap),
            _ => {
                if self.n.saturating_mul(self.d) > cap {
                    return Err(Error::MaterializationCap { rows: self.n, cols: self.d, cap });
                }
                // Rows of D are conjugated columns of D^*, and n <= d here,
                // so materializing through the adjoint is cheaper.
                let mut out = DMatrix::zeros(self.n, self.d);
                let mut e = linop::vec::zeros(self.n);
                for t in 0..self.n {
                    e[t] = C64::new(1.0, 0.0);
                    let row = self.adjoint(&e);
                    e[t] = C64::new(0.0, 0.0);
                    for (k, v) in row.iter().enumerate() {
                        out[(t, k)] = v.conj();
                    }
                }
                Ok(out)
            }
        }
    }
}
