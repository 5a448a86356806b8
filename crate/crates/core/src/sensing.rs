//! Random measurement operators `A: C^n -> C^m` and the measurement model
//! `y = A f + z`.
//!
//! Entries are normalized so that `E |A v|^2 = |v|^2`. Every operator is a
//! deterministic function of `(kind, m, n, seed)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{self, LinearOperator, C64};
use crate::rng::{self, streams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensingKind {
    Gaussian,
    Bernoulli,
    SubsampledDftSign,
    Dense,
}

/// JSON descriptor that regenerates a random operator exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensingDescriptor {
    pub kind: SensingKind,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
}

#[derive(Clone)]
enum Repr {
    /// Row-major real entries.
    Real(Vec<f64>),
    Dense(DMatrix<C64>),
    SubsampledDft { rows: Vec<usize>, signs: Vec<f64>, forward: Arc<dyn Fft<f64>>, inverse: Arc<dyn Fft<f64>> },
}

#[derive(Clone)]
pub struct SensingOperator {
    m: usize,
    n: usize,
    kind: SensingKind,
    seed: u64,
    repr: Repr,
}

impl fmt::Debug for SensingOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SensingOperator")
            .field("kind", &self.kind)
            .field("m", &self.m)
            .field("n", &self.n)
            .field("seed", &self.seed)
            .finish()
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("sensing operator needs m >= 1 and n >= 1, got m={m}, n={n}")));
    }
    Ok(())
}

impl SensingOperator {
    /// I.i.d. `N(0, 1/m)` entries.
    pub fn gaussian(m: usize, n: usize, seed: u64) -> Result<Self> {
        check_dims(m, n)?;
        let mut r = rng::stream(seed, streams::OPERATOR);
        let s = 1.0 / (m as f64).sqrt();
        let entries = (0..m * n).map(|_| s * Distribution::<f64>::sample(&StandardNormal, &mut r)).collect();
        Ok(Self { m, n, kind: SensingKind::Gaussian, seed, repr: Repr::Real(entries) })
    }

    /// Equiprobable `±1/sqrt(m)` entries.
    pub fn bernoulli(m: usize, n: usize, seed: u64) -> Result<Self> {
        check_dims(m, n)?;
        let mut r = rng::stream(seed, streams::OPERATOR);
        let s = 1.0 / (m as f64).sqrt();
        let entries = (0..m * n).map(|_| if r.random::<bool>() { s } else { -s }).collect();
        Ok(Self { m, n, kind: SensingKind::Bernoulli, seed, repr: Repr::Real(entries) })
    }

    /// `sqrt(n/m) R F S`: random signs `S`, the unitary DFT `F`, and `m` rows
    /// `R` drawn uniformly without replacement. One FFT per application.
    pub fn subsampled_dft_sign(m: usize, n: usize, seed: u64) -> Result<Self> {
        check_dims(m, n)?;
        if m > n {
            return Err(Error::InvalidParameter(format!("subsampled DFT needs m <= n, got m={m}, n={n}")));
        }
        let mut r = rng::stream(seed, streams::OPERATOR);
        let mut rows = rand::seq::index::sample(&mut r, n, m).into_vec();
        rows.sort_unstable();
        let signs = (0..n).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let mut op = Self::subsampled_dft_from_parts(n, rows, signs)?;
        op.seed = seed;
        Ok(op)
    }

    /// A subsampled-DFT operator with explicit rows and sign pattern.
    pub fn subsampled_dft_from_parts(n: usize, rows: Vec<usize>, signs: Vec<f64>) -> Result<Self> {
        let m = rows.len();
        check_dims(m, n)?;
        if signs.len() != n || rows.iter().any(|&r| r >= n) {
            return Err(Error::DimensionMismatch(format!(
                "subsampled DFT parts: {} signs and rows up to {:?} for n={n}",
                signs.len(),
                rows.iter().max()
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            m,
            n,
            kind: SensingKind::SubsampledDftSign,
            seed: 0,
            repr: Repr::SubsampledDft {
                rows,
                signs,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            },
        })
    }

    /// Wraps an explicit `m x n` matrix.
    pub fn from_dense(matrix: DMatrix<C64>) -> Result<Self> {
        let (m, n) = matrix.shape();
        check_dims(m, n)?;
        Ok(Self { m, n, kind: SensingKind::Dense, seed: 0, repr: Repr::Dense(matrix) })
    }

    pub fn from_descriptor(desc: &SensingDescriptor) -> Result<Self> {
        match desc.kind {
            SensingKind::Gaussian => Self::gaussian(desc.m, desc.n, desc.seed),
            SensingKind::Bernoulli => Self::bernoulli(desc.m, desc.n, desc.seed),
            SensingKind::SubsampledDftSign => Self::subsampled_dft_sign(desc.m, desc.n, desc.seed),
            SensingKind::Dense => Err(Error::InvalidParameter(
                "dense operators are not generated from a seed; load them from CSV".into(),
            )),
        }
    }

    pub fn descriptor(&self) -> SensingDescriptor {
        SensingDescriptor { kind: self.kind, m: self.m, n: self.n, seed: self.seed }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> SensingKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// True when every entry is real.
    pub fn is_real(&self) -> bool {
        match &self.repr {
            Repr::Real(_) => true,
            Repr::Dense(m) => m.iter().all(|z| z.im == 0.0),
            Repr::SubsampledDft { .. } => false,
        }
    }
}

impl LinearOperator for SensingOperator {
    fn rows(&self) -> usize {
        self.m
    }

    fn cols(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n, "signal length must equal n");
        match &self.repr {
            Repr::Real(a) => a
                .chunks_exact(self.n)
                .map(|row| {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (&aij, xj) in row.iter().zip(x) {
                        re += aij * xj.re;
                        im += aij * xj.im;
                    }
                    C64::new(re, im)
                })
                .collect(),
            Repr::Dense(m) => LinearOperator::apply(m, x),
            Repr::SubsampledDft { rows, signs, forward, .. } => {
                let mut buf: Vec<C64> = x.iter().zip(signs).map(|(v, s)| v * *s).collect();
                forward.process(&mut buf);
                let s = 1.0 / (self.m as f64).sqrt();
                rows.iter().map(|&r| buf[r] * s).collect()
            }
        }
    }

    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        assert_eq!(y.len(), self.m, "measurement length must equal m");
        match &self.repr {
            Repr::Real(a) => {
                let mut out = linop::vec::zeros(self.n);
                for (row, yi) in a.chunks_exact(self.n).zip(y) {
                    for (o, &aij) in out.iter_mut().zip(row) {
                        *o += yi * aij;
                    }
                }
                out
            }
            Repr::Dense(m) => LinearOperator::adjoint(m, y),
            Repr::SubsampledDft { rows, signs, inverse, .. } => {
                let mut buf = linop::vec::zeros(self.n);
                for (&r, v) in rows.iter().zip(y) {
                    buf[r] = *v;
                }
                inverse.process(&mut buf);
                // sqrt(n/m) * (1/sqrt(n)) from the unitary DFT.
                let s = 1.0 / (self.m as f64).sqrt();
                buf.iter().zip(signs).map(|(v, sg)| v * (s * sg)).collect()
            }
        }
    }
}

/// Noisy measurements and the realized noise energy.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub y: Vec<C64>,
    /// `|z|_2` of the noise actually drawn.
    pub noise_norm: f64,
}

/// `y = A f + z` with `z` white Gaussian noise of standard deviation `sigma`.
///
/// Noise is real when both `A` and `f` are real; otherwise the real and
/// imaginary parts each carry variance `sigma^2 / 2`.
pub fn measure(a: &SensingOperator, f: &[C64], sigma: f64, seed: u64) -> Result<Measurement> {
    if f.len() != a.n() {
        return Err(Error::DimensionMismatch(format!("signal has n={} but sensing operator expects n={}", f.len(), a.n())));
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise level must be non-negative, got {sigma}")));
    }
    let mut y = a.apply(f);
    if sigma == 0.0 {
        return Ok(Measurement { y, noise_norm: 0.0 });
    }
    let real = a.is_real() && f.iter().all(|z| z.im == 0.0);
    let mut r = rng::stream(seed, streams::NOISE);
    let mut energy = 0.0;
    for v in y.iter_mut() {
        let z = if real {
            C64::new(sigma * Distribution::<f64>::sample(&StandardNormal, &mut r), 0.0)
        } else {
            let s = sigma * std::f64::consts::FRAC_1_SQRT_2;
            let re: f64 = StandardNormal.sample(&mut r);
            let im: f64 = StandardNormal.sample(&mut r);
            C64::new(s * re, s * im)
        };
        energy += z.norm_sqr();
        *v += z;
    }
    Ok(Measurement { y, noise_norm: energy.sqrt() })
}

/// Percentile-style noise bound `sigma * sqrt(m + 2 sqrt(2 m))`.
pub fn noise_bound(m: usize, sigma: f64) -> f64 {
    let m = m as f64;
    sigma * (m + 2.0 * (2.0 * m).sqrt()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::vec;

    fn test_vec(n: usize) -> Vec<C64> {
        (0..n).map(|i| C64::new((i as f64 + 1.0).ln(), (i as f64 * 0.7).sin())).collect()
    }

    #[test]
    fn adjoints_are_consistent() {
        for a in [
            SensingOperator::gaussian(7, 13, 1).unwrap(),
            SensingOperator::bernoulli(7, 13, 2).unwrap(),
            SensingOperator::subsampled_dft_sign(7, 13, 3).unwrap(),
        ] {
            let x = test_vec(13);
            let y: Vec<C64> = test_vec(7).iter().map(|v| v * C64::new(0.3, -1.1)).collect();
            let gap = (vec::inner(&y, &a.apply(&x)) - vec::inner(&a.adjoint(&y), &x)).norm();
            assert!(gap <= 1e-10 * vec::norm2(&x) * vec::norm2(&y), "{a:?}");
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let a = SensingOperator::gaussian(5, 9, 11).unwrap().to_dense().unwrap();
        let b = SensingOperator::gaussian(5, 9, 11).unwrap().to_dense().unwrap();
        assert_eq!(a, b);
        let c = SensingOperator::gaussian(5, 9, 12).unwrap().to_dense().unwrap();
        assert_ne!(a, c);
        let s1 = SensingOperator::subsampled_dft_sign(4, 9, 11).unwrap().to_dense().unwrap();
        let s2 = SensingOperator::subsampled_dft_sign(4, 9, 11).unwrap().to_dense().unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn bernoulli_entries_have_fixed_magnitude() {
        let a = SensingOperator::bernoulli(9, 20, 4).unwrap().to_dense().unwrap();
        let s = 1.0 / 3.0;
        assert!(a.iter().all(|z| (z.re.abs() - s).abs() < 1e-15 && z.im == 0.0));
        assert!(a.iter().any(|z| z.re > 0.0) && a.iter().any(|z| z.re < 0.0));
    }

    #[test]
    fn full_subsampled_dft_is_an_isometry() {
        let a = SensingOperator::subsampled_dft_sign(16, 16, 5).unwrap();
        let v = test_vec(16);
        assert!((vec::norm2(&a.apply(&v)) - vec::norm2(&v)).abs() <= 1e-12 * vec::norm2(&v));
    }

    #[test]
    fn subsampled_dft_rejects_more_rows_than_columns() {
        assert!(SensingOperator::subsampled_dft_sign(17, 16, 0).is_err());
    }

    #[test]
    fn subsampled_dft_matches_dense_formula() {
        let n = 16;
        let a = SensingOperator::subsampled_dft_sign(6, n, 8).unwrap();
        let dense = a.to_dense().unwrap();
        let Repr::SubsampledDft { rows, signs, .. } = &a.repr else { unreachable!() };
        let scale = (n as f64 / 6.0).sqrt() / (n as f64).sqrt();
        for (i, &r) in rows.iter().enumerate() {
            for t in 0..n {
                let expected = C64::from_polar(scale * signs[t], -2.0 * std::f64::consts::PI * (r * t) as f64 / n as f64);
                assert!((dense[(i, t)] - expected).norm() < 1e-12);
            }
        }
        let v = test_vec(n);
        let round_trip = a.adjoint(&a.apply(&v));
        let dense_trip = dense.adjoint() * (&dense * nalgebra::DVector::from_vec(v.clone()));
        assert!(vec::dist2(&round_trip, dense_trip.as_slice()) < 1e-10);
    }

    #[test]
    fn noiseless_measurement_is_exact() {
        let a = SensingOperator::gaussian(4, 6, 3).unwrap();
        let f = test_vec(6);
        let meas = measure(&a, &f, 0.0, 1).unwrap();
        assert_eq!(meas.y, a.apply(&f));
        assert_eq!(meas.noise_norm, 0.0);
        assert!(measure(&a, &f[..5], 0.0, 1).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let a = SensingOperator::bernoulli(3, 5, 77).unwrap();
        let json = serde_json::to_string(&a.descriptor()).unwrap();
        assert_eq!(json, r#"{"kind":"bernoulli","m":3,"n":5,"seed":77}"#);
        let b = SensingOperator::from_descriptor(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(a.to_dense().unwrap(), b.to_dense().unwrap());
    }
}
