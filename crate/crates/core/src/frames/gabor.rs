//! Gabor systems `G_{k1,k2}(t) = g(t - k2 a) exp(2 pi i k1 b t)`.
//!
//! Coefficients are stored time-major: atom `(k1, k2)` lives at index
//! `k2 * num_freqs + k1`. When `1/b` is an integer `M` the modulations are
//! `M`-periodic in `t`, so analysis folds the windowed signal modulo `M` and
//! takes one `M`-point FFT per time shift. Other `b` fall back to direct sums.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{self, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaborParams {
    /// Standard deviation of the Gaussian window in samples; `f64::INFINITY`
    /// gives a flat window.
    pub window_sigma: f64,
    /// Time step `a` in samples.
    pub time_step: usize,
    /// Frequency step `b` in cycles per sample.
    pub freq_step: f64,
}

impl GaborParams {
    /// A lattice with redundancy `d / n = redundancy` whose window width
    /// balances time and frequency spread, `sigma^2 = a M / (2 pi)`.
    ///
    /// `time_step` fixes `a`; the number of modulations is `M = a * redundancy`.
    pub fn with_redundancy(time_step: usize, redundancy: usize) -> Self {
        let m = (time_step * redundancy) as f64;
        Self {
            window_sigma: (time_step as f64 * m / (2.0 * PI)).sqrt(),
            time_step,
            freq_step: 1.0 / m,
        }
    }
}

#[derive(Clone)]
pub(super) struct GaborOperator {
    n: usize,
    params: GaborParams,
    /// Circular window `g((t) mod n)`, unnormalized.
    window: Vec<f64>,
    inv_norm: f64,
    num_shifts: usize,
    num_freqs: usize,
    fft: Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
}

const INTEGER_TOL: f64 = 1e-9;

impl GaborOperator {
    pub(super) fn new(n: usize, params: GaborParams) -> Result<Self> {
        Self::build(n, params, true)
    }

    fn build(n: usize, params: GaborParams, allow_fft: bool) -> Result<Self> {
        let GaborParams { window_sigma, time_step: a, freq_step: b } = params;
        if n == 0 || a == 0 {
            return Err(Error::InvalidParameter(format!("Gabor system needs n >= 1 and a >= 1, got n={n}, a={a}")));
        }
        if !(b > 0.0 && b <= 1.0) {
            return Err(Error::InvalidParameter(format!("Gabor frequency step must lie in (0, 1], got {b}")));
        }
        if !(window_sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("Gabor window sigma must be positive, got {window_sigma}")));
        }
        if a as f64 * b > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "Gabor lattice a*b = {} > 1 is undersampled and cannot form a frame",
                a as f64 * b
            )));
        }

        let window: Vec<f64> = (0..n)
            .map(|t| {
                if window_sigma.is_infinite() {
                    1.0
                } else {
                    let dist = t.min(n - t) as f64;
                    (-dist * dist / (2.0 * window_sigma * window_sigma)).exp()
                }
            })
            .collect();
        let inv_norm = 1.0 / window.iter().map(|g| g * g).sum::<f64>().sqrt();

        let periods = 1.0 / b;
        let rounded = periods.round();
        let integral = (periods - rounded).abs() <= INTEGER_TOL * rounded.max(1.0);
        let num_freqs = if integral { rounded as usize } else { periods.ceil() as usize };
        let num_shifts = n.div_ceil(a);

        let fft = (integral && allow_fft).then(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(num_freqs), planner.plan_fft_inverse(num_freqs))
        });

        Ok(Self { n, params, window, inv_norm, num_shifts, num_freqs, fft })
    }

    pub(super) fn params(&self) -> GaborParams {
        self.params
    }

    pub(super) fn num_atoms(&self) -> usize {
        self.num_shifts * self.num_freqs
    }

    fn shifted_window(&self, k2: usize, t: usize) -> f64 {
        let shift = (k2 * self.params.time_step) % self.n;
        self.window[(t + self.n - shift) % self.n]
    }

    /// `g(t - k2 a)` for `t = 0..n`.
    fn rotated_window(&self, k2: usize) -> impl Iterator<Item = f64> + '_ {
        let shift = (k2 * self.params.time_step) % self.n;
        let split = (self.n - shift) % self.n;
        self.window[split..].iter().chain(&self.window[..split]).copied()
    }

    pub(super) fn synthesize(&self, x: &[C64]) -> Vec<C64> {
        let mut out = linop::vec::zeros(self.n);
        let m = self.num_freqs;
        match &self.fft {
            Some((_, inverse)) => {
                let mut buf = linop::vec::zeros(m);
                for k2 in 0..self.num_shifts {
                    let block = &x[k2 * m..(k2 + 1) * m];
                    if block.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                        continue;
                    }
                    buf.copy_from_slice(block);
                    // sum_k1 c_k1 exp(2 pi i k1 r / M)
                    inverse.process(&mut buf);
                    let mut r = 0;
                    for (o, g) in out.iter_mut().zip(self.rotated_window(k2)) {
                        *o += buf[r] * (g * self.inv_norm);
                        r += 1;
                        if r == m {
                            r = 0;
                        }
                    }
                }
            }
            None => {
                let b = self.params.freq_step;
                for k2 in 0..self.num_shifts {
                    for k1 in 0..m {
                        let c = x[k2 * m + k1];
                        if c == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for (t, o) in out.iter_mut().enumerate() {
                            let phase = C64::from_polar(1.0, 2.0 * PI * k1 as f64 * b * t as f64);
                            *o += c * phase * (self.shifted_window(k2, t) * self.inv_norm);
                        }
                    }
                }
            }
        }
        out
    }

    pub(super) fn analyze(&self, f: &[C64]) -> Vec<C64> {
        let m = self.num_freqs;
        let mut out = linop::vec::zeros(self.num_atoms());
        match &self.fft {
            Some((forward, _)) => {
                let mut buf = linop::vec::zeros(m);
                for k2 in 0..self.num_shifts {
                    buf.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                    let mut r = 0;
                    for (&v, g) in f.iter().zip(self.rotated_window(k2)) {
                        buf[r] += v * g;
                        r += 1;
                        if r == m {
                            r = 0;
                        }
                    }
                    forward.process(&mut buf);
                    for (o, v) in out[k2 * m..(k2 + 1) * m].iter_mut().zip(&buf) {
                        *o = v * self.inv_norm;
                    }
                }
            }
            None => {
                let b = self.params.freq_step;
                for k2 in 0..self.num_shifts {
                    for k1 in 0..m {
                        out[k2 * m + k1] = f
                            .iter()
                            .enumerate()
                            .map(|(t, &v)| {
                                let phase = C64::from_polar(1.0, -2.0 * PI * k1 as f64 * b * t as f64);
                                v * phase * self.shifted_window(k2, t)
                            })
                            .sum::<C64>()
                            * self.inv_norm;
                    }
                }
            }
        }
        out
    }
}
