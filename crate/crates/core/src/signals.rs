//! Test signals, best s-term approximation and error metrics.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::Dictionary;
use crate::linop::{self, LinearOperator, C64};
use crate::rng::{self, streams};

#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    pub samples: Vec<C64>,
    /// Samples per second, when the signal has physical units.
    pub sample_rate: Option<f64>,
    pub label: String,
}

impl Signal {
    pub fn new(samples: Vec<C64>, label: impl Into<String>) -> Self {
        Self { samples, sample_rate: None, label: label.into() }
    }

    pub fn from_real(samples: &[f64], label: impl Into<String>) -> Self {
        Self::new(linop::vec::from_real(samples), label)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|z| z.im == 0.0)
    }

    pub fn real_part(&self) -> Signal {
        Signal {
            samples: self.samples.iter().map(|z| C64::new(z.re, 0.0)).collect(),
            sample_rate: self.sample_rate,
            label: self.label.clone(),
        }
    }

    pub fn norm(&self) -> f64 {
        linop::vec::norm2(&self.samples)
    }
}

/// Radar pulse-train parameters. Durations are in samples, frequencies in
/// cycles per sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    pub num_pulses: usize,
    pub duration: usize,
    pub rise_fall: usize,
    pub f_lo: f64,
    pub f_hi: f64,
    pub seed: u64,
    /// Keep only the real part (a physical, real-valued waveform).
    pub real: bool,
}

/// Nyquist rate used for physical metadata: 0.2 ns per sample.
pub const RADAR_SAMPLE_RATE: f64 = 5e9;

impl PulseParams {
    /// Six 200 ns pulses with 20 ns ramps and carriers between 50 MHz and
    /// 2.5 GHz, sampled at 5 GHz over n = 8192 samples.
    pub fn full_scale(seed: u64) -> Self {
        Self { num_pulses: 6, duration: 1000, rise_fall: 100, f_lo: 0.01, f_hi: 0.5, seed, real: true }
    }

    /// The full-scale setup shrunk to n = 1024 with three pulses.
    pub fn desk_scale(seed: u64) -> Self {
        Self { num_pulses: 3, duration: 125, rise_fall: 12, f_lo: 0.01, f_hi: 0.5, seed, real: true }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.num_pulses == 0 || self.duration == 0 {
            return bad(format!("pulse train needs at least one pulse of positive duration, got {self:?}"));
        }
        if 2 * self.rise_fall > self.duration {
            return bad(format!("ramps of {} samples do not fit in a {}-sample pulse", self.rise_fall, self.duration));
        }
        if !(0.0 <= self.f_lo && self.f_lo <= self.f_hi && self.f_hi <= 0.5) {
            return bad(format!("carrier band [{}, {}] must satisfy 0 <= f_lo <= f_hi <= 1/2", self.f_lo, self.f_hi));
        }
        if self.duration > n {
            return bad(format!("pulse duration {} exceeds signal length {n}", self.duration));
        }
        Ok(())
    }
}

/// Trapezoidal envelope at offset `u` into a pulse: linear ramps of
/// `rise_fall` samples from 0 up to a plateau of 1, then back down.
pub fn trapezoid(duration: usize, rise_fall: usize, u: usize) -> f64 {
    if u >= duration {
        return 0.0;
    }
    if rise_fall == 0 {
        return 1.0;
    }
    let r = rise_fall as f64;
    let up = u as f64 / r;
    let down = (duration - 1 - u) as f64 / r;
    up.min(down).min(1.0)
}

/// Where and at what carrier each pulse of a train was placed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub start: usize,
    pub frequency: f64,
}

#[derive(Clone, Debug)]
pub struct PulseTrain {
    pub signal: Signal,
    pub pulses: Vec<Pulse>,
}

/// Superposition of trapezoid-windowed tones with uniformly random carriers
/// in `[f_lo, f_hi]` and start times in `[0, n - duration]`. Pulses may
/// overlap.
pub fn radar_pulse_train(n: usize, params: &PulseParams) -> Result<PulseTrain> {
    params.validate(n)?;
    let mut r = rng::stream(params.seed, streams::SIGNAL);
    let pulses: Vec<Pulse> = (0..params.num_pulses)
        .map(|_| {
            let start = r.random_range(0..=n - params.duration);
            let frequency = params.f_lo + (params.f_hi - params.f_lo) * r.random::<f64>();
            Pulse { start, frequency }
        })
        .collect();
    let mut samples = linop::vec::zeros(n);
    for p in &pulses {
        for u in 0..params.duration {
            let t = p.start + u;
            let env = trapezoid(params.duration, params.rise_fall, u);
            samples[t] += C64::from_polar(env, 2.0 * PI * p.frequency * t as f64);
        }
    }
    if params.real {
        samples.iter_mut().for_each(|z| z.im = 0.0);
    }
    let signal = Signal { samples, sample_rate: Some(RADAR_SAMPLE_RATE), label: "radar pulse train".into() };
    Ok(PulseTrain { signal, pulses })
}

/// Unit spikes spaced `sqrt(n)` apart, at `t = j sqrt(n) mod n`.
pub fn dirac_comb(n: usize) -> Result<Signal> {
    let root = (n as f64).sqrt().round() as usize;
    if n == 0 || root * root != n {
        return Err(Error::InvalidParameter(format!("Dirac comb needs a perfect-square length, got {n}")));
    }
    let mut samples = linop::vec::zeros(n);
    for j in 1..=root {
        samples[(j * root) % n] = C64::new(1.0, 0.0);
    }
    Ok(Signal::new(samples, "dirac comb"))
}

/// How the coefficients of [`compressible_signal`] are signed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientPhase {
    /// Uniform random `±1`.
    Sign,
    /// Uniform random phase on the unit circle.
    Phase,
}

/// Coefficients with sorted magnitudes exactly `k^{-q}`, `k = 1..d`, placed at
/// random positions, together with the synthesized signal `f = D x`.
pub fn compressible_signal(dict: &Dictionary, q: f64, phase: CoefficientPhase, seed: u64) -> Result<(Vec<C64>, Signal)> {
    if !(q > 0.0) {
        return Err(Error::InvalidParameter(format!("decay exponent must be positive, got {q}")));
    }
    let d = dict.d();
    let mut r = rng::stream(seed, streams::SIGNAL);
    let mut positions: Vec<usize> = (0..d).collect();
    positions.shuffle(&mut r);
    let mut x = linop::vec::zeros(d);
    for (k, &pos) in positions.iter().enumerate() {
        let mag = ((k + 1) as f64).powf(-q);
        x[pos] = match phase {
            CoefficientPhase::Sign => C64::new(if r.random::<bool>() { mag } else { -mag }, 0.0),
            CoefficientPhase::Phase => C64::from_polar(mag, 2.0 * PI * r.random::<f64>()),
        };
    }
    let f = Signal::new(dict.apply(&x), format!("compressible q={q}"));
    Ok((x, f))
}

/// Indices of the `s` largest-magnitude entries, ties to the lowest index.
pub fn top_s_support(x: &[C64], s: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[j].norm().total_cmp(&x[i].norm()).then(i.cmp(&j)));
    order.truncate(s);
    order
}

/// Best s-term approximation: keep the `s` largest entries, zero the rest.
pub fn best_s_term(x: &[C64], s: usize) -> Vec<C64> {
    let mut out = linop::vec::zeros(x.len());
    for i in top_s_support(x, s) {
        out[i] = x[i];
    }
    out
}

/// `|x - x_s|_1`, the l1 tail beyond the best s-term approximation.
pub fn tail_l1(x: &[C64], s: usize) -> f64 {
    let kept: f64 = top_s_support(x, s).iter().map(|&i| x[i].norm()).sum();
    (linop::vec::norm1(x) - kept).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub relative_error: f64,
    pub rmse: f64,
    pub linf: f64,
}

pub fn metrics(estimate: &[C64], truth: &[C64]) -> Result<Metrics> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "estimate has {} samples, reference has {}",
            estimate.len(),
            truth.len()
        )));
    }
    let reference = linop::vec::norm2(truth);
    if reference == 0.0 {
        return Err(Error::InvalidParameter("relative error of a zero reference signal is undefined".into()));
    }
    let err = linop::vec::dist2(estimate, truth);
    let linf = estimate.iter().zip(truth).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(Metrics { relative_error: err / reference, rmse: err / (truth.len() as f64).sqrt(), linf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::vec;

    fn c(v: &[f64]) -> Vec<C64> {
        vec::from_real(v)
    }

    #[test]
    fn best_s_term_examples() {
        assert_eq!(best_s_term(&c(&[3.0, -1.0, 2.0]), 2), c(&[3.0, 0.0, 2.0]));
        assert_eq!(best_s_term(&c(&[3.0, -1.0, 2.0]), 0), c(&[0.0, 0.0, 0.0]));
        assert_eq!(best_s_term(&c(&[3.0, -1.0, 2.0]), 5), c(&[3.0, -1.0, 2.0]));
        // Ties go to the lowest index.
        assert_eq!(best_s_term(&c(&[1.0, -2.0, 2.0, 1.0]), 2), c(&[0.0, -2.0, 2.0, 0.0]));
        assert_eq!(best_s_term(&c(&[1.0, 1.0, 1.0]), 1), c(&[1.0, 0.0, 0.0]));
    }

    #[test]
    fn best_s_term_beats_every_support_of_size_s() {
        let x = c(&[0.3, -2.0, 1.1, 0.0, -1.1, 0.7]);
        let kept = best_s_term(&x, 2);
        let best_err = vec::dist2(&x, &kept);
        // The closest vector supported on {i, j} is x restricted to {i, j}.
        for i in 0..6 {
            for j in (i + 1)..6 {
                let mut u = vec::zeros(6);
                u[i] = x[i];
                u[j] = x[j];
                assert!(best_err <= vec::dist2(&x, &u) + 1e-15);
            }
        }
    }

    #[test]
    fn metric_examples() {
        let f = c(&[1.0, 0.0]);
        assert_eq!(metrics(&f, &f).unwrap(), Metrics { relative_error: 0.0, rmse: 0.0, linf: 0.0 });
        assert_eq!(metrics(&c(&[0.0, 0.0]), &f).unwrap().relative_error, 1.0);
        let m = metrics(&c(&[0.0, 1.0]), &f).unwrap();
        assert!((m.relative_error - 2f64.sqrt()).abs() < 1e-15);
        assert!((m.rmse - 1.0).abs() < 1e-15);
        assert!(metrics(&f, &c(&[0.0, 0.0])).is_err());
        assert!(metrics(&f, &c(&[0.0])).is_err());
    }

    #[test]
    fn dirac_comb_positions() {
        let f = dirac_comb(16).unwrap();
        let support: Vec<usize> = (0..16).filter(|&t| f.samples[t].re != 0.0).collect();
        assert_eq!(support, vec![0, 4, 8, 12]);
        assert!(dirac_comb(15).is_err());
        assert!(dirac_comb(0).is_err());
    }

    #[test]
    fn dirac_comb_is_2_sqrt_n_sparse_under_spikes_and_sines() {
        let d = Dictionary::identity_fourier(16).unwrap();
        let f = dirac_comb(16).unwrap();
        let coeffs = d.analyze(&f.samples);
        let nnz = coeffs.iter().filter(|z| z.norm() > 1e-12).count();
        assert_eq!(nnz, 8);
        assert!(tail_l1(&coeffs, 8) < 1e-12);
        assert!(tail_l1(&coeffs, 9) < 1e-12);
    }

    #[test]
    fn single_rectangular_pulse() {
        let p = PulseParams { num_pulses: 1, duration: 40, rise_fall: 0, f_lo: 0.1, f_hi: 0.2, seed: 3, real: false };
        let train = radar_pulse_train(128, &p).unwrap();
        for z in &train.signal.samples {
            let m = z.norm();
            assert!(m.abs() < 1e-12 || (m - 1.0).abs() < 1e-12);
        }
        let pulse = train.pulses[0];
        assert!((0.1..=0.2).contains(&pulse.frequency));
        assert!(pulse.start + 40 <= 128);
    }

    #[test]
    fn pulse_params_are_validated() {
        let ok = PulseParams::desk_scale(0);
        assert!(radar_pulse_train(1024, &ok).is_ok());
        assert!(radar_pulse_train(100, &ok).is_err());
        assert!(radar_pulse_train(1024, &PulseParams { rise_fall: 70, ..ok }).is_err());
        assert!(radar_pulse_train(1024, &PulseParams { f_hi: 0.6, ..ok }).is_err());
        assert!(radar_pulse_train(1024, &PulseParams { f_lo: 0.3, f_hi: 0.2, ..ok }).is_err());
        assert!(radar_pulse_train(8192, &PulseParams::full_scale(1)).is_ok());
    }

    #[test]
    fn compressible_magnitudes_follow_the_power_law() {
        let d = Dictionary::identity_fourier(16).unwrap();
        let (x, f) = compressible_signal(&d, 1.5, CoefficientPhase::Phase, 9).unwrap();
        let mut mags: Vec<f64> = x.iter().map(|z| z.norm()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        for (k, m) in mags.iter().enumerate() {
            assert!((m - ((k + 1) as f64).powf(-1.5)).abs() < 1e-14);
        }
        assert_eq!(f.len(), 16);
        let s = 5;
        let analytic: f64 = (s + 1..=32).map(|k| (k as f64).powf(-1.5)).sum();
        assert!((tail_l1(&x, s) - analytic).abs() < 1e-12);

        let (x10, _) = compressible_signal(&d, 10.0, CoefficientPhase::Sign, 9).unwrap();
        let energy: f64 = x10.iter().map(|z| z.norm_sqr()).sum();
        assert!(vec::norm2(&best_s_term(&x10, 1)).powi(2) / energy > 0.999);
        assert!(compressible_signal(&d, 0.0, CoefficientPhase::Sign, 1).is_err());
    }
}
