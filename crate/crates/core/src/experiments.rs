//! Desk-scale numerical experiments.
//!
//! Every experiment is a pure function of its [`ExperimentConfig`]. Trials run
//! in parallel, trial `t` drawing everything from `derive_seed(seed, t)`, and
//! results are collected in trial order, so output does not depend on
//! scheduling.
//!
//! Recovery experiments also return one [`SolveAudit`] per analysis-type
//! solve. In the audit table the `method` column is coded 0 analysis,
//! 1 reweighted, 2 synthesis, 3 split.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::certify::theorem_constants_7s;
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::frames::{tighten, Dictionary, GaborParams};
use crate::io::table_to_csv;
use crate::linop::{vec, LinearOperator, C64};
use crate::rng::derive_seed;
use crate::sensing::{measure, noise_bound, SensingOperator};
use crate::signals::{
    compressible_signal, dirac_comb, metrics, radar_pulse_train, CoefficientPhase, PulseParams, Signal,
    RADAR_SAMPLE_RATE,
};
use crate::solvers::{
    audit, l1_analysis, l1_synthesis, reweighted_l1_analysis_with_passes, Diagnostics, Method, RecoveryReport,
    Reweighting, SolverConfig,
};

/// Relaxation used by every experiment solve.
const OVER_RELAXATION: f64 = 1.8;
/// Relative error counted as exact recovery.
pub const EXACT_RECOVERY_TOL: f64 = 1e-4;
/// Coefficients kept in the method-comparison coefficient table.
const TOP_COEFFICIENTS: usize = 200;
/// Decay exponent of the method-comparison signal.
const COMPARISON_DECAY: f64 = 1.5;

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        table_to_csv(&self.header, &self.rows)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// The post-hoc checks of one solve against its known truth.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveAudit {
    pub trial: usize,
    pub method: Method,
    pub sigma_rel: f64,
    pub converged: bool,
    /// `|A f - y|_2 <= eps` for the truth `f`.
    pub reference_feasible: bool,
    pub eps: f64,
    pub tol_feas: f64,
    pub tol_rel: f64,
    /// `|D^* f|_1` of the truth.
    pub reference_l1: f64,
    pub relative_error: f64,
    pub rmse: f64,
    pub diagnostics: Diagnostics,
}

impl SolveAudit {
    pub fn cone_holds(&self) -> bool {
        self.diagnostics.cone_slack <= self.tol_rel * self.reference_l1
    }

    pub fn tube_holds(&self) -> bool {
        self.diagnostics.tube_holds(self.eps, self.tol_feas)
    }

    pub fn tail_holds(&self) -> bool {
        self.diagnostics.tail_holds()
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub experiment: ExperimentKind,
    pub tables: Vec<Table>,
    pub audits: Vec<SolveAudit>,
    pub summary: BTreeMap<String, f64>,
}

impl ExperimentOutput {
    fn new(experiment: ExperimentKind) -> Self {
        Self { experiment, tables: Vec::new(), audits: Vec::new(), summary: BTreeMap::new() }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// True when every audited solve converged.
    pub fn all_converged(&self) -> bool {
        self.audits.iter().all(|a| a.converged)
    }

    pub fn audit_table(&self) -> Table {
        let mut t = Table::new(
            &format!("{}_audit", self.experiment.name().replace('-', "_")),
            &[
                "trial",
                "sigma_rel",
                "method",
                "converged",
                "reference_feasible",
                "relative_error",
                "eps",
                "tube_norm",
                "cone_slack",
                "cone_tolerance",
                "tail_lhs",
                "tail_rhs",
            ],
        );
        for a in &self.audits {
            let method = match a.method {
                Method::Analysis => 0.0,
                Method::Reweighted => 1.0,
                Method::Synthesis => 2.0,
                Method::Split => 3.0,
            };
            t.push(vec![
                a.trial as f64,
                a.sigma_rel,
                method,
                f64::from(u8::from(a.converged)),
                f64::from(u8::from(a.reference_feasible)),
                a.relative_error,
                a.eps,
                a.diagnostics.tube_norm,
                a.diagnostics.cone_slack,
                a.tol_rel * a.reference_l1,
                a.diagnostics.tail_lhs,
                a.diagnostics.tail_rhs,
            ]);
        }
        t
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary)?)
    }

    /// Writes every table as `<name>.csv`, the audit table if there are
    /// audits, and `<experiment>_summary.json`. Returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let audit = (!self.audits.is_empty()).then(|| self.audit_table());
        for t in self.tables.iter().chain(audit.as_ref()) {
            let path = dir.join(format!("{}.csv", t.name));
            std::fs::write(&path, t.to_csv())?;
            written.push(path);
        }
        let path = dir.join(format!("{}_summary.json", self.experiment.name().replace('-', "_")));
        std::fs::write(&path, self.summary_json()? + "\n")?;
        written.push(path);
        Ok(written)
    }
}

/// Resolved parameters: config values over per-experiment defaults.
#[derive(Clone, Debug)]
struct Setup {
    n: usize,
    m: usize,
    redundancy: usize,
    time_step: usize,
    s: Option<usize>,
    sigmas: Vec<f64>,
    trials: usize,
    rw_iters: usize,
    seed: u64,
    solver: SolverConfig,
}

struct Defaults {
    n: usize,
    m: usize,
    redundancy: usize,
    time_step: usize,
    trials: usize,
    rw_iters: usize,
}

fn setup(cfg: &ExperimentConfig, def: Defaults) -> Result<Setup> {
    cfg.validate()?;
    let n = cfg.n.unwrap_or(def.n);
    let redundancy = match (cfg.oversampling, cfg.d) {
        (Some(o), _) => o,
        (None, Some(d)) if d % n == 0 => d / n,
        (None, Some(d)) => {
            return Err(Error::InvalidParameter(format!("d = {d} is not a multiple of n = {n}")));
        }
        (None, None) => def.redundancy,
    };
    let mut solver = SolverConfig { over_relaxation: OVER_RELAXATION, ..SolverConfig::default() };
    if let Some(k) = cfg.max_iter {
        solver.max_iter = k;
    }
    if let Some(t) = cfg.tol_rel {
        solver.tol_rel = t;
    }
    Ok(Setup {
        n,
        m: cfg.m.unwrap_or(def.m),
        redundancy,
        time_step: cfg.time_step.unwrap_or(def.time_step),
        s: cfg.s,
        sigmas: cfg.sigmas.clone().unwrap_or_else(|| vec![0.0, 0.05, 0.1, 0.15, 0.2]),
        trials: cfg.trials.unwrap_or(def.trials),
        rw_iters: cfg.rw_iters.unwrap_or(def.rw_iters),
        seed: cfg.seed.unwrap_or(0),
        solver,
    })
}

/// Tight Gabor frame with time step `a` and redundancy `r`.
pub fn tight_gabor(n: usize, a: usize, r: usize) -> Result<Dictionary> {
    tighten(&Dictionary::gabor(n, GaborParams::with_redundancy(a, r))?)
}

/// Desk-scale pulse parameters scaled to length `n` (125-sample pulses with
/// 12-sample ramps at `n = 1024`).
pub fn radar_params(n: usize, seed: u64) -> PulseParams {
    let base = PulseParams::desk_scale(seed);
    PulseParams {
        duration: scale_len(base.duration, n, 1024),
        rise_fall: scale_len(base.rise_fall, n, 1024),
        ..base
    }
}

/// Two smooth pulses (48 samples with 16-sample ramps at `n = 256`).
pub fn noise_curve_params(n: usize, seed: u64) -> PulseParams {
    PulseParams {
        num_pulses: 2,
        duration: scale_len(48, n, 256),
        rise_fall: scale_len(16, n, 256),
        ..PulseParams::desk_scale(seed)
    }
}

fn scale_len(len: usize, n: usize, reference: usize) -> usize {
    ((len * n) as f64 / reference as f64).round().max(1.0) as usize
}

/// Least-squares line `y = slope x + intercept` and its `R^2`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter(format!("a line fit needs two or more points, got {} and {}", x.len(), y.len())));
    }
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("a line fit needs two distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((slope, my - slope * mx, r2))
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    match k {
        0 => f64::NAN,
        _ if k % 2 == 1 => v[k / 2],
        _ => 0.5 * (v[k / 2 - 1] + v[k / 2]),
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// One noisy measurement of a known signal.
struct Instance<'a> {
    trial: usize,
    sigma_rel: f64,
    a: &'a SensingOperator,
    f: &'a [C64],
    y: Vec<C64>,
    eps: f64,
    noise_norm: f64,
}

/// `y = A f + z` with `sqrt(m) sigma = sigma_rel |A f|_2` and `eps` the
/// matching noise bound; zero noise gives `eps = 0`.
fn instance<'a>(trial: usize, a: &'a SensingOperator, f: &'a [C64], sigma_rel: f64, seed: u64) -> Result<Instance<'a>> {
    let m = a.m();
    let sigma = sigma_rel * vec::norm2(&a.apply(f)) / (m as f64).sqrt();
    let meas = measure(a, f, sigma, seed)?;
    Ok(Instance { trial, sigma_rel, a, f, y: meas.y, eps: noise_bound(m, sigma), noise_norm: meas.noise_norm })
}

impl Instance<'_> {
    fn audit(&self, d: &dyn LinearOperator, rep: &RecoveryReport, s: usize, cfg: &SolverConfig) -> Result<SolveAudit> {
        let met = metrics(&rep.f_hat.samples, self.f)?;
        Ok(SolveAudit {
            trial: self.trial,
            method: rep.method,
            sigma_rel: self.sigma_rel,
            converged: rep.converged,
            reference_feasible: self.noise_norm <= self.eps,
            eps: self.eps,
            tol_feas: rep.tol_feas,
            tol_rel: cfg.tol_rel,
            reference_l1: vec::norm1(&d.adjoint(self.f)),
            relative_error: met.relative_error,
            rmse: met.rmse,
            diagnostics: audit(self.a, d, self.f, &rep.f_hat.samples, s)?,
        })
    }

    /// Plain and reweighted analysis from one reweighted run, whose first
    /// pass is the plain solve.
    fn plain_and_reweighted(
        &self,
        d: &dyn LinearOperator,
        rw_iters: usize,
        s: usize,
        cfg: &SolverConfig,
    ) -> Result<(RecoveryReport, RecoveryReport, Vec<SolveAudit>)> {
        let rw = Reweighting { iters: rw_iters, sparsity: None };
        let (rw_rep, mut passes) = reweighted_l1_analysis_with_passes(self.a, d, &self.y, self.eps, &rw, cfg)?;
        let plain = passes.swap_remove(0);
        let audits = vec![self.audit(d, &plain, s, cfg)?, self.audit(d, &rw_rep, s, cfg)?];
        Ok((plain, rw_rep, audits))
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.experiment {
        ExperimentKind::Radar => radar(cfg),
        ExperimentKind::DiracComb => dirac_comb_recovery(cfg),
        ExperimentKind::NoiseCurve => noise_curve(cfg),
        ExperimentKind::Constants => constants(cfg),
        ExperimentKind::CoefficientDecay => coefficient_decay(cfg),
        ExperimentKind::MethodComparison => method_comparison(cfg),
    }
}

fn unitary_spectrum(x: &[C64]) -> Vec<f64> {
    let mut buf = x.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    buf.iter().map(|v| v.norm() * scale).collect()
}

/// Noiseless recovery of a real radar pulse train by plain and reweighted
/// analysis in a tight Gabor frame.
///
/// Tables: `radar_rmse` per trial, and `radar_time` / `radar_frequency`
/// with the truth and both recoveries of trial 0.
pub fn radar(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let st = setup(cfg, Defaults { n: 1024, m: 120, redundancy: 8, time_step: 32, trials: 10, rw_iters: 4 })?;
    let dict = tight_gabor(st.n, st.time_step, st.redundancy)?;
    let s = st.s.unwrap_or(st.m / 4).max(1);
    let solver = SolverConfig { real_signal: true, ..st.solver.clone() };
    type TrialOut = (Vec<f64>, Vec<SolveAudit>, Option<(Signal, Vec<C64>, Vec<C64>)>);
    let results: Vec<TrialOut> = (0..st.trials)
        .into_par_iter()
        .map(|t| -> Result<TrialOut> {
            let ts = derive_seed(st.seed, t as u64);
            let f = radar_pulse_train(st.n, &radar_params(st.n, ts))?.signal;
            let a = SensingOperator::gaussian(st.m, st.n, ts)?;
            let inst = instance(t, &a, &f.samples, 0.0, ts)?;
            let (plain, rw, audits) = inst.plain_and_reweighted(&dict, st.rw_iters, s, &solver)?;
            let row = vec![
                t as f64,
                audits[0].rmse,
                audits[1].rmse,
                audits[0].relative_error,
                audits[1].relative_error,
                plain.iterations as f64,
                rw.iterations as f64,
            ];
            let keep = (t == 0).then(|| (f.clone(), plain.f_hat.samples, rw.f_hat.samples));
            Ok((row, audits, keep))
        })
        .collect::<Result<_>>()?;

    let mut out = ExperimentOutput::new(ExperimentKind::Radar);
    let mut rmse = Table::new(
        "radar_rmse",
        &["trial", "rmse_plain", "rmse_rw", "relative_error_plain", "relative_error_rw", "iterations_plain", "iterations_rw"],
    );
    let mut shown = None;
    for (row, audits, keep) in results {
        rmse.push(row);
        out.audits.extend(audits);
        if keep.is_some() {
            shown = keep;
        }
    }
    let plain = rmse.column("rmse_plain").unwrap_or_default();
    let rw = rmse.column("rmse_rw").unwrap_or_default();
    out.summary.insert("median_rmse_plain".into(), median(&plain));
    out.summary.insert("median_rmse_rw".into(), median(&rw));
    out.summary.insert("median_rmse_ratio".into(), median(&rw) / median(&plain));
    out.summary.insert("converged_solves".into(), out.audits.iter().filter(|a| a.converged).count() as f64);
    out.summary.insert("solves".into(), out.audits.len() as f64);
    out.tables.push(rmse);

    if let Some((f, plain, rw)) = shown {
        let rate = f.sample_rate.unwrap_or(RADAR_SAMPLE_RATE);
        let mut time = Table::new("radar_time", &["sample", "time_s", "signal", "plain", "reweighted"]);
        for (i, ((x, p), r)) in f.samples.iter().zip(&plain).zip(&rw).enumerate() {
            time.push(vec![i as f64, i as f64 / rate, x.re, p.re, r.re]);
        }
        let mut freq = Table::new("radar_frequency", &["bin", "frequency_hz", "signal", "plain", "reweighted"]);
        let (sf, sp, sr) = (unitary_spectrum(&f.samples), unitary_spectrum(&plain), unitary_spectrum(&rw));
        for k in 0..=st.n / 2 {
            freq.push(vec![k as f64, k as f64 * rate / st.n as f64, sf[k], sp[k], sr[k]]);
        }
        out.tables.push(time);
        out.tables.push(freq);
    }
    Ok(out)
}

/// Noiseless recovery of the Dirac comb in `[I F] / sqrt(2)` from Gaussian
/// measurements.
pub fn dirac_comb_recovery(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let st = setup(cfg, Defaults { n: 64, m: 32, redundancy: 2, time_step: 1, trials: 10, rw_iters: 1 })?;
    if st.redundancy != 2 {
        return Err(Error::InvalidParameter(format!(
            "the Dirac-comb experiment uses [I F] with redundancy 2, got {}",
            st.redundancy
        )));
    }
    let dict = Dictionary::identity_fourier(st.n)?;
    let f = dirac_comb(st.n)?;
    let s = st.s.unwrap_or_else(|| 2 * (st.n as f64).sqrt().round() as usize);
    let solver = SolverConfig { real_signal: true, ..st.solver.clone() };
    let results: Vec<(Vec<f64>, SolveAudit)> = (0..st.trials)
        .into_par_iter()
        .map(|t| -> Result<_> {
            let ts = derive_seed(st.seed, t as u64);
            let a = SensingOperator::gaussian(st.m, st.n, ts)?;
            let inst = instance(t, &a, &f.samples, 0.0, ts)?;
            let rep = l1_analysis(&a, &dict, &inst.y, 0.0, &solver)?;
            let au = inst.audit(&dict, &rep, s, &solver)?;
            let row = vec![t as f64, au.relative_error, rep.iterations as f64, f64::from(u8::from(rep.converged))];
            Ok((row, au))
        })
        .collect::<Result<_>>()?;
    let mut out = ExperimentOutput::new(ExperimentKind::DiracComb);
    let mut table = Table::new("dirac_comb", &["trial", "relative_error", "iterations", "converged"]);
    for (row, au) in results {
        table.push(row);
        out.audits.push(au);
    }
    let exact = out.audits.iter().filter(|a| a.relative_error <= EXACT_RECOVERY_TOL).count();
    out.summary.insert("exact_recoveries".into(), exact as f64);
    out.summary.insert("trials".into(), st.trials as f64);
    out.summary.insert("max_relative_error".into(), out.audits.iter().map(|a| a.relative_error).fold(0.0, f64::max));
    out.tables.push(table);
    Ok(out)
}

/// Mean relative error of plain and reweighted analysis against the
/// relative noise level `sqrt(m) sigma / |A f|_2`.
///
/// Within a trial the signal, operator and noise direction are shared by
/// all levels; only the noise scale changes.
pub fn noise_curve(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let st = setup(cfg, Defaults { n: 256, m: 100, redundancy: 4, time_step: 8, trials: 5, rw_iters: 4 })?;
    let dict = tight_gabor(st.n, st.time_step, st.redundancy)?;
    let s = st.s.unwrap_or(st.m / 4).max(1);
    let solver = SolverConfig { real_signal: true, ..st.solver.clone() };
    let jobs: Vec<(usize, usize)> = (0..st.trials).flat_map(|t| (0..st.sigmas.len()).map(move |k| (t, k))).collect();
    let results: Vec<(Vec<f64>, Vec<SolveAudit>)> = jobs
        .into_par_iter()
        .map(|(t, k)| -> Result<_> {
            let ts = derive_seed(st.seed, t as u64);
            let f = radar_pulse_train(st.n, &noise_curve_params(st.n, ts))?.signal;
            let a = SensingOperator::gaussian(st.m, st.n, ts)?;
            let inst = instance(t, &a, &f.samples, st.sigmas[k], ts)?;
            let (_, _, audits) = inst.plain_and_reweighted(&dict, st.rw_iters, s, &solver)?;
            let row = vec![t as f64, st.sigmas[k], audits[0].relative_error, audits[1].relative_error];
            Ok((row, audits))
        })
        .collect::<Result<_>>()?;

    let mut out = ExperimentOutput::new(ExperimentKind::NoiseCurve);
    let mut per_trial = Table::new("noise_curve_trials", &["trial", "sigma_rel", "err_plain", "err_rw"]);
    for (row, audits) in results {
        per_trial.push(row);
        out.audits.extend(audits);
    }
    let mut curve = Table::new("noise_curve", &["sigma_rel", "err_plain", "err_rw"]);
    for &sigma in &st.sigmas {
        let rows: Vec<&Vec<f64>> = per_trial.rows.iter().filter(|r| r[1] == sigma).collect();
        let plain: Vec<f64> = rows.iter().map(|r| r[2]).collect();
        let rw: Vec<f64> = rows.iter().map(|r| r[3]).collect();
        curve.push(vec![sigma, mean(&plain), mean(&rw)]);
    }
    let x = curve.column("sigma_rel").unwrap_or_default();
    for (name, col) in [("plain", "err_plain"), ("rw", "err_rw")] {
        if let Ok((slope, intercept, r2)) = linear_fit(&x, &curve.column(col).unwrap_or_default()) {
            out.summary.insert(format!("slope_{name}"), slope);
            out.summary.insert(format!("intercept_{name}"), intercept);
            out.summary.insert(format!("r_squared_{name}"), r2);
        }
    }
    out.tables.push(curve);
    out.tables.push(per_trial);
    Ok(out)
}

/// `C0` and `C1` for `delta_7s = delta` on a grid of step 0.01 with
/// `c1 = 1/2`, `c2 = 1/10`, `rho = 1/6`; rows where the constants are
/// undefined are left out.
pub fn constants(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut table = Table::new("constants", &["delta", "C0", "C1"]);
    for k in 0..100 {
        let delta = k as f64 / 100.0;
        let rep = theorem_constants_7s(delta, 0.5, 0.1)?;
        if let (true, Some(c0), Some(c1)) = (rep.valid, rep.noise_constant, rep.tail_constant) {
            table.push(vec![delta, c0, c1]);
        }
    }
    let mut out = ExperimentOutput::new(ExperimentKind::Constants);
    out.summary.insert("rows".into(), table.rows.len() as f64);
    out.summary.insert("max_valid_delta".into(), table.rows.last().map_or(f64::NAN, |r| r[0]));
    out.tables.push(table);
    Ok(out)
}

/// Sorted analysis coefficients `|D^* f|` of a radar pulse train in a tight
/// Gabor frame.
pub fn coefficient_decay(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let st = setup(cfg, Defaults { n: 1024, m: 120, redundancy: 8, time_step: 32, trials: 1, rw_iters: 1 })?;
    let dict = tight_gabor(st.n, st.time_step, st.redundancy)?;
    let f = radar_pulse_train(st.n, &radar_params(st.n, derive_seed(st.seed, 0)))?.signal;
    let mut mags: Vec<f64> = dict.analyze(&f.samples).iter().map(|c| c.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let top = mags.first().copied().unwrap_or(0.0);
    let mut table = Table::new("coefficient_decay", &["rank", "magnitude", "relative"]);
    for (k, &v) in mags.iter().enumerate() {
        table.push(vec![(k + 1) as f64, v, if top > 0.0 { v / top } else { 0.0 }]);
    }
    let l1: f64 = mags.iter().sum();
    let s = st.s.unwrap_or(st.m / 4).max(1).min(mags.len());
    let mut out = ExperimentOutput::new(ExperimentKind::CoefficientDecay);
    out.summary.insert("d".into(), mags.len() as f64);
    out.summary.insert("s".into(), s as f64);
    out.summary.insert("tail_l1_fraction".into(), if l1 > 0.0 { mags[s..].iter().sum::<f64>() / l1 } else { 0.0 });
    out.tables.push(table);
    Ok(out)
}

fn sorted_top(x: &[C64], k: usize) -> Vec<f64> {
    let mut m: Vec<f64> = x.iter().map(|v| v.norm()).collect();
    m.sort_by(|a, b| b.total_cmp(a));
    m.truncate(k);
    m
}

/// Noiseless recovery of a compressible signal `f = D x` by analysis,
/// reweighted analysis and synthesis.
///
/// Tables: `method_comparison` per trial and, for trial 0,
/// `method_coefficients` with the largest sorted coefficients of `x`,
/// `D^* f`, `D^* f_hat` for each method and the synthesis `x_hat`.
pub fn method_comparison(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let st = setup(cfg, Defaults { n: 256, m: 100, redundancy: 4, time_step: 8, trials: 5, rw_iters: 3 })?;
    let dict = tight_gabor(st.n, st.time_step, st.redundancy)?;
    let s = st.s.unwrap_or(st.m / 4).max(1);
    type TrialOut = (Vec<f64>, Vec<SolveAudit>, Option<Vec<Vec<f64>>>);
    let results: Vec<TrialOut> = (0..st.trials)
        .into_par_iter()
        .map(|t| -> Result<TrialOut> {
            let ts = derive_seed(st.seed, t as u64);
            let (x, f) = compressible_signal(&dict, COMPARISON_DECAY, CoefficientPhase::Phase, ts)?;
            let a = SensingOperator::gaussian(st.m, st.n, ts)?;
            let inst = instance(t, &a, &f.samples, 0.0, ts)?;
            let (plain, rw, audits) = inst.plain_and_reweighted(&dict, st.rw_iters, s, &st.solver)?;
            let syn = l1_synthesis(&a, &dict, &inst.y, 0.0, &st.solver)?;
            let err_syn = metrics(&syn.f_hat.samples, &f.samples)?.relative_error;
            let row = vec![
                t as f64,
                audits[0].relative_error,
                audits[1].relative_error,
                err_syn,
                f64::from(u8::from(syn.converged)),
            ];
            let coeffs = (t == 0).then(|| {
                let k = TOP_COEFFICIENTS.min(dict.d());
                vec![
                    sorted_top(&x, k),
                    sorted_top(&dict.analyze(&f.samples), k),
                    sorted_top(&dict.analyze(&plain.f_hat.samples), k),
                    sorted_top(&dict.analyze(&rw.f_hat.samples), k),
                    sorted_top(syn.coefficients.as_deref().unwrap_or_default(), k),
                    sorted_top(&dict.analyze(&syn.f_hat.samples), k),
                ]
            });
            Ok((row, audits, coeffs))
        })
        .collect::<Result<_>>()?;

    let mut out = ExperimentOutput::new(ExperimentKind::MethodComparison);
    let mut table =
        Table::new("method_comparison", &["trial", "err_analysis", "err_rw", "err_synthesis", "synthesis_converged"]);
    let mut coeffs = None;
    for (row, audits, c) in results {
        table.push(row);
        out.audits.extend(audits);
        if c.is_some() {
            coeffs = c;
        }
    }
    for col in ["err_analysis", "err_rw", "err_synthesis"] {
        out.summary.insert(format!("mean_{col}"), mean(&table.column(col).unwrap_or_default()));
    }
    out.tables.push(table);
    if let Some(cols) = coeffs {
        let mut t = Table::new(
            "method_coefficients",
            &["rank", "x", "analysis_of_f", "analysis", "reweighted", "synthesis_x", "synthesis_analysis"],
        );
        for k in 0..cols[0].len() {
            let mut row = vec![(k + 1) as f64];
            row.extend(cols.iter().map(|c| c[k]));
            t.push(row);
        }
        out.tables.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: ExperimentKind, text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(&format!("experiment = {kind}\n{text}")).unwrap()
    }

    #[test]
    fn line_fit_recovers_an_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v + 0.25).collect();
        let (slope, intercept, r2) = linear_fit(&x, &y).unwrap();
        assert!((slope - 0.5).abs() < 1e-12 && (intercept - 0.25).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(linear_fit(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn constants_grid_contains_the_quarter_row() {
        let out = constants(&cfg(ExperimentKind::Constants, "")).unwrap();
        let t = out.table("constants").unwrap();
        let row = t.rows.iter().find(|r| r[0] == 0.25).unwrap();
        assert!((row[1] - 10.23).abs() < 0.05 && (row[2] - 7.33).abs() < 0.01);
        assert!(t.to_csv().starts_with("# delta,C0,C1\n0.0,"));
    }

    #[test]
    fn scaled_pulses_match_desk_scale_at_1024() {
        assert_eq!(radar_params(1024, 3), PulseParams::desk_scale(3));
        let p = noise_curve_params(256, 0);
        assert_eq!((p.num_pulses, p.duration, p.rise_fall), (2, 48, 16));
    }

    #[test]
    fn small_dirac_comb_recovers_and_is_deterministic() {
        let c = cfg(ExperimentKind::DiracComb, "n = 16\nm = 12\ntrials = 2\nseed = 5\n");
        let a = dirac_comb_recovery(&c).unwrap();
        let b = dirac_comb_recovery(&c).unwrap();
        assert_eq!(a.tables, b.tables);
        assert_eq!(a.audits.len(), 2);
        assert!(a.audits.iter().all(|x| x.tube_holds()));
    }

    #[test]
    fn dirac_comb_rejects_other_redundancy() {
        assert!(dirac_comb_recovery(&cfg(ExperimentKind::DiracComb, "oversampling = 3\n")).is_err());
    }

    #[test]
    fn noise_curve_at_zero_noise_matches_a_noiseless_solve() {
        let c = cfg(ExperimentKind::NoiseCurve, "n = 64\nm = 40\noversampling = 2\ntime_step = 4\nsigmas = 0\ntrials = 1\nrw_iters = 2\n");
        let out = noise_curve(&c).unwrap();
        let err = out.table("noise_curve").unwrap().rows[0][1];
        let ts = derive_seed(0, 0);
        let dict = tight_gabor(64, 4, 2).unwrap();
        let f = radar_pulse_train(64, &noise_curve_params(64, ts)).unwrap().signal;
        let a = SensingOperator::gaussian(40, 64, ts).unwrap();
        let y = a.apply(&f.samples);
        let solver = SolverConfig { real_signal: true, over_relaxation: OVER_RELAXATION, ..Default::default() };
        let rep = l1_analysis(&a, &dict, &y, 0.0, &solver).unwrap();
        let direct = metrics(&rep.f_hat.samples, &f.samples).unwrap().relative_error;
        assert!((err - direct).abs() < 1e-9, "{err} vs {direct}");
    }

    #[test]
    fn writes_tables_audit_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(ExperimentKind::DiracComb, "n = 16\nm = 12\ntrials = 1\n");
        let paths = dirac_comb_recovery(&c).unwrap().write(dir.path()).unwrap();
        let names: Vec<String> = paths.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["dirac_comb.csv", "dirac_comb_audit.csv", "dirac_comb_summary.json"]);
    }
}
