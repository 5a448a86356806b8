use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{vec, Adjoint, Composed, Identity, LinearOperator, C64};
use crate::signals::Signal;

use super::engine::{self, L1Block, Problem, WarmStart};
use super::fidelity::FidelitySet;
use super::{Method, RecoveryReport, SolverConfig};

/// Settings for iteratively reweighted analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reweighting {
    /// Total number of solves; 1 is plain l1-analysis.
    pub iters: usize,
    /// Sparsity level whose coefficient sets the weight offset; `None` means `m / 4`.
    pub sparsity: Option<usize>,
}

impl Default for Reweighting {
    fn default() -> Self {
        Self { iters: 4, sparsity: None }
    }
}

fn check_inputs(a: &dyn LinearOperator, n: usize, y: &[C64], eps: f64, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if a.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "sensing operator acts on dimension {} but the dictionary has {} rows",
            a.cols(),
            n
        )));
    }
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "measurement vector has length {} but the sensing operator has {} rows",
            y.len(),
            a.rows()
        )));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("eps must be finite and non-negative, got {eps}")));
    }
    if y.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::InvalidParameter("measurements contain non-finite values".into()));
    }
    Ok(())
}

fn weighted_l1(c: &[C64], w: Option<&[f64]>) -> f64 {
    match w {
        Some(w) => c.iter().zip(w).map(|(v, wi)| wi * v.norm()).sum(),
        None => vec::norm1(c),
    }
}

#[allow(clippy::too_many_arguments)]
fn report(
    method: Method,
    f_hat: Vec<C64>,
    objective: f64,
    a: &dyn LinearOperator,
    y: &[C64],
    eps: f64,
    tol_feas: f64,
    d: usize,
    sol_iterations: usize,
    converged: bool,
    history: Vec<(f64, f64)>,
    cfg: &SolverConfig,
) -> RecoveryReport {
    let feasibility = vec::dist2(&a.apply(&f_hat), y);
    // A solve that ends outside the tube is never reported as converged.
    let converged = converged && feasibility <= eps + tol_feas;
    RecoveryReport {
        method,
        n: f_hat.len(),
        f_hat: Signal::new(f_hat, format!("{method:?}").to_lowercase()),
        objective,
        feasibility,
        eps,
        tol_feas,
        iterations: sol_iterations,
        converged,
        d,
        m: a.rows(),
        coefficients: None,
        components: None,
        weights: None,
        diagnostics: None,
        relative_error: None,
        history: cfg.history.then_some(history),
    }
}

/// Solves `min |D^* f|_1  s.t. |A f - y|_2 <= eps`.
pub fn l1_analysis(
    a: &dyn LinearOperator,
    d: &dyn LinearOperator,
    y: &[C64],
    eps: f64,
    cfg: &SolverConfig,
) -> Result<RecoveryReport> {
    weighted_l1_analysis(a, d, y, eps, None, cfg, None)
}

/// Solves `min sum_i w_i |(D^* f)_i|  s.t. |A f - y|_2 <= eps`.
///
/// `objective` in the report is the unweighted `|D^* f_hat|_1`.
pub fn weighted_l1_analysis(
    a: &dyn LinearOperator,
    d: &dyn LinearOperator,
    y: &[C64],
    eps: f64,
    weights: Option<&[f64]>,
    cfg: &SolverConfig,
    warm_start: Option<&[C64]>,
) -> Result<RecoveryReport> {
    let warm = warm_start.map(|z| WarmStart { z, dual: None });
    Ok(weighted_analysis_with_dual(a, d, y, eps, weights, cfg, warm.as_ref())?.0)
}

fn weighted_analysis_with_dual(
    a: &dyn LinearOperator,
    d: &dyn LinearOperator,
    y: &[C64],
    eps: f64,
    weights: Option<&[f64]>,
    cfg: &SolverConfig,
    warm: Option<&WarmStart<'_>>,
) -> Result<(RecoveryReport, Vec<Vec<C64>>)> {
    check_inputs(a, d.rows(), y, eps, cfg)?;
    if let Some(w) = weights {
        if w.len() != d.cols() {
            return Err(Error::DimensionMismatch(format!("{} weights for {} coefficients", w.len(), d.cols())));
        }
        if w.iter().any(|&wi| !(wi > 0.0) || !wi.is_finite()) {
            return Err(Error::InvalidParameter("weights must be positive and finite".into()));
        }
    }
    if let Some(w) = warm {
        if w.z.len() != d.rows() {
            return Err(Error::DimensionMismatch(format!("warm start of length {} for n = {}", w.z.len(), d.rows())));
        }
    }
    let tol_feas = cfg.feasibility_slack(vec::norm2(y));
    let problem = Problem {
        blocks: vec![L1Block { op: Box::new(Adjoint(d)), weights: weights.map(<[f64]>::to_vec) }],
        set: FidelitySet::new(a, y, eps)?,
        real: cfg.real_signal,
        tol_feas,
    };
    let sol = engine::solve(problem, cfg, warm);
    let objective = vec::norm1(&d.adjoint(&sol.z));
    let rep = report(
        Method::Analysis,
        sol.z,
        objective,
        a,
        y,
        eps,
        tol_feas,
        d.cols(),
        sol.iterations,
        sol.converged,
        sol.history,
        cfg,
    );
    Ok((rep, sol.dual))
}

/// Weights `1 / (|c_i| + delta)` with `delta` a tenth of the `s`-th largest
/// modulus, floored at `1e-8` of the largest. `None` if `c` vanishes.
pub(crate) fn reweight(c: &[C64], s: usize) -> Option<Vec<f64>> {
    let mut mags: Vec<f64> = c.iter().map(|v| v.norm()).collect();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    let s = s.clamp(1, mags.len());
    let unsorted = mags.clone();
    mags.sort_by(|x, y| y.total_cmp(x));
    let delta = (0.1 * mags[s - 1]).max(1e-8 * max);
    Some(unsorted.iter().map(|m| 1.0 / (m + delta)).collect())
}

/// Iteratively reweighted l1-analysis. Each solve after the first is warm
/// started from the previous primal and dual iterates, with weights derived
/// from the previous analysis coefficients.
pub fn reweighted_l1_analysis(
    a: &dyn LinearOperator,
    d: &dyn LinearOperator,
    y: &[C64],
    eps: f64,
    rw: &Reweighting,
    cfg: &SolverConfig,
) -> Result<RecoveryReport> {
    Ok(reweighted_l1_analysis_with_passes(a, d, y, eps, rw, cfg)?.0)
}

/// [`reweighted_l1_analysis`] together with the report of every individual
/// solve. The first pass is plain l1-analysis.
pub fn reweighted_l1_analysis_with_passes(
    a: &dyn LinearOperator,
    d: &dyn LinearOperator,
    y: &[C64],
    eps: f64,
    rw: &Reweighting,
    cfg: &SolverConfig,
) -> Result<(RecoveryReport, Vec<RecoveryReport>)> {
    if rw.iters == 0 {
        return Err(Error::InvalidParameter("reweighting needs at least one solve".into()));
    }
    let s = rw.sparsity.unwrap_or(a.rows() / 4).max(1);
    let (mut current, mut dual) = weighted_analysis_with_dual(a, d, y, eps, None, cfg, None)?;
    let mut passes = vec![current.clone()];
    let mut iterations = current.iterations;
    let mut all_converged = current.converged;
    let mut history = current.history.take().unwrap_or_default();
    let mut weights = None;
    for _ in 1..rw.iters {
        let Some(w) = reweight(&d.adjoint(&current.f_hat.samples), s) else { break };
        // Only ratios of weights matter; normalizing keeps the dual scale sane.
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let normalized: Vec<f64> = w.iter().map(|wi| wi / mean).collect();
        let z = current.f_hat.samples.clone();
        let warm = WarmStart { z: &z, dual: Some(&dual) };
        (current, dual) = weighted_analysis_with_dual(a, d, y, eps, Some(&normalized), cfg, Some(&warm))?;
        current.weights = Some(w.clone());
        passes.push(current.clone());
        iterations += current.iterations;
        all_converged &= current.converged;
        history.extend(current.history.take().unwrap_or_default());
        weights = Some(w);
    }
    current.method = Method::Reweighted;
    current.f_hat.label = "reweighted".into();
    current.iterations = iterations;
    current.converged = all_converged;
    current.weights = weights;
    current.history = cfg.history.then_some(history);
    Ok((current, passes))
}

/// Solves `min |x|_1  s.t. |A D x - y|_2 <= eps` and returns `f_hat = D x_hat`.
///
/// With `real_signal` the coefficients, not the signal, are kept real.
pub fn l1_synthesis(
    a: &dyn LinearOperator,
    d: &dyn LinearOperator,
    y: &[C64],
    eps: f64,
    cfg: &SolverConfig,
) -> Result<RecoveryReport> {
    check_inputs(a, d.rows(), y, eps, cfg)?;
    let tol_feas = cfg.feasibility_slack(vec::norm2(y));
    let problem = Problem {
        blocks: vec![L1Block { op: Box::new(Identity(d.cols())), weights: None }],
        set: FidelitySet::new(&Composed { outer: a, inner: d }, y, eps)?,
        real: cfg.real_signal,
        tol_feas,
    };
    let sol = engine::solve(problem, cfg, None);
    let x = sol.z;
    let f_hat = d.apply(&x);
    let objective = weighted_l1(&x, None);
    let mut rep = report(
        Method::Synthesis,
        f_hat,
        objective,
        a,
        y,
        eps,
        tol_feas,
        d.cols(),
        sol.iterations,
        sol.converged,
        sol.history,
        cfg,
    );
    rep.coefficients = Some(x);
    Ok(rep)
}

/// `op` applied to the slice `[offset, offset + op.cols())` of a longer vector.
struct Restrict<'a> {
    op: &'a dyn LinearOperator,
    offset: usize,
    total: usize,
}

impl LinearOperator for Restrict<'_> {
    fn rows(&self) -> usize {
        self.op.rows()
    }
    fn cols(&self) -> usize {
        self.total
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.op.apply(&x[self.offset..self.offset + self.op.cols()])
    }
    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        let mut out = vec::zeros(self.total);
        out[self.offset..self.offset + self.op.cols()].copy_from_slice(&self.op.adjoint(y));
        out
    }
}

/// `op (x1 + x2)` for `x = (x1, x2)`.
struct SumOfHalves<'a> {
    op: &'a dyn LinearOperator,
}

impl LinearOperator for SumOfHalves<'_> {
    fn rows(&self) -> usize {
        self.op.rows()
    }
    fn cols(&self) -> usize {
        2 * self.op.cols()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.op.cols();
        self.op.apply(&vec::add(&x[..n], &x[n..]))
    }
    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        let half = self.op.adjoint(y);
        half.iter().chain(&half).copied().collect()
    }
}

/// Solves `min |D1^* f1|_1 + |D2^* f2|_1  s.t. |A (f1 + f2) - y|_2 <= eps`.
///
/// Both dictionaries must have `n` rows; they may have different atom counts.
pub fn split_analysis(
    a: &dyn LinearOperator,
    d1: &dyn LinearOperator,
    d2: &dyn LinearOperator,
    y: &[C64],
    eps: f64,
    cfg: &SolverConfig,
) -> Result<RecoveryReport> {
    if d1.rows() != d2.rows() {
        return Err(Error::DimensionMismatch(format!(
            "split dictionaries act on dimensions {} and {}",
            d1.rows(),
            d2.rows()
        )));
    }
    let n = d1.rows();
    check_inputs(a, n, y, eps, cfg)?;
    let tol_feas = cfg.feasibility_slack(vec::norm2(y));
    let d1_adj = Adjoint(d1);
    let d2_adj = Adjoint(d2);
    let problem = Problem {
        blocks: vec![
            L1Block { op: Box::new(Restrict { op: &d1_adj, offset: 0, total: 2 * n }), weights: None },
            L1Block { op: Box::new(Restrict { op: &d2_adj, offset: n, total: 2 * n }), weights: None },
        ],
        set: FidelitySet::new(&SumOfHalves { op: a }, y, eps)?,
        real: cfg.real_signal,
        tol_feas,
    };
    let sol = engine::solve(problem, cfg, None);
    let f1 = sol.z[..n].to_vec();
    let f2 = sol.z[n..].to_vec();
    let objective = vec::norm1(&d1.adjoint(&f1)) + vec::norm1(&d2.adjoint(&f2));
    let mut rep = report(
        Method::Split,
        vec::add(&f1, &f2),
        objective,
        a,
        y,
        eps,
        tol_feas,
        d1.cols() + d2.cols(),
        sol.iterations,
        sol.converged,
        sol.history,
        cfg,
    );
    rep.components = Some((f1, f2));
    Ok(rep)
}
