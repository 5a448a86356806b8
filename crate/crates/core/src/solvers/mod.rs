//! Convex recovery programs solved by a shared primal-dual engine.
//!
//! * [`l1_analysis`]: `min |D^* f|_1  s.t. |A f - y|_2 <= eps`
//! * [`reweighted_l1_analysis`]: a sequence of weighted analysis problems
//! * [`l1_synthesis`]: `min |x|_1  s.t. |A D x - y|_2 <= eps`, `f = D x`
//! * [`split_analysis`]: `min |D1^* f1|_1 + |D2^* f2|_1  s.t. |A (f1 + f2) - y|_2 <= eps`
//!
//! Every solve returns a [`RecoveryReport`]; a solve that does not meet the
//! stopping rule within `max_iter` is reported with `converged = false`.

mod audit;
mod engine;
mod fidelity;
mod norm;
mod programs;
mod prox;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::C64;
use crate::signals::Signal;

pub use audit::{audit, Diagnostics};
pub use norm::operator_norm_estimate;
pub use programs::{l1_analysis, l1_synthesis, reweighted_l1_analysis, reweighted_l1_analysis_with_passes, split_analysis, weighted_l1_analysis, Reweighting};
pub use prox::{project_l2_ball, soft_threshold};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Relative change of objective, residual and iterate over a 10-iteration
    /// window below which the solve may stop.
    pub tol_rel: f64,
    /// Absolute slack on `|A f - y| <= eps`; `None` means `1e-6 |y|`.
    pub tol_feas: Option<f64>,
    pub power_iters: usize,
    /// Relaxation factor in `[1, 2)`; 1 is the plain iteration.
    pub over_relaxation: f64,
    pub history: bool,
    pub seed: u64,
    /// Restrict the recovered signal to real values.
    pub real_signal: bool,
    /// Rebalance primal and dual step sizes from their residuals.
    pub adaptive_steps: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            tol_rel: 1e-6,
            tol_feas: None,
            power_iters: 500,
            over_relaxation: 1.8,
            history: false,
            seed: 0,
            real_signal: false,
            adaptive_steps: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if !(self.tol_rel > 0.0) {
            return Err(Error::InvalidParameter(format!("tol_rel must be positive, got {}", self.tol_rel)));
        }
        if !(1.0..2.0).contains(&self.over_relaxation) {
            return Err(Error::InvalidParameter(format!(
                "over_relaxation must lie in [1, 2), got {}",
                self.over_relaxation
            )));
        }
        if let Some(t) = self.tol_feas {
            if !(t >= 0.0) {
                return Err(Error::InvalidParameter(format!("tol_feas must be non-negative, got {t}")));
            }
        }
        Ok(())
    }

    pub fn feasibility_slack(&self, y_norm: f64) -> f64 {
        self.tol_feas.unwrap_or(1e-6 * y_norm)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analysis,
    Reweighted,
    Synthesis,
    Split,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analysis" => Ok(Method::Analysis),
            "reweighted" => Ok(Method::Reweighted),
            "synthesis" => Ok(Method::Synthesis),
            "split" => Ok(Method::Split),
            other => Err(Error::Parse(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryReport {
    pub method: Method,
    pub f_hat: Signal,
    /// `|D^* f_hat|_1` for the analysis programs, `|x_hat|_1` for synthesis,
    /// `|D1^* f1|_1 + |D2^* f2|_1` for split analysis.
    pub objective: f64,
    /// `|A f_hat - y|_2`.
    pub feasibility: f64,
    pub eps: f64,
    pub tol_feas: f64,
    pub iterations: usize,
    pub converged: bool,
    pub n: usize,
    pub d: usize,
    pub m: usize,
    /// Synthesis coefficients `x_hat`.
    pub coefficients: Option<Vec<C64>>,
    /// Split-analysis components `(f1, f2)`.
    pub components: Option<(Vec<C64>, Vec<C64>)>,
    /// Weights of the final reweighted solve.
    pub weights: Option<Vec<f64>>,
    pub diagnostics: Option<Diagnostics>,
    pub relative_error: Option<f64>,
    pub history: Option<Vec<(f64, f64)>>,
}

/// The JSON form of a report, with a fixed field order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub method: Method,
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub eps: f64,
    pub objective: f64,
    pub feasibility: f64,
    pub iterations: usize,
    pub converged: bool,
    pub cone_slack: Option<f64>,
    pub tube_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub relative_error: Option<f64>,
}

impl RecoveryReport {
    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            method: self.method,
            n: self.n,
            d: self.d,
            m: self.m,
            eps: self.eps,
            objective: self.objective,
            feasibility: self.feasibility,
            iterations: self.iterations,
            converged: self.converged,
            cone_slack: self.diagnostics.as_ref().map(|d| d.cone_slack),
            tube_norm: self.diagnostics.as_ref().map(|d| d.tube_norm),
            relative_error: self.relative_error,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary())?)
    }

    /// Per-iteration `objective,feasibility` as CSV.
    pub fn history_csv(&self) -> Option<String> {
        self.history.as_ref().map(|h| {
            let mut out = String::from("# iteration,objective,feasibility\n");
            for (i, (o, f)) in h.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", i + 1, o, f));
            }
            out
        })
    }
}

#[cfg(test)]
mod tests;
