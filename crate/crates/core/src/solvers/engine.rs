//! First-order primal-dual splitting for
//!
//! ```text
//! minimize  sum_b |W_b K_b z|_1  subject to  z in C
//! ```
//!
//! where `C = {z : |B z - y|_2 <= eps}`, optionally intersected with the real
//! vectors. The constraint enters through its exact projection and each
//! weighted l1 term through the prox of its conjugate, a clamp of the dual
//! variable to `|p_i| <= w_i`. Iterates (with relaxation `rho`):
//!
//! ```text
//! z~ = P_C(z - tau K^* p)
//! p~ = clamp_W(p + sigma K (2 z~ - z))
//! (z, p) <- (z, p) + rho ((z~, p~) - (z, p))
//! ```
//!
//! Block operators are divided by their estimated norms, and `z` is measured
//! in units of the minimum-norm feasible point. Step sizes keep
//! `tau sigma L^2 = 1` with `L` an inflated estimate of the stacked norm;
//! their ratio is rebalanced from the primal and dual residuals with a
//! geometrically decaying adaptation rate.

use crate::linop::{vec, LinearOperator, C64};

use super::fidelity::FidelitySet;
use super::norm::operator_norm_estimate;
use super::SolverConfig;

/// Safety inflation applied to the power-iteration norm before choosing steps.
const NORM_INFLATION: f64 = 1.01;
/// Iterations between convergence checks; changes are measured across it.
const WINDOW: usize = 10;
/// Cap on the geometric tail factor `q / (1 - q)` applied to window changes.
const MAX_TAIL_FACTOR: f64 = 10.0;
/// Dual drift allowed per unit of `tol_rel`, relative to `|K z|_1`.
const DUAL_DRIFT_FACTOR: f64 = 50.0;

const ADAPT_ALPHA0: f64 = 0.5;
const ADAPT_DECAY: f64 = 0.95;
const ADAPT_RATIO: f64 = 1.5;

pub(crate) struct L1Block<'a> {
    pub op: Box<dyn LinearOperator + 'a>,
    pub weights: Option<Vec<f64>>,
}

pub(crate) struct Problem<'a> {
    pub blocks: Vec<L1Block<'a>>,
    pub set: FidelitySet,
    pub real: bool,
    /// Absolute slack on `|B z - y| <= eps`.
    pub tol_feas: f64,
}

/// A previous solution to start from. The dual part is clamped to the new
/// weights.
pub(crate) struct WarmStart<'a> {
    pub z: &'a [C64],
    pub dual: Option<&'a [Vec<C64>]>,
}

pub(crate) struct Solution {
    pub z: Vec<C64>,
    /// Final dual variables, one per block, in normalized units.
    pub dual: Vec<Vec<C64>>,
    pub iterations: usize,
    pub converged: bool,
    /// Per-iteration (objective, residual).
    pub history: Vec<(f64, f64)>,
}

/// Block operator divided by a positive constant.
struct Normalized<'a> {
    op: &'a dyn LinearOperator,
    inv_norm: f64,
}

impl LinearOperator for Normalized<'_> {
    fn rows(&self) -> usize {
        self.op.rows()
    }
    fn cols(&self) -> usize {
        self.op.cols()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        vec::scale(&self.op.apply(x), self.inv_norm)
    }
    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        vec::scale(&self.op.adjoint(y), self.inv_norm)
    }
}

/// All blocks stacked into one operator, used only for the norm estimate.
struct Stacked<'a> {
    blocks: &'a [Normalized<'a>],
}

impl LinearOperator for Stacked<'_> {
    fn rows(&self) -> usize {
        self.blocks.iter().map(|b| b.rows()).sum()
    }
    fn cols(&self) -> usize {
        self.blocks[0].cols()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.blocks.iter().flat_map(|b| b.apply(x)).collect()
    }
    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        let mut out = vec::zeros(self.cols());
        let mut offset = 0;
        for b in self.blocks {
            let part = b.adjoint(&y[offset..offset + b.rows()]);
            out.iter_mut().zip(&part).for_each(|(o, v)| *o += v);
            offset += b.rows();
        }
        out
    }
}

fn clamp_moduli(q: &mut [C64], w: &[f64]) {
    q.iter_mut().zip(w).for_each(|(v, &wi)| {
        let mag = v.norm_sqr().sqrt();
        if mag > wi {
            *v *= wi / mag;
        }
    });
}

fn weighted_l1(v: &[C64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(x, wi)| wi * x.norm_sqr().sqrt()).sum()
}

pub(crate) fn solve(problem: Problem<'_>, cfg: &SolverConfig, warm_start: Option<&WarmStart<'_>>) -> Solution {
    let dim = problem.blocks[0].op.cols();
    debug_assert!(problem.blocks.iter().all(|b| b.op.cols() == dim));
    let set = &problem.set;
    let project = |v: Vec<C64>, scale: f64| -> Vec<C64> {
        let v = if problem.real { v.into_iter().map(|z| C64::new(z.re, 0.0)).collect() } else { v };
        let mut p = vec::scale(&set.project(&vec::scale(&v, scale)), 1.0 / scale);
        if problem.real {
            p.iter_mut().for_each(|z| z.im = 0.0);
        }
        p
    };

    let least_norm = project(vec::zeros(dim), 1.0);
    let scale = vec::norm2(&least_norm);
    if scale == 0.0 {
        // The origin is feasible and the objective is a norm.
        let resid = set.residual(&least_norm);
        return Solution {
            dual: problem.blocks.iter().map(|b| vec::zeros(b.op.rows())).collect(),
            z: least_norm,
            iterations: 0,
            converged: resid <= set.eps() + problem.tol_feas,
            history: Vec::new(),
        };
    }

    let norms: Vec<f64> = problem
        .blocks
        .iter()
        .map(|b| operator_norm_estimate(b.op.as_ref(), cfg.power_iters, cfg.seed).max(f64::MIN_POSITIVE))
        .collect();
    let normalized: Vec<Normalized<'_>> = problem
        .blocks
        .iter()
        .zip(&norms)
        .map(|(b, &nrm)| Normalized { op: b.op.as_ref(), inv_norm: 1.0 / nrm })
        .collect();
    let weights: Vec<Vec<f64>> = problem
        .blocks
        .iter()
        .zip(&norms)
        .map(|(b, &nrm)| match &b.weights {
            Some(w) => w.iter().map(|wi| wi * nrm).collect(),
            None => vec![nrm; b.op.rows()],
        })
        .collect();

    let stacked_norm = operator_norm_estimate(&Stacked { blocks: &normalized }, cfg.power_iters, cfg.seed);
    let lipschitz = NORM_INFLATION * stacked_norm.max(f64::MIN_POSITIVE);
    let mut tau = 1.0 / lipschitz;
    let mut sigma = 1.0 / lipschitz;
    let mut alpha = ADAPT_ALPHA0;
    let rho = cfg.over_relaxation;

    let mut z = match warm_start {
        Some(w) => project(vec::scale(w.z, 1.0 / scale), scale),
        None => vec::scale(&least_norm, 1.0 / scale),
    };
    let mut kz: Vec<Vec<C64>> = normalized.iter().map(|b| b.apply(&z)).collect();
    let mut p: Vec<Vec<C64>> = match warm_start.and_then(|w| w.dual) {
        Some(dual) => dual
            .iter()
            .zip(&weights)
            .map(|(d, w)| {
                let mut d = d.clone();
                clamp_moduli(&mut d, w);
                d
            })
            .collect(),
        None => normalized.iter().map(|b| vec::zeros(b.rows())).collect(),
    };
    let mut ktp = vec::zeros(dim);
    for (b, pb) in normalized.iter().zip(&p) {
        ktp.iter_mut().zip(b.adjoint(pb)).for_each(|(o, v)| *o += v);
    }

    let objective = |kz: &[Vec<C64>]| -> f64 { kz.iter().zip(&weights).map(|(v, w)| weighted_l1(v, w)).sum() };
    let tol_feas = problem.tol_feas;

    let mut history = Vec::new();
    let mut snapshot: Option<(Vec<C64>, f64)> = None;
    let mut prev_change: Option<(f64, f64)> = None;
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=cfg.max_iter {
        iterations = k;
        let step: Vec<C64> = z.iter().zip(&ktp).map(|(a, b)| a - b * tau).collect();
        let z_new = project(step, scale);
        let kz_new: Vec<Vec<C64>> = normalized.iter().map(|b| b.apply(&z_new)).collect();
        let p_new: Vec<Vec<C64>> = (0..normalized.len())
            .map(|i| {
                let mut q: Vec<C64> = p[i]
                    .iter()
                    .zip(&kz_new[i])
                    .zip(&kz[i])
                    .map(|((pi, a), b)| pi + (a * 2.0 - b) * sigma)
                    .collect();
                clamp_moduli(&mut q, &weights[i]);
                q
            })
            .collect();
        let mut ktp_new = vec::zeros(dim);
        for (b, pb) in normalized.iter().zip(&p_new) {
            ktp_new.iter_mut().zip(b.adjoint(pb)).for_each(|(o, v)| *o += v);
        }

        if cfg.adaptive_steps && alpha > 1e-12 {
            let primal_res: f64 = z
                .iter()
                .zip(&z_new)
                .zip(ktp.iter().zip(&ktp_new))
                .map(|((a, b), (c, d))| ((a - b) / tau - (c - d)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let dual_res: f64 = (0..normalized.len())
                .map(|i| {
                    p[i].iter()
                        .zip(&p_new[i])
                        .zip(kz[i].iter().zip(&kz_new[i]))
                        .map(|((a, b), (c, d))| ((a - b) / sigma - (c - d)).norm_sqr())
                        .sum::<f64>()
                })
                .sum::<f64>()
                .sqrt();
            if primal_res > ADAPT_RATIO * dual_res {
                tau /= 1.0 - alpha;
                sigma *= 1.0 - alpha;
                alpha *= ADAPT_DECAY;
            } else if dual_res > ADAPT_RATIO * primal_res {
                tau *= 1.0 - alpha;
                sigma /= 1.0 - alpha;
                alpha *= ADAPT_DECAY;
            }
        }

        // One-step fixed-point residual; relaxed iterates can oscillate with
        // small net change across a window.
        let step_change = if k % WINDOW == 0 { vec::dist2(&z_new, &z) } else { 0.0 };
        // Dual drift `|p~ - p|_1 / sigma` is the size of `K z` on unclamped
        // coordinates, which vanishes only at a saddle point; the primal can
        // stall while it is still large.
        let dual_stable = k % WINDOW != 0 || {
            let drift: f64 = p.iter().zip(&p_new).map(|(a, b)| vec::norm1(&vec::sub(a, b))).sum::<f64>() / sigma;
            let kz_l1: f64 = kz_new.iter().map(|v| vec::norm1(v)).sum();
            drift <= DUAL_DRIFT_FACTOR * cfg.tol_rel * kz_l1
        };
        if rho == 1.0 {
            z = z_new;
            kz = kz_new;
            p = p_new;
            ktp = ktp_new;
        } else {
            let relax = |old: &mut Vec<C64>, new: &[C64]| {
                old.iter_mut().zip(new).for_each(|(o, n)| *o += (n - *o) * rho);
            };
            relax(&mut z, &z_new);
            relax(&mut ktp, &ktp_new);
            for i in 0..normalized.len() {
                relax(&mut kz[i], &kz_new[i]);
                relax(&mut p[i], &p_new[i]);
            }
        }

        let obj = objective(&kz);
        if cfg.history {
            history.push((obj * scale, set.residual(&vec::scale(&z, scale))));
        }

        if k % WINDOW == 0 {
            if let Some((z_old, obj_old)) = &snapshot {
                let dz = vec::dist2(&z, z_old);
                let dobj = (obj - obj_old).abs();
                // Under linear convergence at rate q per window the distance
                // still to go is about change * q / (1 - q).
                let tail = |now: f64, before: Option<f64>| -> f64 {
                    match before {
                        Some(b) if b > 0.0 && now < b => {
                            let q = now / b;
                            (q / (1.0 - q)).clamp(1.0, MAX_TAIL_FACTOR)
                        }
                        Some(b) if b == 0.0 && now == 0.0 => 1.0,
                        _ => MAX_TAIL_FACTOR,
                    }
                };
                let obj_stable =
                    dobj * tail(dobj, prev_change.map(|c| c.1)) <= cfg.tol_rel * obj.abs().max(f64::MIN_POSITIVE);
                let z_norm = vec::norm2(&z);
                let iterate_stable = dz * tail(dz, prev_change.map(|c| c.0)) <= cfg.tol_rel * z_norm
                    && step_change * WINDOW as f64 <= cfg.tol_rel * z_norm;
                prev_change = Some((dz, dobj));
                if obj_stable && iterate_stable && dual_stable {
                    let feasible = set.residual(&vec::scale(&z, scale)) <= set.eps() + tol_feas;
                    if feasible {
                        converged = true;
                        break;
                    }
                }
            }
            snapshot = Some((z.clone(), obj));
        }
    }

    Solution { z: vec::scale(&z, scale), dual: p, iterations, converged, history }
}
