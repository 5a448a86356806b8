//! Post-hoc checks of the inequalities behind the error bound, evaluated on
//! a recovered `f_hat` against the known truth `f`.
//!
//! With `h = f - f_hat`, `T0` the `s` largest analysis coefficients of `f`,
//! and `T1, T2, ...` consecutive blocks of size `M` of the remaining indices
//! in decreasing order of `|D^* h|`:
//!
//! * cone: `|D^*_{T0^c} h|_1 <= 2 |D^*_{T0^c} f|_1 + |D^*_{T0} h|_1`
//! * tube: `|A h|_2 <= 2 eps`
//! * tail: `sum_{j >= 2} |D^*_{Tj} h|_2 <= sqrt(rho) (|D^*_{T0} h|_2 + eta)`
//!   with `rho = s / M` and `eta = 2 |D^*_{T0^c} f|_1 / sqrt(s)`.
//!
//! The cone condition holds exactly for an exact minimizer of
//! l1-analysis; `cone_slack` measures how far a numerical solution misses
//! it. The tail bound follows from the cone condition up to
//! `cone_slack / sqrt(M)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{vec, LinearOperator, C64};
use crate::signals::top_s_support;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub s: usize,
    pub block_size: usize,
    /// `max(0, lhs - rhs)` of the cone condition.
    pub cone_slack: f64,
    pub cone_lhs: f64,
    pub cone_rhs: f64,
    /// `|A (f - f_hat)|_2`.
    pub tube_norm: f64,
    pub tail_lhs: f64,
    pub tail_rhs: f64,
    /// `tail_lhs / tail_rhs`; 0 when both vanish.
    pub tail_ratio: f64,
}

impl Diagnostics {
    pub fn tube_holds(&self, eps: f64, tol_feas: f64) -> bool {
        self.tube_norm <= 2.0 * eps + 2.0 * tol_feas
    }

    /// The tail bound, relaxed by the cone slack it inherits.
    pub fn tail_holds(&self) -> bool {
        let slack = self.cone_slack / (self.block_size as f64).sqrt();
        self.tail_lhs <= self.tail_rhs + slack + 1e-12 * self.tail_rhs.max(self.tail_lhs)
    }
}

/// Audits `f_hat` against the truth `f` at sparsity `s` with tail blocks of
/// size `6 s`.
pub fn audit(a: &dyn LinearOperator, d: &dyn LinearOperator, f: &[C64], f_hat: &[C64], s: usize) -> Result<Diagnostics> {
    audit_with_blocks(a, d, f, f_hat, s, 6 * s)
}

pub fn audit_with_blocks(
    a: &dyn LinearOperator,
    d: &dyn LinearOperator,
    f: &[C64],
    f_hat: &[C64],
    s: usize,
    block_size: usize,
) -> Result<Diagnostics> {
    let n = d.rows();
    if f.len() != n || f_hat.len() != n || a.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "audit needs signals of length {n}, got {} and {}",
            f.len(),
            f_hat.len()
        )));
    }
    if s == 0 || block_size == 0 {
        return Err(Error::InvalidParameter("audit needs s >= 1 and block size >= 1".into()));
    }
    let h = vec::sub(f, f_hat);
    let coef_f = d.adjoint(f);
    let coef_h = d.adjoint(&h);
    let t0 = top_s_support(&coef_f, s);
    let mut in_t0 = vec![false; coef_f.len()];
    t0.iter().for_each(|&i| in_t0[i] = true);

    let h_t0_l1: f64 = t0.iter().map(|&i| coef_h[i].norm()).sum();
    let h_t0_l2: f64 = t0.iter().map(|&i| coef_h[i].norm_sqr()).sum::<f64>().sqrt();
    let mut rest: Vec<usize> = (0..coef_h.len()).filter(|&i| !in_t0[i]).collect();
    let h_t0c_l1: f64 = rest.iter().map(|&i| coef_h[i].norm()).sum();
    let f_t0c_l1: f64 = rest.iter().map(|&i| coef_f[i].norm()).sum();

    let cone_lhs = h_t0c_l1;
    let cone_rhs = 2.0 * f_t0c_l1 + h_t0_l1;

    rest.sort_by(|&i, &j| coef_h[j].norm().total_cmp(&coef_h[i].norm()).then(i.cmp(&j)));
    let tail_lhs: f64 = rest
        .chunks(block_size)
        .skip(1)
        .map(|blk| blk.iter().map(|&i| coef_h[i].norm_sqr()).sum::<f64>().sqrt())
        .sum();
    let rho = s as f64 / block_size as f64;
    let eta = 2.0 * f_t0c_l1 / (s as f64).sqrt();
    let tail_rhs = rho.sqrt() * (h_t0_l2 + eta);

    Ok(Diagnostics {
        s,
        block_size,
        cone_slack: (cone_lhs - cone_rhs).max(0.0),
        cone_lhs,
        cone_rhs,
        tube_norm: vec::norm2(&a.apply(&h)),
        tail_lhs,
        tail_rhs,
        tail_ratio: if tail_lhs == 0.0 { 0.0 } else { tail_lhs / tail_rhs },
    })
}
