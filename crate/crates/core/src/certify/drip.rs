use itertools::Itertools;
use nalgebra::DMatrix;
use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{vec, LinearOperator, C64};
use crate::rng::{self, streams};

pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Redraws allowed for a trial whose synthesized vector vanishes.
const MAX_REDRAWS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DripMethod {
    MonteCarlo,
    ExactEnumeration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DripEstimate {
    pub s: usize,
    pub delta_hat: f64,
    pub method: DripMethod,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub supports_checked: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

fn check_pair(a: &dyn LinearOperator, d: &dyn LinearOperator, s: usize) -> Result<()> {
    if a.cols() != d.rows() {
        return Err(Error::DimensionMismatch(format!(
            "sensing operator acts on dimension {} but the dictionary has {} rows",
            a.cols(),
            d.rows()
        )));
    }
    if s == 0 || s > d.cols() {
        return Err(Error::InvalidParameter(format!("sparsity must lie in 1..={}, got {s}", d.cols())));
    }
    Ok(())
}

fn deviation(ratio: f64) -> f64 {
    (ratio - 1.0).max(1.0 - ratio)
}

/// Lower bound on `delta_s` from random `s`-sparse synthesis vectors.
///
/// Trial `t` draws its support and complex Gaussian coefficients from
/// `stream(derive_seed(seed, t), SUPPORT)`, so the estimate does not depend on
/// scheduling.
pub fn drip_monte_carlo(
    a: &dyn LinearOperator,
    d: &dyn LinearOperator,
    s: usize,
    trials: usize,
    seed: u64,
) -> Result<DripEstimate> {
    check_pair(a, d, s)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("Monte-Carlo estimate needs at least one trial".into()));
    }
    let dim = d.cols();
    let deviations: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(rng::derive_seed(seed, t as u64), streams::SUPPORT);
            for _ in 0..MAX_REDRAWS {
                let support = index::sample(&mut r, dim, s);
                let mut x = vec::zeros(dim);
                for i in support.iter() {
                    let re: f64 = StandardNormal.sample(&mut r);
                    let im: f64 = StandardNormal.sample(&mut r);
                    x[i] = C64::new(re, im);
                }
                let v = d.apply(&x);
                let v_sq = vec::norm2_sq(&v);
                if v_sq > 0.0 {
                    return Ok(deviation(vec::norm2_sq(&a.apply(&v)) / v_sq));
                }
            }
            Err(Error::InvalidParameter(format!("trial {t} drew only zero vectors; the dictionary may be degenerate")))
        })
        .collect::<Result<_>>()?;
    Ok(DripEstimate {
        s,
        delta_hat: deviations.into_iter().fold(0.0, f64::max),
        method: DripMethod::MonteCarlo,
        trials: Some(trials),
        supports_checked: None,
        seed: Some(seed),
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

pub fn drip_exact_small(a: &dyn LinearOperator, d: &dyn LinearOperator, s: usize) -> Result<DripEstimate> {
    drip_exact_small_capped(a, d, s, DEFAULT_ENUMERATION_CAP)
}

/// `delta_s` exactly, by enumerating every support `T` of size `s`.
///
/// The columns of `D_T` are orthonormalized first, so a rank-deficient
/// support contributes the subspace it actually spans. On that subspace the
/// ratio `|A v|^2 / |v|^2` ranges over the squared singular values of
/// `A Q_T`; when `rank > m` the smallest of them is 0.
pub fn drip_exact_small_capped(
    a: &dyn LinearOperator,
    d: &dyn LinearOperator,
    s: usize,
    cap: u128,
) -> Result<DripEstimate> {
    check_pair(a, d, s)?;
    let count = binomial(d.cols(), s);
    if count > cap {
        return Err(Error::EnumerationCap { count, cap });
    }
    let a_dense = a.to_dense()?;
    let d_dense = d.to_dense()?;
    let m = a_dense.nrows();
    let n = d_dense.nrows();

    let support_delta = |support: Vec<usize>| -> f64 {
        let dt = d_dense.select_columns(&support);
        let svd = dt.svd(true, false);
        let sigma_max = svd.singular_values.max();
        let tol = n.max(s) as f64 * f64::EPSILON * sigma_max;
        let rank = svd.singular_values.iter().filter(|&&v| v > tol).count();
        if rank == 0 {
            return 0.0;
        }
        let u = svd.u.expect("left singular vectors requested");
        let q: DMatrix<C64> = u.columns(0, rank).into_owned();
        let b = &a_dense * q;
        let sv = b.singular_values();
        let hi = sv.max().powi(2);
        let lo = if rank > m { 0.0 } else { sv.min().powi(2) };
        (hi - 1.0).max(1.0 - lo)
    };

    let delta_hat = (0..d_dense.ncols())
        .combinations(s)
        .par_bridge()
        .map(support_delta)
        .reduce(|| 0.0, f64::max);
    Ok(DripEstimate {
        s,
        delta_hat,
        method: DripMethod::ExactEnumeration,
        trials: None,
        supports_checked: Some(count as u64),
        seed: None,
    })
}

/// Fraction of operators `factory(derive_seed(seed, t))`, `t < trials`, for
/// which `|A v|^2` leaves `[(1 - delta) |v|^2, (1 + delta) |v|^2]`.
pub fn concentration_check<F, Op>(factory: F, v: &[C64], delta: f64, trials: usize, seed: u64) -> Result<f64>
where
    F: Fn(u64) -> Result<Op> + Sync,
    Op: LinearOperator,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("concentration check needs at least one trial".into()));
    }
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be non-negative, got {delta}")));
    }
    let v_sq = vec::norm2_sq(v);
    let failures: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let a = factory(rng::derive_seed(seed, t as u64))?;
            if a.cols() != v.len() {
                return Err(Error::DimensionMismatch(format!(
                    "operator acts on dimension {} but v has length {}",
                    a.cols(),
                    v.len()
                )));
            }
            let av_sq = vec::norm2_sq(&a.apply(v));
            Ok(av_sq < (1.0 - delta) * v_sq || av_sq > (1.0 + delta) * v_sq)
        })
        .collect::<Result<_>>()?;
    Ok(failures.iter().filter(|&&f| f).count() as f64 / trials as f64)
}
