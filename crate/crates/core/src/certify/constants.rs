use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::Dictionary;
use crate::linop::{vec, C64};
use crate::signals::tail_l1;

/// Sign of the second term of `K2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum K2Form {
    /// `sqrt(2 c1 (1 - d_{s+M}) (rho/c2 + rho)) - sqrt(rho (1 + d_M))`.
    Verbatim,
    /// The same with `+ sqrt(rho (1 + d_M))`.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub c1: f64,
    pub c2: f64,
    pub rho: f64,
    #[serde(rename = "delta_sM")]
    pub delta_sm: f64,
    #[serde(rename = "delta_M")]
    pub delta_m: f64,
    pub k2_form: K2Form,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    /// `2 / K1`, the noise constant; `None` unless valid.
    #[serde(rename = "C0")]
    pub noise_constant: Option<f64>,
    /// `2 K2 / K1`, the tail constant; `None` unless valid.
    #[serde(rename = "C1")]
    pub tail_constant: Option<f64>,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostic: Option<String>,
}

pub fn theorem_constants(delta_sm: f64, delta_m: f64, c1: f64, c2: f64, rho: f64) -> Result<ConstantsReport> {
    theorem_constants_with(delta_sm, delta_m, c1, c2, rho, K2Form::Verbatim)
}

/// Constants with `delta_{s+M} = delta_M = delta_7s` and `M = 6 s`, so `rho = 1/6`.
pub fn theorem_constants_7s(delta_7s: f64, c1: f64, c2: f64) -> Result<ConstantsReport> {
    theorem_constants(delta_7s, delta_7s, c1, c2, 1.0 / 6.0)
}

/// `K1`, `K2` and the error-bound constants `C0 = 2/K1`, `C1 = 2 K2/K1`.
///
/// `valid` is `K1 > 0`. A negative radicand in `K1` leaves `K1 = NaN`,
/// `valid = false` and a diagnostic.
pub fn theorem_constants_with(
    delta_sm: f64,
    delta_m: f64,
    c1: f64,
    c2: f64,
    rho: f64,
    k2_form: K2Form,
) -> Result<ConstantsReport> {
    for (name, delta) in [("delta_sM", delta_sm), ("delta_M", delta_m)] {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1), got {delta}")));
        }
    }
    for (name, v) in [("c1", c1), ("c2", c2), ("rho", rho)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    let cross = (rho * (1.0 + delta_m)).sqrt();
    let radicand1 = 2.0 * c1 * (1.0 - delta_sm) * (1.0 - (c1 / 2.0 + rho + rho * c2));
    let radicand2 = 2.0 * c1 * (1.0 - delta_sm) * (rho / c2 + rho);
    let k2 = match k2_form {
        K2Form::Verbatim => radicand2.sqrt() - cross,
        K2Form::Derived => radicand2.sqrt() + cross,
    };
    let (k1, diagnostic) = if radicand1 < 0.0 {
        (f64::NAN, Some(format!("K1 radicand is negative ({radicand1}); reduce c1, c2 or rho")))
    } else {
        let k1 = radicand1.sqrt() - cross;
        let diag = (k1 <= 0.0).then(|| format!("K1 = {k1} is not positive; the isometry constants are too large"));
        (k1, diag)
    };
    let valid = k1 > 0.0;
    Ok(ConstantsReport {
        c1,
        c2,
        rho,
        delta_sm,
        delta_m,
        k2_form,
        k1,
        k2,
        noise_constant: valid.then(|| 2.0 / k1),
        tail_constant: valid.then(|| 2.0 * k2 / k1),
        valid,
        diagnostic,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundCheck {
    /// `|f_hat - f|_2`.
    pub lhs: f64,
    /// `C0 eps + C1 |D^* f - (D^* f)_s|_1 / sqrt(s)`.
    pub rhs: f64,
    pub holds: bool,
    /// False when `D` is not a tight frame, so the bound is not guaranteed.
    pub tight_frame: bool,
}

pub fn verify_error_bound(
    f: &[C64],
    f_hat: &[C64],
    d: &Dictionary,
    s: usize,
    eps: f64,
    c0: f64,
    c1: f64,
) -> Result<ErrorBoundCheck> {
    if f.len() != d.n() || f_hat.len() != d.n() {
        return Err(Error::DimensionMismatch(format!(
            "signals of length {} and {} for a dictionary with n = {}",
            f.len(),
            f_hat.len(),
            d.n()
        )));
    }
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1".into()));
    }
    let lhs = vec::dist2(f_hat, f);
    let rhs = c0 * eps + c1 * tail_l1(&d.analyze(f), s) / (s as f64).sqrt();
    Ok(ErrorBoundCheck { lhs, rhs, holds: lhs <= rhs, tight_frame: d.is_tight() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_parameter_choices() {
        let half = theorem_constants_7s(0.5, 0.5, 0.1).unwrap();
        assert!(half.valid);
        assert!((half.noise_constant.unwrap() - 61.94).abs() < 0.01);
        assert!((half.tail_constant.unwrap() - 28.33).abs() < 0.01);
        let quarter = theorem_constants_7s(0.25, 0.5, 0.1).unwrap();
        assert!((quarter.noise_constant.unwrap() - 10.231).abs() < 0.001);
        assert!((quarter.tail_constant.unwrap() - 7.327).abs() < 0.001);
    }

    #[test]
    fn derived_k2_adds_the_cross_term() {
        let v = theorem_constants_with(0.5, 0.5, 0.5, 0.1, 1.0 / 6.0, K2Form::Verbatim).unwrap();
        let d = theorem_constants_with(0.5, 0.5, 0.5, 0.1, 1.0 / 6.0, K2Form::Derived).unwrap();
        assert_eq!(v.k1, d.k1);
        assert!((d.k2 - v.k2 - 2.0 * 0.25f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn large_isometry_constants_are_invalid() {
        let r = theorem_constants_7s(0.99, 0.5, 0.1).unwrap();
        assert!(!r.valid);
        assert!(r.noise_constant.is_none() && r.tail_constant.is_none());
        assert!(r.diagnostic.is_some());
        let r = theorem_constants(0.1, 0.1, 3.0, 0.1, 1.0 / 6.0).unwrap();
        assert!(r.k1.is_nan() && !r.valid);
        assert!(theorem_constants(1.0, 0.5, 0.5, 0.1, 0.2).is_err());
        assert!(theorem_constants(0.5, 0.5, 0.0, 0.1, 0.2).is_err());
    }

    #[test]
    fn json_names() {
        let r = theorem_constants_7s(0.25, 0.5, 0.1).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        for key in ["\"delta_sM\"", "\"delta_M\"", "\"K1\"", "\"K2\"", "\"C0\"", "\"C1\"", "\"valid\""] {
            assert!(json.contains(key), "{key} missing from {json}");
        }
    }

    #[test]
    fn perfect_recovery_satisfies_the_bound() {
        let d = Dictionary::identity_fourier(16).unwrap();
        let f: Vec<C64> = (0..16).map(|i| C64::new((i as f64).sin(), 0.0)).collect();
        let check = verify_error_bound(&f, &f, &d, 3, 0.0, 62.0, 30.0).unwrap();
        assert_eq!(check.lhs, 0.0);
        assert!(check.holds && check.tight_frame);
    }

    #[test]
    fn non_tight_frames_are_flagged() {
        let d = Dictionary::from_dense(nalgebra::DMatrix::<C64>::identity(4, 4) * C64::new(2.0, 0.0));
        let f = vec::zeros(4);
        assert!(!verify_error_bound(&f, &f, &d, 1, 0.0, 1.0, 1.0).unwrap().tight_frame);
    }
}
