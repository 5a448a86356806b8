use rand_distr::{Distribution, StandardNormal};

use crate::linop::{vec, LinearOperator, C64};
use crate::rng::{self, streams};

/// Relative change of successive estimates at which power iteration stops.
const FIXED_POINT_TOL: f64 = 1e-12;

/// Power-iteration estimate of the spectral norm `|K|`.
///
/// Iterates `v <- K^* K v` from a seeded random start until the Rayleigh
/// quotient stops changing or `iters` is reached. The estimate never exceeds
/// the true norm beyond roundoff.
pub fn operator_norm_estimate(op: &dyn LinearOperator, iters: usize, seed: u64) -> f64 {
    let mut r = rng::stream(seed, streams::SOLVER);
    let mut v: Vec<C64> = (0..op.cols())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut r);
            let im: f64 = StandardNormal.sample(&mut r);
            C64::new(re, im)
        })
        .collect();
    let mut estimate = 0.0;
    for _ in 0..iters.max(1) {
        let nv = vec::norm2(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|z| *z /= nv);
        let kv = op.apply(&v);
        let next = vec::norm2(&kv);
        v = op.adjoint(&kv);
        let converged = (next - estimate).abs() <= FIXED_POINT_TOL * next;
        estimate = next;
        if converged {
            break;
        }
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Dictionary;
    use nalgebra::DMatrix;

    #[test]
    fn scaled_identity_and_unitary() {
        let three = DMatrix::<C64>::identity(6, 6) * C64::new(3.0, 0.0);
        assert!((operator_norm_estimate(&three, 50, 1) - 3.0).abs() < 1e-6);
        assert!((operator_norm_estimate(&Dictionary::dft(16).unwrap(), 50, 1) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn matches_dense_svd() {
        let mut r = rng::stream(99, 0);
        let m = DMatrix::<C64>::from_fn(10, 10, |_, _| {
            let re: f64 = StandardNormal.sample(&mut r);
            C64::new(re, 0.0)
        });
        let sigma_max = m.singular_values().max();
        let est = operator_norm_estimate(&m, 5000, 3);
        assert!((est - sigma_max).abs() <= 1e-4 * sigma_max, "{est} vs {sigma_max}");
        assert!(est <= sigma_max * (1.0 + 1e-12));
    }
}
