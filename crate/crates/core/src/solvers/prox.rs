//! Proximal maps of the weighted l1 norm and of the l2-ball indicator.

use crate::linop::C64;

/// Shrinks each modulus by `lambda * w_i`, keeping the phase and clamping at
/// zero. `weights = None` means unit weights.
pub fn soft_threshold(v: &[C64], lambda: f64, weights: Option<&[f64]>) -> Vec<C64> {
    v.iter()
        .enumerate()
        .map(|(i, &z)| {
            let t = lambda * weights.map_or(1.0, |w| w[i]);
            let mag = z.norm_sqr().sqrt();
            if mag <= t {
                C64::new(0.0, 0.0)
            } else {
                z * ((mag - t) / mag)
            }
        })
        .collect()
}

/// Euclidean projection onto `{u : |u - center| <= radius}`.
pub fn project_l2_ball(v: &[C64], center: &[C64], radius: f64) -> Vec<C64> {
    let dist = v.iter().zip(center).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    if dist <= radius {
        return v.to_vec();
    }
    let shrink = radius / dist;
    v.iter().zip(center).map(|(a, c)| c + (a - c) * shrink).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::vec;

    #[test]
    fn soft_threshold_examples() {
        let out = soft_threshold(&vec::from_real(&[3.0, -1.0]), 1.0, Some(&[1.0, 1.0]));
        assert_eq!(out, vec::from_real(&[2.0, 0.0]));
        for theta in [0.0, 0.3, 1.7, -2.9, std::f64::consts::PI] {
            let out = soft_threshold(&[C64::from_polar(2.0, theta)], 0.5, None);
            assert!((out[0] - C64::from_polar(1.5, theta)).norm() < 1e-15);
        }
        let weighted = soft_threshold(&vec::from_real(&[3.0, 3.0]), 1.0, Some(&[0.5, 4.0]));
        assert_eq!(weighted, vec::from_real(&[2.5, 0.0]));
    }

    #[test]
    fn ball_projection() {
        let center = vec::from_real(&[1.0, 1.0]);
        let inside = vec::from_real(&[1.5, 0.8]);
        assert_eq!(project_l2_ball(&inside, &center, 1.0), inside);
        let outside = vec::from_real(&[4.0, 5.0]);
        let p = project_l2_ball(&outside, &center, 1.0);
        assert!((vec::dist2(&p, &center) - 1.0).abs() < 1e-15);
        assert!((p[0] - C64::new(1.6, 0.0)).norm() < 1e-15 && (p[1] - C64::new(1.8, 0.0)).norm() < 1e-15);
        assert_eq!(project_l2_ball(&outside, &center, 0.0), center);
    }
}
