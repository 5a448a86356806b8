use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use super::*;
use crate::frames::Dictionary;
use crate::linop::{vec, LinearOperator, C64};
use crate::sensing::SensingOperator;
use crate::signals::{dirac_comb, metrics};

fn real(v: &[f64]) -> Vec<C64> {
    vec::from_real(v)
}

#[test]
fn identity_problem_returns_measurements() {
    let y = real(&[1.0, -2.0, 0.5, 0.0, 3.0]);
    let id = Dictionary::identity(5);
    let rep = l1_analysis(&id, &id, &y, 0.0, &SolverConfig::default()).unwrap();
    assert!(rep.converged);
    assert!(vec::dist2(&rep.f_hat.samples, &y) <= 1e-6 * vec::norm2(&y));
    assert!((rep.objective - 6.5).abs() < 1e-5);
}

#[test]
fn zero_measurements_give_zero() {
    let a = SensingOperator::gaussian(4, 8, 1).unwrap();
    let d = Dictionary::identity(8);
    let rep = l1_analysis(&a, &d, &vec::zeros(4), 0.1, &SolverConfig::default()).unwrap();
    assert!(rep.converged);
    assert_eq!(vec::norm2(&rep.f_hat.samples), 0.0);
}

#[test]
fn dirac_comb_is_recovered_exactly() {
    let n = 64;
    let d = Dictionary::identity_fourier(n).unwrap();
    let a = SensingOperator::gaussian(32, n, 3).unwrap();
    let f = dirac_comb(n).unwrap();
    let y = a.apply(&f.samples);
    let rep = l1_analysis(&a, &d, &y, 0.0, &SolverConfig::default()).unwrap();
    let err = metrics(&rep.f_hat.samples, &f.samples).unwrap().relative_error;
    assert!(rep.converged, "not converged after {} iterations", rep.iterations);
    assert!(err <= 1e-4, "relative error {err}");
}

/// Minimum of `|f|_1` over `A f = y` for real `A`, by enumerating the basic
/// solutions on every `m`-column support.
fn basis_pursuit_by_enumeration(a: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let (m, n) = a.shape();
    (0..n)
        .combinations(m)
        .filter_map(|cols| {
            let sub = a.select_columns(&cols);
            if sub.clone().svd(false, false).singular_values.min() < 1e-10 {
                return None;
            }
            sub.lu().solve(y).map(|x| x.lp_norm(1))
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn basis_pursuit_matches_enumeration() {
    let (m, n) = (3, 6);
    let a = SensingOperator::gaussian(m, n, 11).unwrap();
    let dense = a.to_dense().unwrap().map(|z| z.re);
    let mut f = vec::zeros(n);
    f[1] = C64::new(1.5, 0.0);
    f[4] = C64::new(-0.25, 0.0);
    f[5] = C64::new(0.75, 0.0);
    let y = a.apply(&f);
    let y_real = DVector::from_iterator(m, y.iter().map(|z| z.re));
    let expected = basis_pursuit_by_enumeration(&dense, &y_real);
    let cfg = SolverConfig { real_signal: true, tol_rel: 1e-9, max_iter: 100_000, ..Default::default() };
    let rep = l1_analysis(&a, &Dictionary::identity(n), &y, 0.0, &cfg).unwrap();
    assert!((rep.objective - expected).abs() <= 1e-5 * expected, "{} vs {expected}", rep.objective);
}

#[test]
fn one_reweighting_pass_is_plain_analysis() {
    let n = 16;
    let d = Dictionary::dft(n).unwrap();
    let a = SensingOperator::gaussian(10, n, 5).unwrap();
    let mut f = vec::zeros(n);
    f[3] = C64::new(1.0, 0.0);
    f[9] = C64::new(0.0, 2.0);
    let y = a.apply(&f);
    let cfg = SolverConfig::default();
    let plain = l1_analysis(&a, &d, &y, 0.01, &cfg).unwrap();
    let rw = reweighted_l1_analysis(&a, &d, &y, 0.01, &Reweighting { iters: 1, sparsity: None }, &cfg).unwrap();
    assert_eq!(plain.f_hat.samples, rw.f_hat.samples);
    assert_eq!(rw.method, Method::Reweighted);
    assert!(rw.weights.is_none());
}

#[test]
fn reweighting_keeps_feasibility() {
    let n = 32;
    let d = Dictionary::identity_fourier(n).unwrap();
    let a = SensingOperator::gaussian(16, n, 8).unwrap();
    let mut f = vec::zeros(n);
    f[2] = C64::new(1.0, 0.0);
    f[20] = C64::new(-1.0, 0.0);
    let y = a.apply(&f);
    let rep = reweighted_l1_analysis(&a, &d, &y, 0.05, &Reweighting::default(), &SolverConfig::default()).unwrap();
    assert!(rep.feasibility <= 0.05 + rep.tol_feas);
    assert_eq!(rep.weights.as_ref().unwrap().len(), 2 * n);
}

#[test]
fn reweight_offsets() {
    let c = real(&[4.0, 0.0, 2.0, 1.0]);
    let w = programs::reweight(&c, 2).unwrap();
    // delta = 0.1 * 2
    assert!((w[0] - 1.0 / 4.2).abs() < 1e-15);
    assert!((w[1] - 1.0 / 0.2).abs() < 1e-12);
    assert!(programs::reweight(&vec::zeros(3), 1).is_none());
    // The offset never drops below 1e-8 of the largest coefficient.
    let w = programs::reweight(&real(&[1.0, 0.0]), 2).unwrap();
    assert!((w[1] - 1e8).abs() < 1e-3);
}

#[test]
fn synthesis_with_orthonormal_basis_matches_analysis() {
    let n = 16;
    let d = Dictionary::dft(n).unwrap();
    let a = SensingOperator::gaussian(10, n, 2).unwrap();
    let x: Vec<C64> = (0..n).map(|k| if k % 5 == 1 { C64::new(1.0, -0.5) } else { C64::new(0.0, 0.0) }).collect();
    let f = d.apply(&x);
    let y = a.apply(&f);
    let cfg = SolverConfig::default();
    let an = l1_analysis(&a, &d, &y, 0.02, &cfg).unwrap();
    let sy = l1_synthesis(&a, &d, &y, 0.02, &cfg).unwrap();
    assert!((an.objective - sy.objective).abs() <= 1e-4 * an.objective);
    assert!(vec::dist2(&an.f_hat.samples, &sy.f_hat.samples) <= 1e-3 * vec::norm2(&f));
    assert_eq!(sy.coefficients.as_ref().unwrap().len(), n);
}

#[test]
fn synthesis_splits_mass_across_duplicate_atoms() {
    // D = [e1 e1 e2]: the cheapest representation of f = e1 has |x_1| + |x_2| = 1.
    let mut m = DMatrix::<C64>::zeros(2, 3);
    m[(0, 0)] = C64::new(1.0, 0.0);
    m[(0, 1)] = C64::new(1.0, 0.0);
    m[(1, 2)] = C64::new(1.0, 0.0);
    let d = Dictionary::from_dense(m);
    let id = Dictionary::identity(2);
    let y = real(&[1.0, 0.0]);
    let rep = l1_synthesis(&id, &d, &y, 0.0, &SolverConfig::default()).unwrap();
    let x = rep.coefficients.unwrap();
    assert!((x[0].norm() + x[1].norm() - 1.0).abs() < 1e-5);
    assert!(x[2].norm() < 1e-5);
    assert!(vec::dist2(&rep.f_hat.samples, &y) < 1e-5);
}

#[test]
fn one_sparse_recovery_matches_exhaustive_search() {
    let n = 8;
    let a = SensingOperator::gaussian(6, n, 4).unwrap();
    let mut f = vec::zeros(n);
    f[3] = C64::new(1.0, 0.0);
    let y = a.apply(&f);
    // A 1-sparse point c e_j is feasible iff y lies on the line through column j.
    let feasible: Vec<usize> = (0..n)
        .filter(|&j| {
            let mut e = vec::zeros(n);
            e[j] = C64::new(1.0, 0.0);
            let col = a.apply(&e);
            let c = vec::inner(&col, &y) / vec::norm2_sq(&col);
            let fit: Vec<C64> = col.iter().map(|v| v * c).collect();
            vec::dist2(&fit, &y) <= 1e-12 * vec::norm2(&y)
        })
        .collect();
    assert_eq!(feasible, [3]);
    let id = Dictionary::identity(n);
    let cfg = SolverConfig::default();
    for rep in [l1_analysis(&a, &id, &y, 0.0, &cfg).unwrap(), l1_synthesis(&a, &id, &y, 0.0, &cfg).unwrap()] {
        assert!(rep.converged);
        assert!(vec::dist2(&rep.f_hat.samples, &f) <= 1e-6, "{:?}", rep.method);
    }
}

#[test]
fn split_analysis_separates_spikes_and_tones() {
    let n = 32;
    let id = Dictionary::identity(n);
    let dft = Dictionary::dft(n).unwrap();
    let mut f = vec::zeros(n);
    f[5] = C64::new(1.0, 0.0);
    let mut e = vec::zeros(n);
    e[3] = C64::new(1.0, 0.0);
    let tone = dft.apply(&e);
    let f = vec::add(&f, &tone);
    let a = SensingOperator::gaussian(24, n, 21).unwrap();
    let y = a.apply(&f);
    let cfg = SolverConfig::default();
    let rep = split_analysis(&a, &id, &dft, &y, 0.0, &cfg).unwrap();
    let err = metrics(&rep.f_hat.samples, &f).unwrap().relative_error;
    assert!(err <= 1e-3, "split error {err}");
    let concat = Dictionary::concat(&id, &dft, 1.0).unwrap();
    let syn = l1_synthesis(&a, &concat, &y, 0.0, &cfg).unwrap();
    assert!(vec::dist2(&syn.f_hat.samples, &rep.f_hat.samples) <= 1e-3 * vec::norm2(&f));
    let (f1, f2) = rep.components.clone().unwrap();
    assert!(vec::dist2(&vec::add(&f1, &f2), &rep.f_hat.samples) < 1e-12);
    assert_eq!(rep.d, 2 * n);
}

#[test]
fn split_analysis_prefers_the_cheaper_component() {
    // Mass on f2 costs twice as much as on f1, so f2 vanishes at the optimum.
    let n = 12;
    let id = Dictionary::identity(n);
    let double = Dictionary::from_dense(DMatrix::<C64>::identity(n, n) * C64::new(2.0, 0.0));
    let mut f = vec::zeros(n);
    f[2] = C64::new(1.0, 0.0);
    f[7] = C64::new(-0.5, 0.0);
    let a = SensingOperator::gaussian(8, n, 6).unwrap();
    let y = a.apply(&f);
    let rep = split_analysis(&a, &id, &double, &y, 0.0, &SolverConfig::default()).unwrap();
    let (_, f2) = rep.components.unwrap();
    assert!(vec::norm2(&f2) <= 1e-5, "|f2| = {}", vec::norm2(&f2));
}

#[test]
fn degenerate_split_matches_analysis_objective() {
    let n = 16;
    let d = Dictionary::identity_fourier(n).unwrap();
    let a = SensingOperator::gaussian(10, n, 13).unwrap();
    let mut f = vec::zeros(n);
    f[4] = C64::new(1.0, 0.0);
    let y = a.apply(&f);
    let cfg = SolverConfig::default();
    let split = split_analysis(&a, &d, &d, &y, 0.01, &cfg).unwrap();
    let plain = l1_analysis(&a, &d, &y, 0.01, &cfg).unwrap();
    assert!((split.objective - plain.objective).abs() <= 1e-4 * plain.objective);
}

#[test]
fn rejects_bad_inputs() {
    let a = SensingOperator::gaussian(4, 8, 1).unwrap();
    let d = Dictionary::identity(6);
    let y = vec::zeros(4);
    let cfg = SolverConfig::default();
    assert!(matches!(l1_analysis(&a, &d, &y, 0.0, &cfg), Err(crate::Error::DimensionMismatch(_))));
    let d = Dictionary::identity(8);
    assert!(matches!(l1_analysis(&a, &d, &vec::zeros(3), 0.0, &cfg), Err(crate::Error::DimensionMismatch(_))));
    assert!(matches!(l1_analysis(&a, &d, &y, -1.0, &cfg), Err(crate::Error::InvalidParameter(_))));
    let bad = SolverConfig { over_relaxation: 2.0, ..Default::default() };
    assert!(l1_analysis(&a, &d, &y, 0.0, &bad).is_err());
}

#[test]
fn summary_json_has_fixed_field_order() {
    let id = Dictionary::identity(3);
    let y = real(&[1.0, 0.0, 0.0]);
    let rep = l1_analysis(&id, &id, &y, 0.0, &SolverConfig::default()).unwrap();
    let json = rep.to_json().unwrap();
    let keys: Vec<&str> = json.lines().filter_map(|l| l.trim().split('"').nth(1)).collect();
    assert_eq!(
        keys,
        ["method", "n", "d", "m", "eps", "objective", "feasibility", "iterations", "converged", "cone_slack", "tube_norm"]
    );
}

#[test]
fn history_is_recorded_on_request() {
    let id = Dictionary::identity(3);
    let y = real(&[1.0, 2.0, 0.0]);
    let cfg = SolverConfig { history: true, ..Default::default() };
    let rep = l1_analysis(&id, &id, &y, 0.0, &cfg).unwrap();
    let h = rep.history.as_ref().unwrap();
    assert_eq!(h.len(), rep.iterations);
    assert!(rep.history_csv().unwrap().starts_with("# iteration,objective,feasibility\n"));
}
