//! Acceptance suite: every criterion runs at its stated tolerance and prints
//! one PASS/FAIL line. The process exits non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use l1_analysis::certify::{drip_exact_small, drip_monte_carlo, theorem_constants, verify_error_bound};
use l1_analysis::config::{ExperimentConfig, ExperimentKind};
use l1_analysis::experiments::{self, linear_fit, median, ExperimentOutput};
use l1_analysis::frames::{gram_pnorm_factor, tighten, Dictionary, GaborParams};
use l1_analysis::linop::{vec, LinearOperator, C64};
use l1_analysis::rng::{self, derive_seed};
use l1_analysis::sensing::{measure, SensingOperator};
use l1_analysis::signals::{compressible_signal, CoefficientPhase};
use l1_analysis::solvers::{l1_analysis, SolverConfig};

use itertools::Itertools;
use rand::Rng;
use rand_distr::StandardNormal;

/// `delta_2` of the pinned instance: `n = 8`, `D = [I F] / sqrt(2)`,
/// Gaussian `A` with `m = 6` and seed 7. Frozen from the generalized
/// eigenvalue oracle below.
const PINNED_DELTA_2: f64 = 2.977_798_273_171_057;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn experiment(kind: ExperimentKind) -> (ExperimentOutput, Duration) {
    let t0 = Instant::now();
    let out = experiments::run(&ExperimentConfig::new(kind)).expect("experiment runs");
    (out, t0.elapsed())
}

fn criterion_1() -> Outcome {
    let half = theorem_constants(0.5, 0.5, 0.5, 0.1, 1.0 / 6.0).unwrap();
    let quarter = theorem_constants(0.25, 0.25, 0.5, 0.1, 1.0 / 6.0).unwrap();
    let (c0h, c1h) = (half.noise_constant.unwrap(), half.tail_constant.unwrap());
    let (c0q, c1q) = (quarter.noise_constant.unwrap(), quarter.tail_constant.unwrap());
    let pass = (c0h - 61.9).abs() <= 0.1
        && (c1h - 28.3).abs() <= 0.1
        && (c0q - 10.23).abs() <= 0.05
        && (c1q - 7.33).abs() <= 0.01;
    outcome(pass, format!("delta=1/2: C0={c0h:.4} C1={c1h:.4}; delta=1/4: C0={c0q:.4} C1={c1q:.4}"))
}

fn criterion_2(out: &ExperimentOutput, took: Duration) -> Outcome {
    let exact = out.summary["exact_recoveries"];
    let trials = out.summary["trials"];
    let pass = trials == 10.0 && exact >= 9.0 && took <= Duration::from_secs(10);
    outcome(pass, format!("{exact}/{trials} trials with relative error <= 1e-4 in {:.2}s", took.as_secs_f64()))
}

fn criterion_3(out: &ExperimentOutput, took: Duration) -> Outcome {
    let curve = out.table("noise_curve").unwrap();
    let x = curve.column("sigma_rel").unwrap();
    let y = curve.column("err_plain").unwrap();
    let (slope, intercept, r2) = linear_fit(&x, &y).unwrap();
    let trials_per_level = out.table("noise_curve_trials").unwrap().rows.len() / x.len();
    let pass = x.len() == 5
        && trials_per_level == 5
        && r2 >= 0.95
        && intercept <= 0.05
        && took <= Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "R^2={r2:.4} intercept={intercept:.4} slope={slope:.4} over {} levels x {trials_per_level} trials in {:.1}s",
            x.len(),
            took.as_secs_f64()
        ),
    )
}

fn criterion_4(out: &ExperimentOutput) -> Outcome {
    let t = out.table("radar_rmse").unwrap();
    let plain = median(&t.column("rmse_plain").unwrap());
    let rw = median(&t.column("rmse_rw").unwrap());
    outcome(
        t.rows.len() == 10 && rw <= plain,
        format!("median RMSE reweighted {rw:.4e} vs plain {plain:.4e} (ratio {:.3}) over {} trials", rw / plain, t.rows.len()),
    )
}

fn criterion_5(runs: &[&ExperimentOutput]) -> Outcome {
    let audits: Vec<_> = runs.iter().flat_map(|o| o.audits.iter()).filter(|a| a.converged).collect();
    let total: usize = runs.iter().map(|o| o.audits.len()).sum();
    let cone = audits.iter().filter(|a| !a.cone_holds()).count();
    let tube = audits.iter().filter(|a| !a.tube_holds()).count();
    let tail = audits.iter().filter(|a| !a.tail_holds()).count();
    let worst_cone = audits
        .iter()
        .map(|a| a.diagnostics.cone_slack / (a.tol_rel * a.reference_l1))
        .fold(0.0, f64::max);
    outcome(
        cone + tube + tail == 0 && !audits.is_empty(),
        format!(
            "{} converged of {total} solves; violations cone={cone} tube={tube} tail={tail}; worst cone_slack/(tol_rel |D*f|_1)={worst_cone:.3}",
            audits.len()
        ),
    )
}

/// `delta_s` by generalized Hermitian eigenvalues of
/// `(D_T^* A^* A D_T, D_T^* D_T)` over every support, via Cholesky whitening.
fn generalized_eigen_oracle(a: &DMatrix<C64>, d: &DMatrix<C64>, s: usize) -> f64 {
    let mut delta: f64 = 0.0;
    for support in (0..d.ncols()).combinations(s) {
        let dt = d.select_columns(&support);
        let gram = dt.adjoint() * &dt;
        let adt = a * &dt;
        let h = adt.adjoint() * &adt;
        let l = gram.cholesky().expect("supports of size <= 2 are linearly independent").l();
        let l_inv = l.try_inverse().unwrap();
        let m = &l_inv * h * l_inv.adjoint();
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = m.symmetric_eigenvalues();
        delta = delta.max(eig.max() - 1.0).max(1.0 - eig.min());
    }
    delta
}

fn criterion_6() -> Outcome {
    let t0 = Instant::now();
    let dict = Dictionary::identity_fourier(8).unwrap();
    let a = SensingOperator::gaussian(6, 8, 7).unwrap();
    let exact: Vec<f64> = (1..=3).map(|s| drip_exact_small(&a, &dict, s).unwrap().delta_hat).collect();
    let oracle = generalized_eigen_oracle(&a.to_dense().unwrap(), &dict.to_dense().unwrap(), 2);
    let mc = drip_monte_carlo(&a, &dict, 2, 10_000, 0).unwrap().delta_hat;
    let gap = exact[1] - mc;
    let monotone = exact.windows(2).all(|w| w[0] <= w[1]);
    let pinned = (exact[1] - PINNED_DELTA_2).abs() <= 1e-9 && (oracle - PINNED_DELTA_2).abs() <= 1e-9;
    let took = t0.elapsed();
    outcome(
        mc <= exact[1] && gap <= 0.05 && monotone && pinned && took <= Duration::from_secs(60),
        format!(
            "exact delta_2={:.6} (oracle {oracle:.6}), MC={mc:.6}, gap={gap:.4}; delta_1..3={:.4},{:.4},{:.4}; {:.1}s",
            exact[1],
            exact[0],
            exact[1],
            exact[2],
            took.as_secs_f64()
        ),
    )
}

fn criterion_7() -> Outcome {
    let n = 64;
    let dicts = [
        Dictionary::identity_fourier(n).unwrap(),
        Dictionary::oversampled_dft(n, 2).unwrap(),
        tighten(&Dictionary::gabor(n, GaborParams::with_redundancy(4, 4)).unwrap()).unwrap(),
    ];
    let cfg = SolverConfig::default();
    let mut holds = 0;
    let mut worst: f64 = 0.0;
    for k in 0..50u64 {
        let seed = derive_seed(700, k);
        let dict = &dicts[k as usize % dicts.len()];
        let m = [24, 32, 40][(k as usize / 3) % 3];
        let s = [2, 4, 6][(k as usize / 9) % 3];
        let (_, f) = compressible_signal(dict, 1.0 + 0.1 * (k % 7) as f64, CoefficientPhase::Phase, seed).unwrap();
        let a = SensingOperator::gaussian(m, n, seed).unwrap();
        let sigma = 0.02 * (k % 5) as f64 * f.norm() / (m as f64).sqrt();
        let meas = measure(&a, &f.samples, sigma, seed).unwrap();
        let eps = meas.noise_norm;
        let rep = l1_analysis(&a, dict, &meas.y, eps, &cfg).unwrap();
        let check = verify_error_bound(&f.samples, &rep.f_hat.samples, dict, s, eps, 62.0, 30.0).unwrap();
        if check.holds && check.tight_frame {
            holds += 1;
        }
        worst = worst.max(check.lhs / check.rhs);
    }
    outcome(holds == 50, format!("{holds}/50 instances satisfy the bound; largest lhs/rhs = {worst:.4}"))
}

/// `min |D^T f|_1 s.t. A f = y` over real `f` by vertex enumeration: with
/// `f = f0 + N t` the objective is piecewise linear in `t`, and some minimizer
/// zeroes `k = dim t` independent coefficients.
fn lp_vertex_oracle(a: &DMatrix<f64>, d: &DMatrix<f64>, y: &[f64]) -> f64 {
    let (m, n) = a.shape();
    let svd = a.clone().svd(true, true);
    let f0 = svd.solve(&nalgebra::DVector::from_column_slice(y), 1e-12).unwrap();
    // Eigenvectors of A^T A with the k smallest eigenvalues span null(A).
    let full = nalgebra::linalg::SVD::new(a.transpose() * a, true, true);
    let k = n - m;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| full.singular_values[i].total_cmp(&full.singular_values[j]));
    let null = full.u.unwrap().select_columns(&idx[..k]);
    let c0 = d.transpose() * &f0;
    let b = d.transpose() * &null;
    let mut best = f64::INFINITY;
    for rows in (0..d.ncols()).combinations(k) {
        let sub = b.select_rows(&rows);
        let rhs = -c0.select_rows(&rows);
        let lu = sub.lu();
        if lu.determinant().abs() < 1e-10 {
            continue;
        }
        let t = lu.solve(&rhs).unwrap();
        let obj: f64 = (&c0 + &b * t).iter().map(|v| v.abs()).sum();
        best = best.min(obj);
    }
    best
}

fn criterion_8() -> Outcome {
    // Objectives near 30 need about 3e-7 relative accuracy to land within 1e-5.
    let cfg = SolverConfig { real_signal: true, tol_rel: 1e-8, max_iter: 400_000, ..SolverConfig::default() };
    let mut worst: f64 = 0.0;
    let mut ok = 0;
    for k in 0..20u64 {
        let mut r = rng::stream(800 + k, rng::streams::OPERATOR);
        let n = 6 + (k as usize % 5);
        let m = (n - 2).min(8) - (k as usize % 2);
        let d_cols = (n + 2 + (k as usize % 7)).min(16);
        let dd = DMatrix::<f64>::from_fn(n, d_cols, |_, _| r.sample(StandardNormal));
        let ad = DMatrix::<f64>::from_fn(m, n, |_, _| r.sample::<f64, _>(StandardNormal) / (m as f64).sqrt());
        let f: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
        let y: Vec<f64> = (&ad * nalgebra::DVector::from_vec(f)).iter().copied().collect();
        let oracle = lp_vertex_oracle(&ad, &dd, &y);
        let dict = Dictionary::from_dense(dd.map(|v| C64::new(v, 0.0)));
        let a = SensingOperator::from_dense(ad.map(|v| C64::new(v, 0.0))).unwrap();
        let rep = l1_analysis(&a, &dict, &vec::from_real(&y), 0.0, &cfg).unwrap();
        let err = (rep.objective - oracle).abs();
        worst = worst.max(err);
        if err <= 1e-5 && rep.converged {
            ok += 1;
        }
    }
    outcome(ok == 20, format!("{ok}/20 instances within 1e-5 of the vertex-enumeration optimum; worst gap {worst:.2e}"))
}

fn criterion_9() -> Outcome {
    let n = 32;
    let dicts = [
        ("[I F]/sqrt(2)", Dictionary::identity_fourier(n).unwrap()),
        ("Gabor", Dictionary::gabor(n, GaborParams::with_redundancy(4, 2)).unwrap()),
    ];
    let mut failures = 0;
    let mut draws = 0;
    let mut worst: f64 = 0.0;
    for (_, dict) in &dicts {
        let factors = [gram_pnorm_factor(dict, 0.5).unwrap(), gram_pnorm_factor(dict, 1.0).unwrap()];
        for k in 0..100u64 {
            let mut r = rng::stream(900 + k, rng::streams::SIGNAL);
            let (p, factor) = if k % 2 == 0 { (0.5, factors[0]) } else { (1.0, factors[1]) };
            let mut x = vec::zeros(dict.d());
            for _ in 0..1 + (k as usize % 8) {
                let i = r.random_range(0..dict.d());
                x[i] = C64::new(r.sample(StandardNormal), r.sample(StandardNormal));
            }
            let lhs = vec::norm_p(&dict.analyze(&dict.synthesize(&x)), p);
            let rhs = factor * vec::norm_p(&x, p);
            draws += 1;
            worst = worst.max(lhs / rhs);
            if lhs > rhs {
                failures += 1;
            }
        }
    }
    outcome(failures == 0, format!("{}/{draws} draws satisfy the bound; largest lhs/rhs = {worst:.4}", draws - failures))
}

fn criterion_10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_l1a");
    let tmp = tempfile::tempdir().unwrap();
    let commands: Vec<Vec<String>> = vec![
        vec!["recover", "--method", "analysis", "--dict", "concat-if", "--n", "64", "--m", "32", "--signal", "dirac", "--eps", "0"],
        vec!["recover", "--method", "reweighted", "--dict", "odft", "--oversampling", "2", "--n", "32", "--m", "20", "--signal", "compressible", "--sigma", "0.01", "--seed", "3"],
        vec!["recover", "--method", "synthesis", "--dict", "dft", "--n", "16", "--m", "10", "--signal", "compressible", "--seed", "4"],
        vec!["recover", "--method", "split", "--dict", "identity", "--dict2", "dft", "--n", "16", "--m", "12", "--signal", "dirac"],
        vec!["experiment", "dirac-comb", "--n", "16", "--m", "12", "--trials", "3", "--seed", "9"],
        vec!["experiment", "constants"],
        vec!["certify", "drip-mc", "--dict", "concat-if", "--n", "8", "--m", "6", "--s", "2", "--seed", "7", "--trials", "500"],
        vec!["certify", "drip-exact", "--dict", "concat-if", "--n", "8", "--m", "6", "--s", "2", "--seed", "7"],
        vec!["certify", "concentration", "--n", "50", "--m", "20", "--delta", "0.5", "--trials", "200"],
        vec!["certify", "coherence", "--dict", "tight-gabor", "--n", "32", "--time-step", "4", "--oversampling", "2"],
        vec!["generate", "sensing", "--m", "4", "--n", "6", "--seed", "2", "--out", "a.csv"],
        vec!["generate", "signal", "--kind", "radar", "--n", "256", "--seed", "2", "--out", "f.csv"],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(String::from).collect())
    .collect();
    let mut identical = 0;
    let mut mismatched = Vec::new();
    for (i, args) in commands.iter().enumerate() {
        let snapshot = |run: usize| -> (Vec<u8>, i32, Vec<(String, Vec<u8>)>) {
            let dir = tmp.path().join(format!("c{i}-r{run}"));
            std::fs::create_dir_all(&dir).unwrap();
            let out = Command::new(bin)
                .args(args)
                .current_dir(&dir)
                .env("L1A_OUTPUT_DIR", &dir)
                .output()
                .unwrap();
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
                .unwrap()
                .map(|e| {
                    let e = e.unwrap();
                    (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
                })
                .collect();
            files.sort();
            // Printed paths differ between run directories; compare the rest.
            let stdout = String::from_utf8_lossy(&out.stdout).replace(&dir.display().to_string(), "<dir>");
            (stdout.into_bytes(), out.status.code().unwrap_or(-1), files)
        };
        let (first, second) = (snapshot(0), snapshot(1));
        if first == second && first.1 == 0 && !first.0.is_empty() {
            identical += 1;
        } else {
            mismatched.push(args.join(" "));
        }
    }
    outcome(
        mismatched.is_empty(),
        format!("{identical}/{} commands byte-identical across two runs{}", commands.len(), if mismatched.is_empty() { String::new() } else { format!("; differing: {mismatched:?}") }),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "theorem constants", criterion_1()));

    let (dirac, dirac_time) = experiment(ExperimentKind::DiracComb);
    results.push((2, "Dirac-comb exact recovery", criterion_2(&dirac, dirac_time)));
    let (noise, noise_time) = experiment(ExperimentKind::NoiseCurve);
    results.push((3, "noise linearity", criterion_3(&noise, noise_time)));
    let (radar, _) = experiment(ExperimentKind::Radar);
    results.push((4, "reweighting benefit", criterion_4(&radar)));
    results.push((5, "lemma audit", criterion_5(&[&dirac, &noise, &radar])));

    results.push((6, "D-RIP oracle agreement", criterion_6()));
    results.push((7, "error-bound verifier", criterion_7()));
    results.push((8, "solver vs vertex enumeration", criterion_8()));
    results.push((9, "Gram p-norm bound", criterion_9()));
    results.push((10, "CLI determinism", criterion_10()));

    let mut failed = 0;
    for (k, name, o) in &results {
        println!("{} criterion {k:>2} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
