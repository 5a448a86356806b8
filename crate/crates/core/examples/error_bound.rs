//! Error-bound constants and a check of the bound on an actual recovery.

use l1_analysis::certify::{theorem_constants_7s, verify_error_bound};
use l1_analysis::frames::Dictionary;
use l1_analysis::sensing::{measure, noise_bound, SensingOperator};
use l1_analysis::signals::{compressible_signal, CoefficientPhase};
use l1_analysis::solvers::{l1_analysis, SolverConfig};

fn main() -> l1_analysis::Result<()> {
    for delta in [0.1, 0.25, 0.5] {
        let c = theorem_constants_7s(delta, 0.5, 0.1)?;
        println!("delta_7s = {delta}: C0 = {:?}, C1 = {:?}", c.noise_constant, c.tail_constant);
    }

    let (n, m, s) = (64, 40, 4);
    let dict = Dictionary::oversampled_dft(n, 2)?;
    let (_, f) = compressible_signal(&dict, 1.5, CoefficientPhase::Phase, 3)?;
    let a = SensingOperator::gaussian(m, n, 3)?;
    let sigma = 0.01 * f.norm() / (m as f64).sqrt();
    let meas = measure(&a, &f.samples, sigma, 3)?;
    let eps = noise_bound(m, sigma);
    let report = l1_analysis(&a, &dict, &meas.y, eps, &SolverConfig::default())?;
    let check = verify_error_bound(&f.samples, &report.f_hat.samples, &dict, s, eps, 62.0, 30.0)?;
    println!("|f - f_hat| = {:.4e} <= {:.4e}: {}", check.lhs, check.rhs, check.holds);
    Ok(())
}
