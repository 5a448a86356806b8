//! Post-hoc checks of a noisy recovery: the cone condition, the tube
//! constraint and the tail bound.

use l1_analysis::frames::Dictionary;
use l1_analysis::sensing::{measure, noise_bound, SensingOperator};
use l1_analysis::signals::{compressible_signal, CoefficientPhase};
use l1_analysis::solvers::{audit, l1_analysis, SolverConfig};

fn main() -> l1_analysis::Result<()> {
    let (n, m, s) = (64, 32, 4);
    let dict = Dictionary::identity_fourier(n)?;
    let (_, f) = compressible_signal(&dict, 2.0, CoefficientPhase::Sign, 8)?;
    let a = SensingOperator::gaussian(m, n, 8)?;
    let sigma = 0.02 * f.norm() / (m as f64).sqrt();
    let meas = measure(&a, &f.samples, sigma, 8)?;
    let eps = noise_bound(m, sigma);
    let report = l1_analysis(&a, &dict, &meas.y, eps, &SolverConfig::default())?;
    let d = audit(&a, &dict, &f.samples, &report.f_hat.samples, s)?;
    println!("cone:  {:.4} <= {:.4} (slack {:.2e})", d.cone_lhs, d.cone_rhs, d.cone_slack);
    println!("tube:  |A h| = {:.4e}, holds = {}", d.tube_norm, d.tube_holds(eps, report.tol_feas));
    println!("tail:  {:.4e} <= {:.4e} (ratio {:.3}), holds = {}", d.tail_lhs, d.tail_rhs, d.tail_ratio, d.tail_holds());
    Ok(())
}
