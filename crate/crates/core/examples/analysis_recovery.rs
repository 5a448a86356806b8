//! Exact recovery of the Dirac comb in spikes and sines by l1-analysis.

use l1_analysis::frames::Dictionary;
use l1_analysis::linop::LinearOperator;
use l1_analysis::sensing::SensingOperator;
use l1_analysis::signals::{dirac_comb, metrics};
use l1_analysis::solvers::{l1_analysis, SolverConfig};

fn main() -> l1_analysis::Result<()> {
    let (n, m) = (64, 32);
    let dict = Dictionary::identity_fourier(n)?;
    let f = dirac_comb(n)?;
    let a = SensingOperator::gaussian(m, n, 1)?;
    let y = a.apply(&f.samples);
    let cfg = SolverConfig { real_signal: true, ..SolverConfig::default() };
    let report = l1_analysis(&a, &dict, &y, 0.0, &cfg)?;
    let err = metrics(&report.f_hat.samples, &f.samples)?.relative_error;
    println!("converged = {} after {} iterations", report.converged, report.iterations);
    println!("objective |D^* f_hat|_1 = {:.6}, relative error = {err:.2e}", report.objective);
    println!("{}", report.to_json()?);
    Ok(())
}
