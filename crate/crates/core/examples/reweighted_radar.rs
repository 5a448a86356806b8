//! Plain against reweighted l1-analysis on a small radar pulse train.

use l1_analysis::experiments::{noise_curve_params, tight_gabor};
use l1_analysis::linop::LinearOperator;
use l1_analysis::sensing::SensingOperator;
use l1_analysis::signals::{metrics, radar_pulse_train};
use l1_analysis::solvers::{reweighted_l1_analysis_with_passes, Reweighting, SolverConfig};

fn main() -> l1_analysis::Result<()> {
    let (n, m) = (256, 100);
    let dict = tight_gabor(n, 8, 4)?;
    let f = radar_pulse_train(n, &noise_curve_params(n, 5))?.signal;
    let a = SensingOperator::gaussian(m, n, 5)?;
    let y = a.apply(&f.samples);
    let cfg = SolverConfig { real_signal: true, ..SolverConfig::default() };
    let (last, passes) = reweighted_l1_analysis_with_passes(&a, &dict, &y, 0.0, &Reweighting::default(), &cfg)?;
    for (k, pass) in passes.iter().enumerate() {
        let met = metrics(&pass.f_hat.samples, &f.samples)?;
        println!("pass {k}: rmse {:.4e}, {} iterations", met.rmse, pass.iterations);
    }
    println!("reweighted total: {} iterations, converged = {}", last.iterations, last.converged);
    Ok(())
}
