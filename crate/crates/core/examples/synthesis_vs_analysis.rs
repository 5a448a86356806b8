//! l1-synthesis and l1-analysis on the same measurements. With an
//! orthonormal basis the two programs coincide; with a redundant frame they
//! differ.

use l1_analysis::frames::Dictionary;
use l1_analysis::linop::{vec, LinearOperator};
use l1_analysis::sensing::SensingOperator;
use l1_analysis::signals::{compressible_signal, metrics, CoefficientPhase};
use l1_analysis::solvers::{l1_analysis, l1_synthesis, SolverConfig};

fn main() -> l1_analysis::Result<()> {
    let (n, m) = (64, 40);
    let a = SensingOperator::gaussian(m, n, 2)?;
    let cfg = SolverConfig::default();
    for (name, dict) in [("DFT", Dictionary::dft(n)?), ("DFT x4", Dictionary::oversampled_dft(n, 4)?)] {
        let (_, f) = compressible_signal(&dict, 1.5, CoefficientPhase::Phase, 2)?;
        let y = a.apply(&f.samples);
        let an = l1_analysis(&a, &dict, &y, 0.0, &cfg)?;
        let sy = l1_synthesis(&a, &dict, &y, 0.0, &cfg)?;
        println!(
            "{name}: analysis error {:.3e}, synthesis error {:.3e}, difference {:.2e}",
            metrics(&an.f_hat.samples, &f.samples)?.relative_error,
            metrics(&sy.f_hat.samples, &f.samples)?.relative_error,
            vec::dist2(&an.f_hat.samples, &sy.f_hat.samples) / f.norm(),
        );
    }
    Ok(())
}
