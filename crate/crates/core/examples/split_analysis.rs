//! Separating spikes from tones with split analysis.

use l1_analysis::frames::Dictionary;
use l1_analysis::linop::{vec, LinearOperator, C64};
use l1_analysis::sensing::SensingOperator;
use l1_analysis::solvers::{split_analysis, SolverConfig};

fn main() -> l1_analysis::Result<()> {
    let (n, m) = (32, 24);
    let spikes = Dictionary::identity(n);
    let tones = Dictionary::dft(n)?;
    let mut x1 = vec::zeros(n);
    x1[5] = C64::new(1.0, 0.0);
    x1[20] = C64::new(-0.7, 0.0);
    let mut x2 = vec::zeros(n);
    x2[3] = C64::new(0.8, 0.0);
    let (f1, f2) = (spikes.synthesize(&x1), tones.synthesize(&x2));
    let f = vec::add(&f1, &f2);
    let a = SensingOperator::gaussian(m, n, 4)?;
    let y = a.apply(&f);
    let report = split_analysis(&a, &spikes, &tones, &y, 0.0, &SolverConfig::default())?;
    let (g1, g2) = report.components.as_ref().expect("split analysis returns both components");
    println!("spike component error {:.2e}", vec::dist2(g1, &f1) / vec::norm2(&f1));
    println!("tone component error  {:.2e}", vec::dist2(g2, &f2) / vec::norm2(&f2));
    println!("objective {:.6}, converged = {}", report.objective, report.converged);
    Ok(())
}
