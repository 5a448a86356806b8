//! Random sensing operators and noisy measurements.

use l1_analysis::linop::{vec, LinearOperator};
use l1_analysis::sensing::{measure, noise_bound, SensingOperator};
use l1_analysis::signals::dirac_comb;

fn main() -> l1_analysis::Result<()> {
    let (m, n, seed) = (32, 64, 11);
    let f = dirac_comb(n)?;
    for a in [
        SensingOperator::gaussian(m, n, seed)?,
        SensingOperator::bernoulli(m, n, seed)?,
        SensingOperator::subsampled_dft_sign(m, n, seed)?,
    ] {
        let ratio = vec::norm2_sq(&a.apply(&f.samples)) / vec::norm2_sq(&f.samples);
        println!("{:?}: |Af|^2 / |f|^2 = {ratio:.3}", a.kind());
    }

    let a = SensingOperator::gaussian(m, n, seed)?;
    let sigma = 0.05;
    let meas = measure(&a, &f.samples, sigma, seed)?;
    println!("noise energy {:.4} against the bound eps = {:.4}", meas.noise_norm, noise_bound(m, sigma));

    // The descriptor is enough to rebuild the identical operator.
    let again = SensingOperator::from_descriptor(&a.descriptor())?;
    println!("rebuilt from descriptor: identical = {}", again.apply(&f.samples) == a.apply(&f.samples));
    Ok(())
}
