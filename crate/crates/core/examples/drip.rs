//! D-RIP constants of a Gaussian operator over spikes and sines: the exact
//! value by enumeration against the Monte-Carlo lower bound, and the
//! concentration of |A v|^2.

use l1_analysis::certify::{concentration_check, drip_exact_small, drip_monte_carlo};
use l1_analysis::frames::Dictionary;
use l1_analysis::linop::{vec, C64};
use l1_analysis::sensing::SensingOperator;

fn main() -> l1_analysis::Result<()> {
    let dict = Dictionary::identity_fourier(8)?;
    let a = SensingOperator::gaussian(6, 8, 7)?;
    for s in 1..=3 {
        let exact = drip_exact_small(&a, &dict, s)?;
        let mc = drip_monte_carlo(&a, &dict, s, 10_000, 0)?;
        println!("s = {s}: exact {:.4} over {} supports, Monte-Carlo {:.4}", exact.delta_hat, exact.supports_checked.unwrap_or(0), mc.delta_hat);
    }

    let mut v = vec::zeros(200);
    v[0] = C64::new(1.0, 0.0);
    for m in [25, 50, 100] {
        let rate = concentration_check(|seed| SensingOperator::gaussian(m, 200, seed), &v, 0.5, 1000, 1)?;
        println!("m = {m}: P(| |Av|^2 - 1 | > 0.5) ~ {rate:.3}");
    }
    Ok(())
}
