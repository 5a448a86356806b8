//! Build the dictionaries the crate ships with and inspect their frame
//! properties.

use l1_analysis::frames::{coherence, frame_bounds, gram_pnorm_factor, tighten, Dictionary, GaborParams};
use l1_analysis::linop::{vec, C64};

fn main() -> l1_analysis::Result<()> {
    let n = 64;
    let spikes_and_sines = Dictionary::identity_fourier(n)?;
    println!("[I F]/sqrt(2): d = {}, tight = {}, coherence = {:.4}", spikes_and_sines.d(), spikes_and_sines.is_tight(), coherence(&spikes_and_sines)?);

    let odft = Dictionary::oversampled_dft(n, 4)?;
    println!("oversampled DFT x4: d = {}, coherence = {:.4}", odft.d(), coherence(&odft)?);

    let gabor = Dictionary::gabor(n, GaborParams::with_redundancy(8, 4))?;
    let (lo, hi) = frame_bounds(&gabor)?;
    println!("Gabor a=8 x4: d = {}, frame bounds [{lo:.4}, {hi:.4}]", gabor.d());

    let tight = tighten(&gabor)?;
    let (lo, hi) = frame_bounds(&tight)?;
    println!("canonical tight Gabor: bounds [{lo:.4}, {hi:.4}], tight = {}", tight.is_tight());

    // D D^* = I: synthesizing the analysis coefficients returns the signal.
    let f: Vec<C64> = (0..n).map(|t| C64::new((t as f64 * 0.3).sin(), 0.0)).collect();
    let back = tight.synthesize(&tight.analyze(&f));
    println!("tight frame reconstruction error: {:.2e}", vec::dist2(&back, &f));

    for p in [0.5, 1.0] {
        println!("Gram p-norm factor of [I F]/sqrt(2) at p = {p}: {:.4}", gram_pnorm_factor(&spikes_and_sines, p)?);
    }
    Ok(())
}
