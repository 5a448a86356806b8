//! Test signals: radar pulse trains, the Dirac comb and compressible
//! signals, with their analysis-coefficient decay.

use l1_analysis::frames::{tighten, Dictionary, GaborParams};
use l1_analysis::io::signal_to_csv;
use l1_analysis::signals::{compressible_signal, dirac_comb, radar_pulse_train, tail_l1, CoefficientPhase, PulseParams};

fn main() -> l1_analysis::Result<()> {
    let n = 1024;
    let train = radar_pulse_train(n, &PulseParams::desk_scale(3))?;
    for p in &train.pulses {
        println!("pulse at sample {} with carrier {:.3} cycles/sample", p.start, p.frequency);
    }

    let dict = tighten(&Dictionary::gabor(n, GaborParams::with_redundancy(32, 8))?)?;
    let coeffs = dict.analyze(&train.signal.samples);
    for s in [10, 30, 100, 300] {
        println!("l1 tail of D^*f beyond the {s} largest: {:.3}", tail_l1(&coeffs, s));
    }

    let comb = dirac_comb(16)?;
    print!("{}", signal_to_csv(&comb));

    let small = Dictionary::oversampled_dft(32, 2)?;
    let (x, f) = compressible_signal(&small, 1.5, CoefficientPhase::Sign, 0)?;
    println!("compressible: d = {}, |f| = {:.3}", x.len(), f.norm());
    Ok(())
}
