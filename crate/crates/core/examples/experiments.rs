//! Run experiments from a flat config and write their CSV tables.
//!
//! Pass an experiment name to run it at its default size, for example
//! `cargo run --release --example experiments -- noise-curve`. Without an
//! argument a reduced Dirac-comb run and the constants sweep are written to
//! a temporary directory.

use l1_analysis::config::ExperimentConfig;
use l1_analysis::experiments::run;

fn main() -> l1_analysis::Result<()> {
    let configs = match std::env::args().nth(1) {
        Some(name) => vec![format!("experiment = {name}\n")],
        None => vec![
            "experiment = dirac-comb\nn = 36\nm = 20\ntrials = 3\nseed = 1\n".to_string(),
            "experiment = constants\n".to_string(),
        ],
    };
    let dir = std::env::temp_dir().join("l1a-example");
    for text in configs {
        let cfg = ExperimentConfig::parse(&text)?;
        let out = run(&cfg)?;
        for path in out.write(&dir)? {
            println!("wrote {}", path.display());
        }
        println!("{}", out.summary_json()?);
    }
    Ok(())
}
