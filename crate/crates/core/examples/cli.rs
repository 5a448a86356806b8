//! Drive the command line in-process, exactly as the `l1a` binary does.

use l1_analysis::cli::main_with_args;

fn main() {
    let dir = std::env::temp_dir().join("l1a-cli-example");
    let dir = dir.to_string_lossy().into_owned();
    let commands: [&[&str]; 3] = [
        &["l1a", "certify", "coherence", "--dict", "concat-if", "--n", "4"],
        &["l1a", "certify", "constants", "--delta", "0.25"],
        &["l1a", "recover", "--method", "analysis", "--dict", "concat-if", "--n", "64", "--m", "32", "--signal", "dirac", "--eps", "0", "--output-dir", &dir],
    ];
    for args in commands {
        let code = main_with_args(args.iter().copied(), &mut std::io::stdout(), &mut std::io::stderr());
        println!("exit code {code}");
    }
}
