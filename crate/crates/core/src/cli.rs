//! The `l1a` command line. The binary only forwards to [`main_with_args`].
//!
//! Exit codes: 0 success, 1 usage or data error, 2 numerical
//! non-convergence or an exceeded enumeration cap.
//!
//! Every command is a pure function of its flags, files and seed, so
//! repeated runs write byte-identical output.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::certify::{
    concentration_check, drip_exact_small_capped, drip_monte_carlo, theorem_constants_with, K2Form,
    DEFAULT_ENUMERATION_CAP,
};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::experiments::{self, radar_params};
use crate::frames::{coherence, tighten, Dictionary, GaborParams};
use crate::io::{self, num};
use crate::linop::{vec, LinearOperator, C64};
use crate::sensing::{measure, noise_bound, SensingDescriptor, SensingKind, SensingOperator};
use crate::signals::{compressible_signal, dirac_comb, metrics, radar_pulse_train, CoefficientPhase, Signal};
use crate::solvers::{
    audit, l1_analysis, l1_synthesis, reweighted_l1_analysis, split_analysis, Method, Reweighting, SolverConfig,
};

/// Default output directory when neither a flag nor a config names one.
pub const OUTPUT_DIR_ENV: &str = "L1A_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "l1a", version, about = "Compressed sensing with redundant dictionaries via l1-analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover a signal from measurements and write a JSON report.
    Recover(RecoverArgs),
    /// Run a desk-scale experiment and write its CSV tables.
    Experiment(ExperimentArgs),
    /// Coherence, D-RIP and concentration estimates, and error-bound constants.
    Certify {
        #[command(subcommand)]
        command: CertifyCommand,
    },
    /// Write signals, operators or measurements as CSV.
    Generate {
        #[command(subcommand)]
        command: GenerateCommand,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DictChoice {
    Identity,
    Dft,
    /// Oversampled DFT, `--oversampling` times redundant.
    Odft,
    /// `[I F] / sqrt(2)`.
    ConcatIf,
    /// Gabor frame with unit-norm atoms.
    Gabor,
    /// Canonical tight frame of the Gabor frame.
    TightGabor,
    /// Dense matrix read from `--dict-file`.
    Dense,
}

#[derive(Clone, Debug, Args)]
pub struct DictArgs {
    #[arg(long, value_enum, default_value = "identity")]
    pub dict: DictChoice,
    /// Redundancy of `odft`, `gabor` and `tight-gabor`.
    #[arg(long)]
    pub oversampling: Option<usize>,
    /// Gabor time step in samples.
    #[arg(long)]
    pub time_step: Option<usize>,
    #[arg(long)]
    pub dict_file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SensingChoice {
    Gaussian,
    Bernoulli,
    /// Randomly subsampled DFT after random signs.
    Sdft,
    /// Dense matrix read from `--sensing-file`.
    Dense,
}

#[derive(Clone, Debug, Args)]
pub struct SensingArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub sensing: SensingChoice,
    /// Number of measurements.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub sensing_file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignalChoice {
    /// Unit spikes spaced `sqrt(n)` apart.
    Dirac,
    /// Real radar pulse train.
    Radar,
    /// `f = D x` with power-law coefficients.
    Compressible,
    /// Signal CSV read from `--signal-file`.
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Analysis,
    Reweighted,
    Synthesis,
    Split,
}

impl From<MethodChoice> for Method {
    fn from(m: MethodChoice) -> Self {
        match m {
            MethodChoice::Analysis => Method::Analysis,
            MethodChoice::Reweighted => Method::Reweighted,
            MethodChoice::Synthesis => Method::Synthesis,
            MethodChoice::Split => Method::Split,
        }
    }
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[arg(long, value_enum, default_value = "analysis")]
    pub method: MethodChoice,
    /// Signal dimension; inferred from input files when left out.
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub dict: DictArgs,
    /// Second dictionary of split analysis.
    #[arg(long, value_enum, default_value = "dft")]
    pub dict2: DictChoice,
    #[command(flatten)]
    pub sensing: SensingArgs,
    /// Ground truth used to simulate measurements and to score the recovery.
    #[arg(long, value_enum)]
    pub signal: Option<SignalChoice>,
    #[arg(long)]
    pub signal_file: Option<PathBuf>,
    /// Measurement CSV; simulated from the ground truth when left out.
    #[arg(long)]
    pub measurements: Option<PathBuf>,
    /// Noise standard deviation of simulated measurements.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Fidelity radius; defaults to the noise bound of `--sigma`.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Decay exponent of the compressible signal.
    #[arg(long, default_value_t = 1.5)]
    pub q: f64,
    /// Total reweighted solves.
    #[arg(long, default_value_t = 4)]
    pub rw_iters: usize,
    /// Sparsity level for the audit and the reweighting offset.
    #[arg(long)]
    pub s: Option<usize>,
    /// Restrict the unknown to real vectors.
    #[arg(long)]
    pub real: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol_rel: Option<f64>,
    /// Also write per-iteration objective and feasibility.
    #[arg(long)]
    pub history: bool,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment name; may come from the config file instead.
    pub name: Option<String>,
    /// Flat `key = value` config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub oversampling: Option<usize>,
    #[arg(long)]
    pub time_step: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    /// Comma-separated relative noise levels.
    #[arg(long)]
    pub sigmas: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub rw_iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol_rel: Option<f64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub dict: DictArgs,
    #[command(flatten)]
    pub sensing: SensingArgs,
    /// Seed of the sensing operator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub s: usize,
}

#[derive(Debug, Subcommand)]
pub enum CertifyCommand {
    /// Largest normalized inner product between distinct atoms.
    Coherence {
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        dict: DictArgs,
    },
    /// Monte-Carlo lower bound on the D-RIP constant.
    DripMc {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Seed of the random supports; defaults to `--seed`.
        #[arg(long)]
        mc_seed: Option<u64>,
    },
    /// Exact D-RIP constant by enumerating every support.
    DripExact {
        #[command(flatten)]
        pair: PairArgs,
        /// Largest number of supports to enumerate.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u128,
    },
    /// Fraction of random operators whose `|A v|^2` leaves `(1 +- delta) |v|^2`.
    Concentration {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value = "gaussian")]
        sensing: SensingChoice,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Test vector; the first standard basis vector when left out.
        #[arg(long)]
        vector_file: Option<PathBuf>,
    },
    /// Error-bound constants from isometry constants.
    Constants {
        /// `delta_{s+M}`.
        #[arg(long)]
        delta: f64,
        /// `delta_M`; defaults to `--delta`.
        #[arg(long)]
        delta_m: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        c1: f64,
        #[arg(long, default_value_t = 0.1)]
        c2: f64,
        #[arg(long, default_value_t = 1.0 / 6.0)]
        rho: f64,
        /// Use the `K2` that carries the cross term through the tail estimate.
        #[arg(long)]
        derived: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenerateCommand {
    /// A test signal as signal CSV.
    Signal {
        #[arg(long, value_enum)]
        kind: SignalChoice,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        dict: DictArgs,
        #[arg(long, default_value_t = 1.5)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// A seeded sensing operator as dense matrix CSV.
    Sensing {
        #[arg(long, value_enum, default_value = "gaussian")]
        sensing: SensingChoice,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// A dictionary as dense matrix CSV.
    Dictionary {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        dict: DictArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Noisy measurements `y = A f + z` of a signal CSV as signal CSV.
    Measurements {
        #[arg(long)]
        signal_file: PathBuf,
        #[command(flatten)]
        sensing: SensingArgs,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (program name first), runs the command, and returns the
/// exit code. Results go to `out`, errors to `err`.
pub fn main_with_args<I, T>(args: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::EnumerationCap { .. } => 2,
                _ => 1,
            }
        }
    }
}

fn run(command: Command, out: &mut dyn std::io::Write) -> Result<i32> {
    match command {
        Command::Recover(args) => recover(args, out),
        Command::Experiment(args) => experiment(args, out),
        Command::Certify { command } => certify(command, out),
        Command::Generate { command } => generate(command, out),
    }
}

fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn require_n(n: Option<usize>, what: &str) -> Result<usize> {
    n.ok_or_else(|| usage(format!("--n is required for {what}")))
}

/// Builds the dictionary named by `args` on `n` samples.
pub fn build_dictionary(choice: DictChoice, args: &DictArgs, n: usize) -> Result<Dictionary> {
    let gabor = || {
        let r = args.oversampling.unwrap_or(4);
        let a = args.time_step.unwrap_or_else(|| default_time_step(n));
        Dictionary::gabor(n, GaborParams::with_redundancy(a, r))
    };
    let dict = match choice {
        DictChoice::Identity => Dictionary::identity(n),
        DictChoice::Dft => Dictionary::dft(n)?,
        DictChoice::Odft => Dictionary::oversampled_dft(n, args.oversampling.unwrap_or(2))?,
        DictChoice::ConcatIf => Dictionary::identity_fourier(n)?,
        DictChoice::Gabor => gabor()?,
        DictChoice::TightGabor => tighten(&gabor()?)?,
        DictChoice::Dense => {
            let path = args.dict_file.as_ref().ok_or_else(|| usage("--dict dense needs --dict-file"))?;
            Dictionary::from_dense(io::read_matrix(path)?)
        }
    };
    if dict.n() != n {
        return Err(Error::DimensionMismatch(format!("dictionary has n={} rows but the signal has n={n}", dict.n())));
    }
    Ok(dict)
}

/// Largest power of two not above `sqrt(n)` that divides `n`.
fn default_time_step(n: usize) -> usize {
    let mut a = 1;
    while (2 * a) * (2 * a) <= n && n % (2 * a) == 0 {
        a *= 2;
    }
    a
}

fn build_sensing(args: &SensingArgs, n: usize, seed: u64) -> Result<SensingOperator> {
    let kind = match args.sensing {
        SensingChoice::Gaussian => SensingKind::Gaussian,
        SensingChoice::Bernoulli => SensingKind::Bernoulli,
        SensingChoice::Sdft => SensingKind::SubsampledDftSign,
        SensingChoice::Dense => {
            let path = args.sensing_file.as_ref().ok_or_else(|| usage("--sensing dense needs --sensing-file"))?;
            let a = SensingOperator::from_dense(io::read_matrix(path)?)?;
            if let Some(m) = args.m {
                if a.m() != m {
                    return Err(Error::DimensionMismatch(format!("sensing matrix has m={} rows but --m is {m}", a.m())));
                }
            }
            if a.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "sensing matrix acts on n={} columns but the signal has n={n}",
                    a.n()
                )));
            }
            return Ok(a);
        }
    };
    let m = args.m.ok_or_else(|| usage("--m is required for a generated sensing operator"))?;
    SensingOperator::from_descriptor(&SensingDescriptor { kind, m, n, seed })
}

/// `n` from the flag, else from the first input file that fixes it.
fn infer_n(n: Option<usize>, signal_file: Option<&Path>, sensing: &SensingArgs) -> Result<Option<usize>> {
    if n.is_some() {
        return Ok(n);
    }
    if let Some(p) = signal_file {
        return Ok(Some(io::read_signal(p)?.len()));
    }
    if let (SensingChoice::Dense, Some(p)) = (sensing.sensing, &sensing.sensing_file) {
        return Ok(Some(io::read_matrix(p)?.ncols()));
    }
    Ok(None)
}

fn make_signal(kind: SignalChoice, n: usize, dict: &Dictionary, q: f64, seed: u64, file: Option<&Path>) -> Result<Signal> {
    let signal = match kind {
        SignalChoice::Dirac => dirac_comb(n)?,
        SignalChoice::Radar => radar_pulse_train(n, &radar_params(n, seed))?.signal,
        SignalChoice::Compressible => compressible_signal(dict, q, CoefficientPhase::Phase, seed)?.1,
        SignalChoice::File => io::read_signal(file.ok_or_else(|| usage("--signal file needs --signal-file"))?)?,
    };
    if signal.len() != n {
        return Err(Error::DimensionMismatch(format!("signal has n={} samples but --n is {n}", signal.len())));
    }
    Ok(signal)
}

/// Number formatted to 12 significant digits, for printed scalars.
fn display(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    num(rounded)
}

fn recover(args: RecoverArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let signal_file = args.signal_file.as_deref().filter(|_| args.signal == Some(SignalChoice::File));
    let n = infer_n(args.n, signal_file, &args.sensing)?.ok_or_else(|| usage("--n is required"))?;
    let dict = build_dictionary(args.dict.dict, &args.dict, n)?;
    let a = build_sensing(&args.sensing, n, args.seed)?;
    let truth = args
        .signal
        .map(|kind| make_signal(kind, n, &dict, args.q, args.seed, args.signal_file.as_deref()))
        .transpose()?;
    let (y, eps) = match (&args.measurements, &truth) {
        (Some(path), _) => (io::read_signal(path)?.samples, args.eps.unwrap_or(0.0)),
        (None, Some(f)) => {
            let meas = measure(&a, &f.samples, args.sigma, args.seed)?;
            (meas.y, args.eps.unwrap_or_else(|| noise_bound(a.m(), args.sigma)))
        }
        (None, None) => return Err(usage("give --measurements or a ground truth with --signal")),
    };
    let mut cfg = SolverConfig { real_signal: args.real, history: args.history, seed: args.seed, ..SolverConfig::default() };
    if let Some(k) = args.max_iter {
        cfg.max_iter = k;
    }
    if let Some(t) = args.tol_rel {
        cfg.tol_rel = t;
    }
    let mut report = match args.method {
        MethodChoice::Analysis => l1_analysis(&a, &dict, &y, eps, &cfg)?,
        MethodChoice::Reweighted => {
            let rw = Reweighting { iters: args.rw_iters, sparsity: args.s };
            reweighted_l1_analysis(&a, &dict, &y, eps, &rw, &cfg)?
        }
        MethodChoice::Synthesis => l1_synthesis(&a, &dict, &y, eps, &cfg)?,
        MethodChoice::Split => {
            let d2 = build_dictionary(args.dict2, &args.dict, n)?;
            split_analysis(&a, &dict, &d2, &y, eps, &cfg)?
        }
    };
    if let Some(f) = &truth {
        report.relative_error = Some(metrics(&report.f_hat.samples, &f.samples)?.relative_error);
        let s = args.s.unwrap_or(a.m() / 4).clamp(1, dict.d());
        report.diagnostics = Some(audit(&a, &dict, &f.samples, &report.f_hat.samples, s)?);
    }

    let dir = args.output_dir.unwrap_or_else(default_output_dir);
    std::fs::create_dir_all(&dir)?;
    let json = report.to_json()? + "\n";
    std::fs::write(dir.join("report.json"), &json)?;
    io::write_signal(&dir.join("recovered.csv"), &report.f_hat)?;
    if let Some(h) = report.history_csv() {
        std::fs::write(dir.join("history.csv"), h)?;
    }
    out.write_all(json.as_bytes())?;
    Ok(if report.converged { 0 } else { 2 })
}

/// Config from the file (if any), the positional name, and flag overrides.
pub fn experiment_config(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::parse(&std::fs::read_to_string(path)?)?,
        None => {
            let name = args.name.as_deref().ok_or_else(|| usage("name an experiment or pass --config"))?;
            ExperimentConfig::new(name.parse::<ExperimentKind>()?)
        }
    };
    if let Some(name) = &args.name {
        cfg.experiment = name.parse()?;
    }
    let flags: [(&str, Option<String>); 13] = [
        ("n", args.n.map(|v| v.to_string())),
        ("m", args.m.map(|v| v.to_string())),
        ("d", args.d.map(|v| v.to_string())),
        ("oversampling", args.oversampling.map(|v| v.to_string())),
        ("time_step", args.time_step.map(|v| v.to_string())),
        ("s", args.s.map(|v| v.to_string())),
        ("sigmas", args.sigmas.clone()),
        ("trials", args.trials.map(|v| v.to_string())),
        ("rw_iters", args.rw_iters.map(|v| v.to_string())),
        ("seed", args.seed.map(|v| v.to_string())),
        ("max_iter", args.max_iter.map(|v| v.to_string())),
        ("tol_rel", args.tol_rel.map(num)),
        ("output_dir", args.output_dir.as_ref().map(|p| p.display().to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    Ok(cfg)
}

fn experiment(args: ExperimentArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let cfg = experiment_config(&args)?;
    let result = experiments::run(&cfg)?;
    let dir = cfg.output_dir.clone().unwrap_or_else(default_output_dir);
    for path in result.write(&dir)? {
        writeln!(out, "{}", path.display())?;
    }
    out.write_all((result.summary_json()? + "\n").as_bytes())?;
    Ok(if result.all_converged() { 0 } else { 2 })
}

#[derive(Serialize)]
struct ConcentrationReport {
    n: usize,
    m: usize,
    delta: f64,
    trials: usize,
    seed: u64,
    failure_rate: f64,
}

fn certify(command: CertifyCommand, out: &mut dyn std::io::Write) -> Result<i32> {
    let text = match command {
        CertifyCommand::Coherence { n, dict } => {
            let d = build_dictionary(dict.dict, &dict, require_n(n, "coherence")?)?;
            display(coherence(&d)?) + "\n"
        }
        CertifyCommand::DripMc { pair, trials, mc_seed } => {
            let (a, d) = pair_operators(&pair)?;
            let est = drip_monte_carlo(&a, &d, pair.s, trials, mc_seed.unwrap_or(pair.seed))?;
            serde_json::to_string_pretty(&est)? + "\n"
        }
        CertifyCommand::DripExact { pair, cap } => {
            let (a, d) = pair_operators(&pair)?;
            serde_json::to_string_pretty(&drip_exact_small_capped(&a, &d, pair.s, cap)?)? + "\n"
        }
        CertifyCommand::Concentration { n, m, sensing, delta, trials, seed, vector_file } => {
            let v = match vector_file {
                Some(p) => io::read_signal(&p)?.samples,
                None => {
                    let mut v = vec::zeros(n);
                    if n > 0 {
                        v[0] = C64::new(1.0, 0.0);
                    }
                    v
                }
            };
            if v.len() != n {
                return Err(Error::DimensionMismatch(format!("test vector has n={} entries but --n is {n}", v.len())));
            }
            let args = SensingArgs { sensing, m: Some(m), sensing_file: None };
            let rate = concentration_check(|s| build_sensing(&args, n, s), &v, delta, trials, seed)?;
            let rep = ConcentrationReport { n, m, delta, trials, seed, failure_rate: rate };
            serde_json::to_string_pretty(&rep)? + "\n"
        }
        CertifyCommand::Constants { delta, delta_m, c1, c2, rho, derived } => {
            let form = if derived { K2Form::Derived } else { K2Form::Verbatim };
            let rep = theorem_constants_with(delta, delta_m.unwrap_or(delta), c1, c2, rho, form)?;
            serde_json::to_string_pretty(&rep)? + "\n"
        }
    };
    out.write_all(text.as_bytes())?;
    Ok(0)
}

fn pair_operators(pair: &PairArgs) -> Result<(SensingOperator, Dictionary)> {
    let n = infer_n(pair.n, None, &pair.sensing)?.ok_or_else(|| usage("--n is required"))?;
    let d = build_dictionary(pair.dict.dict, &pair.dict, n)?;
    let a = build_sensing(&pair.sensing, n, pair.seed)?;
    Ok((a, d))
}

fn generate(command: GenerateCommand, out: &mut dyn std::io::Write) -> Result<i32> {
    let path = match command {
        GenerateCommand::Signal { kind, n, dict, q, seed, out: path } => {
            let d = build_dictionary(dict.dict, &dict, n)?;
            let f = make_signal(kind, n, &d, q, seed, None)?;
            io::write_signal(&path, &f)?;
            path
        }
        GenerateCommand::Sensing { sensing, m, n, seed, out: path } => {
            if sensing == SensingChoice::Dense {
                return Err(usage("dense sensing matrices are read, not generated"));
            }
            let a = build_sensing(&SensingArgs { sensing, m: Some(m), sensing_file: None }, n, seed)?;
            io::write_matrix(&path, &a.to_dense()?)?;
            path
        }
        GenerateCommand::Dictionary { n, dict, out: path } => {
            let d = build_dictionary(dict.dict, &dict, n)?;
            io::write_matrix(&path, &d.to_dense()?)?;
            path
        }
        GenerateCommand::Measurements { signal_file, sensing, sigma, seed, out: path } => {
            let f = io::read_signal(&signal_file)?;
            let a = build_sensing(&sensing, f.len(), seed)?;
            let meas = measure(&a, &f.samples, sigma, seed)?;
            io::write_signal(&path, &Signal::new(meas.y, "measurements"))?;
            path
        }
    };
    writeln!(out, "{}", path.display())?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = main_with_args(std::iter::once("l1a").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn coherence_of_spikes_and_sines() {
        let (code, out, _) = run_args(&["certify", "coherence", "--dict", "concat-if", "--n", "4"]);
        assert_eq!((code, out.as_str()), (0, "0.5\n"));
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run_args(&["frobnicate"]).0, 1);
        assert_eq!(run_args(&["experiment", "nope"]).0, 1);
        assert_eq!(run_args(&["certify", "coherence", "--dict", "concat-if"]).0, 1);
        assert_eq!(run_args(&["--help"]).0, 0);
    }

    #[test]
    fn enumeration_cap_exits_2() {
        let (code, _, err) = run_args(&[
            "certify", "drip-exact", "--dict", "concat-if", "--n", "8", "--m", "6", "--s", "3", "--cap", "10",
        ]);
        assert_eq!(code, 2);
        assert!(err.contains("Monte-Carlo"), "{err}");
    }

    #[test]
    fn default_time_steps() {
        assert_eq!(default_time_step(1024), 32);
        assert_eq!(default_time_step(256), 16);
        assert_eq!(default_time_step(12), 2);
        assert_eq!(default_time_step(7), 1);
    }

    #[test]
    fn display_rounds_to_twelve_digits() {
        assert_eq!(display(0.49999999999999994), "0.5");
        assert_eq!(display(61.93981), "61.93981");
    }

    #[test]
    fn flags_override_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        std::fs::write(&path, "experiment = noise-curve\nn = 128\ntrials = 3\n").unwrap();
        let cli = Cli::try_parse_from(["l1a", "experiment", "--config", path.to_str().unwrap(), "--trials", "2"]).unwrap();
        let Command::Experiment(args) = cli.command else { panic!() };
        let cfg = experiment_config(&args).unwrap();
        assert_eq!((cfg.experiment, cfg.n, cfg.trials), (ExperimentKind::NoiseCurve, Some(128), Some(2)));
    }
}
