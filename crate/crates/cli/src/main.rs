use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use emimo::harness::{exit_code, run, DetectorKind, Experiment, ExperimentConfig};
use emimo::Error;

#[derive(Parser)]
#[command(name = "emimo", version, about = "Outage, corruption and coded-error experiments for precoded MIMO links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outage probability per SNR point.
    Outage(Overrides),
    /// Coded word error rate of the LDPC chain.
    Wer(Overrides),
    /// Probability that a Haar precoder lands in a corrupt set.
    Pcp(Overrides),
    /// Outage of the two-branch rotated BPSK example.
    Toy(Overrides),
    /// Kolmogorov-Smirnov check of Haar column magnitudes.
    HaarTest(Overrides),
    /// Mean mutual information per SNR point.
    MiProbe(Overrides),
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// JSON configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "n-t")]
    n_t: Option<usize>,
    #[arg(long = "n-r")]
    n_r: Option<usize>,
    /// QAM order (2 for BPSK).
    #[arg(long)]
    modulation: Option<usize>,
    /// none, emi, emi_<N>, golden, alamouti, rot_<deg> or random_rot.
    #[arg(long)]
    scheme: Option<String>,
    /// Spectral efficiency in bits per channel use.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    coding_rate: Option<f64>,
    /// Comma-separated Eb/N0 points in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr_grid: Option<Vec<f64>>,
    #[arg(long)]
    n_trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    interleaver_seed: Option<u64>,
    #[arg(long, value_parser = parse_detector)]
    detector: Option<DetectorKind>,
    #[arg(long)]
    sphere_capacity: Option<usize>,
    #[arg(long)]
    noise_samples: Option<usize>,
    #[arg(long)]
    emi_precoders: Option<usize>,
    /// Code length in bits.
    #[arg(long)]
    code_n_b: Option<usize>,
    #[arg(long)]
    code_seed: Option<u64>,
    /// Parity-check matrix in alist format, replacing the constructed code.
    #[arg(long)]
    alist: Option<PathBuf>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    detect_every: Option<usize>,
    /// c1, c2 or c3.
    #[arg(long)]
    corrupt_set: Option<String>,
    #[arg(long)]
    corrupt_exponent: Option<f64>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Record wall time per row.
    #[arg(long)]
    timing: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn parse_detector(s: &str) -> Result<DetectorKind, String> {
    match s {
        "exhaustive" => Ok(DetectorKind::Exhaustive),
        "sphere" => Ok(DetectorKind::Sphere),
        _ => Err(format!("unknown detector `{s}`")),
    }
}

fn resolve(experiment: Experiment, o: Overrides) -> Result<(ExperimentConfig, bool), Error> {
    let mut cfg = match &o.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
                field: "config".into(),
                msg: format!("{}: {e}", path.display()),
            })?;
            let cfg = ExperimentConfig::from_json(&text)?;
            if cfg.experiment != experiment {
                return Err(Error::Config {
                    field: "experiment".into(),
                    msg: format!("file describes `{}` but the subcommand is `{experiment}`", cfg.experiment),
                });
            }
            cfg
        }
        None => ExperimentConfig::for_experiment(experiment),
    };
    macro_rules! set {
        ($($flag:ident => $field:expr),* $(,)?) => {
            $(if let Some(v) = o.$flag { $field = v; })*
        };
    }
    set!(
        n_t => cfg.n_t,
        n_r => cfg.n_r,
        modulation => cfg.modulation,
        scheme => cfg.scheme,
        snr_grid => cfg.snr_grid,
        n_trials => cfg.n_trials,
        seed => cfg.seed,
        interleaver_seed => cfg.interleaver_seed,
        detector => cfg.detector,
        sphere_capacity => cfg.sphere_capacity,
        noise_samples => cfg.noise_samples,
        emi_precoders => cfg.emi_precoders,
        code_n_b => cfg.code.n_b,
        code_seed => cfg.code.seed,
        max_iters => cfg.max_iters,
        detect_every => cfg.detect_every,
        corrupt_set => cfg.corrupt_set,
        corrupt_exponent => cfg.corrupt_exponent,
        workers => cfg.workers,
        output => cfg.output,
    );
    if let Some(r) = o.rate {
        cfg.rate = Some(r);
    }
    if let Some(rc) = o.coding_rate {
        cfg.coding_rate = Some(rc);
        cfg.rate = o.rate;
    }
    if o.alist.is_some() {
        cfg.code.alist = o.alist;
    }
    cfg.timing |= o.timing;
    cfg.validate()?;
    Ok((cfg, o.print_config))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (experiment, overrides) = match cli.command {
        Command::Outage(o) => (Experiment::Outage, o),
        Command::Wer(o) => (Experiment::Wer, o),
        Command::Pcp(o) => (Experiment::Pcp, o),
        Command::Toy(o) => (Experiment::Toy, o),
        Command::HaarTest(o) => (Experiment::HaarTest, o),
        Command::MiProbe(o) => (Experiment::MiProbe, o),
    };
    let result = resolve(experiment, overrides).and_then(|(cfg, print_only)| {
        if print_only {
            println!("{}", cfg.to_json());
            return Ok(());
        }
        let rows = run(&cfg)?;
        eprintln!("wrote {} rows to {}", rows.len(), cfg.output.display());
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
