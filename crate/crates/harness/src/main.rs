use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use mcm_core::biased::{optimal_distribution, run_biased, run_pauli_sum_biased, run_stabilizer_biased, PauliSumObservable, StabilizerObservable};
use mcm_core::circuit::{synthesize, Circuit};
use mcm_core::mub::build_ensemble;
use mcm_core::rng::{derive_seed, stream_rng};
use mcm_core::shadow::{run_protocol, EstimateSeries, McmSetup, Protocol};
use mcm_core::statesim::{build_observable, prepare_named, DenseObservable, ObservableKind, StateKind, StateVector};
use mcm_harness::oracles::{parse_suites, run_oracles};
use mcm_harness::output::write_csv;
use mcm_harness::{run_experiment, ExperimentConfig};
use serde::Serialize;

/// Env var overriding the worker thread count.
const THREADS_ENV: &str = "MCM_THREADS";

#[derive(Parser)]
#[command(name = "mcm", version, about = "Minimal Clifford measurement shadow estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the tableaus and generators of the n-qubit ensemble as JSON.
    Ensemble {
        #[arg(long)]
        n: usize,
        /// Only `json` is available.
        #[arg(long, value_enum, default_value_t = DumpFormat::Json)]
        format: DumpFormat,
    },
    /// Print the measurement circuit of one ensemble element.
    Synth {
        #[arg(long)]
        n: usize,
        /// Element index: 0 is the computational basis, v + 1 is label v.
        #[arg(long)]
        index: usize,
        #[arg(long, value_enum, default_value_t = CircuitFormat::Text)]
        format: CircuitFormat,
    },
    /// Estimate tr(ρO) with one protocol and report mean and variance.
    Estimate(EstimateArgs),
    /// Run a configured experiment grid and write CSV rows.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Output path; defaults to the config's `output`, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the exact self-check suites.
    Oracle {
        /// `all` or a comma-separated list of suite names.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CircuitFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpFormat {
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum StateArg {
    Zero,
    Ghz,
    GhzTheta,
    Haar,
    /// The stabilizer state of `--obs-stab-file`.
    Stab,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObsArg {
    Ghz,
    GhzOffdiag,
    Mixture,
    ProductXz,
    Local,
    Identity,
}

#[derive(clap::Args)]
struct EstimateArgs {
    #[arg(long, default_value = "mcm")]
    protocol: Protocol,
    #[arg(long, value_enum, default_value_t = StateArg::Ghz)]
    state: StateArg,
    #[arg(long, value_enum, default_value_t = ObsArg::Ghz)]
    obs: ObsArg,
    /// Qubit count; taken from the observable file when one is given.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    shots: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// θ for `ghz-theta`, `product-xz` and `local`.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    theta: f64,
    /// Mixing weight for `mixture`.
    #[arg(long, default_value_t = 0.5)]
    a: f64,
    /// Locality for `local`.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Observable as lines of `coeff pauli-string`.
    #[arg(long, conflicts_with = "obs_stab_file")]
    obs_pauli_file: Option<PathBuf>,
    /// Observable `V†|0⟩⟨0|V` with `V` in circuit text format.
    #[arg(long)]
    obs_stab_file: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct EstimateReport {
    protocol: Protocol,
    n: usize,
    shots: usize,
    seed: u64,
    mean: f64,
    variance: f64,
    elapsed_ms: u128,
}

enum Observable {
    Dense(DenseObservable),
    PauliSum(PauliSumObservable),
    Stabilizer(StabilizerObservable),
}

impl Observable {
    fn dense(&self) -> mcm_core::Result<DenseObservable> {
        match self {
            Observable::Dense(o) => Ok(o.clone()),
            Observable::PauliSum(o) => o.to_dense(),
            Observable::Stabilizer(o) => o.to_dense(),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_observable(args: &EstimateArgs) -> Result<(usize, Observable)> {
    if let Some(p) = &args.obs_pauli_file {
        let o = PauliSumObservable::parse(&read(p)?)?;
        return Ok((o.n(), Observable::PauliSum(o)));
    }
    if let Some(p) = &args.obs_stab_file {
        let v = Circuit::parse_text(&read(p)?, args.n)?;
        return Ok((v.n(), Observable::Stabilizer(StabilizerObservable::new(v))));
    }
    let Some(n) = args.n else { bail!("--n is required without an observable file") };
    let kind = match args.obs {
        ObsArg::Ghz => ObservableKind::GhzFidelity,
        ObsArg::GhzOffdiag => ObservableKind::GhzOffDiagonal,
        ObsArg::Mixture => ObservableKind::GhzMixture(args.a),
        ObsArg::ProductXz => ObservableKind::ProductXz(args.theta),
        ObsArg::Local => ObservableKind::Local { k: args.k, theta: args.theta },
        ObsArg::Identity => ObservableKind::Identity,
    };
    Ok((n, Observable::Dense(build_observable(&kind, n)?)))
}

fn prepare_state(args: &EstimateArgs, n: usize, obs: &Observable) -> Result<StateVector> {
    let mut rng = stream_rng(derive_seed(args.seed, "state"), 0);
    let kind = match args.state {
        StateArg::Zero => StateKind::Zero,
        StateArg::Ghz => StateKind::Ghz,
        StateArg::GhzTheta => StateKind::GhzTheta(args.theta),
        StateArg::Haar => StateKind::Haar,
        StateArg::Stab => match obs {
            Observable::Stabilizer(o) => return Ok(o.state()?),
            _ => bail!("--state stab needs --obs-stab-file"),
        },
    };
    Ok(prepare_named(&kind, n, &mut rng)?)
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    let (n, obs) = load_observable(args)?;
    if let Some(given) = args.n {
        if given != n {
            bail!("--n {given} disagrees with the {n}-qubit observable");
        }
    }
    let psi = prepare_state(args, n, &obs)?;
    let start = Instant::now();
    let setup = McmSetup::new(n)?;
    let series: EstimateSeries = match (args.protocol, &obs) {
        (Protocol::Biased, Observable::PauliSum(o)) => run_pauli_sum_biased(&setup, &psi, o, args.shots, args.seed)?,
        (Protocol::Biased, Observable::Stabilizer(o)) => run_stabilizer_biased(&setup, &psi, o, args.shots, args.seed)?,
        (Protocol::Biased, Observable::Dense(o)) => {
            run_biased(&setup, &psi, o, &optimal_distribution(o, &setup)?, args.shots, args.seed)?
        }
        (p, o) => run_protocol(p, Some(&setup), &psi, &o.dense()?, args.shots, args.seed)?,
    };
    let s = series.summary();
    let report = EstimateReport {
        protocol: args.protocol,
        n,
        shots: args.shots,
        seed: args.seed,
        mean: s.mean,
        variance: s.variance,
        elapsed_ms: start.elapsed().as_millis(),
    };
    let json = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    Ok(())
}

fn experiment(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let cfg = ExperimentConfig::from_json(&read(config)?)?;
    let rows = run_experiment(&cfg)?;
    match out.or_else(|| cfg.output.clone()) {
        Some(path) => {
            let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&rows, file)?;
            info!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Ensemble { n, format: DumpFormat::Json } => {
            let ens = build_ensemble(n)?;
            println!("{}", serde_json::to_string_pretty(&ens.to_dump())?);
        }
        Command::Synth { n, index, format } => {
            let ens = build_ensemble(n)?;
            let c = synthesize(&ens, index)?;
            let label = ens.label(index);
            let mut stdout = std::io::stdout().lock();
            match format {
                CircuitFormat::Text => write!(stdout, "{}", c.to_text(label))?,
                CircuitFormat::Json => writeln!(stdout, "{}", serde_json::to_string_pretty(&c.to_json(label))?)?,
            }
        }
        Command::Estimate(args) => estimate(&args)?,
        Command::Experiment { config, out } => experiment(&config, out)?,
        Command::Oracle { suite, max_n, seed } => {
            let report = run_oracles(&parse_suites(&suite)?, max_n, seed);
            for c in &report.checks {
                println!("{} {:<10} n={:<2} {}", if c.passed { "PASS" } else { "FAIL" }, c.suite.name(), c.n, c.detail);
            }
            if !report.all_passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(t) if t > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
                    eprintln!("error: cannot configure {t} threads: {e}");
                    return ExitCode::FAILURE;
                }
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got {v:?}");
                return ExitCode::FAILURE;
            }
        }
    }
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
