//! Grid expansion and execution of the configured experiments.

use log::info;
use mcm_core::biased::{optimal_distribution, run_biased, run_stabilizer_biased, StabilizerObservable};
use mcm_core::rng::{derive_seed, derive_seed_index, stream_rng};
use mcm_core::shadow::{run_protocol, sample_full_clifford, McmSetup, Protocol};
use mcm_core::statesim::{build_observable, prepare_named, DenseObservable, ObservableKind, StateKind, StateVector};
use mcm_core::stats::{mean, sample_variance, summarize};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;

/// One grid point of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub protocol: Protocol,
    pub n: usize,
    pub theta: Option<f64>,
    pub a: Option<f64>,
    pub k: Option<usize>,
}

impl GridPoint {
    fn label(&self, kind: ExperimentKind) -> String {
        format!("{kind}/{}/{}/{:?}/{:?}/{:?}", self.protocol, self.n, self.theta, self.a, self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub protocol: Protocol,
    pub n: usize,
    pub theta: Option<f64>,
    pub a: Option<f64>,
    pub k: Option<usize>,
    /// Number of input states averaged over, for the Haar experiments.
    pub states: Option<usize>,
    pub shots: usize,
    /// Master seed of the configuration.
    pub seed: u64,
    /// Seed of this grid point, derived from the master seed and the point.
    pub run_seed: u64,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of `variance`: over shots for single-state rows, over
    /// states for averaged rows.
    pub variance_stderr: f64,
}

impl ResultRow {
    fn sort_key(&self) -> (ExperimentKind, Protocol, usize, f64, f64, usize) {
        (
            self.experiment,
            self.protocol,
            self.n,
            self.theta.unwrap_or(f64::NEG_INFINITY),
            self.a.unwrap_or(f64::NEG_INFINITY),
            self.k.unwrap_or(0),
        )
    }
}

/// Sorts rows by experiment, protocol, `n`, then parameters.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|x, y| {
        let (a, b) = (x.sort_key(), y.sort_key());
        a.0.cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.total_cmp(&b.3))
            .then(a.4.total_cmp(&b.4))
            .then(a.5.cmp(&b.5))
    });
}

pub fn grid(cfg: &ExperimentConfig) -> Vec<GridPoint> {
    let thetas: Vec<Option<f64>> = if cfg.thetas.is_empty() { vec![None] } else { cfg.thetas.iter().map(|t| Some(*t)).collect() };
    let avals: Vec<Option<f64>> = if cfg.a_values.is_empty() { vec![None] } else { cfg.a_values.iter().map(|a| Some(*a)).collect() };
    let ks: Vec<Option<usize>> = if cfg.k_values.is_empty() { vec![None] } else { cfg.k_values.iter().map(|k| Some(*k)).collect() };
    let mut out = vec![];
    for &protocol in &cfg.protocols {
        for n in cfg.n_range() {
            for &theta in &thetas {
                for &a in &avals {
                    for &k in &ks {
                        out.push(GridPoint { protocol, n, theta, a, k });
                    }
                }
            }
        }
    }
    out
}

/// Runs every grid point in parallel and returns the rows sorted.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let points = grid(cfg);
    info!("{}: {} grid points, {} shots each, seed {}", cfg.experiment, points.len(), cfg.shots, cfg.seed);
    let mut rows = points.par_iter().map(|p| run_point(cfg, p)).collect::<Result<Vec<_>>>()?;
    sort_rows(&mut rows);
    Ok(rows)
}

fn single_state_row(cfg: &ExperimentConfig, p: &GridPoint, run_seed: u64, values: &[f64]) -> ResultRow {
    let s = summarize(values);
    ResultRow {
        experiment: cfg.experiment,
        protocol: p.protocol,
        n: p.n,
        theta: p.theta,
        a: p.a,
        k: p.k,
        states: None,
        shots: cfg.shots,
        seed: cfg.seed,
        run_seed,
        mean: s.mean,
        variance: s.variance,
        variance_stderr: s.variance_stderr,
    }
}

/// Runs one protocol for a dense observable and a pure input state.
fn run_dense(setup: &McmSetup, protocol: Protocol, psi: &StateVector, o: &DenseObservable, shots: usize, seed: u64) -> Result<Vec<f64>> {
    let series = match protocol {
        Protocol::Biased => run_biased(setup, psi, o, &optimal_distribution(o, setup)?, shots, seed)?,
        p => run_protocol(p, Some(setup), psi, o, shots, seed)?,
    };
    Ok(series.values)
}

pub fn run_point(cfg: &ExperimentConfig, p: &GridPoint) -> Result<ResultRow> {
    let run_seed = derive_seed(cfg.seed, &p.label(cfg.experiment));
    let n = p.n;
    let setup = McmSetup::new(n)?;
    let mut rng = stream_rng(run_seed, u64::MAX);
    let theta = p.theta.unwrap_or(std::f64::consts::FRAC_PI_2);
    let (psi, o) = match cfg.experiment {
        ExperimentKind::GhzFidelity => (prepare_named(&StateKind::Ghz, n, &mut rng)?, build_observable(&ObservableKind::GhzFidelity, n)?),
        ExperimentKind::GhzOffdiag => (prepare_named(&StateKind::Ghz, n, &mut rng)?, build_observable(&ObservableKind::GhzOffDiagonal, n)?),
        ExperimentKind::GhzThetaBiased => {
            (prepare_named(&StateKind::GhzTheta(theta), n, &mut rng)?, build_observable(&ObservableKind::GhzFidelity, n)?)
        }
        ExperimentKind::ProductXzBiased => {
            (prepare_named(&StateKind::Zero, n, &mut rng)?, build_observable(&ObservableKind::ProductXz(theta), n)?)
        }
        ExperimentKind::OaSweep => {
            let a = p.a.unwrap_or(0.5);
            (prepare_named(&StateKind::Ghz, n, &mut rng)?, build_observable(&ObservableKind::GhzMixture(a), n)?)
        }
        ExperimentKind::LocalObservable => {
            let k = p.k.unwrap_or(1);
            (prepare_named(&StateKind::Zero, n, &mut rng)?, build_observable(&ObservableKind::Local { k, theta }, n)?)
        }
        ExperimentKind::HaarVsStabilizer => return run_haar_vs_stabilizer(cfg, p, &setup, run_seed),
        ExperimentKind::HaarAverage => return run_haar_average(cfg, p, &setup, run_seed),
    };
    let values = run_dense(&setup, p.protocol, &psi, &o, cfg.shots, run_seed)?;
    Ok(single_state_row(cfg, p, run_seed, &values))
}

/// Haar inputs shared by all protocols at a given `n`.
fn haar_states(cfg: &ExperimentConfig, n: usize) -> Result<Vec<StateVector>> {
    let mut rng = stream_rng(derive_seed(cfg.seed, &format!("{}/haar/{n}", cfg.experiment)), 0);
    (0..cfg.states).map(|_| prepare_named(&StateKind::Haar, n, &mut rng).map_err(Into::into)).collect()
}

fn averaged_row(cfg: &ExperimentConfig, p: &GridPoint, run_seed: u64, means: &[f64], variances: &[f64]) -> ResultRow {
    let spread = if variances.len() > 1 { (sample_variance(variances) / variances.len() as f64).sqrt() } else { f64::NAN };
    ResultRow {
        experiment: cfg.experiment,
        protocol: p.protocol,
        n: p.n,
        theta: p.theta,
        a: p.a,
        k: p.k,
        states: Some(variances.len()),
        shots: cfg.shots,
        seed: cfg.seed,
        run_seed,
        mean: mean(means),
        variance: mean(variances),
        variance_stderr: spread,
    }
}

/// The fixed stabilizer observable `V†|0⟩⟨0|V` used at a given `n`.
pub fn stabilizer_target(seed: u64, n: usize) -> StabilizerObservable {
    let mut rng = stream_rng(derive_seed(seed, &format!("haar_vs_stabilizer/clifford/{n}")), 0);
    StabilizerObservable::new(sample_full_clifford(n, &mut rng))
}

fn run_haar_vs_stabilizer(cfg: &ExperimentConfig, p: &GridPoint, setup: &McmSetup, run_seed: u64) -> Result<ResultRow> {
    let obs = stabilizer_target(cfg.seed, p.n);
    let o = obs.to_dense()?;
    let (mut means, mut vars) = (vec![], vec![]);
    for (i, psi) in haar_states(cfg, p.n)?.iter().enumerate() {
        let seed = derive_seed_index(run_seed, i as u64);
        let values = match p.protocol {
            Protocol::Biased => run_stabilizer_biased(setup, psi, &obs, cfg.shots, seed)?.values,
            proto => run_dense(setup, proto, psi, &o, cfg.shots, seed)?,
        };
        means.push(mean(&values));
        vars.push(sample_variance(&values));
    }
    Ok(averaged_row(cfg, p, run_seed, &means, &vars))
}

fn run_haar_average(cfg: &ExperimentConfig, p: &GridPoint, setup: &McmSetup, run_seed: u64) -> Result<ResultRow> {
    let states = haar_states(cfg, p.n)?;
    let o = DenseObservable::projector(&states[0]);
    let (mut means, mut vars) = (vec![], vec![]);
    for (i, psi) in states.iter().enumerate() {
        let values = run_dense(setup, p.protocol, psi, &o, cfg.shots, derive_seed_index(run_seed, i as u64))?;
        means.push(mean(&values));
        vars.push(sample_variance(&values));
    }
    Ok(averaged_row(cfg, p, run_seed, &means, &vars))
}
