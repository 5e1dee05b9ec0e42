//! Experiment configuration read from JSON.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use mcm_core::shadow::Protocol;
use mcm_core::statesim::MAX_QUBITS;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Largest register for the full-Clifford baseline.
pub const CLIFFORD_MAX_QUBITS: usize = 8;
/// Largest register for paths that enumerate all Pauli strings.
pub const PAULI_MAX_QUBITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// GHZ fidelity with a GHZ input.
    GhzFidelity,
    /// The off-diagonal part of the GHZ projector with a GHZ input.
    GhzOffdiag,
    /// GHZ fidelity of the phased GHZ state over a θ grid.
    GhzThetaBiased,
    /// Fidelity of Haar states with one random stabilizer state.
    HaarVsStabilizer,
    /// `[cos(θ/2)X + sin(θ/2)Z]^{⊗n}` on `|0…0⟩`.
    ProductXzBiased,
    /// GHZ input with the mixed diagonal/off-diagonal observable `O(a)`.
    OaSweep,
    /// `k`-local `(cos θ Z + sin θ X)^{⊗k}` on `|0…0⟩`.
    LocalObservable,
    /// Fidelities between Haar states, the first one used as observable.
    HaarAverage,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::GhzFidelity,
        ExperimentKind::GhzOffdiag,
        ExperimentKind::GhzThetaBiased,
        ExperimentKind::HaarVsStabilizer,
        ExperimentKind::ProductXzBiased,
        ExperimentKind::OaSweep,
        ExperimentKind::LocalObservable,
        ExperimentKind::HaarAverage,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::GhzFidelity => "ghz_fidelity",
            ExperimentKind::GhzOffdiag => "ghz_offdiag",
            ExperimentKind::GhzThetaBiased => "ghz_theta_biased",
            ExperimentKind::HaarVsStabilizer => "haar_vs_stabilizer",
            ExperimentKind::ProductXzBiased => "product_xz_biased",
            ExperimentKind::OaSweep => "oa_sweep",
            ExperimentKind::LocalObservable => "local_observable",
            ExperimentKind::HaarAverage => "haar_average",
        }
    }

    pub fn default_protocols(&self) -> Vec<Protocol> {
        use Protocol::*;
        match self {
            ExperimentKind::GhzFidelity | ExperimentKind::GhzOffdiag => vec![Pauli, FullClifford, Mcm],
            ExperimentKind::LocalObservable | ExperimentKind::HaarAverage => vec![Pauli, FullClifford, Mcm],
            ExperimentKind::GhzThetaBiased | ExperimentKind::HaarVsStabilizer | ExperimentKind::ProductXzBiased => {
                vec![FullClifford, Mcm, Biased]
            }
            ExperimentKind::OaSweep => vec![Mcm],
        }
    }

    fn default_n_range(&self) -> (usize, usize) {
        match self {
            ExperimentKind::GhzThetaBiased | ExperimentKind::HaarVsStabilizer => (6, 6),
            ExperimentKind::LocalObservable => (8, 8),
            _ => (3, 8),
        }
    }

    fn supports(&self, p: Protocol) -> bool {
        match p {
            Protocol::Biased => matches!(
                self,
                ExperimentKind::GhzThetaBiased
                    | ExperimentKind::HaarVsStabilizer
                    | ExperimentKind::ProductXzBiased
                    | ExperimentKind::GhzFidelity
                    | ExperimentKind::OaSweep
            ),
            _ => true,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment kind {s:?}")))
    }
}

/// `0.1π, 0.2π, …, 0.9π`.
pub fn default_thetas() -> Vec<f64> {
    (1..=9).map(|k| k as f64 * 0.1 * PI).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub n_min: Option<usize>,
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default = "default_shots")]
    pub shots: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub protocols: Vec<Protocol>,
    /// θ grid in radians.
    #[serde(default)]
    pub thetas: Vec<f64>,
    #[serde(default)]
    pub a_values: Vec<f64>,
    #[serde(default)]
    pub k_values: Vec<usize>,
    /// Number of Haar states for the averaged experiments.
    #[serde(default = "default_states")]
    pub states: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_shots() -> usize {
    10_000
}

fn default_seed() -> u64 {
    42
}

fn default_states() -> usize {
    100
}

impl ExperimentConfig {
    /// A configuration with every grid left at its default.
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            n_min: None,
            n_max: None,
            shots: default_shots(),
            seed: default_seed(),
            protocols: vec![],
            thetas: vec![],
            a_values: vec![],
            k_values: vec![],
            states: default_states(),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.resolved()
    }

    /// Fills defaults for unset grids and validates the result.
    pub fn resolved(mut self) -> Result<Self> {
        let kind = self.experiment;
        let (lo, hi) = kind.default_n_range();
        self.n_min.get_or_insert(lo);
        self.n_max.get_or_insert(hi);
        if self.protocols.is_empty() {
            self.protocols = kind.default_protocols();
        }
        let uses_theta = matches!(
            kind,
            ExperimentKind::GhzThetaBiased | ExperimentKind::ProductXzBiased | ExperimentKind::LocalObservable
        );
        if uses_theta && self.thetas.is_empty() {
            self.thetas = default_thetas();
        }
        if kind == ExperimentKind::OaSweep && self.a_values.is_empty() {
            self.a_values = vec![0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0];
        }
        if kind == ExperimentKind::LocalObservable && self.k_values.is_empty() {
            self.k_values = (1..=7).collect();
        }
        self.validate()?;
        Ok(self)
    }

    pub fn n_range(&self) -> std::ops::RangeInclusive<usize> {
        let (lo, hi) = self.experiment.default_n_range();
        self.n_min.unwrap_or(lo)..=self.n_max.unwrap_or(hi)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        let range = self.n_range();
        let (lo, hi) = (*range.start(), *range.end());
        if lo == 0 || lo > hi {
            return bad(format!("invalid qubit range {lo}..={hi}"));
        }
        if hi > MAX_QUBITS {
            return bad(format!("n = {hi} exceeds the simulator cap of {MAX_QUBITS}"));
        }
        if self.shots < 100 {
            return bad(format!("at least 100 shots are required, got {}", self.shots));
        }
        if self.states == 0 {
            return bad("states must be positive".into());
        }
        for p in &self.protocols {
            if !self.experiment.supports(*p) {
                return bad(format!("protocol {p} is not available for {}", self.experiment));
            }
            if *p == Protocol::FullClifford && hi > CLIFFORD_MAX_QUBITS {
                return bad(format!("the Clifford baseline is capped at n = {CLIFFORD_MAX_QUBITS}"));
            }
            if matches!(p, Protocol::Pauli | Protocol::Biased) && hi > PAULI_MAX_QUBITS {
                return bad(format!("protocol {p} is capped at n = {PAULI_MAX_QUBITS}"));
            }
        }
        if let Some(k) = self.k_values.iter().find(|&&k| k == 0 || k > lo) {
            return bad(format!("locality {k} must lie in 1..={lo}"));
        }
        if self.thetas.iter().chain(&self.a_values).any(|x| !x.is_finite()) {
            return bad("grid values must be finite".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_filled() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "oa_sweep"}"#).unwrap();
        assert_eq!(cfg.n_range(), 3..=8);
        assert_eq!(cfg.protocols, vec![Protocol::Mcm]);
        assert_eq!(cfg.shots, 10_000);
        assert!(cfg.a_values.contains(&0.5));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for text in [
            r#"{"experiment": "ghz_fidelity", "shots": 10}"#,
            r#"{"experiment": "ghz_fidelity", "n_min": 5, "n_max": 3}"#,
            r#"{"experiment": "ghz_fidelity", "n_max": 20}"#,
            r#"{"experiment": "ghz_fidelity", "n_max": 9, "protocols": ["full_clifford"]}"#,
            r#"{"experiment": "local_observable", "n_min": 4, "n_max": 4, "k_values": [5]}"#,
            r#"{"experiment": "haar_average", "protocols": ["biased"]}"#,
            r#"{"experiment": "nonsense"}"#,
            r#"{"experiment": "ghz_fidelity", "typo": 1}"#,
        ] {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }
}
