//! Self-checks of the library against exact identities.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use mcm_core::biased::{alpha_profile, run_stabilizer_biased, StabilizerObservable};
use mcm_core::circuit::{apply_gate_to_ztableau, circuit_depth, synthesize, Circuit};
use mcm_core::f2linalg::is_hankel;
use mcm_core::mub::{build_ensemble, ZTableau};
use mcm_core::pauli::PhasedPauli;
use mcm_core::rng::{derive_seed, stream_rng};
use mcm_core::shadow::{channel_oracle, exact_mcm_moments, sample_full_clifford, McmSetup};
use mcm_core::statesim::{build_observable, prepare_named, DenseObservable, ObservableKind, StateKind};
use rand::Rng;
use serde::Serialize;

use crate::error::HarnessError;

/// Largest `n` for checks that build dense `4^n` matrices.
pub const DENSE_MAX: usize = 4;
/// Largest `n` for the Pauli partition check.
pub const PARTITION_MAX: usize = 6;
/// Largest `n` for the synthesis check.
pub const SYNTHESIS_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Channel,
    Partition,
    Synthesis,
    Mub,
    Moments,
    OverlapProfile,
    ZeroVariance,
}

impl Suite {
    pub const ALL: [Suite; 7] =
        [Suite::Channel, Suite::Partition, Suite::Synthesis, Suite::Mub, Suite::Moments, Suite::OverlapProfile, Suite::ZeroVariance];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Channel => "channel",
            Suite::Partition => "partition",
            Suite::Synthesis => "synthesis",
            Suite::Mub => "mub",
            Suite::Moments => "moments",
            Suite::OverlapProfile => "overlap",
            Suite::ZeroVariance => "zero_variance",
        }
    }

    /// Largest `n` this suite runs at when asked for `max_n`.
    fn cap(&self, max_n: usize) -> usize {
        match self {
            Suite::Channel | Suite::Mub => max_n.min(DENSE_MAX),
            Suite::Moments => max_n.min(3),
            Suite::Partition => max_n.min(PARTITION_MAX),
            Suite::Synthesis => max_n.min(SYNTHESIS_MAX),
            Suite::OverlapProfile | Suite::ZeroVariance => max_n.min(5),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| HarnessError::Config(format!("unknown suite {s:?}")))
    }
}

/// Suites named by `spec`: `all` or a comma-separated list.
pub fn parse_suites(spec: &str) -> Result<Vec<Suite>, HarnessError> {
    if spec == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    spec.split(',').map(|s| s.trim().parse()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub suite: Suite,
    pub n: usize,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &OracleCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

type Check = std::result::Result<String, String>;

fn fail<T: fmt::Display>(e: T) -> String {
    e.to_string()
}

/// Runs the requested suites for `n = 1..=max_n` (each suite has its own cap).
pub fn run_oracles(suites: &[Suite], max_n: usize, seed: u64) -> OracleReport {
    let mut report = OracleReport::default();
    for &suite in suites {
        for n in 1..=suite.cap(max_n) {
            let seed = derive_seed(seed, &format!("oracle/{suite}/{n}"));
            let outcome = match suite {
                Suite::Channel => check_channel(n, seed),
                Suite::Partition => check_partition(n),
                Suite::Synthesis => check_synthesis_all(n),
                Suite::Mub => check_mub(n),
                Suite::Moments => check_moments(n, seed),
                Suite::OverlapProfile => check_overlap_profile(n, seed),
                Suite::ZeroVariance => check_zero_variance(n, seed),
            };
            let (passed, detail) = match outcome {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            report.checks.push(OracleCheck { suite, n, passed, detail });
        }
    }
    report
}

/// `(ρ + I) / (2^n + 1)` from exact enumeration, 10 random pure states.
pub fn check_channel(n: usize, seed: u64) -> Check {
    let setup = McmSetup::new(n).map_err(fail)?;
    let mut rng = stream_rng(seed, 0);
    let d = (1usize << n) as f64;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let psi = prepare_named(&StateKind::Haar, n, &mut rng).map_err(fail)?;
        let rho = DenseObservable::projector(&psi);
        let got = channel_oracle(&setup, &rho).map_err(fail)?;
        let want = rho.plus(&DenseObservable::identity(n).map_err(fail)?).map_err(fail)?.scaled(1.0 / (d + 1.0));
        let err = got.matrix().iter().zip(want.matrix()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst = worst.max(err);
    }
    if worst < 1e-10 {
        Ok(format!("max entry error {worst:.1e}"))
    } else {
        Err(format!("max entry error {worst:.3e}"))
    }
}

/// Non-identity stabilizers of all elements are disjoint and cover every
/// non-identity Pauli.
pub fn check_partition(n: usize) -> Check {
    let ens = build_ensemble(n).map_err(fail)?;
    let mut seen = HashSet::with_capacity(1 << (2 * n));
    for idx in 0..ens.len() {
        for m in 1..1u64 << n {
            let s = ens.stabilizer(idx, m).map_err(fail)?;
            if !seen.insert((s.x_bits(), s.z_bits())) {
                return Err(format!("{s} appears in two elements"));
            }
        }
    }
    let want = (1usize << (2 * n)) - 1;
    if seen.len() == want {
        Ok(format!("{want} distinct Paulis"))
    } else {
        Err(format!("{} Paulis covered, expected {want}", seen.len()))
    }
}

/// True if the gates of `c` take `t` to `[O, I]` under the column update
/// rules.
pub fn reduces_to_z_basis(t: &ZTableau, c: &Circuit) -> bool {
    let mut t = t.clone();
    for g in c.gates() {
        match apply_gate_to_ztableau(&t, g) {
            Ok(next) => t = next,
            Err(_) => return false,
        }
    }
    t == ZTableau::z_basis(t.n())
}

/// `D` is Hankel, `c` reduces `t`, and the ASAP depth is at most `n + 1`.
pub fn check_synthesis(t: &ZTableau, c: &Circuit) -> Check {
    let n = t.n();
    if !is_hankel(&t.d) {
        return Err("D block is not Hankel".into());
    }
    if !reduces_to_z_basis(t, c) {
        return Err("circuit does not reduce the tableau to [O, I]".into());
    }
    let depth = circuit_depth(c);
    if depth > n + 1 {
        return Err(format!("depth {depth} exceeds {}", n + 1));
    }
    Ok(format!("depth {depth}"))
}

/// Synthesis check for every label at `n`.
pub fn check_synthesis_all(n: usize) -> Check {
    let ens = build_ensemble(n).map_err(fail)?;
    let mut max_depth = 0;
    for idx in 1..ens.len() {
        let c = synthesize(&ens, idx).map_err(fail)?;
        let t = ens.tableau(idx).map_err(fail)?;
        check_synthesis(&t, &c).map_err(|e| format!("element {idx}: {e}"))?;
        max_depth = max_depth.max(circuit_depth(&c));
    }
    Ok(format!("{} labels, max depth {max_depth}", ens.len() - 1))
}

/// `|⟨Φ_{U,b}|Φ_{U',b'}⟩|²` is `2^{-n}` across elements and `δ_{b,b'}` within one.
pub fn check_mub(n: usize) -> Check {
    let setup = McmSetup::new(n).map_err(fail)?;
    let d = 1usize << n;
    let vecs: Vec<Vec<_>> = (0..setup.len()).map(|i| (0..d).map(|b| setup.basis_vector(i, b)).collect()).collect();
    let mut worst = 0.0f64;
    for (i, vi) in vecs.iter().enumerate() {
        for (j, vj) in vecs.iter().enumerate().skip(i) {
            for (b, x) in vi.iter().enumerate() {
                for (b2, y) in vj.iter().enumerate() {
                    let o: f64 = x.iter().zip(y).map(|(p, q)| p.conj() * q).sum::<num_complex::Complex64>().norm_sqr();
                    let want = if i != j { 1.0 / d as f64 } else if b == b2 { 1.0 } else { 0.0 };
                    worst = worst.max((o - want).abs());
                }
            }
        }
    }
    if worst < 1e-10 {
        Ok(format!("max overlap error {worst:.1e}"))
    } else {
        Err(format!("max overlap error {worst:.3e}"))
    }
}

/// Single-Pauli second moment `2^n + 1` and the maximally-mixed second
/// moment `(2^n+1)/2^n tr(O_0^2)`.
pub fn check_moments(n: usize, seed: u64) -> Check {
    let setup = McmSetup::new(n).map_err(fail)?;
    let mut rng = stream_rng(seed, 0);
    let d = 1u64 << n;
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let (x, z) = (rng.random_range(0..d), rng.random_range(0..d));
        if x | z == 0 {
            continue;
        }
        let p = PhasedPauli::new(n, x, z, (x & z).count_ones() as u8);
        let psi = prepare_named(&StateKind::Haar, n, &mut rng).map_err(fail)?;
        let o = build_observable(&ObservableKind::Pauli(p), n).map_err(fail)?;
        let m = exact_mcm_moments(&setup, &DenseObservable::projector(&psi), &o);
        worst = worst.max((m.second_moment - (d + 1) as f64).abs());
    }
    let mixed = DenseObservable::identity(n).map_err(fail)?.scaled(1.0 / d as f64);
    for _ in 0..5 {
        let o0 = build_observable(&ObservableKind::Local { k: n, theta: rng.random_range(0.0..3.0) }, n)
            .map_err(fail)?
            .plus(&build_observable(&ObservableKind::GhzFidelity, n).map_err(fail)?.scaled(rng.random_range(-1.0..1.0)))
            .map_err(fail)?
            .traceless();
        let m = exact_mcm_moments(&setup, &mixed, &o0);
        let want = (d as f64 + 1.0) / d as f64 * o0.trace_product(&o0);
        worst = worst.max((m.second_moment - want).abs());
    }
    if worst < 1e-8 {
        Ok(format!("max moment error {worst:.1e}"))
    } else {
        Err(format!("max moment error {worst:.3e}"))
    }
}

pub fn check_overlap_profile(n: usize, seed: u64) -> Check {
    let setup = McmSetup::new(n).map_err(fail)?;
    let mut rng = stream_rng(seed, 0);
    for _ in 0..3 {
        let obs = StabilizerObservable::new(sample_full_clifford(n, &mut rng));
        let mut total = 0.0;
        for idx in 0..setup.len() {
            let prof = alpha_profile(&obs, &setup, idx).map_err(fail)?;
            total += prof.alphas.iter().cloned().fold(0.0, f64::max);
        }
        if (total - 2.0).abs() > 1e-9 {
            return Err(format!("sum of maximal overlaps {total}"));
        }
    }
    Ok("sum of maximal overlaps is 2".into())
}

pub fn check_zero_variance(n: usize, seed: u64) -> Check {
    let setup = McmSetup::new(n).map_err(fail)?;
    let mut rng = stream_rng(seed, 0);
    for trial in 0..3 {
        let obs = StabilizerObservable::new(sample_full_clifford(n, &mut rng));
        let psi = obs.state().map_err(fail)?;
        let series = run_stabilizer_biased(&setup, &psi, &obs, 1000, seed ^ trial).map_err(fail)?;
        if let Some(v) = series.values.iter().find(|v| (**v - 1.0).abs() > 1e-9) {
            return Err(format!("single-shot estimate {v} for a stabilizer input"));
        }
    }
    Ok("every single-shot estimate equals 1".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_build_passes_small_suites() {
        let report = run_oracles(&Suite::ALL, 3, 1);
        assert!(report.all_passed(), "{:?}", report.failures().collect::<Vec<_>>());
        assert!(report.checks.iter().any(|c| c.suite == Suite::Partition && c.n == 3));
    }

    #[test]
    fn corrupted_tableau_is_caught() {
        let ens = build_ensemble(3).unwrap();
        let c = synthesize(&ens, 4).unwrap();
        let mut t = ens.tableau(4).unwrap();
        assert!(check_synthesis(&t, &c).is_ok());
        let bit = t.d.get(0, 2);
        t.d.set(0, 2, !bit);
        t.d.set(2, 0, !bit);
        assert!(check_synthesis(&t, &c).is_err());
        let mut t = ens.tableau(4).unwrap();
        let bit = t.d.get(1, 1);
        t.d.set(1, 1, !bit);
        assert!(check_synthesis(&t, &c).is_err());
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!(parse_suites("all").unwrap().len(), 7);
        assert_eq!(parse_suites("mub, zero_variance").unwrap(), vec![Suite::Mub, Suite::ZeroVariance]);
        assert!(parse_suites("bogus").is_err());
    }
}
