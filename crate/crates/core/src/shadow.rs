//! Uniform MCM shadow estimation, the full-Clifford and Pauli baselines, the
//! diagonal/off-diagonal split, and exact enumeration oracles.
//!
//! A snapshot for setting `U` and outcome `b` is
//! `ρ̂ = (2^n+1) U†|b⟩⟨b|U - I`, so the single-shot estimate of `tr(ρO)` is
//! `(2^n+1)⟨b|U O U†|b⟩ - tr(O)`.

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{fwht, BasisRotation};
use crate::circuit::{conjugate_by_gate, synthesize, Circuit, Gate};
use crate::error::{Error, Result};
use crate::mub::MubEnsemble;
use crate::pauli::PhasedPauli;
use crate::rng::{derive_seed, par_blocks};
use crate::statesim::{DenseObservable, OutcomeSampler, StateVector};
use crate::stats::{summarize, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Mcm,
    #[serde(alias = "clifford")]
    FullClifford,
    Pauli,
    Biased,
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Mcm => "mcm",
            Protocol::FullClifford => "clifford",
            Protocol::Pauli => "pauli",
            Protocol::Biased => "biased",
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mcm" => Ok(Protocol::Mcm),
            "clifford" | "full_clifford" => Ok(Protocol::FullClifford),
            "pauli" => Ok(Protocol::Pauli),
            "biased" => Ok(Protocol::Biased),
            other => Err(Error::InvalidArgument(format!("unknown protocol {other:?}"))),
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One measurement record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub protocol: Protocol,
    /// Ensemble index for MCM-type protocols, else `None`.
    pub element: Option<usize>,
    pub outcome: u64,
}

/// Single-shot estimates from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSeries {
    pub protocol: Protocol,
    pub n: usize,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl EstimateSeries {
    pub fn summary(&self) -> Summary {
        summarize(&self.values)
    }
}

/// The ensemble together with each element's synthesized circuit and basis
/// rotation. Built once per qubit count.
#[derive(Debug, Clone)]
pub struct McmSetup {
    ens: MubEnsemble,
    circuits: Vec<Circuit>,
    rotations: Vec<BasisRotation>,
}

impl McmSetup {
    pub fn new(n: usize) -> Result<Self> {
        let ens = MubEnsemble::new(n)?;
        let circuits = (0..ens.len()).map(|i| synthesize(&ens, i)).collect::<Result<Vec<_>>>()?;
        let rotations = circuits.iter().map(BasisRotation::from_circuit).collect();
        Ok(McmSetup { ens, circuits, rotations })
    }

    pub fn ensemble(&self) -> &MubEnsemble {
        &self.ens
    }

    pub fn n(&self) -> usize {
        self.ens.n()
    }

    pub fn len(&self) -> usize {
        self.ens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn circuit(&self, index: usize) -> &Circuit {
        &self.circuits[index]
    }

    pub fn rotation(&self, index: usize) -> &BasisRotation {
        &self.rotations[index]
    }

    /// `|Φ_{U,b}⟩ = U†|b⟩`.
    pub fn basis_vector(&self, index: usize, b: usize) -> Vec<Complex64> {
        self.rotations[index].basis_state(self.n(), b)
    }
}

/// Outcome distribution and rotated observable diagonal for one element.
#[derive(Debug, Clone)]
pub struct ElementData {
    pub sampler: OutcomeSampler,
    pub probabilities: Vec<f64>,
    /// `⟨b|U O U†|b⟩`, empty when no observable was given.
    pub diagonal: Vec<f64>,
}

/// Per-element data for a fixed state and observable, filled on first use.
pub struct ElementCache<'a> {
    setup: &'a McmSetup,
    psi: &'a [Complex64],
    o: Option<&'a DenseObservable>,
    slots: Vec<OnceLock<ElementData>>,
}

impl<'a> ElementCache<'a> {
    /// Without an observable only the outcome distributions are cached.
    pub fn new(setup: &'a McmSetup, psi: &'a StateVector, o: Option<&'a DenseObservable>) -> Result<Self> {
        let n = setup.n();
        for found in [Some(psi.n()), o.map(|o| o.n())].into_iter().flatten() {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        Ok(ElementCache { setup, psi: psi.amplitudes(), o, slots: (0..setup.len()).map(|_| OnceLock::new()).collect() })
    }

    pub fn get(&self, index: usize) -> &ElementData {
        self.slots[index].get_or_init(|| {
            let rot = self.setup.rotation(index);
            let probabilities = rot.outcome_probabilities(self.psi);
            ElementData {
                sampler: OutcomeSampler::new(&probabilities),
                diagonal: self.o.map(|o| rot.rotated_diagonal(o)).unwrap_or_default(),
                probabilities,
            }
        })
    }
}

/// Uniform draw over all `2^n + 1` elements.
pub fn sample_mcm_element<R: Rng + ?Sized>(ens: &MubEnsemble, rng: &mut R) -> usize {
    rng.random_range(0..ens.len())
}

/// `(2^n+1)⟨b|U O U†|b⟩ - tr(O)` by dense conjugation.
pub fn mcm_estimate(o: &DenseObservable, u: &Circuit, b: u64) -> Result<f64> {
    let rot = o.conjugated(u)?;
    let d = o.dim() as f64;
    Ok((d + 1.0) * rot.get(b as usize, b as usize).re - o.trace())
}

/// Uniform MCM run with cached per-element data.
pub fn run_mcm(setup: &McmSetup, psi: &StateVector, o: &DenseObservable, shots: usize, seed: u64) -> Result<EstimateSeries> {
    let cache = ElementCache::new(setup, psi, Some(o))?;
    let d = o.dim() as f64;
    let tr = o.trace();
    let values = par_blocks(shots, seed, |rng, count| {
        (0..count)
            .map(|_| {
                let idx = sample_mcm_element(setup.ensemble(), rng);
                let data = cache.get(idx);
                let b = data.sampler.sample(rng) as usize;
                (d + 1.0) * data.diagonal[b] - tr
            })
            .collect()
    });
    Ok(EstimateSeries { protocol: Protocol::Mcm, n: setup.n(), seed, values })
}

/// Single-qubit measurement basis for the Pauli protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliBasis {
    X,
    Y,
    Z,
}

impl PauliBasis {
    pub const ALL: [PauliBasis; 3] = [PauliBasis::X, PauliBasis::Y, PauliBasis::Z];

    /// Gates mapping this basis onto the computational basis.
    pub fn rotation(&self, q: usize) -> Vec<Gate> {
        match self {
            PauliBasis::X => vec![Gate::H(q)],
            PauliBasis::Y => vec![Gate::Sdg(q), Gate::H(q)],
            PauliBasis::Z => vec![],
        }
    }

    fn bits(&self) -> (u64, u64) {
        match self {
            PauliBasis::X => (1, 0),
            PauliBasis::Y => (1, 1),
            PauliBasis::Z => (0, 1),
        }
    }
}

/// Coefficients `α_P = tr(P O) / 2^n` over all Pauli strings, indexed by
/// `(x << n) | z` with `P` the product of Hermitian single-qubit letters.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliCoefficients {
    n: usize,
    coeffs: Vec<f64>,
}

impl PauliCoefficients {
    pub fn from_dense(o: &DenseObservable) -> Self {
        let n = o.n();
        let d = o.dim();
        let mut coeffs = vec![0.0; d * d];
        let mut f = vec![Complex64::new(0.0, 0.0); d];
        for x in 0..d {
            for (r, slot) in f.iter_mut().enumerate() {
                *slot = o.get(r, r ^ x);
            }
            fwht(&mut f);
            for z in 0..d {
                let phase = crate::statesim::i_pow(((x & z).count_ones() & 3) as u8);
                coeffs[(x << n) | z] = (phase * f[z]).re / d as f64;
            }
        }
        PauliCoefficients { n, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: u64, z: u64) -> f64 {
        self.coeffs[((x as usize) << self.n) | z as usize]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// `Σ_P |α_P|`.
    pub fn l1_norm(&self) -> f64 {
        crate::stats::compensated_sum(self.coeffs.iter().map(|c| c.abs()))
    }

    /// `tr(O ρ̂)` for `ρ̂ = ⊗_q (3 U_q†|b_q⟩⟨b_q|U_q - I)`: only strings whose
    /// letters agree with the bases contribute, each with `∏ 3(-1)^{b_q}`.
    pub fn shadow_estimate(&self, bases: &[PauliBasis], b: u64) -> f64 {
        assert_eq!(bases.len(), self.n);
        let (mut xm, mut zm) = (0u64, 0u64);
        for (q, basis) in bases.iter().enumerate() {
            let (x, z) = basis.bits();
            xm |= x << q;
            zm |= z << q;
        }
        let d = 1u64 << self.n;
        let mut acc = 0.0;
        for s in 0..d {
            let c = self.get(s & xm, s & zm);
            if c != 0.0 {
                let sign = if (s & b).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
                acc += c * sign * 3f64.powi(s.count_ones() as i32);
            }
        }
        acc
    }
}

/// Single-shot Pauli-protocol estimate for a dense observable.
pub fn pauli_shadow_estimate(o: &DenseObservable, bases: &[PauliBasis], b: u64) -> f64 {
    PauliCoefficients::from_dense(o).shadow_estimate(bases, b)
}

/// Pauli protocol: uniform basis per qubit.
pub fn run_pauli(psi: &StateVector, o: &DenseObservable, shots: usize, seed: u64) -> Result<EstimateSeries> {
    let n = psi.n();
    if o.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: o.n() });
    }
    let coeffs = PauliCoefficients::from_dense(o);
    let values = par_blocks(shots, seed, |rng, count| {
        (0..count)
            .map(|_| {
                let bases: Vec<PauliBasis> = (0..n).map(|_| PauliBasis::ALL[rng.random_range(0..3)]).collect();
                let mut s = psi.clone();
                for (q, basis) in bases.iter().enumerate() {
                    for g in basis.rotation(q) {
                        s.apply_gate(&g);
                    }
                }
                let b = s.sample_bitstring(rng);
                coeffs.shadow_estimate(&bases, b)
            })
            .collect()
    });
    Ok(EstimateSeries { protocol: Protocol::Pauli, n, seed, values })
}

/// Uniformly random Clifford (up to global phase) as a gate list.
///
/// For each `k`, a uniformly random anticommuting pair `(P, Q)` supported on
/// qubits `k..n` is drawn and a circuit `W_k` with `W_k P W_k† = ±X_k`,
/// `W_k Q W_k† = ±Z_k` is built; the Clifford is `W_0† ⋯ W_{n-1}†` preceded by
/// a uniformly random Pauli.
pub fn sample_full_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Circuit {
    let mut gates: Vec<Gate> = Vec::new();
    for q in 0..n {
        match rng.random_range(0..4) {
            1 => gates.push(Gate::X(q)),
            2 => gates.push(Gate::Y(q)),
            3 => gates.push(Gate::Z(q)),
            _ => {}
        }
    }
    let mut layers: Vec<Vec<Gate>> = Vec::with_capacity(n);
    for k in 0..n {
        let active: u64 = ((1u64 << n) - 1) & !((1u64 << k) - 1);
        let random_pauli = |rng: &mut R| {
            let x = rng.random::<u64>() & active;
            let z = rng.random::<u64>() & active;
            PhasedPauli::new(n, x, z, 0)
        };
        let p = loop {
            let p = random_pauli(rng);
            if !p.is_identity() {
                break p;
            }
        };
        let q = loop {
            let q = random_pauli(rng);
            if !q.commutes_with(&p) {
                break q;
            }
        };
        layers.push(reduce_pair(n, k, p, q));
    }
    for w in layers.iter().rev() {
        gates.extend(w.iter().rev().map(Gate::dagger));
    }
    Circuit::from_gates(n, gates).expect("generated gates are valid")
}

/// Gates `W` on qubits `k..n` with `W p W† = ±X_k` and `W q W† = ±Z_k`.
fn reduce_pair(n: usize, k: usize, mut p: PhasedPauli, mut q: PhasedPauli) -> Vec<Gate> {
    let mut w = Vec::new();
    let apply = |g: Gate, p: &mut PhasedPauli, q: &mut PhasedPauli, w: &mut Vec<Gate>| {
        *p = conjugate_by_gate(&g, p);
        *q = conjugate_by_gate(&g, q);
        w.push(g);
    };
    // make p X-type
    for j in k..n {
        if (p.z_bits() >> j) & 1 == 1 {
            let g = if (p.x_bits() >> j) & 1 == 1 { Gate::S(j) } else { Gate::H(j) };
            apply(g, &mut p, &mut q, &mut w);
        }
    }
    // collapse its support onto one qubit, then move that qubit to k
    let root = p.x_bits().trailing_zeros() as usize;
    for j in root + 1..n {
        if (p.x_bits() >> j) & 1 == 1 {
            apply(Gate::CX(root, j), &mut p, &mut q, &mut w);
        }
    }
    if root != k {
        for g in [Gate::CX(root, k), Gate::CX(k, root), Gate::CX(root, k)] {
            apply(g, &mut p, &mut q, &mut w);
        }
    }
    // p = ±X_k; q anticommutes with it
    apply(Gate::H(k), &mut p, &mut q, &mut w);
    for j in k + 1..n {
        if (q.z_bits() >> j) & 1 == 1 {
            let g = if (q.x_bits() >> j) & 1 == 1 { Gate::S(j) } else { Gate::H(j) };
            apply(g, &mut p, &mut q, &mut w);
        }
    }
    for j in k + 1..n {
        if (q.x_bits() >> j) & 1 == 1 {
            apply(Gate::CX(k, j), &mut p, &mut q, &mut w);
        }
    }
    if (q.z_bits() >> k) & 1 == 1 {
        apply(Gate::S(k), &mut p, &mut q, &mut w);
    }
    apply(Gate::H(k), &mut p, &mut q, &mut w);
    debug_assert!(p.x_bits() == 1 << k && p.z_bits() == 0);
    debug_assert!(q.x_bits() == 0 && q.z_bits() == 1 << k);
    w
}

/// Full-Clifford protocol with per-shot dense simulation.
pub fn run_full_clifford(psi: &StateVector, o: &DenseObservable, shots: usize, seed: u64) -> Result<EstimateSeries> {
    let n = psi.n();
    if o.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: o.n() });
    }
    let d = o.dim() as f64;
    let tr = o.trace();
    let values = par_blocks(shots, seed, |rng, count| {
        (0..count)
            .map(|_| {
                let u = sample_full_clifford(n, rng);
                let b = psi.evolved(&u).expect("matching size").sample_bitstring(rng);
                let phi = StateVector::basis(n, b as usize)
                    .expect("valid outcome")
                    .evolved(&u.dagger())
                    .expect("matching size");
                (d + 1.0) * o.quad_form(phi.amplitudes()) - tr
            })
            .collect()
    });
    Ok(EstimateSeries { protocol: Protocol::FullClifford, n, seed, values })
}

/// Runs one of the uniform protocols.
pub fn run_protocol(
    protocol: Protocol,
    setup: Option<&McmSetup>,
    psi: &StateVector,
    o: &DenseObservable,
    shots: usize,
    seed: u64,
) -> Result<EstimateSeries> {
    match protocol {
        Protocol::Mcm => match setup {
            Some(s) => run_mcm(s, psi, o, shots, seed),
            None => run_mcm(&McmSetup::new(psi.n())?, psi, o, shots, seed),
        },
        Protocol::FullClifford => run_full_clifford(psi, o, shots, seed),
        Protocol::Pauli => run_pauli(psi, o, shots, seed),
        Protocol::Biased => Err(Error::InvalidArgument("the biased protocol needs a sampling distribution".into())),
    }
}

/// `O = Σ_b O_bb Φ_{U,b} + O_F`: returns the diagonal coefficients in the
/// rotated basis and the off-diagonal remainder `O_F`.
pub fn split_observable(o: &DenseObservable, basis: &Circuit) -> Result<(Vec<f64>, DenseObservable)> {
    let mut rot = o.conjugated(basis)?;
    let diag = rot.diagonal();
    for b in 0..rot.dim() {
        rot.set(b, b, Complex64::new(0.0, 0.0));
    }
    Ok((diag, rot.conjugated(&basis.dagger())?))
}

/// `Σ_{b≠b'} |O_{b,b'}|` in the rotated basis.
pub fn coherence_l1(o: &DenseObservable, basis: &Circuit) -> Result<f64> {
    let rot = o.conjugated(basis)?;
    let d = rot.dim();
    let mut acc = 0.0;
    for r in 0..d {
        for c in 0..d {
            if r != c {
                acc += rot.get(r, c).norm();
            }
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffDiagonalEstimate {
    pub estimate: f64,
    pub diagonal: Summary,
    pub off_diagonal: Summary,
    pub coherence_l1: f64,
}

/// Estimates the diagonal part by direct measurement in the basis of element
/// `basis_index` and the off-diagonal remainder by uniform MCM shadows.
pub fn estimate_off_diagonal(
    setup: &McmSetup,
    psi: &StateVector,
    o: &DenseObservable,
    basis_index: usize,
    n_diag: usize,
    n_shadow: usize,
    seed: u64,
) -> Result<OffDiagonalEstimate> {
    if basis_index >= setup.len() {
        return Err(Error::ElementOutOfRange { index: basis_index, len: setup.len() });
    }
    let basis = setup.circuit(basis_index);
    let (diag, o_f) = split_observable(o, basis)?;
    let probs = setup.rotation(basis_index).outcome_probabilities(psi.amplitudes());
    let sampler = OutcomeSampler::new(&probs);
    let diag_values = par_blocks(n_diag, derive_seed(seed, "diagonal"), |rng, count| {
        (0..count).map(|_| diag[sampler.sample(rng) as usize]).collect()
    });
    let shadow = run_mcm(setup, psi, &o_f, n_shadow, derive_seed(seed, "shadow"))?;
    let diagonal = summarize(&diag_values);
    let off_diagonal = shadow.summary();
    Ok(OffDiagonalEstimate {
        estimate: diagonal.mean + off_diagonal.mean,
        diagonal,
        off_diagonal,
        coherence_l1: coherence_l1(o, basis)?,
    })
}

/// Exact `Σ_{U,b} |E|^{-1} tr(ρΦ_{U,b}) Φ_{U,b}` by enumeration.
pub fn channel_oracle(setup: &McmSetup, rho: &DenseObservable) -> Result<DenseObservable> {
    let n = setup.n();
    let mut out = DenseObservable::zeros(n)?;
    for idx in 0..setup.len() {
        let m = element_channel(setup, idx, rho)?;
        out = out.plus(&m)?;
    }
    Ok(out.scaled(1.0 / setup.len() as f64))
}

/// `M(ρ|U) = Σ_b tr(ρΦ_{U,b}) Φ_{U,b}` for one element.
pub fn element_channel(setup: &McmSetup, index: usize, rho: &DenseObservable) -> Result<DenseObservable> {
    let n = setup.n();
    if rho.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rho.n() });
    }
    let d = 1usize << n;
    let mut out = DenseObservable::zeros(n)?;
    for b in 0..d {
        let phi = setup.basis_vector(index, b);
        let p = rho.quad_form(&phi);
        for r in 0..d {
            for c in 0..d {
                out.set(r, c, out.get(r, c) + phi[r] * phi[c].conj() * p);
            }
        }
    }
    Ok(out)
}

/// Exact first and second moments of a single-shot estimator under a given
/// element distribution, for a density matrix `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub second_moment: f64,
}

impl Moments {
    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean * self.mean
    }
}

/// `E[f(U,b)]` and `E[f(U,b)^2]` with `U ~ weights`, `b ~ ⟨b|UρU†|b⟩`, where
/// `f(U,b)` is computed from the rotated diagonal of `O` by `estimator`.
pub fn exact_moments<F>(setup: &McmSetup, rho: &DenseObservable, o: &DenseObservable, weights: &[f64], estimator: F) -> Moments
where
    F: Fn(usize, f64) -> f64,
{
    let (mut m1, mut m2) = (0.0, 0.0);
    for (idx, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let rot = setup.rotation(idx);
        let p = rot.rotated_diagonal(rho);
        let diag = rot.rotated_diagonal(o);
        for (pb, ob) in p.iter().zip(&diag) {
            let f = estimator(idx, *ob);
            m1 += w * pb * f;
            m2 += w * pb * f * f;
        }
    }
    Moments { mean: m1, second_moment: m2 }
}

/// Exact moments of the uniform MCM estimator.
pub fn exact_mcm_moments(setup: &McmSetup, rho: &DenseObservable, o: &DenseObservable) -> Moments {
    let d = o.dim() as f64;
    let tr = o.trace();
    let weights = vec![1.0 / setup.len() as f64; setup.len()];
    exact_moments(setup, rho, o, &weights, |_, ob| (d + 1.0) * ob - tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::statesim::{build_observable, prepare_named, ObservableKind, StateKind};

    #[test]
    fn identity_observable_has_zero_variance() {
        let setup = McmSetup::new(3).unwrap();
        let psi = prepare_named(&StateKind::Haar, 3, &mut stream_rng(0, 0)).unwrap();
        let id = DenseObservable::identity(3).unwrap();
        for p in [Protocol::Mcm, Protocol::FullClifford, Protocol::Pauli] {
            let s = run_protocol(p, Some(&setup), &psi, &id, 300, 1).unwrap();
            assert_eq!(s.values.len(), 300);
            assert!(s.values.iter().all(|v| (v - 1.0).abs() < 1e-9), "{p}");
        }
    }

    #[test]
    fn ghz_projector_in_z_basis() {
        let o = build_observable(&ObservableKind::GhzFidelity, 3).unwrap();
        let v = mcm_estimate(&o, &Circuit::new(3), 0).unwrap();
        assert!((v - (9.0 / 2.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn pauli_single_qubit_examples() {
        let z = build_observable(&ObservableKind::Pauli(PhasedPauli::parse("Z").unwrap()), 1).unwrap();
        assert!((pauli_shadow_estimate(&z, &[PauliBasis::Z], 0) - 3.0).abs() < 1e-12);
        assert!(pauli_shadow_estimate(&z, &[PauliBasis::X], 0).abs() < 1e-12);
        assert!((pauli_shadow_estimate(&z, &[PauliBasis::Z], 1) + 3.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_coefficients_reconstruct() {
        let o = build_observable(&ObservableKind::Local { k: 2, theta: 0.4 }, 3)
            .unwrap()
            .plus(&build_observable(&ObservableKind::GhzFidelity, 3).unwrap())
            .unwrap();
        let pc = PauliCoefficients::from_dense(&o);
        let mut rebuilt = DenseObservable::zeros(3).unwrap();
        for x in 0..8u64 {
            for z in 0..8u64 {
                let p = PhasedPauli::new(3, x, z, ((x & z).count_ones() & 3) as u8);
                let m = DenseObservable::from_pauli(&p).unwrap();
                rebuilt = rebuilt.plus(&m.scaled(pc.get(x, z))).unwrap();
            }
        }
        for (a, b) in rebuilt.matrix().iter().zip(o.matrix()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn clifford_sampler_produces_valid_reductions() {
        let mut rng = stream_rng(9, 0);
        for n in 1..=5 {
            for _ in 0..50 {
                let c = sample_full_clifford(n, &mut rng);
                assert_eq!(c.n(), n);
                let (t, _) = crate::circuit::ztableau_of(&c);
                assert!(t.is_maximal_stabilizer());
            }
        }
    }

    #[test]
    fn split_reconstructs() {
        let setup = McmSetup::new(3).unwrap();
        let o = build_observable(&ObservableKind::GhzFidelity, 3).unwrap();
        let (diag, o_f) = split_observable(&o, setup.circuit(0)).unwrap();
        assert!((coherence_l1(&o, setup.circuit(0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((diag[0] - 0.5).abs() < 1e-12 && (diag[7] - 0.5).abs() < 1e-12);
        assert!((o_f.get(0, 7).re - 0.5).abs() < 1e-12);
        let zero = build_observable(&ObservableKind::Pauli(PhasedPauli::parse("ZZI").unwrap()), 3).unwrap();
        let (_, f) = split_observable(&zero, setup.circuit(0)).unwrap();
        assert!(f.matrix().iter().all(|v| v.norm() < 1e-12));
        for idx in [1, 4, 8] {
            let c = setup.circuit(idx);
            let (diag, o_f) = split_observable(&o, c).unwrap();
            let mut rebuilt = o_f.clone();
            for (b, &w) in diag.iter().enumerate() {
                let phi = StateVector::from_amplitudes(3, setup.basis_vector(idx, b)).unwrap();
                rebuilt = rebuilt.plus(&DenseObservable::projector(&phi).scaled(w)).unwrap();
            }
            for (a, b) in rebuilt.matrix().iter().zip(o.matrix()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn off_diagonal_estimate_of_ghz_fidelity() {
        let setup = McmSetup::new(4).unwrap();
        let psi = prepare_named(&StateKind::Ghz, 4, &mut stream_rng(0, 0)).unwrap();
        let o = build_observable(&ObservableKind::GhzFidelity, 4).unwrap();
        let est = estimate_off_diagonal(&setup, &psi, &o, 0, 2000, 4000, 5).unwrap();
        let err = (est.diagonal.mean_stderr.powi(2) + est.off_diagonal.mean_stderr.powi(2)).sqrt();
        assert!((est.estimate - 1.0).abs() < 5.0 * err + 1e-9);
        assert!((est.diagonal.mean - 0.5).abs() < 1e-12);
    }
}
