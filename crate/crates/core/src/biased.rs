//! Biased MCM: non-uniform element sampling with the rescaled estimator
//! `tr(O_0 Φ_{U,b}) / p_U + 2^{-n} tr(O)`.
//!
//! Three ways to obtain `p_U` are provided: the dense optimum `p_U ∝ B_U`,
//! weights from a Pauli-sum decomposition, and direct sampling of stabilizers
//! for observables that are stabilizer-state projectors.

use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{conjugate_pauli, ztableau_of, Circuit, Direction};
use crate::error::{Error, Result};
use crate::f2linalg::{kernel_basis, rank_f2};
use crate::pauli::PhasedPauli;
use crate::rng::par_blocks;
use crate::shadow::{ElementCache, EstimateSeries, McmSetup, PauliCoefficients, Protocol};
use crate::statesim::{DenseObservable, OutcomeSampler, StateVector};

/// `B_U = max_b |⟨b|U O_0 U†|b⟩|`.
pub fn b_u(o: &DenseObservable, setup: &McmSetup, index: usize) -> f64 {
    let o0 = o.traceless();
    max_abs(&setup.rotation(index).rotated_diagonal(&o0))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `B_U` for every element.
pub fn b_values(o: &DenseObservable, setup: &McmSetup) -> Vec<f64> {
    let o0 = o.traceless();
    (0..setup.len()).into_par_iter().map(|i| max_abs(&setup.rotation(i).rotated_diagonal(&o0))).collect()
}

/// Sampling distribution over ensemble elements.
#[derive(Debug, Clone)]
pub struct BiasedDistribution {
    probs: Vec<f64>,
    support: Vec<usize>,
    sampler: OutcomeSampler,
}

impl BiasedDistribution {
    /// Normalizes nonnegative weights; rejects an all-zero vector.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = crate::stats::compensated_sum(weights.iter().copied());
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::TrivialObservable);
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let support = (0..probs.len()).filter(|&i| probs[i] > 0.0).collect();
        let sampler = OutcomeSampler::new(&probs);
        Ok(BiasedDistribution { probs, support, sampler })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.probs[index]
    }

    /// Indices with `p_U > 0`.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng) as usize
    }
}

/// `p_U ∝ B_U`.
pub fn optimal_distribution(o: &DenseObservable, setup: &McmSetup) -> Result<BiasedDistribution> {
    BiasedDistribution::from_weights(&b_values(o, setup))
}

/// `Σ_U max_b ⟨O_0⟩²_{U,b} / p_U`, the variance bound realized by `dist`.
pub fn realized_bound(o: &DenseObservable, setup: &McmSetup, dist: &BiasedDistribution) -> f64 {
    b_values(o, setup)
        .iter()
        .zip(dist.probabilities())
        .filter(|(_, p)| **p > 0.0)
        .map(|(b, p)| b * b / p)
        .sum()
}

/// `tr(O_0 Φ_{U,b}) / p_U + 2^{-n} tr(O)` by dense conjugation.
pub fn biased_estimate(o: &DenseObservable, u: &Circuit, b: u64, p_u: f64) -> Result<f64> {
    if !(p_u > 0.0) {
        return Err(Error::InvalidArgument(format!("sampling probability {p_u} must be positive")));
    }
    let shift = o.trace() / o.dim() as f64;
    let rot = o.conjugated(u)?;
    Ok((rot.get(b as usize, b as usize).re - shift) / p_u + shift)
}

/// Biased run for a dense observable under `dist`.
pub fn run_biased(
    setup: &McmSetup,
    psi: &StateVector,
    o: &DenseObservable,
    dist: &BiasedDistribution,
    shots: usize,
    seed: u64,
) -> Result<EstimateSeries> {
    let cache = ElementCache::new(setup, psi, Some(o))?;
    let shift = o.trace() / o.dim() as f64;
    let values = par_blocks(shots, seed, |rng, count| {
        (0..count)
            .map(|_| {
                let idx = dist.sample(rng);
                let p = dist.probability(idx);
                let data = cache.get(idx);
                let b = data.sampler.sample(rng) as usize;
                (data.diagonal[b] - shift) / p + shift
            })
            .collect()
    });
    Ok(EstimateSeries { protocol: Protocol::Biased, n: setup.n(), seed, values })
}

/// `D(A) = 2^{-n} Σ_P |tr(P A)|` over all Pauli strings.
pub fn stabilizer_norm(a: &DenseObservable) -> f64 {
    PauliCoefficients::from_dense(a).l1_norm()
}

/// `O = c·I + Σ_l α_l P_l` with distinct non-identity Hermitian strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSumObservable {
    n: usize,
    constant: f64,
    terms: Vec<(f64, PhasedPauli)>,
}

impl PauliSumObservable {
    /// Merges repeated strings and folds signs and identity terms.
    pub fn new(n: usize, terms: Vec<(f64, PhasedPauli)>) -> Result<Self> {
        let mut constant = 0.0;
        let mut merged: Vec<(f64, PhasedPauli)> = Vec::new();
        for (c, p) in terms {
            if p.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.n() });
            }
            let sign = p.sign().ok_or(Error::NotHermitian(1.0))? as f64;
            if p.is_identity() {
                constant += c * sign;
                continue;
            }
            let canonical = p.with_phase((p.y_count() & 3) as u8);
            match merged.iter_mut().find(|(_, q)| q.same_string(&canonical)) {
                Some(slot) => slot.0 += c * sign,
                None => merged.push((c * sign, canonical)),
            }
        }
        merged.retain(|(c, _)| *c != 0.0);
        if merged.is_empty() {
            return Err(Error::EmptyTerms);
        }
        Ok(PauliSumObservable { n, constant, terms: merged })
    }

    /// Lines of `coeff pauli-string`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut n = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(c), Some(p), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse { line: i + 1, msg: "expected `coeff pauli`".into() });
            };
            let c: f64 = c.parse().map_err(|e: std::num::ParseFloatError| Error::Parse { line: i + 1, msg: e.to_string() })?;
            let p = PhasedPauli::parse(p).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            if *n.get_or_insert(p.n()) != p.n() {
                return Err(Error::Parse { line: i + 1, msg: "inconsistent qubit count".into() });
            }
            terms.push((c, p));
        }
        PauliSumObservable::new(n.ok_or(Error::EmptyTerms)?, terms)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PhasedPauli)] {
        &self.terms
    }

    /// Identity coefficient, `tr(O) / 2^n`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// `Σ_l |α_l|`.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    pub fn to_dense(&self) -> Result<DenseObservable> {
        let mut o = DenseObservable::identity(self.n)?.scaled(self.constant);
        for (c, p) in &self.terms {
            o = o.plus(&DenseObservable::from_pauli(p)?.scaled(*c))?;
        }
        Ok(o)
    }
}

/// Per-element view of a Pauli sum: each term becomes `ε·S_m` of the element
/// it belongs to, so `tr(P_l Φ_{U,b}) = ε (-1)^{b·m}`.
#[derive(Debug, Clone)]
pub struct PauliSumPlan {
    constant: f64,
    per_element: Vec<Vec<(f64, u64)>>,
    dist: BiasedDistribution,
}

impl PauliSumPlan {
    pub fn new(o: &PauliSumObservable, setup: &McmSetup) -> Result<Self> {
        if o.n() != setup.n() {
            return Err(Error::DimensionMismatch { expected: setup.n(), found: o.n() });
        }
        let ens = setup.ensemble();
        let mut per_element = vec![Vec::new(); ens.len()];
        let mut weights = vec![0.0; ens.len()];
        for (c, p) in o.terms() {
            let (idx, m) = ens.element_for_pauli(p)?;
            let s = ens.stabilizer(idx, m)?;
            let eps = match (p.phase() + 4 - s.phase()) & 3 {
                0 => 1.0,
                2 => -1.0,
                _ => unreachable!("both operators are Hermitian"),
            };
            per_element[idx].push((c * eps, m));
            weights[idx] += c.abs();
        }
        Ok(PauliSumPlan { constant: o.constant(), per_element, dist: BiasedDistribution::from_weights(&weights)? })
    }

    pub fn distribution(&self) -> &BiasedDistribution {
        &self.dist
    }

    /// `tr(O_0 Φ_{U,b})`.
    pub fn traceless_overlap(&self, index: usize, b: u64) -> f64 {
        self.per_element[index]
            .iter()
            .map(|(c, m)| if (b & m).count_ones() & 1 == 1 { -c } else { *c })
            .sum()
    }

    pub fn estimate(&self, index: usize, b: u64) -> Result<f64> {
        let p = self.dist.probability(index);
        if p == 0.0 {
            return Err(Error::ZeroProbabilityElement(index));
        }
        Ok(self.traceless_overlap(index, b) / p + self.constant)
    }
}

/// `p_U = Σ_{P_l ∈ U} |α_l| / Σ_l |α_l|`.
pub fn pauli_sum_distribution(o: &PauliSumObservable, setup: &McmSetup) -> Result<BiasedDistribution> {
    Ok(PauliSumPlan::new(o, setup)?.dist)
}

/// Biased run for a Pauli-sum observable using the per-element plan.
pub fn run_pauli_sum_biased(
    setup: &McmSetup,
    psi: &StateVector,
    o: &PauliSumObservable,
    shots: usize,
    seed: u64,
) -> Result<EstimateSeries> {
    let plan = PauliSumPlan::new(o, setup)?;
    let cache = ElementCache::new(setup, psi, None)?;
    let values = par_blocks(shots, seed, |rng, count| {
        (0..count)
            .map(|_| {
                let idx = plan.dist.sample(rng);
                let b = cache.get(idx).sampler.sample(rng);
                plan.estimate(idx, b).expect("sampled from the support")
            })
            .collect()
    });
    Ok(EstimateSeries { protocol: Protocol::Biased, n: setup.n(), seed, values })
}

/// The projector `V†|0⟩⟨0|V` for a Clifford circuit `V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerObservable {
    v: Circuit,
}

impl StabilizerObservable {
    pub fn new(v: Circuit) -> Self {
        StabilizerObservable { v }
    }

    pub fn n(&self) -> usize {
        self.v.n()
    }

    pub fn circuit(&self) -> &Circuit {
        &self.v
    }

    /// `V†|0…0⟩`.
    pub fn state(&self) -> Result<StateVector> {
        StateVector::zero(self.n())?.evolved(&self.v.dagger())
    }

    pub fn to_dense(&self) -> Result<DenseObservable> {
        Ok(DenseObservable::projector(&self.state()?))
    }

    /// `V† Z^m V`, a stabilizer of the state.
    pub fn stabilizer(&self, m: u64) -> PhasedPauli {
        conjugate_pauli(&self.v, &PhasedPauli::z_type(self.n(), m), Direction::Forward)
    }
}

/// Overlap structure of a stabilizer observable with one measurement basis:
/// `α_b = |⟨b|U V†|0⟩|²` is `2^{-r}` on an affine subspace of size `2^r` and
/// zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerOverlap {
    pub r: usize,
    /// Basis of `{m : m^T C = 0}` with the sign bit of each `Z`-type product.
    kernel: Vec<(u64, bool)>,
    /// `(2^{-r} - 2^{-n}) / (1 - 2^{-n})`.
    pub probability: f64,
}

impl StabilizerOverlap {
    pub fn new(obs: &StabilizerObservable, u: &Circuit) -> Result<Self> {
        let n = obs.n();
        let w = obs.v.dagger().then(u)?;
        let (t, rows) = ztableau_of(&w);
        let r = rank_f2(&t.c);
        let mut kernel = Vec::with_capacity(n - r);
        for m in kernel_basis(&t.c.transpose()) {
            let m = m.to_u64();
            let mut prod = PhasedPauli::identity(n);
            for (i, row) in rows.iter().enumerate() {
                if (m >> i) & 1 == 1 {
                    prod = prod.mul(row);
                }
            }
            if prod.x_bits() != 0 || prod.phase() & 1 == 1 {
                return Err(Error::ProfileMismatch(format!("kernel product {prod} is not a signed Z string")));
            }
            kernel.push((m, prod.phase() == 2));
        }
        let q = 0.5f64.powi(n as i32);
        let probability = (0.5f64.powi(r as i32) - q) / (1.0 - q);
        Ok(StabilizerOverlap { r, kernel, probability })
    }

    pub fn alpha(&self, b: u64) -> f64 {
        let inside = self.kernel.iter().all(|&(m, s)| ((b & m).count_ones() & 1 == 1) == s);
        if inside {
            0.5f64.powi(self.r as i32)
        } else {
            0.0
        }
    }
}

/// Draws elements by sampling a uniform non-identity stabilizer of the
/// observable and locating its ensemble element.
pub struct StabilizerSampler<'a> {
    obs: &'a StabilizerObservable,
    setup: &'a McmSetup,
    overlaps: Vec<OnceLock<StabilizerOverlap>>,
}

impl<'a> StabilizerSampler<'a> {
    pub fn new(obs: &'a StabilizerObservable, setup: &'a McmSetup) -> Result<Self> {
        if obs.n() != setup.n() {
            return Err(Error::DimensionMismatch { expected: setup.n(), found: obs.n() });
        }
        Ok(StabilizerSampler { obs, setup, overlaps: (0..setup.len()).map(|_| OnceLock::new()).collect() })
    }

    pub fn overlap(&self, index: usize) -> &StabilizerOverlap {
        self.overlaps[index]
            .get_or_init(|| StabilizerOverlap::new(self.obs, self.setup.circuit(index)).expect("Clifford overlap structure"))
    }

    /// `(element index, p_U)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let n = self.obs.n();
        let m = rng.random_range(1..1u64 << n);
        let p = self.obs.stabilizer(m);
        let (idx, _) = self.setup.ensemble().element_for_pauli(&p).expect("non-identity stabilizer");
        (idx, self.overlap(idx).probability)
    }
}

/// One draw from the stabilizer sampler.
pub fn stabilizer_sampler<R: Rng + ?Sized>(obs: &StabilizerObservable, setup: &McmSetup, rng: &mut R) -> Result<(usize, f64)> {
    Ok(StabilizerSampler::new(obs, setup)?.sample(rng))
}

/// Biased run for a stabilizer observable; `α_{U,b}` comes from the overlap
/// structure rather than dense algebra.
pub fn run_stabilizer_biased(
    setup: &McmSetup,
    psi: &StateVector,
    obs: &StabilizerObservable,
    shots: usize,
    seed: u64,
) -> Result<EstimateSeries> {
    let sampler = StabilizerSampler::new(obs, setup)?;
    let cache = ElementCache::new(setup, psi, None)?;
    let q = 0.5f64.powi(setup.n() as i32);
    let values = par_blocks(shots, seed, |rng, count| {
        (0..count)
            .map(|_| {
                let (idx, p) = sampler.sample(rng);
                let b = cache.get(idx).sampler.sample(rng);
                (sampler.overlap(idx).alpha(b) - q) / p + q
            })
            .collect()
    });
    Ok(EstimateSeries { protocol: Protocol::Biased, n: setup.n(), seed, values })
}

/// Dense overlap profile of a stabilizer observable with one element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaProfile {
    pub r: usize,
    pub alphas: Vec<f64>,
    /// Number of outcomes with `α = 2^{-r}`.
    pub support: usize,
}

/// Computes `α_{U,b}` densely and checks it against `2^r` copies of `2^{-r}`.
pub fn alpha_profile(obs: &StabilizerObservable, setup: &McmSetup, index: usize) -> Result<AlphaProfile> {
    let overlap = StabilizerOverlap::new(obs, setup.circuit(index))?;
    let r = overlap.r;
    let alphas = setup.rotation(index).outcome_probabilities(obs.state()?.amplitudes());
    let level = 0.5f64.powi(r as i32);
    let mut support = 0;
    for (b, &a) in alphas.iter().enumerate() {
        if (a - level).abs() < 1e-9 {
            support += 1;
        } else if a.abs() > 1e-9 {
            return Err(Error::ProfileMismatch(format!("alpha[{b}] = {a} is neither 0 nor 2^-{r}")));
        }
        if (overlap.alpha(b as u64) - a).abs() > 1e-9 {
            return Err(Error::ProfileMismatch(format!("kernel formula disagrees at outcome {b}")));
        }
    }
    if support != 1 << r {
        return Err(Error::ProfileMismatch(format!("{support} outcomes at 2^-{r}, expected {}", 1 << r)));
    }
    Ok(AlphaProfile { r, alphas, support })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::rng::stream_rng;
    use crate::shadow::sample_full_clifford;
    use crate::statesim::{build_observable, ObservableKind};

    #[test]
    fn identity_has_no_distribution() {
        let setup = McmSetup::new(2).unwrap();
        let id = DenseObservable::identity(2).unwrap();
        assert!(b_values(&id, &setup).iter().all(|b| *b == 0.0));
        assert!(matches!(optimal_distribution(&id, &setup), Err(Error::TrivialObservable)));
    }

    #[test]
    fn ghz_b_value_in_z_basis() {
        let setup = McmSetup::new(3).unwrap();
        let o = build_observable(&ObservableKind::GhzFidelity, 3).unwrap();
        assert!((b_u(&o, &setup, 0) - (0.5 - 0.125)).abs() < 1e-12);
    }

    #[test]
    fn single_pauli_distributions_agree() {
        let setup = McmSetup::new(3).unwrap();
        let p = PhasedPauli::parse("XZY").unwrap();
        let sum = PauliSumObservable::new(3, vec![(0.7, p)]).unwrap();
        let d1 = pauli_sum_distribution(&sum, &setup).unwrap();
        let d2 = optimal_distribution(&sum.to_dense().unwrap(), &setup).unwrap();
        assert_eq!(d1.support().len(), 1);
        assert_eq!(d1.support(), d2.support());
        assert!((d2.probability(d2.support()[0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_term_single_qubit_split() {
        let setup = McmSetup::new(1).unwrap();
        let o = PauliSumObservable::parse("1.0 Z\n1.0 X\n").unwrap();
        let d = pauli_sum_distribution(&o, &setup).unwrap();
        assert_eq!(d.probabilities(), &[0.5, 0.5, 0.0]);
    }

    #[test]
    fn parse_pauli_sums() {
        let o = PauliSumObservable::parse("# header\n0.5 XZI\n-0.25 -ZZZ\n2 III\n0.5 XZI\n").unwrap();
        assert_eq!(o.terms().len(), 2);
        assert_eq!(o.constant(), 2.0);
        assert_eq!(o.terms()[0].0, 1.0);
        assert_eq!(o.terms()[1].0, 0.25);
        assert!(PauliSumObservable::parse("1.0 XZ\n1.0 X\n").is_err());
        assert!(PauliSumObservable::parse("2 II\n").is_err());
        assert!(PauliSumObservable::parse("abc XZ\n").is_err());
    }

    #[test]
    fn plan_overlaps_match_dense() {
        let setup = McmSetup::new(3).unwrap();
        let o = PauliSumObservable::parse("0.5 XZI\n-0.3 YYX\n0.2 ZIZ\n0.9 IXI\n").unwrap();
        let plan = PauliSumPlan::new(&o, &setup).unwrap();
        let dense = o.to_dense().unwrap().traceless();
        for idx in 0..setup.len() {
            let diag = setup.rotation(idx).rotated_diagonal(&dense);
            for (b, v) in diag.iter().enumerate() {
                assert!((plan.traceless_overlap(idx, b as u64) - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stabilizer_norm_examples() {
        let p = build_observable(&ObservableKind::Pauli(PhasedPauli::parse("XYZ").unwrap()), 3).unwrap();
        assert!((stabilizer_norm(&p) - 1.0).abs() < 1e-12);
        let v = Circuit::from_gates(3, vec![Gate::H(0), Gate::CX(0, 1), Gate::S(2), Gate::H(2)]).unwrap();
        let s = StabilizerObservable::new(v).to_dense().unwrap();
        assert!((stabilizer_norm(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_stabilizer_samplers() {
        let setup = McmSetup::new(3).unwrap();
        let mut rng = stream_rng(4, 0);
        let zero = StabilizerObservable::new(Circuit::new(3));
        let plus = StabilizerObservable::new(Circuit::from_gates(3, (0..3).map(Gate::H).collect()).unwrap());
        for _ in 0..50 {
            assert_eq!(stabilizer_sampler(&zero, &setup, &mut rng).unwrap(), (0, 1.0));
            let (idx, p) = stabilizer_sampler(&plus, &setup, &mut rng).unwrap();
            assert_eq!(idx, 1);
            assert!((p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stabilizer_probabilities_match_dense_optimum() {
        let mut rng = stream_rng(8, 0);
        for n in 1..=4 {
            let setup = McmSetup::new(n).unwrap();
            for _ in 0..5 {
                let obs = StabilizerObservable::new(sample_full_clifford(n, &mut rng));
                let dense = optimal_distribution(&obs.to_dense().unwrap(), &setup).unwrap();
                let sampler = StabilizerSampler::new(&obs, &setup).unwrap();
                let mut total = 0.0;
                for idx in 0..setup.len() {
                    let p = sampler.overlap(idx).probability;
                    total += p;
                    assert!((p - dense.probability(idx)).abs() < 1e-9);
                    alpha_profile(&obs, &setup, idx).unwrap();
                }
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }
}
