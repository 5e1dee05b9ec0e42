//! Dense state-vector simulation and dense observables.
//!
//! Basis index bit `i` is qubit `i`. Operators are stored row-major.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::PhasedPauli;

/// Largest qubit count for dense simulation.
pub const MAX_QUBITS: usize = 14;

const NORM_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `i^k`.
#[inline]
pub fn i_pow(k: u8) -> Complex64 {
    match k & 3 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits { n, max: MAX_QUBITS });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubits(n)?;
        let mut amps = vec![ZERO; 1 << n];
        if index >= amps.len() {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        amps[index] = ONE;
        Ok(StateVector { n, amps })
    }

    /// Validates length and normalization.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, found: amps.len() });
        }
        let s = StateVector { n, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(s)
    }

    /// Divides by the L2 norm.
    pub fn normalized(n: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::from_amplitudes(n, amps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply_gate(&mut self, g: &Gate) {
        apply_gate_to_slice(&mut self.amps, g);
    }

    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<()> {
        if c.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: c.n() });
        }
        for g in c.gates() {
            self.apply_gate(g);
        }
        Ok(())
    }

    pub fn evolved(&self, c: &Circuit) -> Result<StateVector> {
        let mut s = self.clone();
        s.apply_circuit(c)?;
        Ok(s)
    }

    /// Draws a computational-basis outcome by the Born rule.
    pub fn sample_bitstring<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        OutcomeSampler::new(&self.probabilities()).sample(rng)
    }

    pub fn expectation(&self, o: &DenseObservable) -> Result<f64> {
        if o.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: o.n });
        }
        Ok(o.quad_form(&self.amps))
    }

    /// Applies a Pauli operator.
    pub fn apply_pauli(&self, p: &PhasedPauli) -> StateVector {
        let mut out = vec![ZERO; self.amps.len()];
        for (c, &a) in self.amps.iter().enumerate() {
            let (k, c2) = p.apply_to_basis(c as u64);
            out[c2 as usize] += i_pow(k) * a;
        }
        StateVector { n: self.n, amps: out }
    }
}

/// Applies one gate to a raw amplitude slice of length `2^n`.
pub fn apply_gate_to_slice(amps: &mut [Complex64], g: &Gate) {
    let dim = amps.len();
    match *g {
        Gate::H(a) => {
            let b = 1usize << a;
            for c in 0..dim {
                if c & b == 0 {
                    let (u, v) = (amps[c], amps[c | b]);
                    amps[c] = (u + v) * FRAC_1_SQRT_2;
                    amps[c | b] = (u - v) * FRAC_1_SQRT_2;
                }
            }
        }
        Gate::S(a) | Gate::Sdg(a) | Gate::Z(a) => {
            let f = match g {
                Gate::S(_) => I,
                Gate::Sdg(_) => -I,
                _ => -ONE,
            };
            let b = 1usize << a;
            for (c, amp) in amps.iter_mut().enumerate() {
                if c & b != 0 {
                    *amp *= f;
                }
            }
        }
        Gate::X(a) => {
            let b = 1usize << a;
            for c in 0..dim {
                if c & b == 0 {
                    amps.swap(c, c | b);
                }
            }
        }
        Gate::Y(a) => {
            // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
            let b = 1usize << a;
            for c in 0..dim {
                if c & b == 0 {
                    let (u, v) = (amps[c], amps[c | b]);
                    amps[c] = -I * v;
                    amps[c | b] = I * u;
                }
            }
        }
        Gate::CZ(a, b) => {
            let m = (1usize << a) | (1usize << b);
            for (c, amp) in amps.iter_mut().enumerate() {
                if c & m == m {
                    *amp = -*amp;
                }
            }
        }
        Gate::CX(ctl, tgt) => {
            let (bc, bt) = (1usize << ctl, 1usize << tgt);
            for c in 0..dim {
                if c & bc != 0 && c & bt == 0 {
                    amps.swap(c, c | bt);
                }
            }
        }
    }
}

/// Inverse-CDF sampler over a fixed distribution.
#[derive(Debug, Clone)]
pub struct OutcomeSampler {
    cdf: Vec<f64>,
}

impl OutcomeSampler {
    pub fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        OutcomeSampler { cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = *self.cdf.last().expect("nonempty distribution");
        let u: f64 = rng.random::<f64>() * total;
        let k = self.cdf.partition_point(|&c| c <= u);
        // guard against rounding past the end and zero-probability tails
        let mut k = k.min(self.cdf.len() - 1);
        while k > 0 && self.cdf[k] == self.cdf[k - 1] {
            k -= 1;
        }
        k as u64
    }
}

/// Named state preparations.
#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    Zero,
    Ghz,
    /// `cos(θ/2)|0…0⟩ + sin(θ/2)|1…1⟩`, normalized.
    GhzTheta(f64),
    /// Haar-random pure state from Gaussian amplitudes.
    Haar,
    /// `V|0…0⟩` for a Clifford circuit `V`.
    StabilizerCircuit(Circuit),
}

/// Builds a named state on `n` qubits.
pub fn prepare_named<R: Rng + ?Sized>(kind: &StateKind, n: usize, rng: &mut R) -> Result<StateVector> {
    check_qubits(n)?;
    let dim = 1usize << n;
    match kind {
        StateKind::Zero => StateVector::zero(n),
        StateKind::Ghz => ghz_theta(n, std::f64::consts::FRAC_PI_2),
        StateKind::GhzTheta(theta) => ghz_theta(n, *theta),
        StateKind::Haar => {
            let amps = (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            StateVector::normalized(n, amps)
        }
        StateKind::StabilizerCircuit(c) => StateVector::zero(n)?.evolved(c),
    }
}

fn ghz_theta(n: usize, theta: f64) -> Result<StateVector> {
    let dim = 1usize << n;
    let mut amps = vec![ZERO; dim];
    amps[0] += Complex64::from((theta / 2.0).cos());
    amps[dim - 1] += Complex64::from((theta / 2.0).sin());
    StateVector::normalized(n, amps)
}

/// A Hermitian `2^n x 2^n` operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseObservable {
    n: usize,
    dim: usize,
    m: Vec<Complex64>,
}

impl DenseObservable {
    /// Checks shape and Hermiticity.
    pub fn new(n: usize, m: Vec<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if m.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: m.len() });
        }
        let o = DenseObservable { n, dim, m };
        let dev = o.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(o)
    }

    fn from_raw(n: usize, m: Vec<Complex64>) -> Self {
        DenseObservable { n, dim: 1 << n, m }
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Ok(Self::from_raw(n, vec![ZERO; 1 << (2 * n)]))
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut o = Self::zeros(n)?;
        for i in 0..o.dim {
            o.m[i * o.dim + i] = ONE;
        }
        Ok(o)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(s: &StateVector) -> Self {
        let dim = s.dim();
        let mut m = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                m[r * dim + c] = s.amps[r] * s.amps[c].conj();
            }
        }
        Self::from_raw(s.n, m)
    }

    /// Dense matrix of a Pauli; rejects non-Hermitian phases.
    pub fn from_pauli(p: &PhasedPauli) -> Result<Self> {
        if !p.is_hermitian() {
            return Err(Error::NotHermitian(2.0));
        }
        let mut o = Self::zeros(p.n())?;
        for c in 0..o.dim {
            let (k, r) = p.apply_to_basis(c as u64);
            o.m[r as usize * o.dim + c] = i_pow(k);
        }
        Ok(o)
    }

    /// `⊗_q m_q` with `factors[q]` the 2x2 row-major matrix on qubit `q`.
    pub fn tensor_product(factors: &[[Complex64; 4]]) -> Result<Self> {
        let n = factors.len();
        let mut o = Self::zeros(n)?;
        let dim = o.dim;
        for r in 0..dim {
            for c in 0..dim {
                let mut v = ONE;
                for (q, f) in factors.iter().enumerate() {
                    v *= f[(((r >> q) & 1) << 1) | ((c >> q) & 1)];
                    if v == ZERO {
                        break;
                    }
                }
                o.m[r * dim + c] = v;
            }
        }
        let dev = o.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(o)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.m[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.m[r * self.dim + c] = v;
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                dev = dev.max((self.m[r * d + c] - self.m[c * d + r].conj()).norm());
            }
        }
        dev
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.m[i * self.dim + i].re).sum()
    }

    /// Real diagonal.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.m[i * self.dim + i].re).collect()
    }

    /// `O_0 = O - tr(O) I / 2^n`.
    pub fn traceless(&self) -> Self {
        let shift = self.trace() / self.dim as f64;
        let mut o = self.clone();
        for i in 0..self.dim {
            o.m[i * self.dim + i] -= shift;
        }
        o
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_raw(self.n, self.m.iter().map(|v| v * s).collect())
    }

    pub fn plus(&self, other: &DenseObservable) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(Self::from_raw(self.n, self.m.iter().zip(&other.m).map(|(a, b)| a + b).collect()))
    }

    /// `tr(self · other)`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &DenseObservable) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for r in 0..d {
            for c in 0..d {
                acc += (self.m[r * d + c] * other.m[c * d + r]).re;
            }
        }
        acc
    }

    /// `⟨ψ|O|ψ⟩` (real part).
    pub fn quad_form(&self, psi: &[Complex64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for r in 0..d {
            if psi[r] == ZERO {
                continue;
            }
            let row = &self.m[r * d..(r + 1) * d];
            let s: Complex64 = row.iter().zip(psi).map(|(a, b)| a * b).sum();
            acc += (psi[r].conj() * s).re;
        }
        acc
    }

    /// `U O U†` for the circuit unitary `U`.
    pub fn conjugated(&self, c: &Circuit) -> Result<Self> {
        if c.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: c.n() });
        }
        let d = self.dim;
        // columns of U O, then rows of (U O) U† = (U (U O)†)†
        let mut uo = self.m.clone();
        apply_circuit_to_columns(&mut uo, d, c);
        let mut t: Vec<Complex64> = vec![ZERO; d * d];
        for r in 0..d {
            for col in 0..d {
                t[col * d + r] = uo[r * d + col].conj();
            }
        }
        apply_circuit_to_columns(&mut t, d, c);
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            for col in 0..d {
                out[r * d + col] = t[col * d + r].conj();
            }
        }
        Ok(Self::from_raw(self.n, out))
    }
}

/// Applies `c` to every column of a row-major `d x d` matrix.
fn apply_circuit_to_columns(m: &mut [Complex64], d: usize, c: &Circuit) {
    let mut col = vec![ZERO; d];
    for j in 0..d {
        for r in 0..d {
            col[r] = m[r * d + j];
        }
        for g in c.gates() {
            apply_gate_to_slice(&mut col, g);
        }
        for r in 0..d {
            m[r * d + j] = col[r];
        }
    }
}

/// Dense unitary of a circuit, row-major.
pub fn circuit_unitary(c: &Circuit) -> Result<Vec<Complex64>> {
    check_qubits(c.n())?;
    let d = 1usize << c.n();
    let mut m = vec![ZERO; d * d];
    for i in 0..d {
        m[i * d + i] = ONE;
    }
    apply_circuit_to_columns(&mut m, d, c);
    Ok(m)
}

/// Named observables.
#[derive(Debug, Clone, PartialEq)]
pub enum ObservableKind {
    Identity,
    /// `|GHZ⟩⟨GHZ|`.
    GhzFidelity,
    /// `[(|0⟩⟨1|)^{⊗n} + (|1⟩⟨0|)^{⊗n}] / 2`.
    GhzOffDiagonal,
    /// `(1-a)(|0…0⟩⟨1…1| + h.c.) + a(|0…0⟩⟨0…0| + |1…1⟩⟨1…1|)`; `a = 0` is
    /// the pure coherence term and `a = 0.5` the GHZ projector.
    GhzMixture(f64),
    /// `(cos θ Z + sin θ X)^{⊗k} ⊗ I^{⊗(n-k)}`.
    Local { k: usize, theta: f64 },
    /// `(cos(θ/2) X + sin(θ/2) Z)^{⊗n}`.
    ProductXz(f64),
    Pauli(PhasedPauli),
    /// Projector onto `V|0…0⟩`.
    StabilizerProjector(Circuit),
}

pub fn build_observable(kind: &ObservableKind, n: usize) -> Result<DenseObservable> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let last = dim - 1;
    let c = |x: f64| Complex64::from(x);
    match kind {
        ObservableKind::Identity => DenseObservable::identity(n),
        ObservableKind::GhzFidelity => build_observable(&ObservableKind::GhzMixture(0.5), n),
        ObservableKind::GhzOffDiagonal => {
            let mut o = DenseObservable::zeros(n)?;
            o.set(0, last, o.get(0, last) + 0.5);
            o.set(last, 0, o.get(last, 0) + 0.5);
            Ok(o)
        }
        ObservableKind::GhzMixture(a) => {
            let mut o = DenseObservable::zeros(n)?;
            let add = |o: &mut DenseObservable, r: usize, col: usize, v: f64| o.set(r, col, o.get(r, col) + v);
            add(&mut o, 0, last, 1.0 - a);
            add(&mut o, last, 0, 1.0 - a);
            add(&mut o, 0, 0, *a);
            add(&mut o, last, last, *a);
            Ok(o)
        }
        ObservableKind::Local { k, theta } => {
            if *k > n {
                return Err(Error::InvalidArgument(format!("locality {k} exceeds {n} qubits")));
            }
            let (co, si) = (theta.cos(), theta.sin());
            let local = [c(co), c(si), c(si), c(-co)];
            let id = [ONE, ZERO, ZERO, ONE];
            let factors: Vec<_> = (0..n).map(|q| if q < *k { local } else { id }).collect();
            DenseObservable::tensor_product(&factors)
        }
        ObservableKind::ProductXz(theta) => {
            let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            DenseObservable::tensor_product(&vec![[c(si), c(co), c(co), c(-si)]; n])
        }
        ObservableKind::Pauli(p) => {
            if p.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.n() });
            }
            DenseObservable::from_pauli(p)
        }
        ObservableKind::StabilizerProjector(v) => {
            let s = StateVector::zero(n)?.evolved(v)?;
            Ok(DenseObservable::projector(&s))
        }
    }
}
