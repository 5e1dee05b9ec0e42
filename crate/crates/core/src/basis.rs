//! Basis rotations for measurement settings.
//!
//! Every synthesized ensemble circuit is a run of diagonal gates followed by a
//! Hadamard on every qubit, so `U = H^{⊗n} W` with `W = diag(w)`. Then
//! `U|ψ⟩ = WHT(w ⊙ ψ) / √2^n` and
//! `⟨b|U A U†|b⟩ = 2^{-n} Σ_d (-1)^{b·d} a_d` with
//! `a_d = Σ_x w_x A_{x,x⊕d} conj(w_{x⊕d})`. Other circuits fall back to
//! dense simulation.

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::statesim::{apply_gate_to_slice, DenseObservable};

/// In-place unnormalized Walsh-Hadamard transform.
pub fn fwht<T>(v: &mut [T])
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

#[derive(Debug, Clone)]
pub enum BasisRotation {
    Identity,
    /// Diagonal phases `w`, then `H` on every qubit.
    PhaseHadamard(Vec<Complex64>),
    General(Circuit),
}

impl BasisRotation {
    pub fn from_circuit(c: &Circuit) -> Self {
        if c.is_empty() {
            return BasisRotation::Identity;
        }
        let n = c.n();
        let (diag, rest) = c.diagonal_prefix();
        let mut seen = 0u64;
        let full_h = rest.len() == n
            && rest.iter().all(|g| match *g {
                Gate::H(q) if seen & (1 << q) == 0 => {
                    seen |= 1 << q;
                    true
                }
                _ => false,
            });
        if !full_h {
            return BasisRotation::General(c.clone());
        }
        let mut w = vec![Complex64::new(1.0, 0.0); 1 << n];
        for g in diag {
            apply_gate_to_slice(&mut w, g);
        }
        BasisRotation::PhaseHadamard(w)
    }

    /// `U|ψ⟩`.
    pub fn rotate(&self, psi: &[Complex64]) -> Vec<Complex64> {
        match self {
            BasisRotation::Identity => psi.to_vec(),
            BasisRotation::PhaseHadamard(w) => {
                let mut v: Vec<Complex64> = psi.iter().zip(w).map(|(a, b)| a * b).collect();
                fwht(&mut v);
                let s = 1.0 / (psi.len() as f64).sqrt();
                v.iter_mut().for_each(|a| *a *= s);
                v
            }
            BasisRotation::General(c) => {
                let mut v = psi.to_vec();
                for g in c.gates() {
                    apply_gate_to_slice(&mut v, g);
                }
                v
            }
        }
    }

    /// Outcome distribution `|⟨b|U|ψ⟩|²`.
    pub fn outcome_probabilities(&self, psi: &[Complex64]) -> Vec<f64> {
        self.rotate(psi).iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨b|U A U†|b⟩` for every `b`.
    pub fn rotated_diagonal(&self, a: &DenseObservable) -> Vec<f64> {
        match self {
            BasisRotation::Identity => a.diagonal(),
            BasisRotation::PhaseHadamard(w) => {
                let d = w.len();
                let mut coeff = vec![0.0f64; d];
                for (dd, slot) in coeff.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for x in 0..d {
                        let y = x ^ dd;
                        let v = a.get(x, y);
                        if v.re != 0.0 || v.im != 0.0 {
                            acc += w[x] * v * w[y].conj();
                        }
                    }
                    *slot = acc.re;
                }
                fwht(&mut coeff);
                let s = 1.0 / d as f64;
                coeff.iter_mut().for_each(|c| *c *= s);
                coeff
            }
            BasisRotation::General(c) => a.conjugated(c).expect("matching qubit count").diagonal(),
        }
    }

    /// `U† |b⟩` as a dense vector.
    pub fn basis_state(&self, n: usize, b: usize) -> Vec<Complex64> {
        let d = 1usize << n;
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        v[b] = Complex64::new(1.0, 0.0);
        match self {
            BasisRotation::Identity => v,
            BasisRotation::PhaseHadamard(w) => {
                fwht(&mut v);
                let s = 1.0 / (d as f64).sqrt();
                v.iter().zip(w).map(|(a, ph)| a * s * ph.conj()).collect()
            }
            BasisRotation::General(c) => {
                for g in c.dagger().gates() {
                    apply_gate_to_slice(&mut v, g);
                }
                v
            }
        }
    }
}
