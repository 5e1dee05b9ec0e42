//! Phased Pauli operators on up to 64 qubits.
//!
//! The operator is `i^phase ∏_j X_j^{x_j} Z_j^{z_j}` with the X factor to the
//! left of the Z factor on each qubit, so `Y = i·X·Z` has `x = z = 1` and
//! phase 1. String forms list qubit 0 first: `"XZI"` is `X_0 Z_1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
fn parity(w: u64) -> u8 {
    (w.count_ones() & 1) as u8
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct PhasedPauli {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PhasedPauli {
    pub fn new(n: usize, x: u64, z: u64, phase: u8) -> Self {
        assert!(n <= 64, "at most 64 qubits");
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        assert!(x & !mask == 0 && z & !mask == 0, "support outside {n} qubits");
        PhasedPauli { n, x, z, phase: phase & 3 }
    }

    pub fn identity(n: usize) -> Self {
        PhasedPauli::new(n, 0, 0, 0)
    }

    /// `∏ Z_j^{m_j}`.
    pub fn z_type(n: usize, m: u64) -> Self {
        PhasedPauli::new(n, 0, m, 0)
    }

    pub fn x_type(n: usize, m: u64) -> Self {
        PhasedPauli::new(n, m, 0, 0)
    }

    /// Hermitian single-qubit Pauli `kind ∈ {I, X, Y, Z}` on qubit `q`.
    pub fn single(n: usize, q: usize, kind: char) -> Result<Self> {
        if q >= n {
            return Err(Error::InvalidQubit { qubit: q, n });
        }
        let b = 1u64 << q;
        Ok(match kind {
            'I' => PhasedPauli::identity(n),
            'X' => PhasedPauli::new(n, b, 0, 0),
            'Y' => PhasedPauli::new(n, b, b, 1),
            'Z' => PhasedPauli::new(n, 0, b, 0),
            other => return Err(Error::InvalidArgument(format!("unknown Pauli {other:?}"))),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    /// Exponent of `i`, in `0..4`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(self, phase: u8) -> Self {
        PhasedPauli { phase: phase & 3, ..self }
    }

    /// Multiplies by `i^k`.
    pub fn times_i(self, k: u8) -> Self {
        self.with_phase(self.phase + k)
    }

    pub fn negate(self) -> Self {
        self.times_i(2)
    }

    /// Identity up to phase.
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    /// Same Pauli string, ignoring phase.
    pub fn same_string(&self, other: &PhasedPauli) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Number of Y factors (`x_j = z_j = 1`).
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn is_hermitian(&self) -> bool {
        (self.phase & 1) as u32 == self.y_count() & 1
    }

    /// `±1` such that the operator equals `±` the product of Hermitian
    /// single-qubit factors; `None` if not Hermitian.
    pub fn sign(&self) -> Option<i8> {
        match (self.phase as u32 + 4 - (self.y_count() & 3)) & 3 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn is_z_type(&self) -> bool {
        self.x == 0
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PhasedPauli) -> PhasedPauli {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        // Z^{z1} X^{x2} = (-1)^{z1·x2} X^{x2} Z^{z1}
        let phase = self.phase + other.phase + 2 * parity(self.z & other.x);
        PhasedPauli { n: self.n, x: self.x ^ other.x, z: self.z ^ other.z, phase: phase & 3 }
    }

    pub fn commutes_with(&self, other: &PhasedPauli) -> bool {
        parity((self.x & other.z) ^ (self.z & other.x)) == 0
    }

    /// `P|c⟩ = i^k |c'⟩`; returns `(k, c')`.
    #[inline]
    pub fn apply_to_basis(&self, c: u64) -> (u8, u64) {
        ((self.phase + 2 * parity(self.z & c)) & 3, c ^ self.x)
    }

    pub fn letter(&self, q: usize) -> char {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }

    /// Letters for qubits `0..n`, ignoring phase.
    pub fn letters(&self) -> String {
        (0..self.n).map(|q| self.letter(q)).collect()
    }

    /// Parses `[+|-][i]PAULIS` where `PAULIS` uses `IXYZ`, qubit 0 first.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (neg, rest) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let (imag, body) = match rest.strip_prefix('i') {
            Some(r) => (true, r),
            None => (false, rest),
        };
        let n = body.chars().count();
        if n == 0 || n > 64 {
            return Err(Error::InvalidArgument(format!("bad Pauli string {s:?}")));
        }
        let mut p = PhasedPauli::identity(n);
        for (q, c) in body.chars().enumerate() {
            p = p.mul(&PhasedPauli::single(n, q, c)?);
        }
        let extra = 2 * neg as u8 + imag as u8;
        Ok(p.times_i(extra))
    }
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // phase relative to the product of Hermitian letters
        let rel = (self.phase as u32 + 4 - (self.y_count() & 3)) & 3;
        let prefix = ["", "i", "-", "-i"][rel as usize];
        write!(f, "{prefix}{}", self.letters())
    }
}

impl fmt::Debug for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhasedPauli({self})")
    }
}

impl From<PhasedPauli> for String {
    fn from(p: PhasedPauli) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for PhasedPauli {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        PhasedPauli::parse(&s)
    }
}

impl std::str::FromStr for PhasedPauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PhasedPauli::parse(s)
    }
}
