//! Arithmetic in GF(2^n) and the companion binary matrices that parameterize
//! the mutually unbiased bases.
//!
//! Field elements use the little-endian integer encoding: bit `i` of the value
//! is the coefficient of `x^i` (equivalently of `2^i`). The same convention maps
//! bit `i` to qubit `i` everywhere else in the crate.
//!
//! For a field with modulus `P_n`, the `(2n-1) x n` matrix `Γ_n` stores
//! `2^k mod P_n` in row `k`, and `M_n^(j)` is the symmetric matrix with
//! `[M_n^(j)]_{p,q} = Γ_{p+q, j}`, which linearizes bit `j` of a product:
//! `[a ⊙ b]_j = a M_n^(j) b^T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2linalg::BinaryMatrix;

/// Largest supported field degree (and therefore qubit count for the ensemble).
pub const MAX_DEGREE: usize = 16;

/// An element of GF(2^n) in little-endian polynomial encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GfElement(pub u32);

impl GfElement {
    pub fn value(self) -> u32 {
        self.0
    }

    /// Bit `j` of the element (coefficient of `x^j`).
    pub fn bit(self, j: usize) -> bool {
        (self.0 >> j) & 1 == 1
    }
}

impl From<u32> for GfElement {
    fn from(v: u32) -> Self {
        GfElement(v)
    }
}

impl std::ops::Add for GfElement {
    type Output = GfElement;

    fn add(self, rhs: GfElement) -> GfElement {
        GfElement(self.0 ^ rhs.0)
    }
}

/// A monic irreducible polynomial of degree `n` over F2, stored with its
/// leading bit: `bits = 2^n + Σ c_i 2^i + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IrreduciblePoly {
    degree: usize,
    bits: u32,
}

impl IrreduciblePoly {
    /// Validates `bits` as an irreducible degree-`degree` polynomial.
    pub fn new(degree: usize, bits: u32) -> Result<Self> {
        check_degree(degree)?;
        let valid = poly_degree(bits as u64) == Some(degree) && bits & 1 == 1 && is_irreducible(bits);
        if !valid {
            return Err(Error::NotIrreducible { degree, bits });
        }
        Ok(IrreduciblePoly { degree, bits })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// The low `n` coefficients, i.e. `x^n mod P_n`.
    pub fn reduction_mask(&self) -> u32 {
        self.bits & ((1u32 << self.degree) - 1)
    }

    /// Number of field elements, `2^n`.
    pub fn order(&self) -> usize {
        1usize << self.degree
    }
}

impl std::fmt::Display for IrreduciblePoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut terms = Vec::new();
        for i in (0..=self.degree).rev() {
            if (self.bits >> i) & 1 == 1 {
                terms.push(match i {
                    0 => "1".to_string(),
                    1 => "x".to_string(),
                    _ => format!("x^{i}"),
                });
            }
        }
        write!(f, "{}", terms.join(" + "))
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DEGREE {
        return Err(Error::DegreeOutOfRange(n));
    }
    Ok(())
}

fn poly_degree(p: u64) -> Option<usize> {
    if p == 0 {
        None
    } else {
        Some(63 - p.leading_zeros() as usize)
    }
}

/// Carry-less product of two polynomials.
pub(crate) fn clmul(a: u32, b: u32) -> u64 {
    let (a, mut b) = (a as u64, b as u64);
    let mut acc = 0u64;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

/// Remainder of `a` modulo the nonzero polynomial `m`.
pub(crate) fn poly_rem(mut a: u64, m: u64) -> u64 {
    let dm = poly_degree(m).expect("modulus must be nonzero");
    while let Some(da) = poly_degree(a) {
        if da < dm {
            break;
        }
        a ^= m << (da - dm);
    }
    a
}

/// Trial division against every monic polynomial of degree `1..=deg/2`.
pub fn is_irreducible(bits: u32) -> bool {
    let Some(deg) = poly_degree(bits as u64) else {
        return false;
    };
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        for low in 0..(1u64 << d) {
            let divisor = (1u64 << d) | low;
            if poly_rem(bits as u64, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

/// The lexicographically smallest irreducible monic polynomial of degree `n`.
pub fn find_irreducible(n: usize) -> Result<IrreduciblePoly> {
    check_degree(n)?;
    let lead = 1u32 << n;
    (0..lead)
        .map(|low| lead | low)
        .find(|&bits| bits & 1 == 1 && is_irreducible(bits))
        .map(|bits| IrreduciblePoly { degree: n, bits })
        .ok_or(Error::DegreeOutOfRange(n))
}

/// `2^k mod P_n`. For `n = 1` the element `2` itself is not reduced, so
/// powers are taken on the polynomial side.
pub fn pow2_mod(k: usize, p: &IrreduciblePoly) -> GfElement {
    let mut acc = 1u64;
    for _ in 0..k {
        acc = poly_rem(acc << 1, p.bits as u64);
    }
    GfElement(acc as u32)
}

/// Field multiplication: carry-less product reduced modulo `p`.
pub fn gf_mul(a: GfElement, b: GfElement, p: &IrreduciblePoly) -> GfElement {
    debug_assert!((a.0 as usize) < p.order() && (b.0 as usize) < p.order());
    GfElement(poly_rem(clmul(a.0, b.0), p.bits as u64) as u32)
}

/// GF(2^n) with a fixed modulus; convenience wrapper over the free functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaloisField {
    poly: IrreduciblePoly,
}

impl GaloisField {
    /// The field of degree `n` using [`find_irreducible`].
    pub fn new(n: usize) -> Result<Self> {
        Ok(GaloisField { poly: find_irreducible(n)? })
    }

    pub fn with_poly(poly: IrreduciblePoly) -> Self {
        GaloisField { poly }
    }

    pub fn degree(&self) -> usize {
        self.poly.degree
    }

    pub fn poly(&self) -> &IrreduciblePoly {
        &self.poly
    }

    pub fn mul(&self, a: GfElement, b: GfElement) -> GfElement {
        gf_mul(a, b, &self.poly)
    }

    /// `2^k mod P_n` as a field element.
    pub fn pow2(&self, k: usize) -> GfElement {
        pow2_mod(k, &self.poly)
    }

    pub fn pow(&self, a: GfElement, mut e: u64) -> GfElement {
        let (mut base, mut acc) = (a, GfElement(1));
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via `a^(2^n - 2)`; `None` for zero.
    pub fn inv(&self, a: GfElement) -> Option<GfElement> {
        if a.0 == 0 {
            None
        } else {
            Some(self.pow(a, (self.poly.order() - 2) as u64))
        }
    }
}

/// The `(2n-1) x n` matrix whose row `k` is `2^k mod P_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaMatrix {
    n: usize,
    rows: BinaryMatrix,
}

impl GammaMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &BinaryMatrix {
        &self.rows
    }

    pub fn get(&self, k: usize, j: usize) -> bool {
        self.rows.get(k, j)
    }
}

/// Builds `Γ_n` with the row recurrence
/// `Γ_{i,j} = (1-δ_{j,0}) Γ_{i-1,j-1} + Γ_{n,j} Γ_{i-1,n-1}` for `i > n`.
pub fn gamma_matrix(poly: &IrreduciblePoly) -> GammaMatrix {
    let n = poly.degree;
    let mut rows = BinaryMatrix::zeros(2 * n - 1, n);
    for i in 0..n {
        rows.set(i, i, true);
    }
    if n > 1 {
        for j in 0..n {
            rows.set(n, j, (poly.bits >> j) & 1 == 1);
        }
        for i in n + 1..2 * n - 1 {
            let carry = rows.get(i - 1, n - 1);
            for j in 0..n {
                let shifted = j > 0 && rows.get(i - 1, j - 1);
                rows.set(i, j, shifted ^ (carry && rows.get(n, j)));
            }
        }
    }
    GammaMatrix { n, rows }
}

/// `M_n^(j)` with entries `Γ_{p+q, j}`.
pub fn m_matrix(gamma: &GammaMatrix, j: usize) -> Result<BinaryMatrix> {
    let n = gamma.n;
    if j >= n {
        return Err(Error::InvalidArgument(format!("column {j} out of range for degree {n}")));
    }
    let mut m = BinaryMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..n {
            m.set(p, q, gamma.get(p + q, j));
        }
    }
    Ok(m)
}

/// `M_n = Γ_n M_n^(0)`, a `(2n-1) x n` Hankel matrix.
pub fn m_full(gamma: &GammaMatrix) -> BinaryMatrix {
    let m0 = m_matrix(gamma, 0).expect("column 0 always exists");
    gamma.rows.mul(&m0)
}

/// Bit vector of a field element times a binary matrix: `(a) M`.
pub(crate) fn row_times_matrix(a: GfElement, m: &BinaryMatrix) -> u64 {
    let mut acc = 0u64;
    for p in 0..m.rows() {
        if a.bit(p) {
            acc ^= m.row_word(p);
        }
    }
    acc
}
