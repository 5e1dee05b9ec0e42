//! The `2^n + 1` element MUB ensemble as Z-tableaus and stabilizer generators.
//!
//! Element 0 measures in the computational basis (tableau `[O, I]`). Element
//! `v + 1` has tableau `[I, D_v]` where row `i` of `D_v` is the bit vector of
//! `(v ⊙ 2^i) M_n^(0)`. Elements are produced on demand from the `n` blocks
//! `𝔻_i` (rows `i..i+n-1` of `M_n`) using `D_v = Σ_i v_i 𝔻_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2linalg::{beta_basis, solve_f2, BinaryMatrix, BitVector};
use crate::gf2n::{
    find_irreducible, gamma_matrix, gf_mul, m_full, m_matrix, pow2_mod, row_times_matrix, GammaMatrix, GfElement,
    IrreduciblePoly,
};
use crate::pauli::PhasedPauli;

/// The `n x 2n` matrix `[C, D]` of X and Z parts of a generating set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZTableau {
    pub c: BinaryMatrix,
    pub d: BinaryMatrix,
}

impl ZTableau {
    pub fn new(c: BinaryMatrix, d: BinaryMatrix) -> Result<Self> {
        let n = c.rows();
        for m in [&c, &d] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.cols() });
            }
        }
        Ok(ZTableau { c, d })
    }

    /// `[O, I]`, the computational basis.
    pub fn z_basis(n: usize) -> Self {
        ZTableau { c: BinaryMatrix::zeros(n, n), d: BinaryMatrix::identity(n) }
    }

    pub fn n(&self) -> usize {
        self.c.rows()
    }

    /// Row `i` as an unphased Pauli.
    pub fn row_pauli(&self, i: usize) -> PhasedPauli {
        PhasedPauli::new(self.n(), self.c.row_word(i), self.d.row_word(i), 0)
    }

    /// Rank of the stacked `[C | D]` rows.
    pub fn rank(&self) -> usize {
        crate::f2linalg::rank_f2(&self.c.hstack(&self.d))
    }

    /// Rows pairwise commute and are independent.
    pub fn is_maximal_stabilizer(&self) -> bool {
        let n = self.n();
        let rows: Vec<PhasedPauli> = (0..n).map(|i| self.row_pauli(i)).collect();
        let commuting = rows.iter().enumerate().all(|(i, p)| rows[..i].iter().all(|q| p.commutes_with(q)));
        commuting && self.rank() == n
    }
}

/// One measurement setting of the ensemble.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MubElement {
    pub index: usize,
    /// Field label `v`, absent for the computational-basis element.
    pub label: Option<u32>,
    pub tableau: ZTableau,
    pub generators: Vec<PhasedPauli>,
}

/// Canonical MUB ensemble over GF(2^n).
#[derive(Debug, Clone)]
pub struct MubEnsemble {
    n: usize,
    poly: IrreduciblePoly,
    gamma: GammaMatrix,
    m0: BinaryMatrix,
    /// `𝔻_i` packed as row words.
    blocks: Vec<Vec<u64>>,
    beta: BinaryMatrix,
}

/// Builds the ensemble for `n` qubits with the modulus from
/// [`find_irreducible`].
pub fn build_ensemble(n: usize) -> Result<MubEnsemble> {
    MubEnsemble::new(n)
}

impl MubEnsemble {
    pub fn new(n: usize) -> Result<Self> {
        let poly = find_irreducible(n)?;
        let gamma = gamma_matrix(&poly);
        let m0 = m_matrix(&gamma, 0)?;
        let m = m_full(&gamma);
        let blocks = (0..n).map(|i| (0..n).map(|j| m.row_word(i + j)).collect()).collect();
        let beta = beta_basis(n)?;
        Ok(MubEnsemble { n, poly, gamma, m0, blocks, beta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn poly(&self) -> &IrreduciblePoly {
        &self.poly
    }

    pub fn gamma(&self) -> &GammaMatrix {
        &self.gamma
    }

    /// Number of elements, `2^n + 1`.
    pub fn len(&self) -> usize {
        (1usize << self.n) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `𝔻_i` as a matrix.
    pub fn block(&self, i: usize) -> BinaryMatrix {
        BinaryMatrix::from_row_words(self.n, &self.blocks[i])
    }

    /// Columns are the Hankel coefficients of the `𝔻_i`.
    pub fn beta_basis(&self) -> &BinaryMatrix {
        &self.beta
    }

    /// Hankel coefficients `β^v = Σ_i v_i β^(i)` of `D_v`.
    pub fn beta_of(&self, v: u32) -> BitVector {
        self.beta.mul_vec(&BitVector::from_u64(self.n, v as u64))
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.len() {
            return Err(Error::ElementOutOfRange { index, len: self.len() });
        }
        Ok(())
    }

    /// Packed rows of `D_v` via the block sum.
    pub fn d_rows(&self, v: u32) -> Vec<u64> {
        let mut rows = vec![0u64; self.n];
        for (i, block) in self.blocks.iter().enumerate() {
            if (v >> i) & 1 == 1 {
                for (r, b) in rows.iter_mut().zip(block) {
                    *r ^= b;
                }
            }
        }
        rows
    }

    pub fn d_matrix(&self, v: u32) -> BinaryMatrix {
        BinaryMatrix::from_row_words(self.n, &self.d_rows(v))
    }

    /// Field label of an element, `None` for index 0.
    pub fn label(&self, index: usize) -> Option<u32> {
        (index > 0).then(|| (index - 1) as u32)
    }

    pub fn tableau(&self, index: usize) -> Result<ZTableau> {
        self.check_index(index)?;
        Ok(match self.label(index) {
            None => ZTableau::z_basis(self.n),
            Some(v) => ZTableau { c: BinaryMatrix::identity(self.n), d: self.d_matrix(v) },
        })
    }

    /// Generators `g_i = U† Z_i U` with the phase produced by the synthesized
    /// circuit: `(-i)^{D_ii} X_i Z^{row_i(D_v)}`.
    pub fn generators(&self, index: usize) -> Result<Vec<PhasedPauli>> {
        self.check_index(index)?;
        let n = self.n;
        Ok(match self.label(index) {
            None => (0..n).map(|i| PhasedPauli::z_type(n, 1 << i)).collect(),
            Some(v) => self
                .d_rows(v)
                .into_iter()
                .enumerate()
                .map(|(i, row)| {
                    let diag = ((row >> i) & 1) as u8;
                    PhasedPauli::new(n, 1 << i, row, 3 * diag)
                })
                .collect(),
        })
    }

    pub fn element(&self, index: usize) -> Result<MubElement> {
        Ok(MubElement {
            index,
            label: self.label(index),
            tableau: self.tableau(index)?,
            generators: self.generators(index)?,
        })
    }

    pub fn elements(&self) -> impl Iterator<Item = MubElement> + '_ {
        (0..self.len()).map(|i| self.element(i).expect("index in range"))
    }

    /// `S_m = ∏_{i: m_i = 1} g_i`, multiplied in ascending `i`.
    pub fn stabilizer(&self, index: usize, m: u64) -> Result<PhasedPauli> {
        let gens = self.generators(index)?;
        let mut acc = PhasedPauli::identity(self.n);
        for (i, g) in gens.iter().enumerate() {
            if (m >> i) & 1 == 1 {
                acc = acc.mul(g);
            }
        }
        Ok(acc)
    }

    /// The unique element whose stabilizer group contains `p` up to phase,
    /// together with the exponent vector `m` of `p` in that group.
    pub fn element_for_pauli(&self, p: &PhasedPauli) -> Result<(usize, u64)> {
        if p.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: p.n() });
        }
        if p.is_identity() {
            return Err(Error::IdentityPauli);
        }
        let (a, b) = (p.x_bits(), p.z_bits());
        if a == 0 {
            return Ok((0, b));
        }
        // D_v a = b is linear in v with column k equal to 𝔻_k a
        let n = self.n;
        let mut sys = BinaryMatrix::zeros(n, n);
        for (k, block) in self.blocks.iter().enumerate() {
            for (i, row) in block.iter().enumerate() {
                if (row & a).count_ones() & 1 == 1 {
                    sys.set(i, k, true);
                }
            }
        }
        let v = solve_f2(&sys, &BitVector::from_u64(n, b))
            .expect("every non-identity Pauli lies in exactly one element");
        Ok((v.to_u64() as usize + 1, a))
    }

    /// Serializable dump of every element.
    pub fn to_dump(&self) -> EnsembleDump {
        EnsembleDump {
            n: self.n,
            poly: self.poly.bits(),
            elements: self
                .elements()
                .map(|e| ElementDump {
                    index: e.index,
                    label: e.label,
                    c: e.tableau.c.clone(),
                    d: e.tableau.d.clone(),
                    generators: e.generators,
                })
                .collect(),
        }
    }

    /// `M_n^(0)`.
    pub fn m0(&self) -> &BinaryMatrix {
        &self.m0
    }
}

/// JSON layout for `ensemble --format json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDump {
    pub n: usize,
    pub poly: u32,
    pub elements: Vec<ElementDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementDump {
    pub index: usize,
    pub label: Option<u32>,
    #[serde(rename = "C")]
    pub c: BinaryMatrix,
    #[serde(rename = "D")]
    pub d: BinaryMatrix,
    pub generators: Vec<PhasedPauli>,
}

/// `D_v` straight from field arithmetic: row `i` is `(v ⊙ 2^i) M_n^(0)`.
pub fn d_matrix(n: usize, v: GfElement) -> Result<BinaryMatrix> {
    let poly = find_irreducible(n)?;
    if v.0 as usize >= poly.order() {
        return Err(Error::InvalidArgument(format!("label {} out of range for n={n}", v.0)));
    }
    let m0 = m_matrix(&gamma_matrix(&poly), 0)?;
    let mut out = BinaryMatrix::zeros(n, n);
    for i in 0..n {
        out.set_row_word(i, row_times_matrix(gf_mul(v, pow2_mod(i, &poly), &poly), &m0));
    }
    Ok(out)
}

/// Generators of element `v + 1` without building an ensemble.
pub fn stabilizer_generators(n: usize, v: u32) -> Result<Vec<PhasedPauli>> {
    MubEnsemble::new(n)?.generators(v as usize + 1)
}
