//! Dense linear algebra over F2 with bit-packed rows.
//!
//! Column `j` of a row lives in bit `j % 64` of word `j / 64`, so for matrices
//! with at most 64 columns a row is a single little-endian `u64` whose bit `j`
//! is entry `(i, j)`. Text forms write column 0 first (`"100"` is `e_0`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2n::{find_irreducible, gamma_matrix, m_full};

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

fn mask_tail(words: &mut [u64], bits: usize) {
    let rem = bits % WORD;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

/// A vector over F2.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector { len, words: vec![0; words_for(len)] }
    }

    /// The low `len` bits of `bits` (`len <= 64`).
    pub fn from_u64(len: usize, bits: u64) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 bits");
        let mut v = BitVector { len, words: vec![bits; words_for(len)] };
        mask_tail(&mut v.words, len);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVector::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = BitVector::zeros(len);
        v.set(i, true);
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let bit = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= bit;
        } else {
            self.words[i / WORD] &= !bit;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// Packed value; panics for vectors longer than 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= WORD, "vector of length {} does not fit in u64", self.len);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Inner product mod 2.
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum::<u32>() & 1 == 1
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

impl std::ops::BitXor for &BitVector {
    type Output = BitVector;

    fn bitxor(self, rhs: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(rhs);
        out
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

fn parse_bits(s: &str) -> std::result::Result<Vec<bool>, String> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(format!("invalid bit character {other:?}")),
        })
        .collect()
}

impl std::str::FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_bits(s.trim()).map(|b| BitVector::from_bools(&b)).map_err(|msg| Error::Parse { line: 1, msg })
    }
}

impl From<BitVector> for String {
    fn from(v: BitVector) -> String {
        v.to_string()
    }
}

impl TryFrom<String> for BitVector {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A dense matrix over F2 with bit-packed rows.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<String>", try_from = "Vec<String>")]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BinaryMatrix { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BinaryMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Rows given as packed words (`cols <= 64`).
    pub fn from_row_words(cols: usize, rows: &[u64]) -> Self {
        assert!(cols <= WORD);
        let mut m = BinaryMatrix::zeros(rows.len(), cols);
        for (i, &w) in rows.iter().enumerate() {
            m.set_row_word(i, w);
        }
        m
    }

    /// Rows as `'0'/'1'` strings, column 0 first. Panics on malformed input;
    /// intended for fixtures.
    pub fn from_bit_rows(rows: &[&str]) -> Self {
        let parsed: Vec<Vec<bool>> = rows.iter().map(|r| parse_bits(r).expect("bit string")).collect();
        let cols = parsed.first().map_or(0, Vec::len);
        let mut m = BinaryMatrix::zeros(parsed.len(), cols);
        for (i, r) in parsed.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &b) in r.iter().enumerate() {
                m.set(i, j, b);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols, "entry ({i},{j}) out of range");
        (self.data[i * self.stride + j / WORD] >> (j % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.rows && j < self.cols, "entry ({i},{j}) out of range");
        let w = &mut self.data[i * self.stride + j / WORD];
        let bit = 1u64 << (j % WORD);
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    /// Row `i` packed into one word (`cols <= 64`).
    pub fn row_word(&self, i: usize) -> u64 {
        assert!(self.cols <= WORD, "row_word requires at most 64 columns");
        if self.stride == 0 {
            0
        } else {
            self.data[i * self.stride]
        }
    }

    pub fn set_row_word(&mut self, i: usize, w: u64) {
        assert!(self.cols <= WORD, "set_row_word requires at most 64 columns");
        if self.stride > 0 {
            let rem = self.cols % WORD;
            let mask = if rem == 0 { u64::MAX } else { (1u64 << rem) - 1 };
            self.data[i * self.stride] = w & mask;
        }
    }

    pub fn row(&self, i: usize) -> BitVector {
        BitVector { len: self.cols, words: self.row_words(i).to_vec() }
    }

    pub fn set_row(&mut self, i: usize, v: &BitVector) {
        assert_eq!(v.len, self.cols);
        self.row_words_mut(i).copy_from_slice(&v.words);
    }

    pub fn column(&self, j: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for i in 0..self.rows {
            v.set(i, self.get(i, j));
        }
        v
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for w in 0..self.stride {
                self.data.swap(a * self.stride + w, b * self.stride + w);
            }
        }
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        assert_ne!(src, dst);
        for w in 0..self.stride {
            let v = self.data[src * self.stride + w];
            self.data[dst * self.stride + w] ^= v;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn transpose(&self) -> BinaryMatrix {
        let mut t = BinaryMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    /// Matrix product over F2.
    pub fn mul(&self, other: &BinaryMatrix) -> BinaryMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = BinaryMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.get(i, k) {
                    for w in 0..out.stride {
                        out.data[i * out.stride + w] ^= other.data[k * other.stride + w];
                    }
                }
            }
        }
        out
    }

    /// `A x` for a column vector `x`.
    pub fn mul_vec(&self, x: &BitVector) -> BitVector {
        assert_eq!(self.cols, x.len, "dimension mismatch");
        let mut out = BitVector::zeros(self.rows);
        for i in 0..self.rows {
            let parity = self.row_words(i).iter().zip(&x.words).map(|(a, b)| (a & b).count_ones()).sum::<u32>();
            out.set(i, parity & 1 == 1);
        }
        out
    }

    /// `x^T A` for a row vector `x`.
    pub fn vec_mul(&self, x: &BitVector) -> BitVector {
        assert_eq!(self.rows, x.len, "dimension mismatch");
        let mut out = BitVector::zeros(self.cols);
        for i in 0..self.rows {
            if x.get(i) {
                for (o, r) in out.words.iter_mut().zip(self.row_words(i)) {
                    *o ^= r;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &BinaryMatrix) -> BinaryMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a ^= b;
        }
        out
    }

    /// Rows `start..start+count` as a new matrix.
    pub fn row_slice(&self, start: usize, count: usize) -> BinaryMatrix {
        assert!(start + count <= self.rows);
        BinaryMatrix {
            rows: count,
            cols: self.cols,
            stride: self.stride,
            data: self.data[start * self.stride..(start + count) * self.stride].to_vec(),
        }
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &BinaryMatrix) -> BinaryMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = BinaryMatrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j));
            }
        }
        out
    }
}

impl std::ops::Add for &BinaryMatrix {
    type Output = BinaryMatrix;

    fn add(self, rhs: &BinaryMatrix) -> BinaryMatrix {
        BinaryMatrix::add(self, rhs)
    }
}

impl fmt::Display for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", self.row(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows).map(|i| self.row(i).to_string()).collect();
        write!(f, "BinaryMatrix{{{}x{} [{}]}}", self.rows, self.cols, rows.join(","))
    }
}

impl From<BinaryMatrix> for Vec<String> {
    fn from(m: BinaryMatrix) -> Vec<String> {
        (0..m.rows).map(|i| m.row(i).to_string()).collect()
    }
}

impl TryFrom<Vec<String>> for BinaryMatrix {
    type Error = Error;

    fn try_from(rows: Vec<String>) -> Result<Self> {
        let mut parsed = Vec::with_capacity(rows.len());
        for (line, r) in rows.iter().enumerate() {
            parsed.push(parse_bits(r).map_err(|msg| Error::Parse { line: line + 1, msg })?);
        }
        let cols = parsed.first().map_or(0, Vec::len);
        let mut m = BinaryMatrix::zeros(parsed.len(), cols);
        for (i, r) in parsed.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
            }
            for (j, &b) in r.iter().enumerate() {
                m.set(i, j, b);
            }
        }
        Ok(m)
    }
}

/// Reduced row echelon form in place; returns the pivot column of each
/// nonzero row in order.
fn rref(m: &mut BinaryMatrix, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.rows {
            break;
        }
        let Some(p) = (r..m.rows).find(|&i| m.get(i, c)) else {
            continue;
        };
        m.swap_rows(p, r);
        for i in 0..m.rows {
            if i != r && m.get(i, c) {
                m.xor_row_into(r, i);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank over F2.
pub fn rank_f2(m: &BinaryMatrix) -> usize {
    let mut work = m.clone();
    rref(&mut work, m.cols).len()
}

/// Solves `A x = b`. Free variables are set to zero; `None` if inconsistent.
pub fn solve_f2(a: &BinaryMatrix, b: &BitVector) -> Option<BitVector> {
    assert_eq!(a.rows, b.len, "right-hand side length must equal row count");
    let mut aug = a.hstack(&BinaryMatrix::from_column(b));
    let pivots = rref(&mut aug, a.cols);
    let rhs = a.cols;
    if (pivots.len()..aug.rows).any(|i| aug.get(i, rhs)) {
        return None;
    }
    let mut x = BitVector::zeros(a.cols);
    for (r, &c) in pivots.iter().enumerate() {
        x.set(c, aug.get(r, rhs));
    }
    Some(x)
}

/// A basis of `{x : A x = 0}`, one vector per free column.
pub fn kernel_basis(a: &BinaryMatrix) -> Vec<BitVector> {
    let mut work = a.clone();
    let pivots = rref(&mut work, a.cols);
    let mut is_pivot = vec![false; a.cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    (0..a.cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut x = BitVector::unit(a.cols, f);
            for (r, &c) in pivots.iter().enumerate() {
                if work.get(r, f) {
                    x.set(c, true);
                }
            }
            x
        })
        .collect()
}

impl BinaryMatrix {
    fn from_column(v: &BitVector) -> BinaryMatrix {
        let mut m = BinaryMatrix::zeros(v.len, 1);
        for i in 0..v.len {
            m.set(i, 0, v.get(i));
        }
        m
    }
}

/// True iff the square matrix is constant along every anti-diagonal.
pub fn is_hankel(m: &BinaryMatrix) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.rows;
    (1..n).all(|i| (0..n - 1).all(|j| m.get(i, j) == m.get(i - 1, j + 1)))
}

/// `ℍ_k`: the `n x n` matrix with ones exactly on anti-diagonal `i + j = k`.
pub fn hankel_unit(n: usize, k: usize) -> BinaryMatrix {
    assert!(n > 0 && k <= 2 * n - 2, "anti-diagonal {k} out of range for n={n}");
    let mut m = BinaryMatrix::zeros(n, n);
    for i in 0..n {
        if k >= i && k - i < n {
            m.set(i, k - i, true);
        }
    }
    m
}

/// Anti-diagonal values of a Hankel matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HankelCoefficients {
    pub n: usize,
    pub beta: BitVector,
}

impl HankelCoefficients {
    /// `Σ_k β_k ℍ_k`.
    pub fn reconstruct(&self) -> BinaryMatrix {
        let n = self.n;
        let mut m = BinaryMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.beta.get(i + j));
            }
        }
        m
    }

    /// Indices `k` with `β_k = 1`, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.beta.len()).filter(|&k| self.beta.get(k)).collect()
    }
}

/// Reads `β_k` off anti-diagonal `k`; rejects non-Hankel input.
pub fn hankel_decompose(m: &BinaryMatrix) -> Result<HankelCoefficients> {
    if !is_hankel(m) || m.rows == 0 {
        return Err(Error::NotHankel);
    }
    let n = m.rows;
    let mut beta = BitVector::zeros(2 * n - 1);
    for k in 0..2 * n - 1 {
        let (i, j) = if k < n { (0, k) } else { (k - n + 1, n - 1) };
        beta.set(k, m.get(i, j));
    }
    Ok(HankelCoefficients { n, beta })
}

/// The `(2n-1) x n` matrix whose column `i` is the Hankel decomposition of
/// `𝔻_i` (rows `i..i+n-1` of `M_n`). Since `𝔻_i`'s anti-diagonal `k` is entry
/// `(i + k, 0)` of `M_n`, column `i` is column 0 of `M_n` shifted by `i`.
pub fn beta_basis(n: usize) -> Result<BinaryMatrix> {
    let gamma = gamma_matrix(&find_irreducible(n)?);
    let m = m_full(&gamma);
    let mut basis = BinaryMatrix::zeros(2 * n - 1, n);
    for i in 0..n {
        let block = m.row_slice(i, n);
        let coeffs = hankel_decompose(&block)?;
        for k in 0..2 * n - 1 {
            basis.set(k, i, coeffs.beta.get(k));
        }
    }
    Ok(basis)
}
