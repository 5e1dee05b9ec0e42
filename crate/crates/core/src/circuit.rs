//! Clifford gate lists, Z-tableau updates, synthesis of ensemble elements into
//! `S`/`CZ` modules followed by a Hadamard layer, and Pauli conjugation.
//!
//! A circuit applies its gates in list order, so the unitary is
//! `U = G_last ⋯ G_first`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mub::{MubEnsemble, ZTableau};
use crate::pauli::PhasedPauli;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    CZ(usize, usize),
    /// Control first, target second.
    CX(usize, usize),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::S(_) => "S",
            Gate::Sdg(_) => "Sdg",
            Gate::X(_) => "X",
            Gate::Y(_) => "Y",
            Gate::Z(_) => "Z",
            Gate::CZ(..) => "CZ",
            Gate::CX(..) => "CX",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(a) | Gate::S(a) | Gate::Sdg(a) | Gate::X(a) | Gate::Y(a) | Gate::Z(a) => vec![a],
            Gate::CZ(a, b) | Gate::CX(a, b) => vec![a, b],
        }
    }

    pub fn dagger(&self) -> Gate {
        match *self {
            Gate::S(a) => Gate::Sdg(a),
            Gate::Sdg(a) => Gate::S(a),
            g => g,
        }
    }

    /// Diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        matches!(self, Gate::S(_) | Gate::Sdg(_) | Gate::Z(_) | Gate::CZ(..))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n {
                return Err(Error::InvalidQubit { qubit: q, n });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::RepeatedQubit(qs[0]));
        }
        Ok(())
    }

    /// Builds a gate from its text name and qubit list.
    pub fn from_parts(name: &str, qubits: &[usize]) -> Result<Gate> {
        let one = |f: fn(usize) -> Gate| match qubits {
            [a] => Ok(f(*a)),
            _ => Err(Error::InvalidArgument(format!("{name} takes one qubit"))),
        };
        let two = |f: fn(usize, usize) -> Gate| match qubits {
            [a, b] => Ok(f(*a, *b)),
            _ => Err(Error::InvalidArgument(format!("{name} takes two qubits"))),
        };
        match name {
            "H" => one(Gate::H),
            "S" => one(Gate::S),
            "Sdg" => one(Gate::Sdg),
            "X" => one(Gate::X),
            "Y" => one(Gate::Y),
            "Z" => one(Gate::Z),
            "CZ" => two(Gate::CZ),
            "CX" => two(Gate::CX),
            other => Err(Error::UnsupportedGate(other.to_string())),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        for q in self.qubits() {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, gates: Vec::new() }
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            g.validate(n)?;
        }
        Ok(Circuit { n, gates })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        g.validate(self.n)?;
        self.gates.push(g);
        Ok(())
    }

    /// Appends `other`'s gates (applied after `self`).
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// `self` followed by `other`, i.e. the unitary `other · self`.
    pub fn then(&self, other: &Circuit) -> Result<Circuit> {
        let mut c = self.clone();
        c.append(other)?;
        Ok(c)
    }

    pub fn dagger(&self) -> Circuit {
        Circuit { n: self.n, gates: self.gates.iter().rev().map(Gate::dagger).collect() }
    }

    pub fn count(&self, name: &str) -> usize {
        self.gates.iter().filter(|g| g.name() == name).count()
    }

    /// Splits into a leading run of diagonal gates and the rest.
    pub fn diagonal_prefix(&self) -> (&[Gate], &[Gate]) {
        let k = self.gates.iter().position(|g| !g.is_diagonal()).unwrap_or(self.gates.len());
        self.gates.split_at(k)
    }

    /// Text form: optional header, then one gate per line.
    pub fn to_text(&self, label: Option<u32>) -> String {
        let mut s = match label {
            Some(v) => format!("# n={} v={v}\n", self.n),
            None => format!("# n={}\n", self.n),
        };
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses the text form. `n` comes from the header when present, else
    /// from `default_n`, else from the largest qubit index used.
    pub fn parse_text(text: &str, default_n: Option<usize>) -> Result<Circuit> {
        let mut n = default_n;
        let mut gates = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                for tok in comment.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("n=") {
                        let parsed = v.parse().map_err(|_| Error::Parse { line: lineno + 1, msg: format!("bad qubit count {v:?}") })?;
                        n = Some(parsed);
                    }
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let name = parts.next().expect("nonempty line");
            let qubits = parts
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line: lineno + 1, msg: e.to_string() })?;
            let gate = Gate::from_parts(name, &qubits).map_err(|e| Error::Parse { line: lineno + 1, msg: e.to_string() })?;
            gates.push(gate);
        }
        let n = n.unwrap_or_else(|| gates.iter().flat_map(|g| g.qubits()).max().map_or(0, |m| m + 1));
        Circuit::from_gates(n, gates)
    }

    pub fn to_json(&self, label: Option<u32>) -> CircuitJson {
        CircuitJson {
            n: self.n,
            v: label,
            gates: self.gates.iter().map(|g| GateJson { gate: g.name().to_string(), qubits: g.qubits() }).collect(),
        }
    }

    pub fn from_json(j: &CircuitJson) -> Result<Circuit> {
        let gates = j.gates.iter().map(|g| Gate::from_parts(&g.gate, &g.qubits)).collect::<Result<Vec<_>>>()?;
        Circuit::from_gates(j.n, gates)
    }
}

/// JSON layout of a circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitJson {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub v: Option<u32>,
    pub gates: Vec<GateJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateJson {
    pub gate: String,
    pub qubits: Vec<usize>,
}

/// Which side the circuit unitary `U` sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `U† P U`.
    Forward,
    /// `U P U†`.
    Inverse,
}

/// `G P G†` for a single gate.
pub fn conjugate_by_gate(g: &Gate, p: &PhasedPauli) -> PhasedPauli {
    let n = p.n();
    let (x, z) = (p.x_bits(), p.z_bits());
    let qs = g.qubits();
    let touched: u64 = qs.iter().map(|&q| 1u64 << q).sum();
    let mut out = PhasedPauli::new(n, x & !touched, z & !touched, p.phase());
    let pp = |x: u64, z: u64, phase: u8| PhasedPauli::new(n, x, z, phase);
    for (slot, &q) in qs.iter().enumerate() {
        let b = 1u64 << q;
        // images of X_q and Z_q
        let (img_x, img_z) = match *g {
            Gate::H(_) => (pp(0, b, 0), pp(b, 0, 0)),
            Gate::S(_) => (pp(b, b, 1), pp(0, b, 0)),
            Gate::Sdg(_) => (pp(b, b, 3), pp(0, b, 0)),
            Gate::X(_) => (pp(b, 0, 0), pp(0, b, 2)),
            Gate::Y(_) => (pp(b, 0, 2), pp(0, b, 2)),
            Gate::Z(_) => (pp(b, 0, 2), pp(0, b, 0)),
            Gate::CZ(a, c) => {
                let other = if slot == 0 { c } else { a };
                (pp(b, 1 << other, 0), pp(0, b, 0))
            }
            Gate::CX(c, t) => {
                if slot == 0 {
                    (pp(b | (1 << t), 0, 0), pp(0, b, 0))
                } else {
                    (pp(b, 0, 0), pp(0, b | (1 << c), 0))
                }
            }
        };
        if x & b != 0 {
            out = out.mul(&img_x);
        }
        if z & b != 0 {
            out = out.mul(&img_z);
        }
    }
    out
}

/// `U† P U` (forward) or `U P U†` (inverse) with exact phase.
pub fn conjugate_pauli(c: &Circuit, p: &PhasedPauli, direction: Direction) -> PhasedPauli {
    assert_eq!(c.n, p.n(), "qubit count mismatch");
    match direction {
        Direction::Inverse => c.gates.iter().fold(*p, |acc, g| conjugate_by_gate(g, &acc)),
        Direction::Forward => c.gates.iter().rev().fold(*p, |acc, g| conjugate_by_gate(&g.dagger(), &acc)),
    }
}

/// Column update rules on `[C, D]` for `H`, `S` and `CZ`.
pub fn apply_gate_to_ztableau(t: &ZTableau, g: &Gate) -> Result<ZTableau> {
    let n = t.n();
    g.validate(n)?;
    let mut out = t.clone();
    for i in 0..n {
        let (mut cr, mut dr) = (out.c.row_word(i), out.d.row_word(i));
        match *g {
            Gate::H(a) => {
                let (ca, da) = ((cr >> a) & 1, (dr >> a) & 1);
                cr = (cr & !(1 << a)) | (da << a);
                dr = (dr & !(1 << a)) | (ca << a);
            }
            Gate::S(a) => dr ^= cr & (1 << a),
            Gate::CZ(a, b) => {
                dr ^= ((cr >> b) & 1) << a;
                dr ^= ((cr >> a) & 1) << b;
            }
            other => return Err(Error::UnsupportedGate(other.name().to_string())),
        }
        out.c.set_row_word(i, cr);
        out.d.set_row_word(i, dr);
    }
    Ok(out)
}

/// Gates of module `M_k`: `S(k/2)` for even `k`, then the CZ pairs on
/// anti-diagonal `k` sweeping inward.
pub fn module_gates(n: usize, k: usize) -> Result<Vec<Gate>> {
    if n == 0 || k > 2 * n - 2 {
        return Err(Error::ModuleOutOfRange { k, n });
    }
    let mut gates = Vec::new();
    if k % 2 == 0 {
        gates.push(Gate::S(k / 2));
    }
    let (mut p, mut q) = if k < n - 1 { (0, k) } else { (k + 1 - n, n - 1) };
    while p < q {
        gates.push(Gate::CZ(p, q));
        p += 1;
        q -= 1;
    }
    Ok(gates)
}

/// Module emission order `0, n, 1, n+1, …, n-2, 2n-2, n-1`. Modules `j` and
/// `j + n` act on disjoint qubits, so greedy layering packs each pair into one
/// layer and the whole diagonal stage into `n` layers.
pub fn module_order(n: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(2 * n - 1);
    for j in 0..n - 1 {
        order.push(j);
        order.push(j + n);
    }
    order.push(n - 1);
    order
}

/// Circuit for ensemble element `index`: the modules selected by the Hankel
/// coefficients of `D_v`, then `H` on every qubit. Element 0 is empty.
pub fn synthesize(ens: &MubEnsemble, index: usize) -> Result<Circuit> {
    let n = ens.n();
    if index >= ens.len() {
        return Err(Error::ElementOutOfRange { index, len: ens.len() });
    }
    let mut c = Circuit::new(n);
    let Some(v) = ens.label(index) else {
        return Ok(c);
    };
    let beta = ens.beta_of(v);
    for k in module_order(n) {
        if beta.get(k) {
            c.gates.extend(module_gates(n, k)?);
        }
    }
    c.gates.extend((0..n).map(Gate::H));
    Ok(c)
}

/// Depth under greedy as-soon-as-possible layering with all-to-all
/// connectivity.
pub fn circuit_depth(c: &Circuit) -> usize {
    let mut layer = vec![0usize; c.n];
    let mut depth = 0;
    for g in &c.gates {
        let qs = g.qubits();
        let l = qs.iter().map(|&q| layer[q]).max().unwrap_or(0) + 1;
        for q in qs {
            layer[q] = l;
        }
        depth = depth.max(l);
    }
    depth
}

/// Tableau of `U† Z_i U` for each `i`, with the phased rows.
pub fn ztableau_of(c: &Circuit) -> (ZTableau, Vec<PhasedPauli>) {
    let n = c.n;
    let rows: Vec<PhasedPauli> = (0..n).map(|i| conjugate_pauli(c, &PhasedPauli::z_type(n, 1 << i), Direction::Forward)).collect();
    let cw: Vec<u64> = rows.iter().map(|p| p.x_bits()).collect();
    let dw: Vec<u64> = rows.iter().map(|p| p.z_bits()).collect();
    let t = ZTableau {
        c: crate::f2linalg::BinaryMatrix::from_row_words(n, &cw),
        d: crate::f2linalg::BinaryMatrix::from_row_words(n, &dw),
    };
    (t, rows)
}
