//! Dense reference linear algebra built from Kronecker products, independent
//! of the simulator kernels.
#![allow(dead_code)]

use mcm_core::circuit::{Circuit, Gate};
use mcm_core::statesim::DenseObservable;
use num_complex::Complex64 as C;
use rand::Rng;
use rand_distr::StandardNormal;

pub type Mat = Vec<Vec<C>>;

const Z0: C = C::new(0.0, 0.0);
const O1: C = C::new(1.0, 0.0);
const I1: C = C::new(0.0, 1.0);

pub fn eye(d: usize) -> Mat {
    (0..d).map(|r| (0..d).map(|c| if r == c { O1 } else { Z0 }).collect()).collect()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![Z0; ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut out = vec![vec![Z0; d]; d];
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == Z0 {
                continue;
            }
            for j in 0..d {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect()).collect()
}

pub fn scale(a: &Mat, s: C) -> Mat {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn adjoint(a: &Mat) -> Mat {
    let d = a.len();
    (0..d).map(|r| (0..d).map(|c| a[c][r].conj()).collect()).collect()
}

pub fn max_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn trace(a: &Mat) -> C {
    (0..a.len()).map(|i| a[i][i]).sum()
}

fn single(m: [[C; 2]; 2]) -> Mat {
    m.iter().map(|r| r.to_vec()).collect()
}

pub fn pauli_x() -> Mat {
    single([[Z0, O1], [O1, Z0]])
}
pub fn pauli_y() -> Mat {
    single([[Z0, -I1], [I1, Z0]])
}
pub fn pauli_z() -> Mat {
    single([[O1, Z0], [Z0, -O1]])
}
fn proj0() -> Mat {
    single([[O1, Z0], [Z0, Z0]])
}
fn proj1() -> Mat {
    single([[Z0, Z0], [Z0, O1]])
}

/// Embeds per-qubit factors; qubit `q` is bit `q` of the basis index, so the
/// highest qubit is the leftmost Kronecker factor.
pub fn embed(n: usize, factors: &[(usize, Mat)]) -> Mat {
    let mut out = vec![vec![O1]];
    for q in (0..n).rev() {
        let f = factors.iter().find(|(p, _)| *p == q).map(|(_, m)| m.clone()).unwrap_or_else(|| eye(2));
        out = kron(&out, &f);
    }
    out
}

pub fn gate_matrix(g: &Gate, n: usize) -> Mat {
    let h = 1.0 / 2f64.sqrt();
    let one = |q: usize, m: Mat| embed(n, &[(q, m)]);
    match *g {
        Gate::H(q) => one(q, single([[C::from(h), C::from(h)], [C::from(h), C::from(-h)]])),
        Gate::S(q) => one(q, single([[O1, Z0], [Z0, I1]])),
        Gate::Sdg(q) => one(q, single([[O1, Z0], [Z0, -I1]])),
        Gate::X(q) => one(q, pauli_x()),
        Gate::Y(q) => one(q, pauli_y()),
        Gate::Z(q) => one(q, pauli_z()),
        Gate::CZ(a, b) => add(&embed(n, &[(a, proj0())]), &embed(n, &[(a, proj1()), (b, pauli_z())])),
        Gate::CX(c, t) => add(&embed(n, &[(c, proj0())]), &embed(n, &[(c, proj1()), (t, pauli_x())])),
    }
}

/// `G_last ⋯ G_first`.
pub fn circuit_matrix(c: &Circuit) -> Mat {
    let mut u = eye(1 << c.n());
    for g in c.gates() {
        u = matmul(&gate_matrix(g, c.n()), &u);
    }
    u
}

/// `i^phase ∏_q X_q^{x_q} Z_q^{z_q}` with `X` left of `Z` on each qubit.
pub fn pauli_matrix(n: usize, x: u64, z: u64, phase: u8) -> Mat {
    let factors: Vec<(usize, Mat)> = (0..n)
        .map(|q| {
            let m = match ((x >> q) & 1, (z >> q) & 1) {
                (0, 0) => eye(2),
                (1, 0) => pauli_x(),
                (0, 1) => pauli_z(),
                _ => matmul(&pauli_x(), &pauli_z()),
            };
            (q, m)
        })
        .collect();
    let ph = [O1, I1, -O1, -I1][(phase & 3) as usize];
    scale(&embed(n, &factors), ph)
}

pub fn to_mat(o: &DenseObservable) -> Mat {
    let d = o.dim();
    (0..d).map(|r| (0..d).map(|c| o.get(r, c)).collect()).collect()
}

pub fn from_mat(n: usize, m: &Mat) -> DenseObservable {
    DenseObservable::new(n, m.iter().flatten().copied().collect()).unwrap()
}

pub fn outer(v: &[C]) -> Mat {
    v.iter().map(|a| v.iter().map(|b| a * b.conj()).collect()).collect()
}

/// `U† |b⟩`, the measured basis state.
pub fn basis_state(u: &Mat, b: usize) -> Vec<C> {
    (0..u.len()).map(|r| u[b][r].conj()).collect()
}

pub fn random_pure<R: Rng>(n: usize, rng: &mut R) -> Vec<C> {
    let v: Vec<C> = (0..1 << n).map(|_| C::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> DenseObservable {
    let d = 1usize << n;
    let mut m = vec![vec![Z0; d]; d];
    for r in 0..d {
        m[r][r] = C::from(rng.sample::<f64, _>(StandardNormal));
        for c in r + 1..d {
            let z = C::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            m[r][c] = z;
            m[c][r] = z.conj();
        }
    }
    from_mat(n, &m)
}

/// A mixed state `Σ w_i |ψ_i⟩⟨ψ_i|` with random weights.
pub fn random_density<R: Rng>(n: usize, rng: &mut R) -> DenseObservable {
    let d = 1usize << n;
    let mut m = vec![vec![Z0; d]; d];
    let weights: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        m = add(&m, &scale(&outer(&random_pure(n, rng)), C::from(w / total)));
    }
    from_mat(n, &m)
}
