mod common;

use common::*;
use mcm_core::biased::{biased_estimate, optimal_distribution, BiasedDistribution};
use mcm_core::circuit::{synthesize, Circuit};
use mcm_core::mub::build_ensemble;
use mcm_core::pauli::PhasedPauli;
use mcm_core::rng::stream_rng;
use mcm_core::shadow::{exact_mcm_moments, mcm_estimate, pauli_shadow_estimate, split_observable, McmSetup, PauliBasis};
use mcm_core::statesim::{build_observable, DenseObservable, ObservableKind};
use num_complex::Complex64 as C;
use rand::Rng;

/// `(U, Pr(b|U) for all b, circuit)` per element.
fn element_table(n: usize, rho: &Mat) -> Vec<(Circuit, Vec<f64>)> {
    let ens = build_ensemble(n).unwrap();
    (0..ens.len())
        .map(|i| {
            let c = synthesize(&ens, i).unwrap();
            let u = circuit_matrix(&c);
            let rot = matmul(&matmul(&u, rho), &adjoint(&u));
            (c, (0..1 << n).map(|b| rot[b][b].re).collect())
        })
        .collect()
}

fn tr_prod(a: &Mat, b: &Mat) -> f64 {
    trace(&matmul(a, b)).re
}

#[test]
fn estimator_examples() {
    let n = 3;
    let id = DenseObservable::identity(n).unwrap();
    let ghz = build_observable(&ObservableKind::GhzFidelity, n).unwrap();
    let ens = build_ensemble(n).unwrap();
    for i in 0..ens.len() {
        let c = synthesize(&ens, i).unwrap();
        for b in 0..8 {
            assert!((mcm_estimate(&id, &c, b).unwrap() - 1.0).abs() < 1e-12);
        }
    }
    assert!((mcm_estimate(&ghz, &Circuit::new(n), 0).unwrap() - (9.0 / 2.0 - 1.0)).abs() < 1e-12);
}

#[test]
fn mcm_is_unbiased() {
    let mut rng = stream_rng(31, 0);
    for n in 1..=3 {
        for _ in 0..10 {
            let rho = to_mat(&random_density(n, &mut rng));
            let o = random_hermitian(n, &mut rng);
            let table = element_table(n, &rho);
            let mut mean = 0.0;
            for (c, probs) in &table {
                for (b, p) in probs.iter().enumerate() {
                    mean += p / table.len() as f64 * mcm_estimate(&o, c, b as u64).unwrap();
                }
            }
            let want = tr_prod(&rho, &to_mat(&o));
            assert!((mean - want).abs() < 1e-9);
            let exact = exact_mcm_moments(&McmSetup::new(n).unwrap(), &from_mat(n, &rho), &o);
            assert!((exact.mean - want).abs() < 1e-9);
        }
    }
}

fn all_bases(n: usize) -> Vec<Vec<PauliBasis>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<PauliBasis>| {
                PauliBasis::ALL.iter().map(move |b| {
                    let mut w = v.clone();
                    w.push(*b);
                    w
                })
            })
            .collect();
    }
    out
}

/// `(mean, second moment)` of the Pauli estimator by enumeration.
fn pauli_moments(n: usize, rho: &Mat, o: &DenseObservable) -> (f64, f64) {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    let settings = all_bases(n);
    for bases in &settings {
        let gates = bases.iter().enumerate().flat_map(|(q, b)| b.rotation(q)).collect();
        let u = circuit_matrix(&Circuit::from_gates(n, gates).unwrap());
        let rot = matmul(&matmul(&u, rho), &adjoint(&u));
        for b in 0..1usize << n {
            let p = rot[b][b].re / settings.len() as f64;
            let e = pauli_shadow_estimate(o, bases, b as u64);
            m1 += p * e;
            m2 += p * e * e;
        }
    }
    (m1, m2)
}

#[test]
fn pauli_protocol_is_unbiased() {
    let mut rng = stream_rng(32, 0);
    for n in 1..=3 {
        for _ in 0..10 {
            let rho = to_mat(&random_density(n, &mut rng));
            let o = random_hermitian(n, &mut rng);
            let (m1, _) = pauli_moments(n, &rho, &o);
            assert!((m1 - tr_prod(&rho, &to_mat(&o))).abs() < 1e-9);
        }
    }
}

#[test]
fn pauli_examples() {
    let z0 = build_observable(&ObservableKind::Pauli(PhasedPauli::parse("ZI").unwrap()), 2).unwrap();
    assert!((pauli_shadow_estimate(&z0, &[PauliBasis::Z, PauliBasis::X], 0) - 3.0).abs() < 1e-12);
    assert!(pauli_shadow_estimate(&z0, &[PauliBasis::X, PauliBasis::Z], 0).abs() < 1e-12);
}

#[test]
fn pauli_second_moment_is_three_to_the_weight() {
    let mut rng = stream_rng(33, 0);
    for n in 1..=3 {
        let d = 1usize << n;
        let mixed = scale(&eye(d), C::from(1.0 / d as f64));
        for _ in 0..6 {
            let x = rng.random_range(0..d as u64);
            let z = rng.random_range(0..d as u64);
            if x | z == 0 {
                continue;
            }
            let p = PhasedPauli::new(n, x, z, (x & z).count_ones() as u8);
            let o = build_observable(&ObservableKind::Pauli(p), n).unwrap();
            let (_, m2) = pauli_moments(n, &mixed, &o);
            assert!((m2 - 3f64.powi(p.weight() as i32)).abs() < 1e-9, "{p}");
        }
    }
}

#[test]
fn single_pauli_mcm_second_moment() {
    let mut rng = stream_rng(34, 0);
    for n in 1..=3 {
        let setup = McmSetup::new(n).unwrap();
        let d = 1u64 << n;
        for _ in 0..5 {
            let rho = random_density(n, &mut rng);
            let (x, z) = (rng.random_range(0..d), rng.random_range(0..d));
            if x | z == 0 {
                continue;
            }
            let p = PhasedPauli::new(n, x, z, (x & z).count_ones() as u8);
            let o = build_observable(&ObservableKind::Pauli(p), n).unwrap();
            let m = exact_mcm_moments(&setup, &rho, &o);
            assert!((m.second_moment - (d + 1) as f64).abs() < 1e-8, "{p}");
        }
    }
}

#[test]
fn locally_scrambled_second_moment() {
    let mut rng = stream_rng(35, 0);
    for n in 1..=3 {
        let setup = McmSetup::new(n).unwrap();
        let d = (1usize << n) as f64;
        let mixed = DenseObservable::identity(n).unwrap().scaled(1.0 / d);
        for _ in 0..10 {
            let o0 = random_hermitian(n, &mut rng).traceless();
            let m = exact_mcm_moments(&setup, &mixed, &o0);
            let want = (d + 1.0) / d * o0.trace_product(&o0);
            assert!((m.second_moment - want).abs() < 1e-8 * want.max(1.0));
        }
    }
}

#[test]
fn biased_is_unbiased_with_support_holes() {
    let mut rng = stream_rng(36, 0);
    for n in 1..=3 {
        let setup = McmSetup::new(n).unwrap();
        let ghz = build_observable(&ObservableKind::GhzFidelity, n).unwrap();
        let zz = build_observable(&ObservableKind::Pauli(PhasedPauli::z_type(n, (1 << n) - 1)), n).unwrap();
        let mut observables = vec![ghz, zz];
        observables.extend((0..4).map(|_| random_hermitian(n, &mut rng)));
        for o in observables {
            let rho = to_mat(&random_density(n, &mut rng));
            let dist = optimal_distribution(&o, &setup).unwrap();
            let table = element_table(n, &rho);
            let mut mean = 0.0;
            for &idx in dist.support() {
                let (c, probs) = &table[idx];
                for (b, p) in probs.iter().enumerate() {
                    mean += dist.probability(idx) * p * biased_estimate(&o, c, b as u64, dist.probability(idx)).unwrap();
                }
            }
            assert!((mean - tr_prod(&rho, &to_mat(&o))).abs() < 1e-9);
        }
    }
}

#[test]
fn biased_estimate_rejects_zero_probability() {
    let o = DenseObservable::identity(2).unwrap();
    assert!(biased_estimate(&o, &Circuit::new(2), 0, 0.0).is_err());
    assert!((biased_estimate(&o, &Circuit::new(2), 3, 0.25).unwrap() - 1.0).abs() < 1e-12);
    assert!(BiasedDistribution::from_weights(&[0.0, 0.0]).is_err());
}

#[test]
fn optimal_bound_is_squared_b_sum() {
    let mut rng = stream_rng(37, 0);
    for n in 1..=4 {
        let setup = McmSetup::new(n).unwrap();
        for _ in 0..5 {
            let o = random_hermitian(n, &mut rng);
            let b = mcm_core::biased::b_values(&o, &setup);
            let total: f64 = b.iter().sum();
            let dist = optimal_distribution(&o, &setup).unwrap();
            let realized = mcm_core::biased::realized_bound(&o, &setup, &dist);
            assert!((realized - total * total).abs() < 1e-9 * realized);
            let norm = mcm_core::biased::stabilizer_norm(&o.traceless());
            assert!(total <= norm + 1e-9);
        }
    }
}

#[test]
fn split_reconstructs_and_off_diagonal_is_unbiased() {
    let mut rng = stream_rng(38, 0);
    for n in 1..=3 {
        let setup = McmSetup::new(n).unwrap();
        for _ in 0..3 {
            let o = random_hermitian(n, &mut rng);
            let rho = to_mat(&random_density(n, &mut rng));
            let idx = rng.random_range(0..setup.len());
            let u = circuit_matrix(setup.circuit(idx));
            let (diag, o_f) = split_observable(&o, setup.circuit(idx)).unwrap();
            let mut rebuilt = to_mat(&o_f);
            for (b, w) in diag.iter().enumerate() {
                rebuilt = add(&rebuilt, &scale(&outer(&basis_state(&u, b)), C::from(*w)));
            }
            assert!(max_diff(&rebuilt, &to_mat(&o)) < 1e-12);
            let rot = matmul(&matmul(&u, &rho), &adjoint(&u));
            let diag_mean: f64 = diag.iter().enumerate().map(|(b, w)| w * rot[b][b].re).sum();
            let off = exact_mcm_moments(&setup, &from_mat(n, &rho), &o_f).mean;
            assert!((diag_mean + off - tr_prod(&rho, &to_mat(&o))).abs() < 1e-9);
        }
    }
}
