mod common;

use common::*;
use mcm_core::circuit::synthesize;
use mcm_core::mub::build_ensemble;
use mcm_core::rng::stream_rng;
use mcm_core::shadow::{channel_oracle, element_channel, McmSetup};
use num_complex::Complex64 as C;

/// Dense `U` for every ensemble element, from the Kronecker oracle.
fn unitaries(n: usize) -> Vec<Mat> {
    let ens = build_ensemble(n).unwrap();
    (0..ens.len()).map(|i| circuit_matrix(&synthesize(&ens, i).unwrap())).collect()
}

fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[test]
fn bases_are_mutually_unbiased() {
    for n in 1..=4 {
        let us = unitaries(n);
        let d = 1usize << n;
        let states: Vec<Vec<Vec<C>>> = us.iter().map(|u| (0..d).map(|b| basis_state(u, b)).collect()).collect();
        for (i, si) in states.iter().enumerate() {
            for (j, sj) in states.iter().enumerate() {
                for (b, phi) in si.iter().enumerate() {
                    for (b2, chi) in sj.iter().enumerate() {
                        let o = inner(phi, chi).norm_sqr();
                        let want = if i != j {
                            1.0 / d as f64
                        } else if b == b2 {
                            1.0
                        } else {
                            0.0
                        };
                        assert!((o - want).abs() < 1e-10, "n={n} ({i},{b}) ({j},{b2}) overlap {o}");
                    }
                }
            }
        }
    }
}

#[test]
fn uniform_channel_is_depolarizing() {
    let mut rng = stream_rng(21, 0);
    for n in 1..=3 {
        let us = unitaries(n);
        let d = 1usize << n;
        let setup = McmSetup::new(n).unwrap();
        for _ in 0..10 {
            let rho = outer(&random_pure(n, &mut rng));
            let mut acc = vec![vec![C::new(0.0, 0.0); d]; d];
            for u in &us {
                for b in 0..d {
                    let phi = basis_state(u, b);
                    let proj = outer(&phi);
                    let w = trace(&matmul(&rho, &proj));
                    acc = add(&acc, &scale(&proj, w / us.len() as f64));
                }
            }
            let want = scale(&add(&rho, &eye(d)), C::from(1.0 / (d as f64 + 1.0)));
            assert!(max_diff(&acc, &want) < 1e-10);
            let lib = channel_oracle(&setup, &from_mat(n, &rho)).unwrap();
            assert!(max_diff(&to_mat(&lib), &want) < 1e-10);
        }
    }
}

#[test]
fn projectors_expand_in_stabilizers() {
    for n in 1..=3 {
        let ens = build_ensemble(n).unwrap();
        let d = 1usize << n;
        for (idx, u) in unitaries(n).iter().enumerate() {
            let stabs: Vec<Mat> = (0..d as u64)
                .map(|m| {
                    let s = ens.stabilizer(idx, m).unwrap();
                    pauli_matrix(n, s.x_bits(), s.z_bits(), s.phase())
                })
                .collect();
            for b in 0..d {
                let mut sum = vec![vec![C::new(0.0, 0.0); d]; d];
                for (m, s) in stabs.iter().enumerate() {
                    let sign = if (b & m).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                    sum = add(&sum, &scale(s, C::from(sign / d as f64)));
                }
                assert!(max_diff(&sum, &outer(&basis_state(u, b))) < 1e-12, "n={n} idx={idx} b={b}");
            }
        }
    }
}

#[test]
fn element_channel_is_stabilizer_dephasing() {
    let mut rng = stream_rng(22, 0);
    for n in 1..=3 {
        let ens = build_ensemble(n).unwrap();
        let setup = McmSetup::new(n).unwrap();
        let d = 1usize << n;
        let rho = outer(&random_pure(n, &mut rng));
        for idx in 0..ens.len() {
            let mut want = vec![vec![C::new(0.0, 0.0); d]; d];
            for m in 0..d as u64 {
                let s = ens.stabilizer(idx, m).unwrap();
                let sm = pauli_matrix(n, s.x_bits(), s.z_bits(), s.phase());
                want = add(&want, &scale(&sm, trace(&matmul(&rho, &sm)) / d as f64));
            }
            let got = element_channel(&setup, idx, &from_mat(n, &rho)).unwrap();
            assert!(max_diff(&to_mat(&got), &want) < 1e-10);
        }
    }
}
