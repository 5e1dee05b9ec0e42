use std::collections::HashSet;

use mcm_core::circuit::{apply_gate_to_ztableau, circuit_depth, synthesize};
use mcm_core::f2linalg::{hankel_decompose, is_hankel, kernel_basis, rank_f2, solve_f2, BinaryMatrix, BitVector};
use mcm_core::gf2n::{find_irreducible, gf_mul, GaloisField, GfElement};
use mcm_core::mub::{build_ensemble, d_matrix, ZTableau};
use mcm_core::pauli::PhasedPauli;
use proptest::prelude::*;

#[test]
fn stabilizer_groups_partition_the_paulis() {
    for n in 1..=6 {
        let ens = build_ensemble(n).unwrap();
        let mut seen = HashSet::new();
        for idx in 0..ens.len() {
            for m in 1..1u64 << n {
                let s = ens.stabilizer(idx, m).unwrap();
                assert!(seen.insert((s.x_bits(), s.z_bits())), "n={n}: {s} appears twice");
            }
        }
        assert_eq!(seen.len(), (1usize << (2 * n)) - 1);
    }
}

#[test]
fn element_lookup_inverts_stabilizers() {
    for n in 1..=4 {
        let ens = build_ensemble(n).unwrap();
        for x in 0..1u64 << n {
            for z in 0..1u64 << n {
                if x | z == 0 {
                    continue;
                }
                let p = PhasedPauli::new(n, x, z, 0);
                let (idx, m) = ens.element_for_pauli(&p).unwrap();
                assert!(ens.stabilizer(idx, m).unwrap().same_string(&p));
            }
        }
    }
}

#[test]
fn lookup_rejects_identity() {
    let ens = build_ensemble(3).unwrap();
    assert!(ens.element_for_pauli(&PhasedPauli::identity(3)).is_err());
}

#[test]
fn field_construction_matches_matrix_construction() {
    for n in 1..=6 {
        let ens = build_ensemble(n).unwrap();
        for v in 0..1u32 << n {
            let via_field = d_matrix(n, GfElement(v)).unwrap();
            assert_eq!(via_field, ens.d_matrix(v), "n={n} v={v}");
            assert!(is_hankel(&via_field));
            assert!(via_field.is_symmetric());
        }
    }
}

#[test]
fn synthesis_reduces_tableaus_for_all_labels() {
    for n in 1..=8 {
        let ens = build_ensemble(n).unwrap();
        for idx in 1..ens.len() {
            let c = synthesize(&ens, idx).unwrap();
            let mut t = ens.tableau(idx).unwrap();
            for g in c.gates() {
                t = apply_gate_to_ztableau(&t, g).unwrap();
            }
            assert_eq!(t, ZTableau::z_basis(n), "n={n} idx={idx}");
            assert!(circuit_depth(&c) <= n + 1);
        }
    }
}

fn matrix_strategy() -> impl Strategy<Value = BinaryMatrix> {
    (1..10usize, 1..10usize).prop_flat_map(|(r, c)| {
        prop::collection::vec(any::<u64>(), r).prop_map(move |rows| {
            let mask = (1u64 << c) - 1;
            BinaryMatrix::from_row_words(c, &rows.iter().map(|w| w & mask).collect::<Vec<_>>())
        })
    })
}

proptest! {
    #[test]
    fn rank_plus_nullity_is_width(a in matrix_strategy()) {
        let kernel = kernel_basis(&a);
        prop_assert_eq!(rank_f2(&a) + kernel.len(), a.cols());
        for k in &kernel {
            prop_assert!(a.mul_vec(k).is_zero());
        }
        if !kernel.is_empty() {
            let rows: Vec<u64> = kernel.iter().map(|k| k.to_u64()).collect();
            prop_assert_eq!(rank_f2(&BinaryMatrix::from_row_words(a.cols(), &rows)), kernel.len());
        }
        prop_assert_eq!(rank_f2(&a.transpose()), rank_f2(&a));
    }

    #[test]
    fn consistent_systems_are_solved(a in matrix_strategy(), seed in any::<u64>()) {
        let x0 = BitVector::from_u64(a.cols(), seed & ((1u64 << a.cols()) - 1));
        let b = a.mul_vec(&x0);
        let x = solve_f2(&a, &b).unwrap();
        prop_assert_eq!(a.mul_vec(&x), b);
    }

    #[test]
    fn inconsistent_systems_are_rejected(a in matrix_strategy(), seed in any::<u64>()) {
        let b = BitVector::from_u64(a.rows(), seed & ((1u64 << a.rows()) - 1));
        match solve_f2(&a, &b) {
            Some(x) => prop_assert_eq!(a.mul_vec(&x), b),
            None => {
                let aug = a.hstack(&BinaryMatrix::from_row_words(1, &(0..a.rows()).map(|i| b.get(i) as u64).collect::<Vec<_>>()));
                prop_assert_eq!(rank_f2(&aug), rank_f2(&a) + 1);
            }
        }
    }

    #[test]
    fn field_axioms(n in 1..=10usize, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let f = GaloisField::new(n).unwrap();
        let p = find_irreducible(n).unwrap();
        let mask = (1u32 << n) - 1;
        let (a, b, c) = (GfElement(a & mask), GfElement(b & mask), GfElement(c & mask));
        prop_assert_eq!(gf_mul(a, b, &p), gf_mul(b, a, &p));
        prop_assert_eq!(gf_mul(gf_mul(a, b, &p), c, &p), gf_mul(a, gf_mul(b, c, &p), &p));
        prop_assert_eq!(gf_mul(a, GfElement(b.0 ^ c.0), &p).0, gf_mul(a, b, &p).0 ^ gf_mul(a, c, &p).0);
        if a.0 != 0 {
            let inv = f.inv(a).unwrap();
            prop_assert_eq!(f.mul(a, inv), GfElement(1));
        }
    }

    #[test]
    fn hankel_round_trip(n in 1..=8usize, beta in any::<u64>()) {
        let mut m = BinaryMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, (beta >> (i + j)) & 1 == 1);
            }
        }
        prop_assert!(is_hankel(&m));
        prop_assert_eq!(hankel_decompose(&m).unwrap().reconstruct(), m);
    }
}
