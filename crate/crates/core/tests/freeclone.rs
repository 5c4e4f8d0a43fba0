mod common;

use common::{all_tuples, arb_algebra};
use proptest::prelude::*;
use relkit::algebra::fixture;
use relkit::freeclone::{generate_clone, identity_holds, EqSide, Equation};
use relkit::{Exec, FiniteAlgebra, Term};
use std::collections::BTreeSet;

/// Naive fixpoint of the projections under pointwise operations.
fn oracle_clone(a: &FiniteAlgebra, k: usize) -> BTreeSet<Vec<u8>> {
    let points = all_tuples(a.size(), k);
    let mut set: BTreeSet<Vec<u8>> = (0..k).map(|v| points.iter().map(|p| p[v] as u8).collect()).collect();
    loop {
        let elems: Vec<Vec<u8>> = set.iter().cloned().collect();
        let before = set.len();
        for op in a.ops() {
            for pick in all_tuples(elems.len(), op.arity) {
                let t: Vec<u8> = (0..points.len())
                    .map(|i| {
                        let args: Vec<usize> = pick.iter().map(|&e| elems[e][i] as usize).collect();
                        a.apply(&op.name, &args).unwrap() as u8
                    })
                    .collect();
                set.insert(t);
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

#[test]
fn known_free_spectra() {
    // free distributive lattice on 3 generators, Boolean functions, affine Z2 maps
    for (name, k, size) in [("lattice2", 3, 18), ("z2", 3, 8), ("lattice2", 2, 4), ("boolean2", 2, 16)] {
        let c = generate_clone(&fixture(name).unwrap(), k, 10_000, Exec::Parallel).unwrap();
        assert!(c.is_complete());
        assert_eq!(c.len(), size, "{name} F({k})");
        assert_eq!(c.len(), oracle_clone(c.algebra(), k).len());
    }
}

#[test]
fn lattice_identities() {
    let a = fixture("lattice2").unwrap();
    let ops: Vec<String> = a.ops().iter().map(|o| o.name.clone()).collect();
    let (x, y) = (Term::Var(0), Term::Var(1));
    let absorb = Term::app(&ops[0], vec![x.clone(), Term::app(&ops[1], vec![x.clone(), y.clone()])]);
    assert!(identity_holds(&a, &Equation::new(EqSide::apply(&absorb, &[0, 1]), EqSide::Var(0))).unwrap());
    let first = Term::app(&ops[0], vec![x, y]);
    assert!(!identity_holds(&a, &Equation::new(EqSide::apply(&first, &[0, 1]), EqSide::Var(0))).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clone_matches_naive_closure(a in arb_algebra(3), k in 1usize..3) {
        // binary clones over three elements can reach 3^9 tables
        prop_assume!(k == 1 || a.size() == 2);
        let c = generate_clone(&a, k, 100_000, Exec::Sequential).unwrap();
        prop_assert!(c.is_complete());
        let got: BTreeSet<Vec<u8>> = c.elements().iter().map(|e| e.table.clone()).collect();
        prop_assert_eq!(got, oracle_clone(&a, k));
        prop_assert!(c.verify_witnesses().unwrap());
        for v in 0..k {
            prop_assert_eq!(&c.element(c.projection(v)).witness, &Term::Var(v));
        }
    }

    #[test]
    fn witnesses_evaluate_to_their_tables(a in arb_algebra(3)) {
        let c = generate_clone(&a, 2, 500, Exec::Parallel).unwrap();
        let points = all_tuples(a.size(), 2);
        for e in c.elements() {
            for (i, p) in points.iter().enumerate() {
                prop_assert_eq!(a.eval_term(&e.witness, p).unwrap(), e.table[i] as usize);
            }
        }
    }

    #[test]
    fn execution_mode_does_not_change_the_clone(a in arb_algebra(3)) {
        let s = generate_clone(&a, 2, 500, Exec::Sequential).unwrap();
        let p = generate_clone(&a, 2, 500, Exec::Parallel).unwrap();
        prop_assert_eq!(s.elements(), p.elements());
        prop_assert_eq!(s.is_complete(), p.is_complete());
    }

    #[test]
    fn cap_truncates_a_prefix(a in arb_algebra(2), cap in 1usize..12) {
        let full = generate_clone(&a, 2, 100_000, Exec::Sequential).unwrap();
        let cut = generate_clone(&a, 2, cap, Exec::Sequential).unwrap();
        prop_assert!(cut.len() <= cap.max(2));
        prop_assert_eq!(cut.is_complete(), full.len() <= cut.len());
        prop_assert_eq!(&full.elements()[..cut.len()], cut.elements());
    }

    #[test]
    fn free_algebra_is_the_clone_with_pointwise_operations(a in arb_algebra(2)) {
        let c = generate_clone(&a, 2, 100_000, Exec::Sequential).unwrap();
        let f = c.free_algebra().unwrap();
        prop_assert_eq!(f.size(), c.len());
        prop_assert_eq!(f.signature(), a.signature());
        for op in a.ops() {
            for args in all_tuples(c.len(), op.arity) {
                let got = f.apply(&op.name, &args).unwrap();
                let want: Vec<u8> = (0..c.table_len())
                    .map(|i| {
                        let vals: Vec<usize> = args.iter().map(|&e| c.element(e).table[i] as usize).collect();
                        a.apply(&op.name, &vals).unwrap() as u8
                    })
                    .collect();
                prop_assert_eq!(&c.element(got).table, &want);
            }
        }
    }

    #[test]
    fn identity_holds_matches_pointwise_check(a in arb_algebra(3), i in any::<usize>(), j in any::<usize>()) {
        let c = generate_clone(&a, 2, 500, Exec::Sequential).unwrap();
        let s = c.element(i % c.len());
        let t = c.element(j % c.len());
        let eq = Equation::new(EqSide::apply(&s.witness, &[0, 1]), EqSide::apply(&t.witness, &[0, 1]));
        prop_assert_eq!(identity_holds(&a, &eq).unwrap(), s.table == t.table);
    }
}
