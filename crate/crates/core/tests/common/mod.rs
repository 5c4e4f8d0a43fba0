//! Shared strategies and brute-force oracles for the integration tests.
#![allow(dead_code)]

use proptest::prelude::*;
use relkit::algebra::{FiniteAlgebra, Operation};
use relkit::BinRel;

/// Random algebra on 2..=max_n elements: a binary `f`, optionally a unary `g`.
pub fn arb_algebra(max_n: usize) -> impl Strategy<Value = FiniteAlgebra> {
    (2..=max_n).prop_flat_map(|n| {
        (
            proptest::collection::vec(0..n, n * n),
            proptest::option::of(proptest::collection::vec(0..n, n)),
        )
            .prop_map(move |(f, g)| {
                let mut ops = vec![Operation {
                    name: "f".into(),
                    arity: 2,
                    table: f,
                }];
                if let Some(g) = g {
                    ops.push(Operation {
                        name: "g".into(),
                        arity: 1,
                        table: g,
                    });
                }
                FiniteAlgebra::new(n, ops).unwrap()
            })
    })
}

/// Idempotent variant: `f(x,x) = x`, so every constant tuple is fixed.
pub fn arb_idempotent(max_n: usize) -> impl Strategy<Value = FiniteAlgebra> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(0..n, n * n).prop_map(move |mut f| {
            for a in 0..n {
                f[a * n + a] = a;
            }
            FiniteAlgebra::new(
                n,
                vec![Operation {
                    name: "f".into(),
                    arity: 2,
                    table: f,
                }],
            )
            .unwrap()
        })
    })
}

pub fn all_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |a| {
                    let mut t = t.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

/// Compatibility with every operation, tuple of pairs by tuple of pairs.
pub fn oracle_admissible(a: &FiniteAlgebra, r: &BinRel) -> bool {
    let pairs: Vec<(usize, usize)> = r.pairs().collect();
    a.ops().iter().all(|op| {
        all_tuples(pairs.len(), op.arity).iter().all(|idx| {
            let xs: Vec<usize> = idx.iter().map(|&i| pairs[i].0).collect();
            let ys: Vec<usize> = idx.iter().map(|&i| pairs[i].1).collect();
            r.contains(a.apply(&op.name, &xs).unwrap(), a.apply(&op.name, &ys).unwrap())
        })
    })
}

/// Every relation containing Δ on `0..n`.
pub fn reflexive_relations(n: usize) -> Vec<BinRel> {
    let off: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    (0u64..1 << off.len())
        .map(|mask| {
            let chosen = off.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p);
            BinRel::reflexive_from(n, chosen).unwrap()
        })
        .collect()
}

pub fn arb_rel(n: usize) -> impl Strategy<Value = BinRel> {
    proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
        let pairs = bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| (i / n, i % n));
        BinRel::from_pairs(n, pairs).unwrap()
    })
}
