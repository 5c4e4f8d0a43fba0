use super::BinRel;
use crate::algebra::Operations;
use crate::error::{Error, Result};

fn check_size<A: Operations + ?Sized>(alg: &A, r: &BinRel) -> Result<()> {
    if r.universe_size() != alg.size() {
        return Err(Error::SizeMismatch {
            left: alg.size(),
            right: r.universe_size(),
        });
    }
    Ok(())
}

/// Whether `r` is compatible with every operation. Reflexivity is not required.
pub fn is_admissible<A: Operations + ?Sized>(alg: &A, r: &BinRel) -> Result<bool> {
    check_size(alg, r)?;
    Ok(admissible_unchecked(alg, r))
}

pub(crate) fn admissible_unchecked<A: Operations + ?Sized>(alg: &A, r: &BinRel) -> bool {
    let pairs = r.pair_list();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for op in 0..alg.op_count() {
        let arity = alg.arity(op);
        if arity == 0 {
            let c = alg.apply_unchecked(op, &[]);
            if !r.contains(c, c) {
                return false;
            }
            continue;
        }
        if pairs.is_empty() {
            continue;
        }
        let mut idx = vec![0usize; arity];
        left.resize(arity, 0);
        right.resize(arity, 0);
        loop {
            for (j, &i) in idx.iter().enumerate() {
                left[j] = pairs[i].0;
                right[j] = pairs[i].1;
            }
            if !r.contains(alg.apply_unchecked(op, &left), alg.apply_unchecked(op, &right)) {
                return false;
            }
            if !crate::algebra::increment(&mut idx, pairs.len()) {
                break;
            }
        }
    }
    true
}

/// Least reflexive admissible relation containing `seed`.
pub fn admissible_closure<A: Operations + ?Sized>(
    alg: &A,
    seed: &[(usize, usize)],
) -> Result<BinRel> {
    let n = alg.size();
    let start = BinRel::reflexive_from(n, seed.iter().copied())?;
    Ok(close_reflexive(alg, start))
}

/// Closes a relation that already contains Δ. Semi-naive: every argument
/// tuple of pairs is tried exactly once, when its largest pair index is processed.
pub(crate) fn close_reflexive<A: Operations + ?Sized>(alg: &A, mut rel: BinRel) -> BinRel {
    let mut pairs: Vec<(usize, usize)> = rel.pairs().filter(|(a, b)| a != b).collect();
    // diagonal pairs are fixed by operations on diagonal tuples; only tuples
    // with at least one off-diagonal pair can produce something new, but
    // diagonal pairs still appear as the other arguments
    let diag: Vec<(usize, usize)> = (0..alg.size()).map(|a| (a, a)).collect();
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        for op in 0..alg.op_count() {
            let arity = alg.arity(op);
            if arity == 0 {
                continue;
            }
            left.resize(arity, 0);
            right.resize(arity, 0);
            // candidate argument pool: diagonal then off-diagonal pairs up to i
            let pool_len = diag.len() + i + 1;
            let get = |k: usize| {
                if k < diag.len() {
                    diag[k]
                } else {
                    pairs[k - diag.len()]
                }
            };
            let newest = pool_len - 1;
            // first occurrence of the newest pair at position `slot`
            let mut produced = Vec::new();
            for slot in 0..arity {
                let radix = |j: usize| if j < slot { newest } else { pool_len };
                if (0..slot).any(|j| radix(j) == 0) {
                    continue;
                }
                let mut idx = vec![0usize; arity];
                idx[slot] = newest;
                'tuples: loop {
                    for (j, &k) in idx.iter().enumerate() {
                        let (a, b) = get(k);
                        left[j] = a;
                        right[j] = b;
                    }
                    produced.push((
                        alg.apply_unchecked(op, &left),
                        alg.apply_unchecked(op, &right),
                    ));
                    // odometer over every position except `slot`
                    let mut j = arity;
                    loop {
                        if j == 0 {
                            break 'tuples;
                        }
                        j -= 1;
                        if j == slot {
                            continue;
                        }
                        idx[j] += 1;
                        if idx[j] < radix(j) {
                            break;
                        }
                        idx[j] = 0;
                    }
                }
            }
            for (a, b) in produced {
                if rel.insert(a, b) {
                    pairs.push((a, b));
                }
            }
        }
        i += 1;
    }
    rel
}

/// Least congruence containing `seed`.
///
/// An equivalence is a congruence iff it is closed under basic translations
/// `a ↦ f(c_1, …, a, …, c_k)`, so it suffices to push every merge through
/// all translations; a union-find keeps at most `n - 1` merges.
pub fn congruence_gen<A: Operations + ?Sized>(alg: &A, seed: &[(usize, usize)]) -> Result<BinRel> {
    let n = alg.size();
    BinRel::reflexive_from(n, seed.iter().copied())?;
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    let mut queue: Vec<(usize, usize)> = Vec::new();
    let merge = |parent: &mut Vec<usize>, queue: &mut Vec<(usize, usize)>, a: usize, b: usize| {
        let (ra, rb) = (root(parent, a), root(parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
            queue.push((a, b));
        }
    };
    for &(a, b) in seed {
        merge(&mut parent, &mut queue, a, b);
    }
    let mut args = Vec::new();
    while let Some((a, b)) = queue.pop() {
        for op in 0..alg.op_count() {
            let arity = alg.arity(op);
            for pos in 0..arity {
                // odometer over the other arity - 1 arguments
                let mut rest = vec![0usize; arity - 1];
                loop {
                    args.clear();
                    args.extend_from_slice(&rest[..pos]);
                    args.push(a);
                    args.extend_from_slice(&rest[pos..]);
                    let fa = alg.apply_unchecked(op, &args);
                    args[pos] = b;
                    let fb = alg.apply_unchecked(op, &args);
                    merge(&mut parent, &mut queue, fa, fb);
                    if !crate::algebra::increment(&mut rest, n) {
                        break;
                    }
                }
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|a| root(&mut parent, a)).collect();
    BinRel::from_pairs(n, (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| roots[a] == roots[b]))
}

/// Least tolerance (reflexive, symmetric, admissible) containing `seed`.
pub fn tolerance_gen<A: Operations + ?Sized>(alg: &A, seed: &[(usize, usize)]) -> Result<BinRel> {
    let sym: Vec<(usize, usize)> = seed.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
    admissible_closure(alg, &sym)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{fixture, fixture_names};

    #[test]
    fn admissibility_examples() {
        let l = fixture("lattice2").unwrap();
        for name in fixture_names() {
            let a = fixture(name).unwrap();
            assert!(is_admissible(&a, &BinRel::identity(a.size())).unwrap());
        }
        let r = BinRel::reflexive_from(2, [(0, 1)]).unwrap();
        assert!(is_admissible(&l, &r).unwrap());
        // {(0,1)} alone is a subuniverse of the square: both operations are idempotent
        let bare = BinRel::from_pairs(2, [(0, 1)]).unwrap();
        assert!(is_admissible(&l, &bare).unwrap());
        let swap = BinRel::from_pairs(2, [(0, 1), (1, 0)]).unwrap();
        assert!(!is_admissible(&l, &swap).unwrap());
        assert!(is_admissible(&l, &BinRel::identity(3)).is_err());
    }

    #[test]
    fn admissible_closure_examples() {
        let l = fixture("lattice2").unwrap();
        assert_eq!(admissible_closure(&l, &[]).unwrap(), BinRel::identity(2));
        assert_eq!(
            admissible_closure(&l, &[(0, 1)]).unwrap(),
            BinRel::reflexive_from(2, [(0, 1)]).unwrap()
        );
        for name in fixture_names() {
            let a = fixture(name).unwrap();
            let n = a.size();
            let c = admissible_closure(&a, &[(0, n - 1), (n - 1, 0)]).unwrap();
            assert!(c.is_reflexive());
            assert!(is_admissible(&a, &c).unwrap());
        }
    }

    #[test]
    fn closure_is_fixed_on_admissible_reflexive() {
        let a = fixture("lattice_n5").unwrap();
        let r = admissible_closure(&a, &[(1, 3)]).unwrap();
        assert_eq!(admissible_closure(&a, &r.pair_list()).unwrap(), r);
        // a non-admissible reflexive relation grows
        let bad = BinRel::reflexive_from(5, [(1, 3)]).unwrap();
        assert!(!is_admissible(&a, &bad).unwrap());
        assert_ne!(admissible_closure(&a, &bad.pair_list()).unwrap(), bad);
    }

    #[test]
    fn congruence_examples() {
        let l = fixture("lattice2").unwrap();
        assert_eq!(congruence_gen(&l, &[(0, 1)]).unwrap(), BinRel::full(2));
        assert_eq!(congruence_gen(&l, &[]).unwrap(), BinRel::identity(2));
        let n5 = fixture("lattice_n5").unwrap();
        // in N5, collapsing a < b (1,2) forces nothing else
        let c = congruence_gen(&n5, &[(1, 2)]).unwrap();
        assert!(c.is_equivalence());
        assert!(is_admissible(&n5, &c).unwrap());
    }

    #[test]
    fn tolerance_is_symmetric() {
        let a = fixture("lattice_n5").unwrap();
        let t = tolerance_gen(&a, &[(0, 3)]).unwrap();
        assert!(t.is_symmetric() && t.is_reflexive());
        assert!(is_admissible(&a, &t).unwrap());
    }

    #[test]
    fn nullary_operations_are_checked() {
        use crate::algebra::{FiniteAlgebra, Operation};
        let a = FiniteAlgebra::new(
            2,
            vec![Operation {
                name: "one".into(),
                arity: 0,
                table: vec![1],
            }],
        )
        .unwrap();
        assert!(!is_admissible(&a, &BinRel::from_pairs(2, [(0, 0)]).unwrap()).unwrap());
        assert!(is_admissible(&a, &BinRel::identity(2)).unwrap());
    }
}
