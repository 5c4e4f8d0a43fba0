use super::closure::{admissible_unchecked, close_reflexive, congruence_gen};
use super::BinRel;
use crate::algebra::Operations;
use crate::exec::{self, Exec};
use std::collections::HashSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelKind {
    Congruence,
    Tolerance,
    ReflexiveAdmissible,
}

impl RelKind {
    /// Membership test; `r` must live on the algebra's universe.
    pub fn admits<A: Operations + ?Sized>(self, alg: &A, r: &BinRel) -> bool {
        r.universe_size() == alg.size()
            && r.is_reflexive()
            && match self {
                RelKind::Congruence => r.is_symmetric() && r.is_transitive(),
                RelKind::Tolerance => r.is_symmetric(),
                RelKind::ReflexiveAdmissible => true,
            }
            && admissible_unchecked(alg, r)
    }

    /// Least member of the kind containing `r` (which must contain Δ).
    fn close<A: Operations + ?Sized>(self, alg: &A, r: BinRel) -> BinRel {
        match self {
            RelKind::ReflexiveAdmissible => close_reflexive(alg, r),
            RelKind::Tolerance => close_reflexive(alg, r.union_unchecked(&r.converse())),
            RelKind::Congruence => congruence_gen(alg, &r.pair_list()).expect("same universe"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnumMethod {
    /// Brute-force filter up to the threshold, join closure above it.
    Auto,
    /// Filter all `2^(n²-n)` reflexive relations.
    Filter,
    /// Close the principal relations under joins.
    Generated,
}

#[derive(Clone, Copy, Debug)]
pub struct EnumConfig {
    pub method: EnumMethod,
    /// Largest universe enumerated by brute-force filtering.
    pub exhaustive_threshold: usize,
    /// Maximum number of relations returned.
    pub cap: usize,
    pub exec: Exec,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            method: EnumMethod::Auto,
            exhaustive_threshold: 5,
            cap: 200_000,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    /// Sorted, deduplicated.
    pub relations: Vec<BinRel>,
    /// False when the cap cut the enumeration short.
    pub complete: bool,
    pub method: EnumMethod,
}

/// All relations of the given kind on the algebra.
pub fn enumerate<A: Operations + ?Sized>(alg: &A, kind: RelKind, cfg: &EnumConfig) -> Enumeration {
    let method = match cfg.method {
        EnumMethod::Auto if alg.size() <= cfg.exhaustive_threshold => EnumMethod::Filter,
        EnumMethod::Auto => EnumMethod::Generated,
        m => m,
    };
    let (mut relations, complete) = match method {
        EnumMethod::Filter => by_filter(alg, kind, cfg),
        _ => by_joins(alg, kind, cfg),
    };
    relations.sort();
    Enumeration {
        relations,
        complete,
        method,
    }
}

fn by_filter<A: Operations + ?Sized>(alg: &A, kind: RelKind, cfg: &EnumConfig) -> (Vec<BinRel>, bool) {
    let n = alg.size();
    let off: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    assert!(off.len() < 40, "brute-force enumeration needs a tiny universe");
    let total = 1u64 << off.len();
    let mut found = exec::filter_map_range(cfg.exec, total, |mask| {
        let mut r = BinRel::identity(n);
        for (i, &(a, b)) in off.iter().enumerate() {
            if mask >> i & 1 == 1 {
                r.insert(a, b);
            }
        }
        let structural = match kind {
            RelKind::Congruence => r.is_symmetric() && r.is_transitive(),
            RelKind::Tolerance => r.is_symmetric(),
            RelKind::ReflexiveAdmissible => true,
        };
        (structural && admissible_unchecked(alg, &r)).then_some(r)
    });
    let complete = found.len() <= cfg.cap;
    found.truncate(cfg.cap);
    (found, complete)
}

fn by_joins<A: Operations + ?Sized>(alg: &A, kind: RelKind, cfg: &EnumConfig) -> (Vec<BinRel>, bool) {
    let n = alg.size();
    let delta = BinRel::identity(n);
    let principal_seeds: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .filter(|&(a, b)| kind == RelKind::ReflexiveAdmissible || a < b)
        .collect();
    let principals: Vec<BinRel> = exec::map_range(cfg.exec, principal_seeds.len(), |i| {
        let (a, b) = principal_seeds[i];
        let mut r = delta.clone();
        r.insert(a, b);
        kind.close(alg, r)
    });
    let mut principals_dedup: Vec<BinRel> = Vec::new();
    let mut seen: HashSet<BinRel> = HashSet::new();
    seen.insert(delta.clone());
    let mut all = vec![delta];
    for p in principals {
        if seen.insert(p.clone()) {
            principals_dedup.push(p.clone());
            all.push(p);
        }
    }
    let mut frontier: Vec<BinRel> = principals_dedup.clone();
    while !frontier.is_empty() {
        if all.len() > cfg.cap {
            all.truncate(cfg.cap);
            return (all, false);
        }
        // joins of the newest relations with every principal one
        let candidates: Vec<Vec<BinRel>> = exec::map_range(cfg.exec, frontier.len(), |i| {
            let r = &frontier[i];
            principals_dedup
                .iter()
                .filter(|p| !p.is_subset(r))
                .map(|p| kind.close(alg, r.union_unchecked(p)))
                .collect()
        });
        let mut next = Vec::new();
        for r in candidates.into_iter().flatten() {
            if seen.insert(r.clone()) {
                next.push(r.clone());
                all.push(r);
            }
        }
        frontier = next;
    }
    let complete = all.len() <= cfg.cap;
    all.truncate(cfg.cap);
    (all, complete)
}
