//! U-admissible relations: unions of nonempty families of reflexive
//! admissible relations, kept together with the family that witnesses them.
//!
//! Every operation here has a union-view counterpart in [`crate::relations`];
//! the family is what certifies the result is still U-admissible.

use crate::algebra::Operations;
use crate::error::{Error, Result};
use crate::relations::{admissible_closure, BinRel, RelKind};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UAdmRel {
    components: Vec<BinRel>,
    union: BinRel,
}

/// `{components: [pairlists], union: pairlist}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UAdmReport {
    pub components: Vec<Vec<(usize, usize)>>,
    pub union: Vec<(usize, usize)>,
}

fn union_of(components: &[BinRel]) -> BinRel {
    let mut it = components.iter();
    let first = it.next().expect("nonempty family").clone();
    it.fold(first, |acc, c| acc.union_unchecked(c))
}

impl UAdmRel {
    /// Family of reflexive admissible relations, validated against `alg`.
    pub fn new<A: Operations + ?Sized>(alg: &A, components: Vec<BinRel>) -> Result<UAdmRel> {
        if components.is_empty() {
            return Err(Error::ClassViolation {
                var: "family".into(),
                class: "U-admissible relation".into(),
                reason: "no components".into(),
            });
        }
        for (i, c) in components.iter().enumerate() {
            if !RelKind::ReflexiveAdmissible.admits(alg, c) {
                return Err(Error::ClassViolation {
                    var: format!("component {i}"),
                    class: "reflexive admissible relation".into(),
                    reason: format!("{c} is not reflexive and admissible"),
                });
            }
        }
        Ok(UAdmRel::from_components(components))
    }

    /// Trusted constructor: components are reflexive admissible and share a universe.
    pub(crate) fn from_components(components: Vec<BinRel>) -> UAdmRel {
        let union = union_of(&components);
        UAdmRel { components, union }
    }

    pub(crate) fn single(component: BinRel) -> UAdmRel {
        UAdmRel {
            union: component.clone(),
            components: vec![component],
        }
    }

    /// `β ∪ γ` for congruences `β`, `γ`, as a two-component family.
    pub fn from_congruences<A: Operations + ?Sized>(alg: &A, beta: &BinRel, gamma: &BinRel) -> Result<UAdmRel> {
        for (name, r) in [("beta", beta), ("gamma", gamma)] {
            if !RelKind::Congruence.admits(alg, r) {
                return Err(Error::ClassViolation {
                    var: name.into(),
                    class: "congruence".into(),
                    reason: format!("{r} is not a congruence"),
                });
            }
        }
        Ok(UAdmRel::from_components(vec![beta.clone(), gamma.clone()]))
    }

    pub fn components(&self) -> &[BinRel] {
        &self.components
    }

    pub fn union_view(&self) -> &BinRel {
        &self.union
    }

    pub fn universe_size(&self) -> usize {
        self.union.universe_size()
    }

    fn check_size(&self, other: &BinRel) -> Result<()> {
        if self.universe_size() != other.universe_size() {
            return Err(Error::SizeMismatch {
                left: self.universe_size(),
                right: other.universe_size(),
            });
        }
        Ok(())
    }

    /// Drop components contained in other components; sort the rest.
    pub fn canonicalize(&self) -> UAdmRel {
        UAdmRel {
            components: canonical_components(self.components.clone()),
            union: self.union.clone(),
        }
    }

    /// `σ ∘ τ = ⋃ σ_g ∘ τ_f`.
    pub fn compose(&self, other: &UAdmRel) -> Result<UAdmRel> {
        self.check_size(&other.union)?;
        let comps = self
            .components
            .iter()
            .flat_map(|s| other.components.iter().map(move |t| s.compose_unchecked(t)))
            .collect();
        Ok(UAdmRel::from_components(canonical_components(comps)))
    }

    /// `Θ ∩ σ = ⋃ (Θ ∩ σ_g)` for a reflexive admissible `Θ`.
    pub fn intersect_rel<A: Operations + ?Sized>(&self, alg: &A, theta: &BinRel) -> Result<UAdmRel> {
        self.check_size(theta)?;
        if !RelKind::ReflexiveAdmissible.admits(alg, theta) {
            return Err(Error::ClassViolation {
                var: "theta".into(),
                class: "reflexive admissible relation".into(),
                reason: format!("{theta} is not reflexive and admissible"),
            });
        }
        Ok(self.intersect_ra(theta))
    }

    pub(crate) fn intersect_ra(&self, theta: &BinRel) -> UAdmRel {
        let comps = self
            .components
            .iter()
            .map(|c| c.intersect_unchecked(theta))
            .collect();
        UAdmRel::from_components(canonical_components(comps))
    }

    /// Pairwise intersections.
    pub fn intersect(&self, other: &UAdmRel) -> Result<UAdmRel> {
        self.check_size(&other.union)?;
        let comps = self
            .components
            .iter()
            .flat_map(|s| other.components.iter().map(move |t| s.intersect_unchecked(t)))
            .collect();
        Ok(UAdmRel::from_components(canonical_components(comps)))
    }

    /// Concatenated families.
    pub fn union(&self, other: &UAdmRel) -> Result<UAdmRel> {
        self.check_size(&other.union)?;
        let comps = self
            .components
            .iter()
            .chain(&other.components)
            .cloned()
            .collect();
        Ok(UAdmRel::from_components(canonical_components(comps)))
    }

    pub fn converse(&self) -> UAdmRel {
        let comps = self.components.iter().map(BinRel::converse).collect();
        UAdmRel::from_components(canonical_components(comps))
    }

    /// Transitive closure, re-expressed as the maximal compositions of
    /// components once they stop changing.
    pub fn transitive_closure(&self) -> UAdmRel {
        let base = canonical_components(self.components.clone());
        let mut family = base.clone();
        loop {
            let mut next = family.clone();
            for f in &family {
                for c in &base {
                    next.push(f.compose_unchecked(c));
                }
            }
            let next = canonical_components(next);
            if next == family {
                return UAdmRel::from_components(family);
            }
            family = next;
        }
    }

    /// The single component `admissibleClosure(union)`.
    pub fn bar<A: Operations + ?Sized>(&self, alg: &A) -> Result<UAdmRel> {
        Ok(UAdmRel::single(admissible_closure(alg, &self.union.pair_list())?))
    }

    pub fn report(&self) -> UAdmReport {
        UAdmReport {
            components: self.components.iter().map(BinRel::pair_list).collect(),
            union: self.union.pair_list(),
        }
    }

    pub fn from_report<A: Operations + ?Sized>(alg: &A, report: &UAdmReport) -> Result<UAdmRel> {
        let n = alg.size();
        let comps = report
            .components
            .iter()
            .map(|c| BinRel::from_pairs(n, c.iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        let u = UAdmRel::new(alg, comps)?;
        if u.union.pair_list() != report.union {
            return Err(Error::ClassViolation {
                var: "family".into(),
                class: "U-admissible relation".into(),
                reason: "union does not match its components".into(),
            });
        }
        Ok(u)
    }
}

fn canonical_components(mut comps: Vec<BinRel>) -> Vec<BinRel> {
    comps.sort();
    comps.dedup();
    let keep: Vec<bool> = (0..comps.len())
        .map(|i| {
            !comps
                .iter()
                .enumerate()
                .any(|(j, c)| j != i && comps[i].is_subset(c))
        })
        .collect();
    comps
        .into_iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then_some(c))
        .collect()
}

/// Best-effort decomposition of `rel` into reflexive admissible components.
///
/// Returns `None` when `rel` is not U-admissible, i.e. when some pair's
/// admissible closure leaves `rel`. Components are grown greedily; the
/// result is not guaranteed to have the fewest components.
pub fn greedy_decomposition<A: Operations + ?Sized>(alg: &A, rel: &BinRel) -> Result<Option<UAdmRel>> {
    if rel.universe_size() != alg.size() {
        return Err(Error::SizeMismatch {
            left: alg.size(),
            right: rel.universe_size(),
        });
    }
    if !rel.is_reflexive() {
        return Ok(None);
    }
    let mut comps: Vec<BinRel> = Vec::new();
    for (a, b) in rel.pairs().filter(|(a, b)| a != b) {
        if comps.iter().any(|c| c.contains(a, b)) {
            continue;
        }
        let principal = admissible_closure(alg, &[(a, b)])?;
        if !principal.is_subset(rel) {
            return Ok(None);
        }
        let mut merged = false;
        for c in comps.iter_mut() {
            let joined = admissible_closure(alg, &c.union_unchecked(&principal).pair_list())?;
            if joined.is_subset(rel) {
                *c = joined;
                merged = true;
                break;
            }
        }
        if !merged {
            comps.push(principal);
        }
    }
    if comps.is_empty() {
        comps.push(BinRel::identity(alg.size()));
    }
    Ok(Some(UAdmRel::from_components(canonical_components(comps))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{fixture, fixture_names};
    use crate::relations::{enumerate, EnumConfig};

    fn kernels() -> (BinRel, BinRel) {
        let mut e1 = BinRel::empty(4);
        let mut e2 = BinRel::empty(4);
        for p in 0..4 {
            for q in 0..4 {
                if p / 2 == q / 2 {
                    e1.insert(p, q);
                }
                if p % 2 == q % 2 {
                    e2.insert(p, q);
                }
            }
        }
        (e1, e2)
    }

    fn up_down() -> UAdmRel {
        let l = fixture("lattice2").unwrap();
        UAdmRel::new(
            &l,
            vec![
                BinRel::reflexive_from(2, [(0, 1)]).unwrap(),
                BinRel::reflexive_from(2, [(1, 0)]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn from_congruences_examples() {
        let sq = fixture("lattice_2x2").unwrap();
        let d = BinRel::identity(4);
        assert_eq!(UAdmRel::from_congruences(&sq, &d, &d).unwrap().union_view(), &d);
        let (e1, e2) = kernels();
        let s = UAdmRel::from_congruences(&sq, &e1, &e2).unwrap();
        assert_eq!(s.union_view().len(), 12);
        let full = UAdmRel::from_congruences(&sq, &d, &BinRel::full(4)).unwrap();
        assert_eq!(full.union_view(), &BinRel::full(4));
        let not_cong = BinRel::reflexive_from(4, [(0, 1)]).unwrap();
        assert!(UAdmRel::from_congruences(&sq, &not_cong, &d).is_err());
    }

    #[test]
    fn compose_examples() {
        let s = up_down();
        let delta = UAdmRel::single(BinRel::identity(2));
        assert_eq!(s.compose(&delta).unwrap().union_view(), s.union_view());
        let ss = s.compose(&s).unwrap();
        assert_eq!(ss.union_view(), &BinRel::full(2));
        assert!(ss.components().len() <= 4);
        assert_eq!(ss.union_view(), &s.union_view().compose(s.union_view()).unwrap());
    }

    #[test]
    fn intersect_examples() {
        let l = fixture("lattice2").unwrap();
        let s = up_down();
        assert_eq!(
            s.intersect_rel(&l, &BinRel::full(2)).unwrap(),
            s.canonicalize()
        );
        let d = s.intersect_rel(&l, &BinRel::identity(2)).unwrap();
        assert_eq!(d.components(), &[BinRel::identity(2)]);
        assert!(s.intersect_rel(&l, &BinRel::from_pairs(2, [(0, 1)]).unwrap()).is_err());
    }

    #[test]
    fn structure_operations() {
        let sq = fixture("lattice_2x2").unwrap();
        let (e1, e2) = kernels();
        let s = UAdmRel::from_congruences(&sq, &e1, &e2).unwrap();
        assert_eq!(s.converse().union_view(), s.union_view());
        let star = s.transitive_closure();
        assert_eq!(star.union_view().len(), 16);
        assert_eq!(star.union_view(), &s.union_view().transitive_closure());
        let l = fixture("lattice2").unwrap();
        let bar = up_down().bar(&l).unwrap();
        assert_eq!(bar.components(), &[BinRel::full(2)]);
    }

    #[test]
    fn canonicalize_examples() {
        let l = fixture("lattice2").unwrap();
        let f = UAdmRel::new(&l, vec![BinRel::identity(2), BinRel::full(2)]).unwrap();
        assert_eq!(f.canonicalize().components(), &[BinRel::full(2)]);
        let dup = UAdmRel::new(&l, vec![BinRel::identity(2), BinRel::identity(2)]).unwrap();
        assert_eq!(dup.canonicalize().components().len(), 1);
        assert_eq!(f.canonicalize().union_view(), f.union_view());
    }

    #[test]
    fn greedy_decomposition_recognizes_unions() {
        let sq = fixture("lattice_2x2").unwrap();
        let (e1, e2) = kernels();
        let u = e1.union(&e2).unwrap();
        let d = greedy_decomposition(&sq, &u).unwrap().unwrap();
        assert_eq!(d.union_view(), &u);
        assert!(d.components().iter().all(|c| RelKind::ReflexiveAdmissible.admits(&sq, c)));
        // a reflexive relation with a non-closable pair is not U-admissible
        let l = fixture("lattice_n5").unwrap();
        let r = BinRel::reflexive_from(5, [(1, 3)]).unwrap();
        assert!(greedy_decomposition(&l, &r).unwrap().is_none());
    }

    /// Union views of family operations agree with the plain relation algebra,
    /// whatever the presentation of the inputs.
    #[test]
    fn family_ops_match_union_views() {
        for name in fixture_names() {
            let a = fixture(name).unwrap();
            if a.size() > 4 {
                continue;
            }
            let ra = enumerate(&a, RelKind::ReflexiveAdmissible, &EnumConfig::default()).relations;
            let fams: Vec<UAdmRel> = ra
                .iter()
                .enumerate()
                .flat_map(|(i, r)| {
                    ra[i..].iter().map(move |s| UAdmRel::from_components(vec![r.clone(), s.clone()]))
                })
                .take(60)
                .collect();
            for s in &fams {
                for t in fams.iter().take(12) {
                    let c = s.compose(t).unwrap();
                    assert_eq!(c.union_view(), &s.union_view().compose(t.union_view()).unwrap());
                    assert!(c.components().len() <= s.components().len() * t.components().len());
                    let m = s.intersect(t).unwrap();
                    assert_eq!(m.union_view(), &s.union_view().intersect(t.union_view()).unwrap());
                }
                assert_eq!(s.converse().union_view(), &s.union_view().converse());
                assert_eq!(
                    s.transitive_closure().union_view(),
                    &s.union_view().transitive_closure()
                );
                for c in s.transitive_closure().components() {
                    assert!(RelKind::ReflexiveAdmissible.admits(&a, c));
                }
                // presentation independence: canonical and raw families agree
                let canon = s.canonicalize();
                assert_eq!(
                    canon.compose(&canon).unwrap().union_view(),
                    s.compose(s).unwrap().union_view()
                );
            }
        }
    }
}
