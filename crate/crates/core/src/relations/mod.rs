//! Dense binary relations on `0..n` and the relation algebra over them.
//!
//! Composition is left to right: `(a, c) ∈ R ∘ S` iff `a R b S c` for some `b`.

mod closure;
mod enumerate;

pub use closure::{admissible_closure, congruence_gen, is_admissible, tolerance_gen};
pub(crate) use closure::close_reflexive;
pub use enumerate::{enumerate, EnumConfig, EnumMethod, Enumeration, RelKind};

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::fmt;

/// Which end an alternating composition is anchored at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// `S ∘ T ∘ S ∘ ...`, `m` factors starting from `S`.
    Right,
    /// `... ∘ T ∘ S ∘ T`, `m` factors ending at `T`.
    Left,
}

/// Boolean adjacency matrix, one bit row per first coordinate.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinRel {
    n: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl BinRel {
    pub fn empty(n: usize) -> BinRel {
        let stride = n.div_ceil(64).max(1);
        BinRel {
            n,
            stride,
            bits: vec![0; stride * n],
        }
    }

    /// The diagonal Δ.
    pub fn identity(n: usize) -> BinRel {
        let mut r = BinRel::empty(n);
        for a in 0..n {
            r.insert(a, a);
        }
        r
    }

    /// The full relation 1.
    pub fn full(n: usize) -> BinRel {
        let mut r = BinRel::empty(n);
        for a in 0..n {
            for b in 0..n {
                r.insert(a, b);
            }
        }
        r
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<BinRel> {
        let mut r = BinRel::empty(n);
        for (a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::ElementOutOfRange {
                    elem: a.max(b),
                    size: n,
                });
            }
            r.insert(a, b);
        }
        Ok(r)
    }

    /// Δ together with the given pairs.
    pub fn reflexive_from(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<BinRel> {
        let mut r = BinRel::from_pairs(n, pairs)?;
        for a in 0..n {
            r.insert(a, a);
        }
        Ok(r)
    }

    pub fn universe_size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.stride + b / 64] >> (b % 64) & 1 == 1
    }

    /// Returns true if the pair was not present before.
    #[inline]
    pub fn insert(&mut self, a: usize, b: usize) -> bool {
        let w = &mut self.bits[a * self.stride + b / 64];
        let mask = 1u64 << (b % 64);
        let fresh = *w & mask == 0;
        *w |= mask;
        fresh
    }

    #[inline]
    fn row(&self, a: usize) -> &[u64] {
        &self.bits[a * self.stride..(a + 1) * self.stride]
    }

    fn row_targets(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(a).iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }

    /// Pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |a| self.row_targets(a).map(move |b| (a, b)))
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    fn check_size(&self, other: &BinRel) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn is_subset(&self, other: &BinRel) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|a| self.contains(a, a))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().all(|(a, b)| self.contains(b, a))
    }

    pub fn is_transitive(&self) -> bool {
        self.compose_unchecked(self).is_subset(self)
    }

    pub fn is_equivalence(&self) -> bool {
        self.is_reflexive() && self.is_symmetric() && self.is_transitive()
    }

    pub(crate) fn compose_unchecked(&self, other: &BinRel) -> BinRel {
        let mut out = BinRel::empty(self.n);
        for a in 0..self.n {
            let base = a * self.stride;
            for b in self.row_targets(a) {
                let src = other.row(b);
                for (w, s) in out.bits[base..base + self.stride].iter_mut().zip(src) {
                    *w |= s;
                }
            }
        }
        out
    }

    pub fn compose(&self, other: &BinRel) -> Result<BinRel> {
        self.check_size(other)?;
        Ok(self.compose_unchecked(other))
    }

    /// Alternating composition of `s` and `t` with `m` factors.
    ///
    /// `Side::Right` gives `S ∘ T ∘ S ...`; `Side::Left` gives `... T ∘ S ∘ T`,
    /// which is `S ∘_m T` for even `m` and `T ∘_m S` for odd `m`.
    pub fn compose_alt(s: &BinRel, t: &BinRel, m: usize, side: Side) -> Result<BinRel> {
        s.check_size(t)?;
        if m == 0 {
            return Err(Error::BadParams("alternating composition needs m >= 1".into()));
        }
        let (first, second) = match side {
            Side::Right => (s, t),
            Side::Left if m.is_multiple_of(2) => (s, t),
            Side::Left => (t, s),
        };
        let mut acc = first.clone();
        for i in 1..m {
            let next = if i % 2 == 0 { first } else { second };
            acc = acc.compose_unchecked(next);
        }
        Ok(acc)
    }

    /// `R ∘ R ∘ ... ∘ R` with `h` factors.
    pub fn power(&self, h: usize) -> Result<BinRel> {
        if h == 0 {
            return Err(Error::BadParams("relational power needs h >= 1".into()));
        }
        let mut acc = self.clone();
        for _ in 1..h {
            acc = acc.compose_unchecked(self);
        }
        Ok(acc)
    }

    pub(crate) fn intersect_unchecked(&self, other: &BinRel) -> BinRel {
        let mut out = self.clone();
        for (w, o) in out.bits.iter_mut().zip(&other.bits) {
            *w &= o;
        }
        out
    }

    pub(crate) fn union_unchecked(&self, other: &BinRel) -> BinRel {
        let mut out = self.clone();
        for (w, o) in out.bits.iter_mut().zip(&other.bits) {
            *w |= o;
        }
        out
    }

    pub fn intersect(&self, other: &BinRel) -> Result<BinRel> {
        self.check_size(other)?;
        Ok(self.intersect_unchecked(other))
    }

    pub fn union(&self, other: &BinRel) -> Result<BinRel> {
        self.check_size(other)?;
        Ok(self.union_unchecked(other))
    }

    pub fn converse(&self) -> BinRel {
        let mut out = BinRel::empty(self.n);
        for (a, b) in self.pairs() {
            out.insert(b, a);
        }
        out
    }

    /// Least transitive relation containing `self`, by repeated squaring.
    pub fn transitive_closure(&self) -> BinRel {
        let mut acc = self.clone();
        loop {
            let next = acc.union_unchecked(&acc.compose_unchecked(&acc));
            if next == acc {
                return acc;
            }
            acc = next;
        }
    }

    /// Reflexive, symmetric and transitive closure.
    pub fn equivalence_closure(&self) -> BinRel {
        self.union_unchecked(&self.converse())
            .union_unchecked(&BinRel::identity(self.n))
            .transitive_closure()
    }

    /// `[(a,b),...]` in lexicographic order.
    pub fn pair_list(&self) -> Vec<(usize, usize)> {
        self.pairs().collect()
    }
}

impl Ord for BinRel {
    /// Universe size first, then lexicographic order of sorted pair lists.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| self.pairs().cmp(other.pairs()))
    }
}

impl PartialOrd for BinRel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BinRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (a, b)) in self.pairs().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "({a},{b})")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for BinRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinRel{{n={}, {}}}", self.n, self)
    }
}
