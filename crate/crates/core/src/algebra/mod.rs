//! Finite algebras given by operation tables.
//!
//! Elements are dense integers `0..size`. An `r`-ary operation is stored as a
//! flat table of length `size^r` in row-major order, last argument fastest.

mod fixtures;
mod term;

pub use fixtures::{fixture, fixture_names};
pub use term::Term;
pub(crate) use term::var_name;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashSet;

/// Default cap on the universe size of products and powers.
pub const DEFAULT_POWER_CAP: usize = 1_000_000;

/// Anything that interprets a finite list of operation symbols on `0..size`.
///
/// Implemented by [`FiniteAlgebra`] and by term clones viewed as algebras, so
/// relation closures can run without materializing large tables.
pub trait Operations: Sync {
    fn size(&self) -> usize;
    fn op_count(&self) -> usize;
    fn arity(&self, op: usize) -> usize;
    /// Apply operation `op` to `args`; callers guarantee arity and range.
    fn apply_unchecked(&self, op: usize, args: &[usize]) -> usize;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operation {
    pub name: String,
    pub arity: usize,
    pub table: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AlgebraDoc", into = "AlgebraDoc")]
pub struct FiniteAlgebra {
    size: usize,
    ops: Vec<Operation>,
}

#[derive(Serialize, Deserialize)]
struct AlgebraDoc {
    size: usize,
    ops: Vec<Operation>,
}

impl TryFrom<AlgebraDoc> for FiniteAlgebra {
    type Error = Error;
    fn try_from(doc: AlgebraDoc) -> Result<Self> {
        FiniteAlgebra::new(doc.size, doc.ops)
    }
}

impl From<FiniteAlgebra> for AlgebraDoc {
    fn from(a: FiniteAlgebra) -> Self {
        AlgebraDoc {
            size: a.size,
            ops: a.ops,
        }
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

impl FiniteAlgebra {
    pub fn new(size: usize, ops: Vec<Operation>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidAlgebra("universe must be nonempty".into()));
        }
        let mut names = HashSet::new();
        for op in &ops {
            if !names.insert(op.name.as_str()) {
                return Err(Error::InvalidAlgebra(format!(
                    "duplicate operation name `{}`",
                    op.name
                )));
            }
            let expected = checked_pow(size, op.arity).ok_or_else(|| {
                Error::InvalidAlgebra(format!("table of `{}` is too large", op.name))
            })?;
            if op.table.len() != expected {
                return Err(Error::InvalidAlgebra(format!(
                    "table of `{}` has length {}, expected {}",
                    op.name,
                    op.table.len(),
                    expected
                )));
            }
            if let Some(&bad) = op.table.iter().find(|&&v| v >= size) {
                return Err(Error::InvalidAlgebra(format!(
                    "table of `{}` contains {} outside 0..{}",
                    op.name, bad, size
                )));
            }
        }
        Ok(FiniteAlgebra { size, ops })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("algebra serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn op_index(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.name == name)
    }

    /// `(name, arity)` pairs in declaration order.
    pub fn signature(&self) -> Vec<(&str, usize)> {
        self.ops
            .iter()
            .map(|o| (o.name.as_str(), o.arity))
            .collect()
    }

    /// Evaluate a named operation, validating arity and element range.
    pub fn apply(&self, op_name: &str, args: &[usize]) -> Result<usize> {
        let idx = self
            .op_index(op_name)
            .ok_or_else(|| Error::UnknownOperation(op_name.to_string()))?;
        let op = &self.ops[idx];
        if args.len() != op.arity {
            return Err(Error::ArityMismatch {
                op: op_name.to_string(),
                expected: op.arity,
                got: args.len(),
            });
        }
        if let Some(&bad) = args.iter().find(|&&a| a >= self.size) {
            return Err(Error::ElementOutOfRange {
                elem: bad,
                size: self.size,
            });
        }
        Ok(self.apply_unchecked(idx, args))
    }

    /// Componentwise product; the pair `(a, b)` is encoded as `a * |B| + b`.
    pub fn product(&self, other: &FiniteAlgebra) -> Result<FiniteAlgebra> {
        self.product_capped(other, DEFAULT_POWER_CAP)
    }

    pub fn product_capped(&self, other: &FiniteAlgebra, cap: usize) -> Result<FiniteAlgebra> {
        if self.signature() != other.signature() {
            return Err(Error::SignatureMismatch(format!(
                "{:?} vs {:?}",
                self.signature(),
                other.signature()
            )));
        }
        let size = self.size as u128 * other.size as u128;
        if size > cap as u128 {
            return Err(Error::CapExceeded {
                what: "product universe",
                requested: size,
                cap: cap as u128,
            });
        }
        let size = size as usize;
        let nb = other.size;
        let mut ops = Vec::with_capacity(self.ops.len());
        for (i, op) in self.ops.iter().enumerate() {
            let len = checked_pow(size, op.arity).ok_or(Error::CapExceeded {
                what: "product table",
                requested: u128::MAX,
                cap: cap as u128,
            })?;
            if len > cap.saturating_mul(64) {
                return Err(Error::CapExceeded {
                    what: "product table",
                    requested: len as u128,
                    cap: cap as u128 * 64,
                });
            }
            let mut table = Vec::with_capacity(len);
            let mut left = vec![0; op.arity];
            let mut right = vec![0; op.arity];
            let mut args = vec![0; op.arity];
            for _ in 0..len {
                for (j, &p) in args.iter().enumerate() {
                    left[j] = p / nb;
                    right[j] = p % nb;
                }
                let a = self.apply_unchecked(i, &left);
                let b = other.apply_unchecked(i, &right);
                table.push(a * nb + b);
                increment(&mut args, size);
            }
            ops.push(Operation {
                name: op.name.clone(),
                arity: op.arity,
                table,
            });
        }
        FiniteAlgebra::new(size, ops)
    }

    /// `k`-th direct power with mixed-radix encoding, first coordinate most significant.
    pub fn power(&self, k: usize) -> Result<FiniteAlgebra> {
        self.power_capped(k, DEFAULT_POWER_CAP)
    }

    pub fn power_capped(&self, k: usize, cap: usize) -> Result<FiniteAlgebra> {
        if k == 0 {
            return Err(Error::BadParams("power exponent must be positive".into()));
        }
        let requested = (self.size as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if requested > cap as u128 {
            return Err(Error::CapExceeded {
                what: "power universe",
                requested,
                cap: cap as u128,
            });
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.product_capped(self, cap)?;
        }
        Ok(acc)
    }

    pub fn eval_term(&self, term: &Term, args: &[usize]) -> Result<usize> {
        match term {
            Term::Var(v) => args.get(*v).copied().ok_or_else(|| {
                Error::BadParams(format!(
                    "term uses variable {} but only {} arguments given",
                    v,
                    args.len()
                ))
            }),
            Term::App { op, args: children } => {
                let vals = children
                    .iter()
                    .map(|c| self.eval_term(c, args))
                    .collect::<Result<Vec<_>>>()?;
                self.apply(op, &vals)
            }
        }
    }

    /// Full table of a term over `arity` variables, row-major, last variable fastest.
    pub fn term_table(&self, term: &Term, arity: usize) -> Result<Vec<usize>> {
        let len = checked_pow(self.size, arity).ok_or(Error::CapExceeded {
            what: "term table",
            requested: u128::MAX,
            cap: usize::MAX as u128,
        })?;
        let mut tuple = vec![0; arity];
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push(self.eval_term(term, &tuple)?);
            increment(&mut tuple, self.size);
        }
        Ok(out)
    }

    /// Stable fingerprint over the size and every table.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.size as u64).to_le_bytes());
        for op in &self.ops {
            h.update(op.name.as_bytes());
            h.update([0u8]);
            h.update((op.arity as u64).to_le_bytes());
            for &v in &op.table {
                h.update((v as u64).to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

impl Operations for FiniteAlgebra {
    fn size(&self) -> usize {
        self.size
    }

    fn op_count(&self) -> usize {
        self.ops.len()
    }

    fn arity(&self, op: usize) -> usize {
        self.ops[op].arity
    }

    #[inline]
    fn apply_unchecked(&self, op: usize, args: &[usize]) -> usize {
        let mut idx = 0;
        for &a in args {
            idx = idx * self.size + a;
        }
        self.ops[op].table[idx]
    }
}

/// Advance a mixed-radix tuple (last position fastest). Returns false on wraparound.
pub(crate) fn increment(tuple: &mut [usize], radix: usize) -> bool {
    for slot in tuple.iter_mut().rev() {
        *slot += 1;
        if *slot < radix {
            return true;
        }
        *slot = 0;
    }
    false
}
