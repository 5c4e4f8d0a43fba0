//! The `k`-ary term clone of a finite algebra.
//!
//! Elements are the term operations `A^k → A`, stored as byte tables indexed
//! row-major over argument tuples (last argument fastest). Generation is a
//! breadth-first closure from the projections, so every table carries a
//! witnessing term of least depth. For a finite algebra `A` the `k`-ary clone
//! is the free algebra on `k` generators of the variety generated by `A`,
//! with operations acting pointwise on tables.

use crate::algebra::{increment, FiniteAlgebra, Operations, Term};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::relations::{admissible_closure, congruence_gen, tolerance_gen, BinRel};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

/// Default element caps per arity.
pub const DEFAULT_CAP_3: usize = 50_000;
pub const DEFAULT_CAP_4: usize = 200_000;
/// Largest `|A|^k` accepted for a table.
pub const MAX_TABLE_LEN: usize = 1 << 20;
/// Largest operation table materialized for a free algebra.
pub const MAX_FREE_TABLE: usize = 1 << 24;

/// First arguments handled per parallel batch within a round.
const ROUND_CHUNK: usize = 256;

pub fn default_cap(arity: usize) -> usize {
    if arity <= 3 {
        DEFAULT_CAP_3
    } else {
        DEFAULT_CAP_4
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermTable {
    pub table: Vec<u8>,
    pub witness: Term,
    /// BFS round in which the table was first produced.
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct TermClone {
    algebra: FiniteAlgebra,
    arity: usize,
    elements: Vec<TermTable>,
    index: HashMap<Vec<u8>, usize>,
    complete: bool,
    cap: usize,
}

/// Breadth-first closure of the projections under pointwise operations.
///
/// Within a round, candidates are produced operation by operation (operations
/// sorted by name) and argument tuples in lexicographic order of element ids;
/// at least one argument comes from the previous round. The round is computed
/// in parallel and merged in that order, so ids and witnesses are deterministic.
pub fn generate_clone(alg: &FiniteAlgebra, arity: usize, cap: usize, exec: Exec) -> Result<TermClone> {
    if alg.size() > 256 {
        return Err(Error::CapExceeded {
            what: "clone universe (elements must fit in a byte)",
            requested: alg.size() as u128,
            cap: 256,
        });
    }
    if cap == 0 {
        return Err(Error::BadParams("clone cap must be positive".into()));
    }
    let len = (alg.size() as u128).pow(arity as u32);
    if len > MAX_TABLE_LEN as u128 {
        return Err(Error::CapExceeded {
            what: "clone table length",
            requested: len,
            cap: MAX_TABLE_LEN as u128,
        });
    }
    let len = len as usize;
    let n = alg.size();

    let mut clone = TermClone {
        algebra: alg.clone(),
        arity,
        elements: Vec::new(),
        index: HashMap::new(),
        complete: true,
        cap,
    };
    for v in 0..arity {
        let mut table = Vec::with_capacity(len);
        let mut tuple = vec![0; arity];
        for _ in 0..len {
            table.push(tuple[v] as u8);
            increment(&mut tuple, n);
        }
        clone.push(table, Term::Var(v), 0);
    }

    let mut ops: Vec<usize> = (0..alg.op_count()).collect();
    ops.sort_by(|&a, &b| alg.ops()[a].name.cmp(&alg.ops()[b].name));

    let mut prev_start = 0;
    let mut round = 1;
    loop {
        let known = clone.elements.len();
        let mut added = false;
        for &op in &ops {
            let op_arity = alg.arity(op);
            // nullary operations only contribute in the first round
            if op_arity == 0 && round > 1 {
                continue;
            }
            let firsts = if op_arity == 0 { 1 } else { known };
            // chunks keep the merge order but let a full clone stop early
            for lo in (0..firsts).step_by(ROUND_CHUNK) {
                let hi = (lo + ROUND_CHUNK).min(firsts);
                let batches: Vec<Vec<(Vec<u8>, Vec<usize>)>> = exec::map_range(exec, hi - lo, |i| {
                    clone.round_candidates(op, op_arity, lo + i, known, prev_start, len)
                });
                for (table, args) in batches.into_iter().flatten() {
                    if clone.index.contains_key(&table) {
                        continue;
                    }
                    if clone.elements.len() >= cap {
                        clone.complete = false;
                        return Ok(clone);
                    }
                    let witness = Term::App {
                        op: alg.ops()[op].name.clone(),
                        args: args.iter().map(|&c| clone.elements[c].witness.clone()).collect(),
                    };
                    clone.push(table, witness, round);
                    added = true;
                }
            }
        }
        if !added {
            return Ok(clone);
        }
        prev_start = known;
        round += 1;
    }
}

impl TermClone {
    fn push(&mut self, table: Vec<u8>, witness: Term, depth: usize) {
        if self.index.contains_key(&table) {
            return;
        }
        self.index.insert(table.clone(), self.elements.len());
        self.elements.push(TermTable {
            table,
            witness,
            depth,
        });
    }

    /// New tables from tuples whose first argument is `first`.
    fn round_candidates(
        &self,
        op: usize,
        op_arity: usize,
        first: usize,
        known: usize,
        prev_start: usize,
        len: usize,
    ) -> Vec<(Vec<u8>, Vec<usize>)> {
        let mut out = Vec::new();
        if op_arity == 0 {
            let c = self.algebra.apply_unchecked(op, &[]) as u8;
            out.push((vec![c; len], vec![]));
            return out;
        }
        let mut args = vec![0usize; op_arity];
        args[0] = first;
        let mut vals = vec![0usize; op_arity];
        loop {
            if args.iter().any(|&a| a >= prev_start) {
                let table = self.pointwise(op, &args, &mut vals);
                if !self.index.contains_key(&table) {
                    out.push((table, args.clone()));
                }
            }
            if op_arity == 1 || !increment(&mut args[1..], known) {
                break;
            }
        }
        out
    }

    fn pointwise(&self, op: usize, args: &[usize], vals: &mut [usize]) -> Vec<u8> {
        let len = self.table_len();
        let mut table = Vec::with_capacity(len);
        for t in 0..len {
            for (v, &a) in vals.iter_mut().zip(args) {
                *v = self.elements[a].table[t] as usize;
            }
            table.push(self.algebra.apply_unchecked(op, vals) as u8);
        }
        table
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// False when generation stopped at the cap.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn elements(&self) -> &[TermTable] {
        &self.elements
    }

    pub fn element(&self, id: usize) -> &TermTable {
        &self.elements[id]
    }

    pub fn table_len(&self) -> usize {
        self.algebra.size().pow(self.arity as u32)
    }

    pub fn find(&self, table: &[u8]) -> Option<usize> {
        self.index.get(table).copied()
    }

    /// Id of the `v`-th projection.
    pub fn projection(&self, v: usize) -> usize {
        let n = self.algebra.size();
        let mut tuple = vec![0; self.arity];
        let table: Vec<u8> = (0..self.table_len())
            .map(|_| {
                let x = tuple[v] as u8;
                increment(&mut tuple, n);
                x
            })
            .collect();
        self.find(&table).expect("projections are generators")
    }

    /// Table of `t(pattern)` over `vars` variables, where argument `i` of the
    /// element is variable `pattern[i]`; e.g. pattern `[0,0,1]` gives `t(x,x,y)`.
    pub fn pattern_table(&self, id: usize, pattern: &[usize], vars: usize) -> Vec<u8> {
        pattern_table(&self.elements[id].table, self.algebra.size(), pattern, vars)
    }

    /// The free algebra: element ids with operations acting pointwise on
    /// tables. Requires a complete clone.
    pub fn free_algebra(&self) -> Result<FiniteAlgebra> {
        self.free_algebra_with(Exec::Parallel)
    }

    pub fn free_algebra_with(&self, exec: Exec) -> Result<FiniteAlgebra> {
        if !self.complete {
            return Err(Error::IncompleteClone { cap: self.cap });
        }
        let m = self.len();
        let mut ops = Vec::with_capacity(self.algebra.op_count());
        for (op, o) in self.algebra.ops().iter().enumerate() {
            let entries = (m as u128).pow(o.arity as u32);
            if entries > MAX_FREE_TABLE as u128 {
                return Err(Error::CapExceeded {
                    what: "free algebra operation table",
                    requested: entries,
                    cap: MAX_FREE_TABLE as u128,
                });
            }
            let table = if o.arity == 0 {
                let c = self.algebra.apply_unchecked(op, &[]) as u8;
                vec![self.find(&vec![c; self.table_len()]).expect("constants are in the clone")]
            } else {
                let rows: Vec<Vec<usize>> = exec::map_range(exec, m, |first| {
                    let mut args = vec![0usize; o.arity];
                    args[0] = first;
                    let mut vals = vec![0usize; o.arity];
                    let mut row = Vec::with_capacity(m.pow(o.arity as u32 - 1));
                    loop {
                        let t = self.pointwise(op, &args, &mut vals);
                        row.push(self.find(&t).expect("complete clone is closed under operations"));
                        if o.arity == 1 || !increment(&mut args[1..], m) {
                            break;
                        }
                    }
                    row
                });
                rows.concat()
            };
            ops.push(crate::algebra::Operation {
                name: o.name.clone(),
                arity: o.arity,
                table,
            });
        }
        FiniteAlgebra::new(m, ops)
    }

    /// Text dump: header, then one line per element with hex table and witness.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "arity {}", self.arity);
        let _ = writeln!(s, "algebra-size {}", self.algebra.size());
        let _ = writeln!(s, "count {}", self.elements.len());
        let _ = writeln!(s, "complete {}", self.complete);
        for (i, e) in self.elements.iter().enumerate() {
            let _ = writeln!(s, "{i} {} {}", hex::encode(&e.table), e.witness);
        }
        s
    }

    /// Every witness re-evaluates to its table.
    pub fn verify_witnesses(&self) -> Result<bool> {
        for e in &self.elements {
            let t = self.algebra.term_table(&e.witness, self.arity)?;
            if t.iter().zip(&e.table).any(|(&a, &b)| a != b as usize) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Restrict a `k`-ary table along a variable pattern.
pub fn pattern_table(table: &[u8], n: usize, pattern: &[usize], vars: usize) -> Vec<u8> {
    let len = n.pow(vars as u32);
    let mut out = Vec::with_capacity(len);
    let mut tuple = vec![0usize; vars];
    for _ in 0..len {
        let mut idx = 0;
        for &p in pattern {
            idx = idx * n + tuple[p];
        }
        out.push(table[idx]);
        increment(&mut tuple, n);
    }
    out
}

/// Generators and principal relations of the 3-generated free algebra.
/// Congruences are computed up front; tolerances and reflexive admissible
/// relations (much dearer for ternary and wider operations) on first use.
#[derive(Clone, Debug)]
pub struct FreeRelations {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    /// `Cg(x,z)`, `Cg(x,y)`, `Cg(y,z)`.
    pub cg_xz: BinRel,
    pub cg_xy: BinRel,
    pub cg_yz: BinRel,
    alg: FiniteAlgebra,
    tol_xz: OnceLock<BinRel>,
    r: [OnceLock<BinRel>; 3],
}

impl FreeRelations {
    /// The free algebra the relations live on.
    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.alg
    }

    /// Tolerance generated by `(x,z)`.
    pub fn tol_xz(&self) -> &BinRel {
        self.tol_xz
            .get_or_init(|| tolerance_gen(&self.alg, &[(self.x, self.z)]).expect("generators lie in the algebra"))
    }

    fn principal(&self, slot: usize, a: usize, b: usize) -> &BinRel {
        self.r[slot].get_or_init(|| admissible_closure(&self.alg, &[(a, b)]).expect("generators lie in the algebra"))
    }

    /// Least reflexive admissible relation containing `(x,z)`.
    pub fn r_xz(&self) -> &BinRel {
        self.principal(0, self.x, self.z)
    }

    pub fn r_xy(&self) -> &BinRel {
        self.principal(1, self.x, self.y)
    }

    pub fn r_yz(&self) -> &BinRel {
        self.principal(2, self.y, self.z)
    }
}

pub fn free_relations(clone: &TermClone) -> Result<FreeRelations> {
    if clone.arity() != 3 {
        return Err(Error::BadParams(format!(
            "free relations need the 3-ary clone, got arity {}",
            clone.arity()
        )));
    }
    free_relations_in(clone, clone.free_algebra()?)
}

/// As [`free_relations`], taking an already materialized free algebra.
pub fn free_relations_in(clone: &TermClone, alg: FiniteAlgebra) -> Result<FreeRelations> {
    if clone.arity() != 3 || alg.size() != clone.len() {
        return Err(Error::BadParams("free algebra does not match the 3-ary clone".into()));
    }
    let (x, y, z) = (clone.projection(0), clone.projection(1), clone.projection(2));
    Ok(FreeRelations {
        x,
        y,
        z,
        cg_xz: congruence_gen(&alg, &[(x, z)])?,
        cg_xy: congruence_gen(&alg, &[(x, y)])?,
        cg_yz: congruence_gen(&alg, &[(y, z)])?,
        alg,
        tol_xz: OnceLock::new(),
        r: Default::default(),
    })
}

/// One side of an equation between term operations: a variable, or a term
/// applied to a tuple of variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqSide {
    Var(usize),
    Apply { term: Term, args: Vec<usize> },
}

impl EqSide {
    pub fn apply(term: &Term, args: &[usize]) -> EqSide {
        EqSide::Apply {
            term: term.clone(),
            args: args.to_vec(),
        }
    }

    fn eval(&self, alg: &FiniteAlgebra, assignment: &[usize]) -> Result<usize> {
        match self {
            EqSide::Var(v) => Ok(assignment[*v]),
            EqSide::Apply { term, args } => {
                let vals: Vec<usize> = args.iter().map(|&a| assignment[a]).collect();
                alg.eval_term(term, &vals)
            }
        }
    }

    fn max_var(&self) -> usize {
        match self {
            EqSide::Var(v) => v + 1,
            EqSide::Apply { args, .. } => args.iter().map(|a| a + 1).max().unwrap_or(0),
        }
    }
}

impl std::fmt::Display for EqSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EqSide::Var(v) => f.write_str(&crate::algebra::var_name(*v)),
            EqSide::Apply { term, args } => {
                let subst: Vec<Term> = args.iter().map(|&a| Term::Var(a)).collect();
                write!(f, "{}", term.substitute(&subst))
            }
        }
    }
}

/// `lhs = rhs` for all assignments of variables `0..vars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub lhs: EqSide,
    pub rhs: EqSide,
    pub vars: usize,
}

impl Equation {
    pub fn new(lhs: EqSide, rhs: EqSide) -> Equation {
        let vars = lhs.max_var().max(rhs.max_var());
        Equation { lhs, rhs, vars }
    }
}

impl std::fmt::Display for Equation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// Whether the equation holds on every assignment in `A`.
pub fn identity_holds(alg: &FiniteAlgebra, eq: &Equation) -> Result<bool> {
    let n = alg.size();
    let mut tuple = vec![0usize; eq.vars];
    loop {
        if eq.lhs.eval(alg, &tuple)? != eq.rhs.eval(alg, &tuple)? {
            return Ok(false);
        }
        if !increment(&mut tuple, n) {
            return Ok(true);
        }
    }
}
