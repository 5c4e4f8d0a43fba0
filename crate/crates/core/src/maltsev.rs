//! Maltsev term searches in the 3- and 4-generated free algebras, equation
//! certificates, the αβ/αγ dichotomy, expansions of U-inclusions and the
//! principal-seed check of an inclusion on the free algebra.

use crate::algebra::{FiniteAlgebra, Term};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::freeclone::{
    default_cap, free_relations_in, generate_clone, identity_holds, EqSide, Equation, FreeRelations, TermClone,
};
use crate::identities::{
    builtin, check_for_all, effective_classes, evaluate_unions, BuiltinParams, CheckConfig, Expr,
    IdentitySpec, Mode, RelClass, Status, VarDecl, Verdict,
};
use crate::relations::{admissible_closure, congruence_gen, tolerance_gen, BinRel, Side};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use std::collections::HashMap;
use std::fmt;

pub const DEFAULT_BOUND: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schema {
    Jonsson { k: usize },
    DirectedJonsson { n: usize },
    Majority,
    Pixley,
    Vr { h: usize },
    MalF { h: usize, f: Vec<u8> },
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schema::Jonsson { k } => write!(f, "Jonsson terms, k = {k}"),
            Schema::DirectedJonsson { n } => write!(f, "directed Jonsson terms, n = {n}"),
            Schema::Majority => f.write_str("majority term"),
            Schema::Pixley => f.write_str("Pixley term"),
            Schema::Vr { h } => write!(f, "t/u/s system, h = {h}"),
            Schema::MalF { h, f: func } => write!(f, "s system, h = {h}, f = {}", fmt_f(func)),
        }
    }
}

pub fn fmt_f(f: &[u8]) -> String {
    let parts: Vec<String> = f.iter().map(u8::to_string).collect();
    format!("({})", parts.join(","))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedTerm {
    pub name: String,
    pub arity: usize,
    pub term: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermSystem {
    pub schema: Schema,
    pub terms: Vec<NamedTerm>,
    pub certificate: Vec<Equation>,
}

impl TermSystem {
    /// Replay every equation on full tables of `alg`.
    pub fn verify(&self, alg: &FiniteAlgebra) -> Result<bool> {
        for eq in &self.certificate {
            if !identity_holds(alg, eq)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name).map(|t| &t.term)
    }

    pub fn report(&self) -> SystemReport {
        SystemReport {
            schema: self.schema.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| TermReport {
                    name: t.name.clone(),
                    arity: t.arity,
                    term: t.term.to_string(),
                })
                .collect(),
            certificate: self.certificate.iter().map(Equation::to_string).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermReport {
    pub name: String,
    pub arity: usize,
    pub term: String,
}

/// Serializable form of a term system; the certificate is a list of
/// `lhs = rhs` term equations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemReport {
    pub schema: Schema,
    pub terms: Vec<TermReport>,
    pub certificate: Vec<String>,
}

/// Parse and check one `lhs = rhs` equation over all tuples of `alg`.
pub fn check_equation_text(alg: &FiniteAlgebra, text: &str) -> Result<bool> {
    let (l, r) = text.split_once(" = ").ok_or_else(|| Error::Parse {
        line: 1,
        column: 1,
        message: format!("expected `lhs = rhs` in {text:?}"),
    })?;
    let l: Term = l.trim().parse()?;
    let r: Term = r.trim().parse()?;
    let arity = l.min_arity().max(r.min_arity());
    Ok(alg.term_table(&l, arity)? == alg.term_table(&r, arity)?)
}

/// Replay a serialized certificate; returns the first failing equation.
pub fn replay_certificate(alg: &FiniteAlgebra, certificate: &[String]) -> Result<Option<String>> {
    for line in certificate {
        if !check_equation_text(alg, line)? {
            return Ok(Some(line.clone()));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Search<T> {
    Found(T),
    /// Conclusively absent within the bound.
    Absent,
    Inconclusive(String),
}

impl<T> Search<T> {
    pub fn found(&self) -> Option<&T> {
        match self {
            Search::Found(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, Search::Absent)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Search::Found(_) => "found",
            Search::Absent => "absent",
            Search::Inconclusive(_) => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    pub cap3: usize,
    pub cap4: usize,
    pub exec: Exec,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            cap3: default_cap(3),
            cap4: default_cap(4),
            exec: Exec::Parallel,
        }
    }
}

/// Free algebra on x, y, z and its principal relations; the 4-ary clone is
/// generated on demand.
pub struct FreeContext {
    clone3: TermClone,
    free: OnceLock<Option<FreeRelations>>,
    clone4: OnceLock<std::result::Result<TermClone, String>>,
    /// Restriction ids `u(x,y,z;x)`, `u(x,y,z;y)`, `u(x,y,z;z)` of 4-ary elements.
    restrictions: OnceLock<Vec<[Option<usize>; 3]>>,
    cfg: SearchConfig,
}

impl FreeContext {
    pub fn new(alg: &FiniteAlgebra, cfg: SearchConfig) -> Result<FreeContext> {
        let clone3 = generate_clone(alg, 3, cfg.cap3, cfg.exec)?;
        if clone3.is_complete() {
            // surface table-size errors up front
            let widest = alg.ops().iter().map(|o| o.arity).max().unwrap_or(0);
            let entries = (clone3.len() as u128).checked_pow(widest as u32).unwrap_or(u128::MAX);
            if entries > crate::freeclone::MAX_FREE_TABLE as u128 {
                return Err(Error::CapExceeded {
                    what: "free algebra operation table",
                    requested: entries,
                    cap: crate::freeclone::MAX_FREE_TABLE as u128,
                });
            }
        }
        Ok(FreeContext {
            clone3,
            free: OnceLock::new(),
            clone4: OnceLock::new(),
            restrictions: OnceLock::new(),
            cfg,
        })
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        self.clone3.algebra()
    }

    pub fn clone3(&self) -> &TermClone {
        &self.clone3
    }

    /// The free algebra and its principal relations, if the clone closed.
    pub fn free(&self) -> Option<(&FiniteAlgebra, &FreeRelations)> {
        self.free
            .get_or_init(|| {
                let f = self.clone3.free_algebra_with(self.cfg.exec).ok()?;
                free_relations_in(&self.clone3, f).ok()
            })
            .as_ref()
            .map(|r| (r.algebra(), r))
    }

    fn require_free(&self) -> std::result::Result<(&FiniteAlgebra, &FreeRelations), String> {
        self.free().ok_or_else(|| format!("3-ary clone capped at {} elements", self.clone3.cap()))
    }

    pub fn clone4(&self) -> std::result::Result<&TermClone, String> {
        self.clone4
            .get_or_init(|| generate_clone(self.algebra(), 4, self.cfg.cap4, self.cfg.exec).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn restrictions(&self) -> std::result::Result<&[[Option<usize>; 3]], String> {
        let c4 = self.clone4()?;
        Ok(self.restrictions.get_or_init(|| {
            exec::map_range(self.cfg.exec, c4.len(), |u| {
                [0, 1, 2].map(|w| self.clone3.find(&c4.pattern_table(u, &[0, 1, 2, w], 3)))
            })
        }))
    }

    /// Least 4-ary element `u` with `u(x,y,z;w_a) = s` and `u(x,y,z;w_b) = t`.
    fn extract4(&self, a: usize, b: usize, s: usize, t: usize) -> std::result::Result<Option<usize>, String> {
        let r = self.restrictions()?;
        let pos = exec::find_first(self.cfg.exec, r.len() as u64, |u| {
            let row = &r[u as usize];
            row[a] == Some(s) && row[b] == Some(t)
        });
        Ok(pos.map(|u| u as usize))
    }

    fn term3(&self, id: usize) -> Term {
        self.clone3.element(id).witness.clone()
    }

    /// Element id of `t(pattern)` for a 3-ary element.
    fn pattern3(&self, id: usize, pattern: [usize; 3]) -> usize {
        self.clone3
            .find(&self.clone3.pattern_table(id, &pattern, 3))
            .expect("clone is closed under substitution of variables")
    }

    fn incomplete_absent<T>(&self) -> Search<T> {
        if self.clone3.is_complete() {
            Search::Absent
        } else {
            Search::Inconclusive(format!("3-ary clone capped at {} elements", self.clone3.cap()))
        }
    }

    // ----------------------------------------------------------- searches

    /// Least `k ≤ max_k` with Jónsson terms `j_0, …, j_k`.
    pub fn find_jonsson(&self, max_k: usize) -> Search<TermSystem> {
        let (_, fr) = match self.require_free() {
            Ok(v) => v,
            Err(e) => return Search::Inconclusive(e),
        };
        let ab = fr.cg_xz.intersect(&fr.cg_xy).expect("same universe");
        let ag = fr.cg_xz.intersect(&fr.cg_yz).expect("same universe");
        for k in 1..=max_k {
            let steps: Vec<&BinRel> = (0..k).map(|i| if i % 2 == 0 { &ab } else { &ag }).collect();
            if let Some(chain) = least_chain(fr.x, fr.z, &steps) {
                return Search::Found(self.jonsson_system(k, &chain));
            }
        }
        Search::Absent
    }

    fn jonsson_system(&self, k: usize, chain: &[usize]) -> TermSystem {
        let terms: Vec<NamedTerm> = chain
            .iter()
            .enumerate()
            .map(|(i, &id)| NamedTerm {
                name: format!("j{i}"),
                arity: 3,
                term: self.term3(id),
            })
            .collect();
        let mut cert = vec![
            Equation::new(EqSide::apply(&terms[0].term, &[0, 1, 2]), EqSide::Var(0)),
            Equation::new(EqSide::apply(&terms[k].term, &[0, 1, 2]), EqSide::Var(2)),
        ];
        for t in &terms {
            cert.push(Equation::new(EqSide::apply(&t.term, &[0, 1, 0]), EqSide::Var(0)));
        }
        for i in 0..k {
            let pat: &[usize] = if i % 2 == 0 { &[0, 0, 2] } else { &[0, 2, 2] };
            cert.push(Equation::new(
                EqSide::apply(&terms[i].term, pat),
                EqSide::apply(&terms[i + 1].term, pat),
            ));
        }
        TermSystem {
            schema: Schema::Jonsson { k },
            terms,
            certificate: cert,
        }
    }

    /// Least `n ≤ max_n` with directed Jónsson terms `d_0, …, d_n`.
    pub fn find_directed(&self, max_n: usize) -> Search<TermSystem> {
        if !self.clone3.is_complete() {
            return self.incomplete_absent();
        }
        let c = &self.clone3;
        let x = c.projection(0);
        let z = c.projection(2);
        // d(x,y,x) = x; transitions d(x,x,z) ↦ d(x,z,z)
        let cand: Vec<(usize, usize, usize)> = exec::filter_map_range(self.cfg.exec, c.len() as u64, |d| {
            let d = d as usize;
            (self.pattern3(d, [0, 1, 0]) == x).then(|| (d, self.pattern3(d, [0, 0, 2]), self.pattern3(d, [0, 2, 2])))
        });
        // BFS over values v = d_i(x,z,z); d_{i+1} must satisfy d_{i+1}(x,x,z) = v
        let mut pred: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut frontier = vec![x];
        let mut seen = std::collections::HashSet::from([x]);
        for n in 1..=max_n {
            if frontier.contains(&z) {
                // rebuild d_1..d_{n-1}, then d_n = z
                let mut ds = Vec::new();
                let mut v = z;
                while v != x {
                    let (prev, d) = pred[&v];
                    ds.push(d);
                    v = prev;
                }
                ds.reverse();
                let mut chain = vec![x];
                chain.extend(ds);
                chain.push(z);
                debug_assert_eq!(chain.len(), n + 1);
                return Search::Found(self.directed_system(&chain));
            }
            let mut next = Vec::new();
            frontier.sort_unstable();
            for &v in &frontier {
                for &(d, a, b) in &cand {
                    if a == v && seen.insert(b) {
                        pred.insert(b, (v, d));
                        next.push(b);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Search::Absent
    }

    fn directed_system(&self, chain: &[usize]) -> TermSystem {
        let n = chain.len() - 1;
        let terms: Vec<NamedTerm> = chain
            .iter()
            .enumerate()
            .map(|(i, &id)| NamedTerm {
                name: format!("d{i}"),
                arity: 3,
                term: self.term3(id),
            })
            .collect();
        let mut cert = vec![
            Equation::new(EqSide::apply(&terms[0].term, &[0, 1, 2]), EqSide::Var(0)),
            Equation::new(EqSide::apply(&terms[n].term, &[0, 1, 2]), EqSide::Var(2)),
        ];
        for t in &terms {
            cert.push(Equation::new(EqSide::apply(&t.term, &[0, 1, 0]), EqSide::Var(0)));
        }
        for i in 0..n {
            cert.push(Equation::new(
                EqSide::apply(&terms[i].term, &[0, 2, 2]),
                EqSide::apply(&terms[i + 1].term, &[0, 0, 2]),
            ));
        }
        TermSystem {
            schema: Schema::DirectedJonsson { n },
            terms,
            certificate: cert,
        }
    }

    fn find_by_table(&self, schema: Schema, name: &str, ok: impl Fn(&[u8], usize) -> bool + Sync) -> Search<TermSystem> {
        let c = &self.clone3;
        let n = c.algebra().size();
        let hit = exec::find_first(self.cfg.exec, c.len() as u64, |id| ok(&c.element(id as usize).table, n));
        match hit {
            Some(id) => {
                let term = self.term3(id as usize);
                let certificate = schema_equations(&schema, &term);
                Search::Found(TermSystem {
                    schema,
                    terms: vec![NamedTerm {
                        name: name.into(),
                        arity: 3,
                        term,
                    }],
                    certificate,
                })
            }
            None => self.incomplete_absent(),
        }
    }

    /// `m(x,x,y) = m(x,y,x) = m(y,x,x) = x`.
    pub fn find_majority(&self) -> Search<TermSystem> {
        self.find_by_table(Schema::Majority, "m", |t, n| {
            (0..n).all(|a| (0..n).all(|b| t[at(n, a, a, b)] == a as u8 && t[at(n, a, b, a)] == a as u8 && t[at(n, b, a, a)] == a as u8))
        })
    }

    /// `p(x,y,y) = x`, `p(x,y,x) = x`, `p(x,x,y) = y`.
    pub fn find_pixley(&self) -> Search<TermSystem> {
        self.find_by_table(Schema::Pixley, "p", |t, n| {
            (0..n).all(|a| (0..n).all(|b| t[at(n, a, b, b)] == a as u8 && t[at(n, a, b, a)] == a as u8 && t[at(n, a, a, b)] == b as u8))
        })
    }

    /// Ternary `t_0..t_h` and 4-ary `u_i`, `s_i` witnessing
    /// `σ(τ∘υ) ⊆ στ ∘_h συ`.
    pub fn find_vr(&self, h: usize) -> Search<TermSystem> {
        if h == 0 {
            return Search::Absent;
        }
        let (_, fr) = match self.require_free() {
            Ok(v) => v,
            Err(e) => return Search::Inconclusive(e),
        };
        let st = fr.r_xz().intersect(fr.r_xy()).expect("same universe");
        let su = fr.r_xz().intersect(fr.r_yz()).expect("same universe");
        let steps: Vec<&BinRel> = (0..h).map(|i| if i % 2 == 0 { &st } else { &su }).collect();
        let Some(chain) = least_chain(fr.x, fr.z, &steps) else {
            return Search::Absent;
        };
        let mut us = Vec::new();
        let mut ss = Vec::new();
        for i in 0..h {
            let (a, b) = if i % 2 == 0 { (0, 1) } else { (1, 2) };
            let u = self.extract4(0, 2, chain[i], chain[i + 1]);
            let s = self.extract4(a, b, chain[i], chain[i + 1]);
            match (u, s) {
                (Ok(Some(u)), Ok(Some(s))) => {
                    us.push(u);
                    ss.push(s);
                }
                (Err(e), _) | (_, Err(e)) => return Search::Inconclusive(e),
                _ => return Search::Inconclusive("4-ary clone capped before a witness appeared".into()),
            }
        }
        let c4 = self.clone4().expect("generated above");
        let t: Vec<Term> = chain.iter().map(|&id| self.term3(id)).collect();
        let u: Vec<Term> = us.iter().map(|&id| c4.element(id).witness.clone()).collect();
        let s: Vec<Term> = ss.iter().map(|&id| c4.element(id).witness.clone()).collect();
        let mut terms = Vec::new();
        for (i, term) in t.iter().enumerate() {
            terms.push(NamedTerm { name: format!("t{i}"), arity: 3, term: term.clone() });
        }
        for i in 0..h {
            terms.push(NamedTerm { name: format!("u{i}"), arity: 4, term: u[i].clone() });
            terms.push(NamedTerm { name: format!("s{i}"), arity: 4, term: s[i].clone() });
        }
        let xyz = [0, 1, 2];
        let w = |v: usize| [0, 1, 2, v];
        let mut cert = vec![
            Equation::new(EqSide::Var(0), EqSide::apply(&t[0], &xyz)),
            Equation::new(EqSide::apply(&t[h], &xyz), EqSide::Var(2)),
        ];
        for i in 0..h {
            cert.push(Equation::new(EqSide::apply(&t[i], &xyz), EqSide::apply(&u[i], &w(0))));
            cert.push(Equation::new(EqSide::apply(&u[i], &w(2)), EqSide::apply(&t[i + 1], &xyz)));
            let (a, b) = if i % 2 == 0 { (0, 1) } else { (1, 2) };
            cert.push(Equation::new(EqSide::apply(&t[i], &xyz), EqSide::apply(&s[i], &w(a))));
            cert.push(Equation::new(EqSide::apply(&s[i], &w(b)), EqSide::apply(&t[i + 1], &xyz)));
        }
        Search::Found(TermSystem {
            schema: Schema::Vr { h },
            terms,
            certificate: cert,
        })
    }

    /// Least `f` (lexicographic, 1 < 2) admitting a chain
    /// `x = t_0 (αR_{f(0)}) t_1 … t_h = z`, with the 4-ary `s_i`.
    pub fn find_mal_f(&self, h: usize) -> Search<TermSystem> {
        if h == 0 || h > 24 {
            return Search::Inconclusive(format!("h = {h} out of range 1..=24"));
        }
        let (_, fr) = match self.require_free() {
            Ok(v) => v,
            Err(e) => return Search::Inconclusive(e),
        };
        let a1 = fr.cg_xz.intersect(fr.r_xy()).expect("same universe");
        let a2 = fr.cg_xz.intersect(fr.r_yz()).expect("same universe");
        let f_of = |idx: u64| -> Vec<u8> { (0..h).map(|i| if idx >> (h - 1 - i) & 1 == 0 { 1 } else { 2 }).collect() };
        let steps_of = |f: &[u8]| -> Vec<&BinRel> { f.iter().map(|&v| if v == 1 { &a1 } else { &a2 }).collect() };
        let hit = exec::find_first(self.cfg.exec, 1 << h, |idx| chain_exists(fr.x, fr.z, &steps_of(&f_of(idx))));
        let Some(idx) = hit else {
            return Search::Absent;
        };
        let f = f_of(idx);
        let chain = least_chain(fr.x, fr.z, &steps_of(&f)).expect("exists");
        let mut ss = Vec::new();
        for i in 0..h {
            let (a, b) = if f[i] == 1 { (0, 1) } else { (1, 2) };
            match self.extract4(a, b, chain[i], chain[i + 1]) {
                Ok(Some(s)) => ss.push(s),
                Ok(None) => return Search::Inconclusive("4-ary clone capped before a witness appeared".into()),
                Err(e) => return Search::Inconclusive(e),
            }
        }
        let c4 = self.clone4().expect("generated above");
        let t: Vec<Term> = chain.iter().map(|&id| self.term3(id)).collect();
        let s: Vec<Term> = ss.iter().map(|&id| c4.element(id).witness.clone()).collect();
        let mut terms = Vec::new();
        for (i, term) in t.iter().enumerate() {
            terms.push(NamedTerm { name: format!("t{i}"), arity: 3, term: term.clone() });
        }
        for (i, term) in s.iter().enumerate() {
            terms.push(NamedTerm { name: format!("s{i}"), arity: 4, term: term.clone() });
        }
        // w_1, w_2, w'_1, w'_2 are x, y, y, z
        let wv = |v: u8| if v == 1 { 0 } else { 1 };
        let wp = |v: u8| if v == 1 { 1 } else { 2 };
        let xyz = [0, 1, 2];
        let at4 = |v: usize| [0, 1, 2, v];
        let mut cert = vec![
            Equation::new(EqSide::Var(0), EqSide::apply(&t[0], &xyz)),
            Equation::new(EqSide::apply(&t[h], &xyz), EqSide::Var(2)),
        ];
        for i in 0..=h {
            cert.push(Equation::new(EqSide::apply(&t[i], &[0, 1, 0]), EqSide::Var(0)));
        }
        for i in 0..h {
            cert.push(Equation::new(EqSide::apply(&t[i], &xyz), EqSide::apply(&s[i], &at4(wv(f[i])))));
            cert.push(Equation::new(EqSide::apply(&s[i], &at4(wp(f[i]))), EqSide::apply(&t[i + 1], &xyz)));
        }
        // the t-free form
        cert.push(Equation::new(EqSide::Var(0), EqSide::apply(&s[0], &at4(wv(f[0])))));
        cert.push(Equation::new(EqSide::apply(&s[h - 1], &at4(wp(f[h - 1]))), EqSide::Var(2)));
        for i in 0..h - 1 {
            cert.push(Equation::new(
                EqSide::apply(&s[i], &at4(wp(f[i]))),
                EqSide::apply(&s[i + 1], &at4(wv(f[i + 1]))),
            ));
            // z := x throughout, including inside w'_2
            let last = if f[i] == 1 { 1 } else { 0 };
            cert.push(Equation::new(EqSide::Var(0), EqSide::apply(&s[i + 1], &[0, 1, 0, last])));
        }
        Search::Found(TermSystem {
            schema: Schema::MalF { h, f },
            terms,
            certificate: cert,
        })
    }

    /// Membership of `(x,z)` in `αβ ∘_k αγ` and in `αγ ∘_k αβ`.
    pub fn slmore(&self, k: usize) -> Result<Dichotomy> {
        let (_, fr) = self.require_free().map_err(|_| Error::IncompleteClone { cap: self.clone3.cap() })?;
        let ab = fr.cg_xz.intersect(&fr.cg_xy)?;
        let ag = fr.cg_xz.intersect(&fr.cg_yz)?;
        let left = BinRel::compose_alt(&ab, &ag, k, Side::Right)?.contains(fr.x, fr.z);
        let right = BinRel::compose_alt(&ag, &ab, k, Side::Right)?.contains(fr.x, fr.z);
        let outcome = match (left, right) {
            (true, _) => DichotomySide::Left,
            (false, true) => DichotomySide::Right,
            _ => DichotomySide::Neither,
        };
        Ok(Dichotomy { k, left, right, outcome })
    }

    /// Decide an inclusion `V ∩ (E1 ∘ E2) ⊆ ε′` on the free algebra by seeding
    /// the variables with the relations generated by `(x,z)`, `(x,y)`, `(y,z)`
    /// and testing whether `(x,z)` lies on the right.
    pub fn principal_verdict(&self, spec: &IdentitySpec, cfg: &CheckConfig) -> Result<bool> {
        let (f, fr) = self.require_free().map_err(|_| Error::IncompleteClone { cap: self.clone3.cap() })?;
        let classes = effective_classes(spec, cfg)?;
        let shape = || Error::BadParams(format!("`{}` is not of the form V & (E1 ; E2)", spec.label()));
        let (v, e1, e2) = match spec.lhs.unfold() {
            Expr::Meet(a, b) => match (*a, *b) {
                (Expr::Var(v), Expr::Compose(l, r)) => match (*l, *r) {
                    (Expr::Var(e1), Expr::Var(e2)) => (v, e1, e2),
                    _ => return Err(shape()),
                },
                _ => return Err(shape()),
            },
            _ => return Err(shape()),
        };
        if v == e1 || v == e2 {
            return Err(shape());
        }
        let (x, y, z) = (fr.x, fr.y, fr.z);
        let gen = |class: RelClass, seed: &[(usize, usize)]| -> Result<BinRel> {
            match class {
                RelClass::Congruence | RelClass::UnionOfTwoCongruences => congruence_gen(f, seed),
                RelClass::Tolerance => tolerance_gen(f, seed),
                _ => admissible_closure(f, seed),
            }
        };
        let mut values: Vec<Option<BinRel>> = vec![None; spec.vars.len()];
        values[v] = Some(gen(classes[v], &[(x, z)])?);
        if e1 != e2 {
            values[e1] = Some(gen(classes[e1], &[(x, y)])?);
            values[e2] = Some(gen(classes[e2], &[(y, z)])?);
        } else if classes[e1].is_family() {
            // the two-component family, through its union
            let a = gen(classes[e1], &[(x, y)])?;
            let b = gen(classes[e1], &[(y, z)])?;
            values[e1] = Some(a.union(&b)?);
        } else {
            values[e1] = Some(gen(classes[e1], &[(x, y), (y, z)])?);
        }
        let env: Vec<&BinRel> = values
            .iter()
            .zip(&spec.vars)
            .map(|(v, d)| v.as_ref().ok_or_else(|| Error::UnboundVariable(d.name.clone())))
            .collect::<Result<_>>()?;
        let ev = evaluate_unions(f, spec, &env);
        debug_assert!(ev.lhs.contains(x, z));
        Ok(ev.rhs.contains(x, z))
    }
}

#[inline]
fn at(n: usize, a: usize, b: usize, c: usize) -> usize {
    (a * n + b) * n + c
}

fn schema_equations(schema: &Schema, t: &Term) -> Vec<Equation> {
    let e = |args: &[usize], v: usize| Equation::new(EqSide::apply(t, args), EqSide::Var(v));
    match schema {
        Schema::Majority => vec![e(&[0, 0, 1], 0), e(&[0, 1, 0], 0), e(&[1, 0, 0], 0)],
        Schema::Pixley => vec![e(&[0, 1, 1], 0), e(&[0, 1, 0], 0), e(&[0, 0, 1], 1)],
        _ => unreachable!("single-term schemas only"),
    }
}

/// Forward reachable sets along `steps`, starting at `start`.
fn reachable(start: usize, steps: &[&BinRel]) -> Vec<Vec<bool>> {
    let n = steps.first().map_or(start + 1, |r| r.universe_size());
    let mut layers = Vec::with_capacity(steps.len() + 1);
    let mut cur = vec![false; n];
    cur[start] = true;
    layers.push(cur.clone());
    for r in steps {
        let mut next = vec![false; n];
        for (a, _) in cur.iter().enumerate().filter(|(_, &on)| on) {
            for b in 0..n {
                if r.contains(a, b) {
                    next[b] = true;
                }
            }
        }
        cur = next;
        layers.push(cur.clone());
    }
    layers
}

fn chain_exists(start: usize, end: usize, steps: &[&BinRel]) -> bool {
    reachable(start, steps).last().is_some_and(|l| l[end])
}

/// Lexicographically least chain `start = c_0, …, c_len = end` with
/// `(c_i, c_{i+1}) ∈ steps[i]`.
fn least_chain(start: usize, end: usize, steps: &[&BinRel]) -> Option<Vec<usize>> {
    let fwd = reachable(start, steps);
    if !fwd.last()?[end] {
        return None;
    }
    let n = fwd[0].len();
    // backward: which elements at position i still reach `end`
    let mut back = vec![vec![false; n]; steps.len() + 1];
    back[steps.len()][end] = true;
    for i in (0..steps.len()).rev() {
        for a in 0..n {
            back[i][a] = fwd[i][a] && (0..n).any(|b| back[i + 1][b] && steps[i].contains(a, b));
        }
    }
    let mut chain = vec![start];
    for (i, r) in steps.iter().enumerate() {
        let a = chain[i];
        let b = (0..n).find(|&b| back[i + 1][b] && r.contains(a, b))?;
        chain.push(b);
    }
    Some(chain)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DichotomySide {
    Left,
    Right,
    Neither,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dichotomy {
    pub k: usize,
    /// `(x,z) ∈ αβ ∘_k αγ`.
    pub left: bool,
    /// `(x,z) ∈ αγ ∘_k αβ`.
    pub right: bool,
    pub outcome: DichotomySide,
}

// ------------------------------------------------------------ conveniences

pub fn find_jonsson(alg: &FiniteAlgebra, max_k: usize) -> Result<Search<TermSystem>> {
    Ok(FreeContext::new(alg, SearchConfig::default())?.find_jonsson(max_k))
}

pub fn find_directed(alg: &FiniteAlgebra, max_n: usize) -> Result<Search<TermSystem>> {
    Ok(FreeContext::new(alg, SearchConfig::default())?.find_directed(max_n))
}

pub fn find_majority(alg: &FiniteAlgebra) -> Result<Search<TermSystem>> {
    Ok(FreeContext::new(alg, SearchConfig::default())?.find_majority())
}

pub fn find_pixley(alg: &FiniteAlgebra) -> Result<Search<TermSystem>> {
    Ok(FreeContext::new(alg, SearchConfig::default())?.find_pixley())
}

pub fn find_vr(alg: &FiniteAlgebra, h: usize) -> Result<Search<TermSystem>> {
    Ok(FreeContext::new(alg, SearchConfig::default())?.find_vr(h))
}

pub fn find_mal_f(alg: &FiniteAlgebra, h: usize) -> Result<Search<TermSystem>> {
    Ok(FreeContext::new(alg, SearchConfig::default())?.find_mal_f(h))
}

pub fn slmore_dichotomy(alg: &FiniteAlgebra, k: usize) -> Result<Dichotomy> {
    FreeContext::new(alg, SearchConfig::default())?.slmore(k)
}

/// Number of adjacent changes in `f(0), f(1), …`.
pub fn variation_count(f: &[u8]) -> usize {
    f.windows(2).filter(|w| w[0] != w[1]).count()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImplicationReport {
    pub f: Vec<u8>,
    pub f_prime: Vec<u8>,
    pub variations: (usize, usize),
    pub holds_f: Status,
    pub holds_f_prime: Status,
    /// What this algebra shows about `(a)_f ⇒ (a)_f′` and its converse;
    /// a single algebra can only refute an implication.
    pub observation: String,
}

/// Check `malA(f)` and `malA(f′)` on `alg` and report the pattern observed.
pub fn mal_implication_experiment(alg: &FiniteAlgebra, f: &[u8], f_prime: &[u8], cfg: &CheckConfig) -> Result<ImplicationReport> {
    let run = |f: &[u8]| -> Result<Verdict> {
        let spec = builtin("malA", &BuiltinParams { f: f.to_vec(), ..BuiltinParams::default() })?;
        check_for_all(alg, &spec, cfg)
    };
    let a = run(f)?;
    let b = run(f_prime)?;
    let (fs, gs) = (fmt_f(f), fmt_f(f_prime));
    let observation = match (a.status, b.status) {
        (Status::Holds, Status::Refuted) => format!("refutes (a){fs} => (a){gs}"),
        (Status::Refuted, Status::Holds) => format!("refutes (a){gs} => (a){fs}"),
        (Status::Holds, Status::Holds) => "both hold; consistent with either implication".into(),
        (Status::Refuted, Status::Refuted) => "both fail; consistent with either implication".into(),
        _ => "inconclusive: a sweep was truncated or sampled".into(),
    };
    Ok(ImplicationReport {
        f: f.to_vec(),
        f_prime: f_prime.to_vec(),
        variations: (variation_count(f), variation_count(f_prime)),
        holds_f: a.status,
        holds_f_prime: b.status,
        observation,
    })
}

/// Check that the ternary terms `chain` (first `x`, last `z`) link `a` to `c`
/// through `steps[i]` for every `(a,b,c)` with `a σ c`, `a τ b`, `b υ c`.
pub fn validate_chain(
    alg: &FiniteAlgebra,
    chain: &[Term],
    steps: &[&BinRel],
    sigma: &BinRel,
    tau: &BinRel,
    upsilon: &BinRel,
) -> Result<bool> {
    if chain.len() != steps.len() + 1 {
        return Err(Error::BadParams("a chain of h+1 terms needs h steps".into()));
    }
    let n = alg.size();
    for a in 0..n {
        for b in (0..n).filter(|&b| tau.contains(a, b)) {
            for c in (0..n).filter(|&c| upsilon.contains(b, c) && sigma.contains(a, c)) {
                let vals: Vec<usize> = chain.iter().map(|t| alg.eval_term(t, &[a, b, c])).collect::<Result<_>>()?;
                if vals[0] != a || vals[steps.len()] != c {
                    return Ok(false);
                }
                if !vals.windows(2).zip(steps).all(|(w, r)| r.contains(w[0], w[1])) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

// -------------------------------------------------------------- expansions

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionSpec {
    /// Per U-variable of the source: the name and its left-side copies.
    pub groups: Vec<(String, Vec<String>)>,
    /// For each right-side occurrence of a U-variable (left to right), the
    /// index of the copy it was mapped to within its group.
    pub rhs_map: Vec<usize>,
    pub spec: IdentitySpec,
}

fn forbid(e: &Expr) -> Result<()> {
    match e {
        Expr::Star(_) => Err(Error::ForbiddenOperator("^*".into())),
        Expr::Join(..) => Err(Error::ForbiddenOperator("|".into())),
        Expr::Bar(_) => Err(Error::ForbiddenOperator("bar".into())),
        Expr::Var(_) | Expr::Id | Expr::All => Ok(()),
        Expr::Meet(a, b) | Expr::Compose(a, b) | Expr::Alt(a, b, _) | Expr::AltLeft(a, b, _) => {
            forbid(a)?;
            forbid(b)
        }
        Expr::Converse(a) | Expr::Pow(a, _) => forbid(a),
    }
}

/// Replace occurrences of the variables in `group_of` left to right by
/// `pick(var, occurrence number)`; other variables go through `keep`.
fn rename(e: &Expr, counter: &mut Vec<usize>, pick: &mut dyn FnMut(usize, usize) -> usize, keep: &[usize]) -> Expr {
    match e {
        Expr::Var(v) if keep[*v] != usize::MAX => Expr::Var(keep[*v]),
        Expr::Var(v) => {
            let occ = counter[*v];
            counter[*v] += 1;
            Expr::Var(pick(*v, occ))
        }
        Expr::Id => Expr::Id,
        Expr::All => Expr::All,
        Expr::Meet(a, b) => Expr::Meet(
            Box::new(rename(a, counter, pick, keep)),
            Box::new(rename(b, counter, pick, keep)),
        ),
        Expr::Compose(a, b) => Expr::Compose(
            Box::new(rename(a, counter, pick, keep)),
            Box::new(rename(b, counter, pick, keep)),
        ),
        Expr::Converse(a) => Expr::Converse(Box::new(rename(a, counter, pick, keep))),
        _ => unreachable!("unfolded and checked"),
    }
}

/// All expansions of an inclusion over U-variables: the left side with a
/// distinct admissible copy per occurrence, the right side under every map
/// of occurrences into the matching copies.
pub fn enumerate_expansions(spec: &IdentitySpec) -> Result<Vec<ExpansionSpec>> {
    forbid(&spec.lhs)?;
    forbid(&spec.rhs)?;
    if spec.mode != Mode::Inclusion {
        return Err(Error::BadParams("expansions are defined for inclusions".into()));
    }
    let lhs = spec.lhs.unfold();
    let rhs = spec.rhs.unfold();
    let nv = spec.vars.len();
    let is_u: Vec<bool> = spec.vars.iter().map(|d| d.class.is_family()).collect();
    let count = |e: &Expr| {
        let mut occ = Vec::new();
        e.occurrences(&mut occ);
        occ
    };
    let lhs_occ = count(&lhs);
    let rhs_occ = count(&rhs);
    let per_var = |occ: &[usize], v: usize| occ.iter().filter(|&&o| o == v).count();

    // new variable list: kept variables first, then copies per group
    let mut vars: Vec<VarDecl> = Vec::new();
    let mut keep = vec![usize::MAX; nv];
    for (i, d) in spec.vars.iter().enumerate() {
        if !is_u[i] {
            keep[i] = vars.len();
            vars.push(d.clone());
        }
    }
    let mut groups = Vec::new();
    let mut base = vec![0usize; nv];
    for (i, d) in spec.vars.iter().enumerate() {
        if !is_u[i] {
            continue;
        }
        let j = per_var(&lhs_occ, i);
        if j == 0 && per_var(&rhs_occ, i) > 0 {
            return Err(Error::BadParams(format!("`{}` occurs on the right only; it has no expansion", d.name)));
        }
        base[i] = vars.len();
        let names: Vec<String> = (1..=j).map(|c| format!("{}_{c}", d.name)).collect();
        for name in &names {
            vars.push(VarDecl::new(name, RelClass::ReflexiveAdmissible));
        }
        groups.push((d.name.clone(), names));
    }
    let mut counter = vec![0; nv];
    let new_lhs = rename(&lhs, &mut counter, &mut |v, occ| base[v] + occ, &keep);

    let rhs_u: Vec<usize> = rhs_occ.iter().copied().filter(|&v| is_u[v]).collect();
    let radices: Vec<usize> = rhs_u.iter().map(|&v| per_var(&lhs_occ, v)).collect();
    let total: usize = radices.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut choice = vec![0usize; radices.len()];
    for _ in 0..total {
        let mut counter = vec![0; nv];
        let mut k = 0;
        let new_rhs = rename(
            &rhs,
            &mut counter,
            &mut |v, _| {
                let r = base[v] + choice[k];
                k += 1;
                r
            },
            &keep,
        );
        let name = spec.name.as_ref().map(|n| format!("{n} expansion {}", fmt_map(&choice)));
        out.push(ExpansionSpec {
            groups: groups.clone(),
            rhs_map: choice.clone(),
            spec: IdentitySpec {
                name,
                vars: vars.clone(),
                lhs: new_lhs.clone(),
                rhs: new_rhs,
                mode: Mode::Inclusion,
            },
        });
        // lexicographic successor, last occurrence fastest
        for p in (0..choice.len()).rev() {
            choice[p] += 1;
            if choice[p] < radices[p] {
                break;
            }
            choice[p] = 0;
        }
    }
    Ok(out)
}

fn fmt_map(choice: &[usize]) -> String {
    let parts: Vec<String> = choice.iter().map(|c| (c + 1).to_string()).collect();
    format!("[{}]", parts.join(","))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionReport {
    pub expansions: Vec<(ExpansionSpec, Verdict)>,
    /// Index of the first expansion that holds, if any.
    pub witness: Option<usize>,
    /// Holds iff some expansion holds; unknown when no expansion holds but
    /// some sweep was not exhaustive.
    pub any_status: Status,
    /// Verdict of the source spec under its own classes.
    pub source: Verdict,
    pub agree: bool,
}

/// Check every expansion over reflexive admissible relations and compare with
/// the U-quantified verdict of the source.
pub fn check_any_expansion(alg: &FiniteAlgebra, spec: &IdentitySpec, cfg: &CheckConfig) -> Result<ExpansionReport> {
    let exps = enumerate_expansions(spec)?;
    let mut results = Vec::with_capacity(exps.len());
    let mut witness = None;
    let mut inconclusive = false;
    for (i, e) in exps.into_iter().enumerate() {
        let v = check_for_all(alg, &e.spec, cfg)?;
        if v.holds() && witness.is_none() {
            witness = Some(i);
        }
        inconclusive |= v.status == Status::NoCounterexample;
        results.push((e, v));
    }
    let any_status = if witness.is_some() {
        Status::Holds
    } else if inconclusive {
        Status::NoCounterexample
    } else {
        Status::Refuted
    };
    let source = check_for_all(alg, spec, cfg)?;
    let agree = match (any_status, source.status) {
        (Status::NoCounterexample, _) | (_, Status::NoCounterexample) => false,
        (a, b) => a == b,
    };
    Ok(ExpansionReport {
        expansions: results,
        witness,
        any_status,
        source,
        agree,
    })
}

#[cfg(test)]
mod tests;
