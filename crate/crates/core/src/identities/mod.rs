//! Relational inclusions and identities with class-annotated variables,
//! evaluated on a finite algebra and quantified over enumerated relations.

mod builtin;
mod expr;

pub use builtin::{builtin, BuiltinParams, BUILTIN_NAMES};
pub use expr::Expr;

use crate::algebra::Operations;
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::relations::{close_reflexive, enumerate, BinRel, EnumConfig, EnumMethod, RelKind, Side};
use crate::uadmissible::UAdmRel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelClass {
    Congruence,
    Tolerance,
    ReflexiveAdmissible,
    UAdmissible,
    U2Admissible,
    UnionOfTwoCongruences,
}

impl RelClass {
    pub const ALL: [RelClass; 6] = [
        RelClass::Congruence,
        RelClass::Tolerance,
        RelClass::ReflexiveAdmissible,
        RelClass::UAdmissible,
        RelClass::U2Admissible,
        RelClass::UnionOfTwoCongruences,
    ];

    /// Prefix used in the expression grammar.
    pub fn prefix(self) -> &'static str {
        match self {
            RelClass::Congruence => "cong",
            RelClass::Tolerance => "tol",
            RelClass::ReflexiveAdmissible => "adm",
            RelClass::UAdmissible => "uadm",
            RelClass::U2Admissible => "u2",
            RelClass::UnionOfTwoCongruences => "ucong2",
        }
    }

    pub fn from_prefix(s: &str) -> Option<RelClass> {
        RelClass::ALL.into_iter().find(|c| c.prefix() == s)
    }

    /// Values are families of reflexive admissible relations.
    pub fn is_family(self) -> bool {
        matches!(
            self,
            RelClass::UAdmissible | RelClass::U2Admissible | RelClass::UnionOfTwoCongruences
        )
    }

    pub fn describe(self) -> &'static str {
        match self {
            RelClass::Congruence => "congruence",
            RelClass::Tolerance => "tolerance",
            RelClass::ReflexiveAdmissible => "reflexive admissible relation",
            RelClass::UAdmissible => "U-admissible relation",
            RelClass::U2Admissible => "U2-admissible relation",
            RelClass::UnionOfTwoCongruences => "union of two congruences",
        }
    }

    fn plain_kind(self) -> Option<RelKind> {
        match self {
            RelClass::Congruence => Some(RelKind::Congruence),
            RelClass::Tolerance => Some(RelKind::Tolerance),
            RelClass::ReflexiveAdmissible => Some(RelKind::ReflexiveAdmissible),
            _ => None,
        }
    }
}

impl fmt::Display for RelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub class: RelClass,
    /// A tolerance that may equivalently range over congruences.
    pub theta: bool,
}

impl VarDecl {
    pub fn new(name: &str, class: RelClass) -> VarDecl {
        VarDecl {
            name: name.into(),
            class,
            theta: false,
        }
    }

    /// Tolerance variable, equivalently a congruence.
    pub fn theta(name: &str) -> VarDecl {
        VarDecl {
            name: name.into(),
            class: RelClass::Tolerance,
            theta: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Inclusion,
    Equality,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentitySpec {
    pub name: Option<String>,
    pub vars: Vec<VarDecl>,
    pub lhs: Expr,
    pub rhs: Expr,
    pub mode: Mode,
}

impl IdentitySpec {
    pub fn parse(text: &str) -> Result<IdentitySpec> {
        expr::parse_spec(text)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|d| d.name == name)
    }

    /// Same spec with one variable's class replaced.
    pub fn with_class(&self, var: &str, class: RelClass) -> Result<IdentitySpec> {
        let i = self.var_index(var).ok_or_else(|| Error::UnboundVariable(var.into()))?;
        let mut s = self.clone();
        s.vars[i].class = class;
        s.vars[i].theta = false;
        Ok(s)
    }

    /// Display label: the builtin name, or the literal text.
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.to_string())
    }

    pub fn lhs_text(&self) -> String {
        expr::ExprDisplay {
            expr: &self.lhs,
            vars: &self.vars,
        }
        .to_string()
    }

    pub fn rhs_text(&self) -> String {
        expr::ExprDisplay {
            expr: &self.rhs,
            vars: &self.vars,
        }
        .to_string()
    }
}

impl fmt::Display for IdentitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.mode {
            Mode::Inclusion => "<=",
            Mode::Equality => "==",
        };
        write!(f, "{} {rel} {}", self.lhs_text(), self.rhs_text())
    }
}

impl std::str::FromStr for IdentitySpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        IdentitySpec::parse(s)
    }
}

// ------------------------------------------------------------------ values

/// The value of a variable: a relation, or a family for U-classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelValue {
    Rel(BinRel),
    Family(UAdmRel),
}

impl RelValue {
    pub fn union_view(&self) -> &BinRel {
        match self {
            RelValue::Rel(r) => r,
            RelValue::Family(f) => f.union_view(),
        }
    }

    fn into_family(self) -> UAdmRel {
        match self {
            RelValue::Rel(r) => UAdmRel::single(r),
            RelValue::Family(f) => f,
        }
    }
}

fn violation(var: &str, class: RelClass, reason: String) -> Error {
    Error::ClassViolation {
        var: var.into(),
        class: class.describe().into(),
        reason,
    }
}

/// Whether `value` is a legitimate member of `class` on `alg`.
pub fn check_class<A: Operations + ?Sized>(alg: &A, var: &str, class: RelClass, value: &RelValue) -> Result<()> {
    if value.union_view().universe_size() != alg.size() {
        return Err(Error::SizeMismatch {
            left: alg.size(),
            right: value.union_view().universe_size(),
        });
    }
    match (class.plain_kind(), value) {
        (Some(kind), RelValue::Rel(r)) => {
            if kind.admits(alg, r) {
                Ok(())
            } else {
                Err(violation(var, class, format!("{r}")))
            }
        }
        (Some(_), RelValue::Family(_)) => Err(violation(var, class, "expected a relation, got a family".into())),
        (None, RelValue::Rel(_)) => Err(violation(var, class, "expected a family of components".into())),
        (None, RelValue::Family(f)) => {
            let comps = f.components();
            let component_kind = if class == RelClass::UnionOfTwoCongruences {
                RelKind::Congruence
            } else {
                RelKind::ReflexiveAdmissible
            };
            if comps.is_empty() {
                return Err(violation(var, class, "empty family".into()));
            }
            if class != RelClass::UAdmissible && comps.len() > 2 {
                return Err(violation(var, class, format!("{} components", comps.len())));
            }
            for c in comps {
                if !component_kind.admits(alg, c) {
                    return Err(violation(var, class, format!("component {c} is not a {:?}", component_kind)));
                }
            }
            Ok(())
        }
    }
}

// -------------------------------------------------------------- evaluation

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub lhs: BinRel,
    pub rhs: BinRel,
    pub satisfied: bool,
}

fn compare(mode: Mode, lhs: &BinRel, rhs: &BinRel) -> bool {
    match mode {
        Mode::Inclusion => lhs.is_subset(rhs),
        Mode::Equality => lhs == rhs,
    }
}

/// Evaluate both sides under an assignment, dispatching to family operations
/// whenever a family is involved. Values are validated against their classes.
pub fn evaluate<A: Operations + ?Sized>(alg: &A, spec: &IdentitySpec, assignment: &[RelValue]) -> Result<Evaluation> {
    if assignment.len() != spec.vars.len() {
        return Err(Error::BadParams(format!(
            "assignment has {} values for {} variables",
            assignment.len(),
            spec.vars.len()
        )));
    }
    for (d, v) in spec.vars.iter().zip(assignment) {
        check_class(alg, &d.name, d.class, v)?;
    }
    let lhs = eval_family(alg, &spec.lhs, assignment)?.union_view().clone();
    let rhs = eval_family(alg, &spec.rhs, assignment)?.union_view().clone();
    let satisfied = compare(spec.mode, &lhs, &rhs);
    Ok(Evaluation { lhs, rhs, satisfied })
}

fn eval_family<A: Operations + ?Sized>(alg: &A, e: &Expr, env: &[RelValue]) -> Result<RelValue> {
    let n = alg.size();
    Ok(match e {
        Expr::Var(v) => env[*v].clone(),
        Expr::Id => RelValue::Rel(BinRel::identity(n)),
        Expr::All => RelValue::Rel(BinRel::full(n)),
        Expr::Meet(a, b) => match (eval_family(alg, a, env)?, eval_family(alg, b, env)?) {
            (RelValue::Rel(x), RelValue::Rel(y)) => RelValue::Rel(x.intersect(&y)?),
            (RelValue::Rel(t), RelValue::Family(s)) | (RelValue::Family(s), RelValue::Rel(t)) => {
                RelValue::Family(s.intersect_rel(alg, &t)?)
            }
            (RelValue::Family(s), RelValue::Family(t)) => RelValue::Family(s.intersect(&t)?),
        },
        Expr::Join(a, b) => {
            let x = eval_family(alg, a, env)?.into_family();
            let y = eval_family(alg, b, env)?.into_family();
            RelValue::Family(x.union(&y)?)
        }
        Expr::Compose(a, b) => compose_values(eval_family(alg, a, env)?, eval_family(alg, b, env)?)?,
        Expr::Alt(s, t, m) | Expr::AltLeft(s, t, m) => {
            let s = eval_family(alg, s, env)?;
            let t = eval_family(alg, t, env)?;
            let left = matches!(e, Expr::AltLeft(..));
            let factors = expr::alt_factors(&s, &t, *m, left);
            fold_compose(factors)?
        }
        Expr::Pow(a, h) => {
            let x = eval_family(alg, a, env)?;
            fold_compose(vec![x; *h])?
        }
        Expr::Converse(a) => match eval_family(alg, a, env)? {
            RelValue::Rel(r) => RelValue::Rel(r.converse()),
            RelValue::Family(f) => RelValue::Family(f.converse()),
        },
        Expr::Star(a) => match eval_family(alg, a, env)? {
            RelValue::Rel(r) => RelValue::Rel(r.transitive_closure()),
            RelValue::Family(f) => RelValue::Family(f.transitive_closure()),
        },
        Expr::Bar(a) => RelValue::Family(eval_family(alg, a, env)?.into_family().bar(alg)?),
    })
}

fn compose_values(x: RelValue, y: RelValue) -> Result<RelValue> {
    Ok(match (x, y) {
        (RelValue::Rel(a), RelValue::Rel(b)) => RelValue::Rel(a.compose(&b)?),
        (a, b) => RelValue::Family(a.into_family().compose(&b.into_family())?),
    })
}

fn fold_compose(factors: Vec<RelValue>) -> Result<RelValue> {
    let mut it = factors.into_iter();
    let first = it.next().expect("m, h ≥ 1");
    it.try_fold(first, compose_values)
}

/// Union-view evaluation. Every operator of the calculus is determined by
/// the unions of its arguments, so this agrees with [`evaluate`] and is what
/// the quantifier sweeps run.
fn eval_union<A: Operations + ?Sized>(alg: &A, e: &Expr, env: &[&BinRel]) -> BinRel {
    let n = alg.size();
    match e {
        Expr::Var(v) => env[*v].clone(),
        Expr::Id => BinRel::identity(n),
        Expr::All => BinRel::full(n),
        Expr::Meet(a, b) => eval_union(alg, a, env).intersect_unchecked(&eval_union(alg, b, env)),
        Expr::Join(a, b) => eval_union(alg, a, env).union_unchecked(&eval_union(alg, b, env)),
        Expr::Compose(a, b) => eval_union(alg, a, env).compose_unchecked(&eval_union(alg, b, env)),
        Expr::Alt(s, t, m) | Expr::AltLeft(s, t, m) => {
            let side = if matches!(e, Expr::AltLeft(..)) { Side::Left } else { Side::Right };
            let s = eval_union(alg, s, env);
            let t = eval_union(alg, t, env);
            BinRel::compose_alt(&s, &t, *m, side).expect("same universe")
        }
        Expr::Pow(a, h) => eval_union(alg, a, env).power(*h).expect("h ≥ 1"),
        Expr::Converse(a) => eval_union(alg, a, env).converse(),
        Expr::Star(a) => eval_union(alg, a, env).transitive_closure(),
        // all values are reflexive, so the closure can start from the union
        Expr::Bar(a) => close_reflexive(alg, eval_union(alg, a, env)),
    }
}

/// Union-view evaluation of a spec under plain relations (no class checks).
pub fn evaluate_unions<A: Operations + ?Sized>(alg: &A, spec: &IdentitySpec, unions: &[&BinRel]) -> Evaluation {
    let lhs = eval_union(alg, &spec.lhs, unions);
    let rhs = eval_union(alg, &spec.rhs, unions);
    let satisfied = compare(spec.mode, &lhs, &rhs);
    Evaluation { lhs, rhs, satisfied }
}

// -------------------------------------------------------------- candidates

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Exact enumeration (brute-force filter on small universes).
    Exhaustive,
    /// Join-closure enumeration regardless of size.
    Generated,
    /// Uniform random assignments.
    Sampled { samples: u64, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub strategy: Strategy,
    pub exhaustive_threshold: usize,
    /// Cap per relation enumeration.
    pub enum_cap: usize,
    /// Largest family size for U-admissible candidates; 0 closes under unions.
    pub u_components: usize,
    /// Cap on distinct U-admissible candidates.
    pub u_cap: usize,
    /// Cap on the number of assignments scanned.
    pub max_assignments: u64,
    /// Quantify Θ-type tolerance variables over congruences.
    pub theta_as_congruence: bool,
    pub class_overrides: Vec<(String, RelClass)>,
    pub exec: Exec,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            strategy: Strategy::Exhaustive,
            exhaustive_threshold: 5,
            enum_cap: 200_000,
            u_components: 3,
            u_cap: 100_000,
            max_assignments: 100_000_000,
            theta_as_congruence: true,
            class_overrides: Vec::new(),
            exec: Exec::Parallel,
        }
    }
}

/// Candidate values per class, shared across variables of a check.
pub struct CandidatePool<'a, A: Operations + ?Sized> {
    alg: &'a A,
    cfg: &'a CheckConfig,
    plain: HashMap<RelKind, (Vec<BinRel>, bool)>,
    families: HashMap<RelClass, (Vec<UAdmRel>, Vec<String>)>,
    /// Classes whose quantification domain is bounded by `u_components`
    /// while larger unions exist.
    bounded: HashMap<RelClass, String>,
}

impl<'a, A: Operations + ?Sized> CandidatePool<'a, A> {
    pub fn new(alg: &'a A, cfg: &'a CheckConfig) -> Self {
        CandidatePool {
            alg,
            cfg,
            plain: HashMap::new(),
            families: HashMap::new(),
            bounded: HashMap::new(),
        }
    }

    fn enum_config(&self) -> EnumConfig {
        EnumConfig {
            method: match self.cfg.strategy {
                Strategy::Generated => EnumMethod::Generated,
                _ => EnumMethod::Auto,
            },
            exhaustive_threshold: self.cfg.exhaustive_threshold,
            cap: self.cfg.enum_cap,
            exec: self.cfg.exec,
        }
    }

    /// Sorted relations of a kind, and whether the enumeration was complete.
    pub fn plain(&mut self, kind: RelKind) -> (Vec<BinRel>, bool) {
        if let Some(v) = self.plain.get(&kind) {
            return v.clone();
        }
        // narrower kinds are filtered out of a cached wider enumeration
        let derived = [RelKind::ReflexiveAdmissible, RelKind::Tolerance]
            .into_iter()
            .filter(|&w| w != kind && kind != RelKind::ReflexiveAdmissible)
            .find_map(|w| self.plain.get(&w).filter(|(_, complete)| *complete).cloned());
        let value = match derived {
            Some((rels, complete)) => {
                let rels = rels
                    .into_iter()
                    .filter(|r| match kind {
                        RelKind::Congruence => r.is_symmetric() && r.is_transitive(),
                        RelKind::Tolerance => r.is_symmetric(),
                        RelKind::ReflexiveAdmissible => true,
                    })
                    .collect();
                (rels, complete)
            }
            None => {
                let e = enumerate(self.alg, kind, &self.enum_config());
                (e.relations, e.complete)
            }
        };
        self.plain.insert(kind, value.clone());
        value
    }

    /// Distinct-union families of a U-class, sorted by union, each with a
    /// fewest-components witness; plus truncation notes.
    pub fn families(&mut self, class: RelClass) -> (Vec<UAdmRel>, Vec<String>) {
        if let Some(v) = self.families.get(&class) {
            return v.clone();
        }
        let mut notes = Vec::new();
        let (base_kind, max_components) = match class {
            RelClass::UnionOfTwoCongruences => (RelKind::Congruence, 2),
            RelClass::U2Admissible => (RelKind::ReflexiveAdmissible, 2),
            _ => (RelKind::ReflexiveAdmissible, self.cfg.u_components),
        };
        if matches!(class, RelClass::UAdmissible | RelClass::U2Admissible) {
            // tolerance/congruence lists can be filtered from this one
            let _ = self.plain(RelKind::ReflexiveAdmissible);
        }
        let (base, complete) = self.plain(base_kind);
        if !complete {
            notes.push(format!("{:?} enumeration capped at {}", base_kind, self.cfg.enum_cap));
        }
        let mut seen: HashSet<BinRel> = HashSet::new();
        let mut out: Vec<(BinRel, Vec<usize>)> = Vec::new();
        let mut layer: Vec<usize> = Vec::new();
        for (i, r) in base.iter().enumerate() {
            if seen.insert(r.clone()) {
                layer.push(out.len());
                out.push((r.clone(), vec![i]));
            }
        }
        let mut size = 1;
        let mut capped = false;
        while !layer.is_empty() {
            let at_limit = max_components != 0 && size >= max_components;
            let mut next = Vec::new();
            'grow: for &li in &layer {
                for (j, r) in base.iter().enumerate() {
                    let (u, comps) = &out[li];
                    if comps.contains(&j) || r.is_subset(u) {
                        continue;
                    }
                    let joined = u.union_unchecked(r);
                    if seen.contains(&joined) {
                        continue;
                    }
                    if at_limit {
                        // a union beyond the component bound exists; the
                        // bound is part of the domain, not a truncation
                        if class == RelClass::UAdmissible {
                            self.bounded.insert(
                                class,
                                format!("families of at most {max_components} components; larger unions exist"),
                            );
                        }
                        break 'grow;
                    }
                    if out.len() >= self.cfg.u_cap {
                        capped = true;
                        break 'grow;
                    }
                    seen.insert(joined.clone());
                    let mut c = comps.clone();
                    c.push(j);
                    next.push(out.len());
                    out.push((joined, c));
                }
            }
            if at_limit || capped {
                break;
            }
            layer = next;
            size += 1;
        }
        if capped {
            notes.push(format!("{} candidates capped at {}", class.describe(), self.cfg.u_cap));
        }
        let mut fams: Vec<UAdmRel> = out
            .into_iter()
            .map(|(_, comps)| UAdmRel::from_components(comps.into_iter().map(|i| base[i].clone()).collect()))
            .collect();
        fams.sort_by(|a, b| a.union_view().cmp(b.union_view()));
        let value = (fams, notes);
        self.families.insert(class, value.clone());
        value
    }

    /// Candidates for one variable, with notes on anything that makes the
    /// list incomplete.
    pub fn candidates(&mut self, class: RelClass) -> (Vec<RelValue>, Vec<String>) {
        match class.plain_kind() {
            Some(kind) => {
                let (rels, complete) = self.plain(kind);
                let notes = if complete {
                    vec![]
                } else {
                    vec![format!("{} enumeration capped at {}", class.describe(), self.cfg.enum_cap)]
                };
                (rels.into_iter().map(RelValue::Rel).collect(), notes)
            }
            None => {
                let (fams, notes) = self.families(class);
                (fams.into_iter().map(RelValue::Family).collect(), notes)
            }
        }
    }
}

// ----------------------------------------------------------------- verdict

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Refuted,
    /// No counterexample found, but the sweep was truncated or sampled.
    NoCounterexample,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coverage {
    Exhaustive,
    Truncated { reasons: Vec<String> },
    Sampled { samples: u64, seed: u64 },
}

pub type PairList = Vec<(usize, usize)>;

/// One variable's value in a counterexample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignedValue {
    pub var: String,
    pub class: RelClass,
    pub relation: PairList,
    /// Witness family for U-classes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<PairList>>,
}

impl AssignedValue {
    pub fn from_value(var: &str, class: RelClass, value: &RelValue) -> AssignedValue {
        AssignedValue {
            var: var.into(),
            class,
            relation: value.union_view().pair_list(),
            components: match value {
                RelValue::Rel(_) => None,
                RelValue::Family(f) => Some(f.components().iter().map(BinRel::pair_list).collect()),
            },
        }
    }

    pub fn to_value(&self, n: usize) -> Result<RelValue> {
        let rel = BinRel::from_pairs(n, self.relation.iter().copied())?;
        match &self.components {
            None => Ok(RelValue::Rel(rel)),
            Some(comps) => {
                let comps = comps
                    .iter()
                    .map(|c| BinRel::from_pairs(n, c.iter().copied()))
                    .collect::<Result<Vec<_>>>()?;
                if comps.is_empty() {
                    return Err(violation(&self.var, self.class, "empty family".into()));
                }
                let fam = UAdmRel::from_components(comps);
                if *fam.union_view() != rel {
                    return Err(violation(&self.var, self.class, "union does not match components".into()));
                }
                Ok(RelValue::Family(fam))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub assignment: Vec<AssignedValue>,
    pub lhs: PairList,
    pub rhs: PairList,
    /// Pairs of the left side missing on the right (and, for equalities,
    /// pairs of the right side missing on the left).
    pub witnesses: PairList,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantifiedVar {
    pub var: String,
    pub declared: RelClass,
    pub class: RelClass,
    pub candidates: usize,
    /// Description of a bounded domain, when the class has members beyond it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub counterexample: Option<Counterexample>,
    pub coverage: Coverage,
    pub assignments_checked: u64,
    pub quantified: Vec<QuantifiedVar>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn refuted(&self) -> bool {
        self.status == Status::Refuted
    }
}

/// Effective quantification class of each variable under `cfg`.
pub fn effective_classes(spec: &IdentitySpec, cfg: &CheckConfig) -> Result<Vec<RelClass>> {
    for (name, _) in &cfg.class_overrides {
        if spec.var_index(name).is_none() {
            return Err(Error::UnboundVariable(name.clone()));
        }
    }
    Ok(spec
        .vars
        .iter()
        .map(|d| {
            if let Some((_, c)) = cfg.class_overrides.iter().find(|(n, _)| *n == d.name) {
                *c
            } else if d.theta && d.class == RelClass::Tolerance && cfg.theta_as_congruence {
                RelClass::Congruence
            } else {
                d.class
            }
        })
        .collect())
}

fn decode(mut idx: u64, radices: &[u64], out: &mut [usize]) {
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = (idx % r) as usize;
        idx /= r;
    }
}

/// Quantify every variable over its class and look for the first
/// counterexample in scan order (first variable most significant).
pub fn check_for_all<A: Operations + ?Sized>(alg: &A, spec: &IdentitySpec, cfg: &CheckConfig) -> Result<Verdict> {
    let mut pool = CandidatePool::new(alg, cfg);
    check_with_pool(alg, spec, cfg, &mut pool)
}

pub fn check_with_pool<A: Operations + ?Sized>(
    alg: &A,
    spec: &IdentitySpec,
    cfg: &CheckConfig,
    pool: &mut CandidatePool<'_, A>,
) -> Result<Verdict> {
    expr::validate_spec(spec)?;
    let classes = effective_classes(spec, cfg)?;
    let mut reasons = Vec::new();
    let mut lists: Vec<Vec<RelValue>> = Vec::new();
    let mut quantified = Vec::new();
    for (d, &class) in spec.vars.iter().zip(&classes) {
        let (cands, notes) = pool.candidates(class);
        for n in notes {
            if !reasons.contains(&n) {
                reasons.push(n);
            }
        }
        quantified.push(QuantifiedVar {
            var: d.name.clone(),
            declared: d.class,
            class,
            candidates: cands.len(),
            domain: pool.bounded.get(&class).cloned(),
        });
        lists.push(cands);
    }
    let unions: Vec<Vec<&BinRel>> = lists.iter().map(|l| l.iter().map(RelValue::union_view).collect()).collect();
    let radices: Vec<u64> = lists.iter().map(|l| l.len() as u64).collect();
    let total: u128 = radices.iter().map(|&r| r as u128).product();

    let violates = |idx: &[usize]| {
        let env: Vec<&BinRel> = idx.iter().zip(&unions).map(|(&i, u)| u[i]).collect();
        !evaluate_unions(alg, spec, &env).satisfied
    };

    let (found, checked, coverage) = match cfg.strategy {
        Strategy::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draws: Vec<Vec<usize>> = if total == 0 {
                vec![]
            } else {
                (0..samples)
                    .map(|_| radices.iter().map(|&r| rng.gen_range(0..r as usize)).collect())
                    .collect()
            };
            let hit = exec::find_first(cfg.exec, draws.len() as u64, |i| violates(&draws[i as usize]));
            let checked = hit.map_or(draws.len() as u64, |i| i + 1);
            (hit.map(|i| draws[i as usize].clone()), checked, Coverage::Sampled { samples, seed })
        }
        _ => {
            let limit = if total > cfg.max_assignments as u128 {
                reasons.push(format!(
                    "scanned {} of {total} assignments",
                    cfg.max_assignments
                ));
                cfg.max_assignments
            } else {
                total as u64
            };
            let hit = exec::find_first(cfg.exec, limit, |i| {
                let mut idx = vec![0; radices.len()];
                decode(i, &radices, &mut idx);
                violates(&idx)
            });
            let checked = hit.map_or(limit, |i| i + 1);
            let hit = hit.map(|i| {
                let mut idx = vec![0; radices.len()];
                decode(i, &radices, &mut idx);
                idx
            });
            let coverage = if reasons.is_empty() {
                Coverage::Exhaustive
            } else {
                Coverage::Truncated { reasons }
            };
            (hit, checked, coverage)
        }
    };

    let counterexample = match found {
        None => None,
        Some(idx) => {
            let values: Vec<RelValue> = idx.iter().zip(&lists).map(|(&i, l)| l[i].clone()).collect();
            // replay through the family evaluator
            let spec_eff = IdentitySpec {
                vars: spec
                    .vars
                    .iter()
                    .zip(&classes)
                    .map(|(d, &c)| VarDecl {
                        class: c,
                        ..d.clone()
                    })
                    .collect(),
                ..spec.clone()
            };
            let ev = evaluate(alg, &spec_eff, &values)?;
            debug_assert!(!ev.satisfied);
            Some(Counterexample {
                assignment: spec
                    .vars
                    .iter()
                    .zip(&classes)
                    .zip(&values)
                    .map(|((d, &c), v)| AssignedValue::from_value(&d.name, c, v))
                    .collect(),
                witnesses: witness_pairs(spec.mode, &ev.lhs, &ev.rhs),
                lhs: ev.lhs.pair_list(),
                rhs: ev.rhs.pair_list(),
            })
        }
    };
    let status = if counterexample.is_some() {
        Status::Refuted
    } else if coverage == Coverage::Exhaustive {
        Status::Holds
    } else {
        Status::NoCounterexample
    };
    Ok(Verdict {
        status,
        counterexample,
        coverage,
        assignments_checked: checked,
        quantified,
    })
}

fn witness_pairs(mode: Mode, lhs: &BinRel, rhs: &BinRel) -> PairList {
    let mut w: Vec<(usize, usize)> = lhs.pairs().filter(|&(a, b)| !rhs.contains(a, b)).collect();
    if mode == Mode::Equality {
        w.extend(rhs.pairs().filter(|&(a, b)| !lhs.contains(a, b)));
        w.sort();
    }
    w
}

/// Re-evaluate a counterexample with class validation; true iff it still
/// violates the spec and reproduces the recorded sides.
pub fn replay<A: Operations + ?Sized>(alg: &A, spec: &IdentitySpec, cex: &Counterexample) -> Result<bool> {
    if cex.assignment.len() != spec.vars.len() {
        return Ok(false);
    }
    let mut values = Vec::new();
    let mut eff = spec.clone();
    for (i, (d, a)) in spec.vars.iter().zip(&cex.assignment).enumerate() {
        if d.name != a.var {
            return Ok(false);
        }
        // a class may only be narrowed, never widened
        if !narrows(a.class, d.class) {
            return Err(violation(&d.name, d.class, format!("recorded class {} is wider", a.class)));
        }
        eff.vars[i].class = a.class;
        values.push(a.to_value(alg.size())?);
    }
    let ev = evaluate(alg, &eff, &values)?;
    Ok(!ev.satisfied && ev.lhs.pair_list() == cex.lhs && ev.rhs.pair_list() == cex.rhs)
}

/// Whether every member of `narrow` is a member of `wide`.
pub fn narrows(narrow: RelClass, wide: RelClass) -> bool {
    use RelClass::*;
    narrow == wide
        || matches!(
            (narrow, wide),
            (Congruence, _)
                | (Tolerance | ReflexiveAdmissible, ReflexiveAdmissible | U2Admissible | UAdmissible)
                | (UnionOfTwoCongruences, U2Admissible | UAdmissible)
                | (U2Admissible, UAdmissible)
        )
}

/// Group per-variable values by name, for reports.
pub fn assignment_map(cex: &Counterexample) -> BTreeMap<String, PairList> {
    cex.assignment.iter().map(|a| (a.var.clone(), a.relation.clone())).collect()
}
