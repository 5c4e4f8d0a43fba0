//! The machine-readable run report and the human text derived from it.

use relkit::identities::{Coverage, Counterexample, PairList, Status, Verdict};
use relkit::maltsev::SystemReport;
use relkit::FiniteAlgebra;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    /// Arguments after the program name, minus flags that cannot change results.
    pub command: Vec<String>,
    pub algebras: Vec<AlgebraRef>,
    pub outcomes: Vec<Outcome>,
    pub exit_code: i32,
    /// Only present with `--timing`, so reports stay byte-identical by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraRef {
    /// Bundled name or file path.
    pub source: String,
    pub size: usize,
    pub fingerprint: String,
    /// Full tables for algebras that exist only inside the report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inline: Option<FiniteAlgebra>,
}

impl AlgebraRef {
    pub fn new(source: &str, alg: &FiniteAlgebra) -> AlgebraRef {
        AlgebraRef {
            source: source.to_string(),
            size: alg.size(),
            fingerprint: alg.fingerprint(),
            inline: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloneElement {
    pub table: String,
    pub term: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceEntry {
    pub blocks: Vec<Vec<usize>>,
    pub pairs: usize,
    /// Height in the inclusion order (longest chain down to the bottom).
    pub level: usize,
    /// Indices of the congruences this one covers.
    pub covers: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionEntry {
    /// Copy chosen for each right-side occurrence, 1-based.
    pub map: Vec<usize>,
    pub spec: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionCheck {
    pub algebra: usize,
    pub any_status: Status,
    pub witness: Option<usize>,
    pub source_verdict: Verdict,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Check {
        algebra: usize,
        label: String,
        /// The spec with effective declared classes; counterexamples replay against it.
        spec: String,
        verdict: Verdict,
    },
    Terms {
        algebra: usize,
        request: String,
        status: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        system: Option<SystemReport>,
    },
    FreeAlgebra {
        algebra: usize,
        arity: usize,
        cap: usize,
        complete: bool,
        count: usize,
        elements: Vec<CloneElement>,
    },
    Congruences {
        algebra: usize,
        complete: bool,
        congruences: Vec<CongruenceEntry>,
    },
    Expansions {
        source: String,
        expansions: Vec<ExpansionEntry>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        check: Option<ExpansionCheck>,
    },
    Observation {
        algebra: usize,
        text: String,
    },
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<RunReport> {
        serde_json::from_str(text)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            render_outcome(&mut out, self, o);
        }
        if let Some(ms) = self.wall_time_ms {
            let _ = writeln!(out, "wall time: {ms} ms");
        }
        out
    }
}

pub fn fmt_pairs(pairs: &PairList) -> String {
    let inner: Vec<String> = pairs.iter().map(|(a, b)| format!("({a},{b})")).collect();
    format!("{{{}}}", inner.join(", "))
}

fn fmt_blocks(blocks: &[Vec<usize>]) -> String {
    let inner: Vec<String> = blocks
        .iter()
        .map(|b| b.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
        .collect();
    format!("{{{}}}", inner.join(" | "))
}

fn status_text(s: Status) -> &'static str {
    match s {
        Status::Holds => "holds",
        Status::Refuted => "refuted",
        Status::NoCounterexample => "no counterexample found (not exhaustive)",
    }
}

fn coverage_text(c: &Coverage) -> String {
    match c {
        Coverage::Exhaustive => "exhaustive".into(),
        Coverage::Truncated { reasons } => format!("truncated ({})", reasons.join("; ")),
        Coverage::Sampled { samples, seed } => format!("sampled ({samples} samples, seed {seed})"),
    }
}

fn algebra_line(out: &mut String, r: &RunReport, i: usize) {
    if let Some(a) = r.algebras.get(i) {
        let _ = writeln!(out, "algebra   {} (size {}, {})", a.source, a.size, &a.fingerprint[..12]);
    }
}

pub fn render_verdict(out: &mut String, v: &Verdict) {
    let _ = writeln!(out, "status    {}", status_text(v.status));
    let _ = writeln!(
        out,
        "coverage  {}, {} assignments checked",
        coverage_text(&v.coverage),
        v.assignments_checked
    );
    for q in &v.quantified {
        let class = if q.class == q.declared {
            q.class.to_string()
        } else {
            format!("{} (declared {})", q.class, q.declared)
        };
        let _ = write!(out, "  {:<9} {class}, {} candidates", q.var, q.candidates);
        if let Some(d) = &q.domain {
            let _ = write!(out, "; {d}");
        }
        out.push('\n');
    }
    if let Some(c) = &v.counterexample {
        render_counterexample(out, c);
    }
}

fn render_counterexample(out: &mut String, c: &Counterexample) {
    out.push_str("counterexample\n");
    for a in &c.assignment {
        let _ = writeln!(out, "  {} [{}] = {}", a.var, a.class.prefix(), fmt_pairs(&a.relation));
        for (i, comp) in a.components.iter().flatten().enumerate() {
            let _ = writeln!(out, "    component {} = {}", i + 1, fmt_pairs(comp));
        }
    }
    let _ = writeln!(out, "  lhs = {}", fmt_pairs(&c.lhs));
    let _ = writeln!(out, "  rhs = {}", fmt_pairs(&c.rhs));
    let _ = writeln!(out, "  separating pairs = {}", fmt_pairs(&c.witnesses));
}

fn render_outcome(out: &mut String, r: &RunReport, o: &Outcome) {
    match o {
        Outcome::Check {
            algebra,
            label,
            spec,
            verdict,
        } => {
            algebra_line(out, r, *algebra);
            let _ = writeln!(out, "identity  {label}");
            if label != spec {
                let _ = writeln!(out, "          {spec}");
            }
            render_verdict(out, verdict);
        }
        Outcome::Terms {
            algebra,
            request,
            status,
            note,
            system,
        } => {
            algebra_line(out, r, *algebra);
            let _ = writeln!(out, "search    {request}: {status}");
            if let Some(n) = note {
                let _ = writeln!(out, "  {n}");
            }
            if let Some(sys) = system {
                let _ = writeln!(out, "system    {}", sys.schema);
                for t in &sys.terms {
                    let _ = writeln!(out, "  {}/{} = {}", t.name, t.arity, t.term);
                }
                out.push_str("certificate\n");
                for line in &sys.certificate {
                    let _ = writeln!(out, "  {line}");
                }
            }
        }
        Outcome::FreeAlgebra {
            algebra,
            arity,
            cap,
            complete,
            count,
            elements,
        } => {
            algebra_line(out, r, *algebra);
            let _ = writeln!(out, "clone     arity {arity}, {count} elements");
            if !complete {
                let _ = writeln!(out, "  cap {cap} reached: the list is incomplete");
            }
            for (i, e) in elements.iter().enumerate() {
                let _ = writeln!(out, "  {i:>4} {} {}", e.table, e.term);
            }
        }
        Outcome::Congruences {
            algebra,
            complete,
            congruences,
        } => {
            algebra_line(out, r, *algebra);
            let _ = writeln!(out, "congruences {}", congruences.len());
            if !complete {
                out.push_str("  enumeration cap reached: the list is incomplete\n");
            }
            for (i, c) in congruences.iter().enumerate() {
                let _ = writeln!(out, "  c{i:<3} {}", fmt_blocks(&c.blocks));
            }
            let top = congruences.iter().map(|c| c.level).max().unwrap_or(0);
            out.push_str("hasse (top to bottom)\n");
            for level in (0..=top).rev() {
                let row: Vec<String> = (0..congruences.len())
                    .filter(|&i| congruences[i].level == level)
                    .map(|i| format!("c{i}"))
                    .collect();
                let _ = writeln!(out, "  {level:>2}: {}", row.join("  "));
            }
            for (i, c) in congruences.iter().enumerate() {
                if !c.covers.is_empty() {
                    let below: Vec<String> = c.covers.iter().map(|j| format!("c{j}")).collect();
                    let _ = writeln!(out, "  c{i} > {}", below.join(" "));
                }
            }
        }
        Outcome::Expansions {
            source,
            expansions,
            check,
        } => {
            let _ = writeln!(out, "source    {source}");
            let _ = writeln!(out, "expansions {}", expansions.len());
            for (i, e) in expansions.iter().enumerate() {
                let map: Vec<String> = e.map.iter().map(usize::to_string).collect();
                let _ = write!(out, "  {:>3} [{}] {}", i + 1, map.join(","), e.spec);
                if let Some(v) = &e.verdict {
                    let _ = write!(out, "  => {}", status_text(v.status));
                }
                out.push('\n');
            }
            if let Some(c) = check {
                algebra_line(out, r, c.algebra);
                let _ = writeln!(out, "some expansion holds: {}", status_text(c.any_status));
                if let Some(w) = c.witness {
                    let _ = writeln!(out, "  first holding expansion: {}", w + 1);
                }
                out.push_str("source identity\n");
                render_verdict(out, &c.source_verdict);
                let _ = writeln!(out, "agree     {}", c.agree);
            }
        }
        Outcome::Observation { algebra, text } => {
            let name = r.algebras.get(*algebra).map(|a| a.source.as_str()).unwrap_or("?");
            let _ = writeln!(out, "observation [{name}] {text}");
        }
    }
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caps::Caps;
    use crate::commands::{self, Ctx};
    use relkit::{BinRel, Exec};

    fn report(run: commands::Run) -> RunReport {
        RunReport {
            tool: "relkit test".into(),
            command: vec!["x".into()],
            algebras: run.algebras,
            outcomes: run.outcomes,
            exit_code: run.exit_code,
            wall_time_ms: None,
        }
    }

    #[test]
    fn reports_round_trip() {
        let ctx = Ctx {
            caps: Caps::default(),
            exec: Exec::Sequential,
            allow_truncated: false,
        };
        let runs = [
            commands::find_terms(&ctx, "lattice2", commands::SchemaArg::Jonsson, 3, 2).unwrap(),
            commands::congruences(&ctx, "z2cube").unwrap(),
            commands::free_algebra(&ctx, "z2", 2, None).unwrap(),
            commands::expansions(&ctx, "malIncl", &Default::default(), Some("lattice2")).unwrap(),
        ];
        for run in runs {
            let r = report(run);
            let back = RunReport::from_json(&r.to_json()).unwrap();
            assert_eq!(back, r);
            assert_eq!(back.render(), r.render());
        }
    }

    #[test]
    fn hasse_of_a_chain() {
        let n = 3;
        let rels = vec![
            BinRel::full(n),
            BinRel::identity(n),
            BinRel::reflexive_from(n, [(0, 1), (1, 0)]).unwrap(),
        ];
        let h = commands::hasse(rels);
        assert_eq!(h.iter().map(|c| c.level).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(h[2].covers, vec![1]);
        assert_eq!(h[0].blocks, vec![vec![0], vec![1], vec![2]]);
    }

}
