//! Replay every counterexample and certificate recorded in a report.

use crate::commands::load_algebra;
use crate::report::{AlgebraRef, Outcome, RunReport};
use anyhow::{bail, Context, Result};
use relkit::identities::{replay, IdentitySpec, Status, Verdict};
use relkit::maltsev::replay_certificate;
use relkit::FiniteAlgebra;
use std::path::Path;

#[derive(Debug, Default)]
pub struct Replay {
    pub lines: Vec<String>,
    pub checked: usize,
    pub failed: usize,
}

impl Replay {
    fn record(&mut self, what: String, ok: std::result::Result<(), String>) {
        self.checked += 1;
        match ok {
            Ok(()) => self.lines.push(format!("ok    {what}")),
            Err(why) => {
                self.failed += 1;
                self.lines.push(format!("FAIL  {what}: {why}"));
            }
        }
    }
}

/// The algebra a report refers to, refusing stale fingerprints.
fn materialize(r: &AlgebraRef) -> Result<FiniteAlgebra> {
    let alg = match &r.inline {
        Some(a) => a.clone(),
        None => load_algebra(&r.source)?,
    };
    let now = alg.fingerprint();
    if now != r.fingerprint {
        bail!(
            "stale algebra fingerprint for `{}`: report has {}, current tables give {}",
            r.source,
            r.fingerprint,
            now
        );
    }
    Ok(alg)
}

fn replay_verdict(alg: &FiniteAlgebra, spec_text: &str, v: &Verdict) -> Option<std::result::Result<(), String>> {
    let cex = match (&v.counterexample, v.status) {
        (Some(c), _) => c,
        (None, Status::Refuted) => return Some(Err("refutation without a counterexample".into())),
        (None, _) => return None,
    };
    let run = || -> relkit::Result<bool> {
        let spec = IdentitySpec::parse(spec_text)?;
        replay(alg, &spec, cex)
    };
    Some(match run() {
        Ok(true) => Ok(()),
        Ok(false) => Err("counterexample does not reproduce".into()),
        Err(e) => Err(e.to_string()),
    })
}

pub fn verify_report(report: &RunReport) -> Result<Replay> {
    let algs = report
        .algebras
        .iter()
        .map(materialize)
        .collect::<Result<Vec<_>>>()?;
    let alg = |i: usize| algs.get(i).with_context(|| format!("report refers to missing algebra #{i}"));
    let mut out = Replay::default();
    for (n, o) in report.outcomes.iter().enumerate() {
        let n = n + 1;
        match o {
            Outcome::Check {
                algebra, label, spec, verdict,
            } => {
                if let Some(res) = replay_verdict(alg(*algebra)?, spec, verdict) {
                    out.record(format!("#{n} counterexample to {label}"), res);
                }
            }
            Outcome::Terms {
                algebra,
                request,
                status,
                system,
                ..
            } => match system {
                Some(sys) => {
                    let res = match replay_certificate(alg(*algebra)?, &sys.certificate) {
                        Ok(None) => Ok(()),
                        Ok(Some(eq)) => Err(format!("equation fails: {eq}")),
                        Err(e) => Err(e.to_string()),
                    };
                    out.record(format!("#{n} certificate for {request}"), res);
                }
                None if status == "found" => {
                    out.record(format!("#{n} {request}"), Err("found without a term system".into()))
                }
                None => {}
            },
            Outcome::Expansions {
                source,
                expansions,
                check: Some(c),
            } => {
                let a = alg(c.algebra)?;
                for (i, e) in expansions.iter().enumerate() {
                    if let Some(res) = e.verdict.as_ref().and_then(|v| replay_verdict(a, &e.spec, v)) {
                        out.record(format!("#{n} counterexample to expansion {}", i + 1), res);
                    }
                }
                if let Some(res) = replay_verdict(a, source, &c.source_verdict) {
                    out.record(format!("#{n} counterexample to {source}"), res);
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

pub fn verify_file(path: &Path) -> Result<Replay> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let report = RunReport::from_json(&text).with_context(|| format!("parsing report {}", path.display()))?;
    verify_report(&report)
}
