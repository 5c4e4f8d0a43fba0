use crate::caps::Caps;
use crate::report::{
    AlgebraRef, CloneElement, CongruenceEntry, ExpansionCheck, ExpansionEntry, Outcome,
};
use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relkit::algebra::{fixture, fixture_names, Operation};
use relkit::freeclone::generate_clone;
use relkit::identities::{
    builtin, check_for_all, BuiltinParams, CheckConfig, IdentitySpec, RelClass, Status, Strategy,
    Verdict, BUILTIN_NAMES,
};
use relkit::maltsev::{check_any_expansion, enumerate_expansions, FreeContext, Search, TermSystem};
use relkit::relations::{enumerate, BinRel, EnumConfig, EnumMethod, RelKind};
use relkit::{Exec, FiniteAlgebra};
use std::path::Path;

/// Settings shared by every subcommand.
pub struct Ctx {
    pub caps: Caps,
    pub exec: Exec,
    pub allow_truncated: bool,
}

impl Ctx {
    fn check_config(&self) -> CheckConfig {
        CheckConfig {
            exec: self.exec,
            ..self.caps.check_config()
        }
    }

    /// Exit code for a result that is neither a clean yes nor a clean no.
    fn inconclusive(&self) -> i32 {
        if self.allow_truncated {
            0
        } else {
            2
        }
    }

    fn status_code(&self, s: Status) -> i32 {
        match s {
            Status::Holds => 0,
            Status::Refuted => 1,
            Status::NoCounterexample => self.inconclusive(),
        }
    }
}

/// Outcomes of one subcommand plus its exit code.
pub struct Run {
    pub algebras: Vec<AlgebraRef>,
    pub outcomes: Vec<Outcome>,
    pub exit_code: i32,
}

/// A file path if one exists, otherwise a bundled algebra name.
pub fn load_algebra(arg: &str) -> Result<FiniteAlgebra> {
    let path = Path::new(arg);
    if path.is_file() {
        return FiniteAlgebra::load(path).with_context(|| format!("loading {arg}"));
    }
    fixture(arg).ok_or_else(|| {
        let names: Vec<&str> = fixture_names().collect();
        anyhow!("`{arg}` is neither a file nor a bundled algebra ({})", names.join(", "))
    })
}

pub fn resolve_spec(text: &str, params: &BuiltinParams) -> Result<IdentitySpec> {
    if BUILTIN_NAMES.contains(&text) {
        return Ok(builtin(text, params)?);
    }
    IdentitySpec::parse(text).with_context(|| format!("in identity {text:?}"))
}

pub fn parse_override(item: &str) -> Result<(String, RelClass)> {
    let (var, class) = item
        .split_once('=')
        .ok_or_else(|| anyhow!("class override {item:?} is not var=class"))?;
    let class = RelClass::from_prefix(class.trim()).ok_or_else(|| {
        let known: Vec<&str> = RelClass::ALL.iter().map(|c| c.prefix()).collect();
        anyhow!("unknown class `{class}` (known: {})", known.join(", "))
    })?;
    Ok((var.trim().to_string(), class))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ThetaMode {
    /// Θ-type tolerances range over congruences.
    Congruence,
    Tolerance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Exhaustive,
    Generated,
    Sampled,
}

pub struct CheckArgs {
    pub algebra: String,
    pub spec: String,
    pub params: BuiltinParams,
    pub classes: Vec<String>,
    pub theta: ThetaMode,
    pub strategy: StrategyArg,
    pub samples: u64,
    pub seed: u64,
}

pub fn check(ctx: &Ctx, a: &CheckArgs) -> Result<Run> {
    let alg = load_algebra(&a.algebra)?;
    let spec = resolve_spec(&a.spec, &a.params)?;
    let mut cfg = ctx.check_config();
    cfg.theta_as_congruence = a.theta == ThetaMode::Congruence;
    cfg.strategy = match a.strategy {
        StrategyArg::Exhaustive => Strategy::Exhaustive,
        StrategyArg::Generated => Strategy::Generated,
        StrategyArg::Sampled => Strategy::Sampled {
            samples: a.samples,
            seed: a.seed,
        },
    };
    let mut declared = spec.clone();
    for item in &a.classes {
        let (var, class) = parse_override(item)?;
        declared = declared.with_class(&var, class)?;
        cfg.class_overrides.push((var, class));
    }
    let verdict = check_for_all(&alg, &spec, &cfg)?;
    let exit_code = ctx.status_code(verdict.status);
    Ok(Run {
        algebras: vec![AlgebraRef::new(&a.algebra, &alg)],
        outcomes: vec![Outcome::Check {
            algebra: 0,
            label: spec.label(),
            spec: declared.to_string(),
            verdict,
        }],
        exit_code,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemaArg {
    Jonsson,
    Directed,
    Majority,
    Pixley,
    Vr,
    Mal,
}

fn terms_outcome(algebra: usize, request: String, search: Search<TermSystem>) -> Outcome {
    let status = search.label().to_string();
    let (note, system) = match search {
        Search::Found(sys) => (None, Some(sys.report())),
        Search::Absent => (Some("conclusively absent within the bound".into()), None),
        Search::Inconclusive(why) => (Some(why), None),
    };
    Outcome::Terms {
        algebra,
        request,
        status,
        note,
        system,
    }
}

fn search_code(ctx: &Ctx, o: &Outcome) -> i32 {
    match o {
        Outcome::Terms { status, .. } if status == "found" => 0,
        Outcome::Terms { status, .. } if status == "absent" => 1,
        _ => ctx.inconclusive(),
    }
}

pub fn find_terms(ctx: &Ctx, algebra: &str, schema: SchemaArg, max: usize, h: usize) -> Result<Run> {
    let alg = load_algebra(algebra)?;
    let fc = FreeContext::new(&alg, relkit::maltsev::SearchConfig {
        exec: ctx.exec,
        ..ctx.caps.search_config()
    })?;
    let (request, search) = match schema {
        SchemaArg::Jonsson => (format!("jonsson (k <= {max})"), fc.find_jonsson(max)),
        SchemaArg::Directed => (format!("directed (n <= {max})"), fc.find_directed(max)),
        SchemaArg::Majority => ("majority".to_string(), fc.find_majority()),
        SchemaArg::Pixley => ("pixley".to_string(), fc.find_pixley()),
        SchemaArg::Vr => (format!("vr (h = {h})"), fc.find_vr(h)),
        SchemaArg::Mal => (format!("mal (h = {h})"), fc.find_mal_f(h)),
    };
    let outcome = terms_outcome(0, request, search);
    let exit_code = search_code(ctx, &outcome);
    Ok(Run {
        algebras: vec![AlgebraRef::new(algebra, &alg)],
        outcomes: vec![outcome],
        exit_code,
    })
}

pub fn free_algebra(ctx: &Ctx, algebra: &str, arity: usize, cap: Option<usize>) -> Result<Run> {
    let alg = load_algebra(algebra)?;
    let cap = cap.unwrap_or_else(|| ctx.caps.clone_cap(arity));
    let clone = generate_clone(&alg, arity, cap, ctx.exec)?;
    // digits run together while every element is a single digit
    let sep = if alg.size() <= 10 { "" } else { "," };
    let elements = clone
        .elements()
        .iter()
        .map(|e| CloneElement {
            table: e.table.iter().map(u8::to_string).collect::<Vec<_>>().join(sep),
            term: e.witness.to_string(),
        })
        .collect();
    let complete = clone.is_complete();
    Ok(Run {
        algebras: vec![AlgebraRef::new(algebra, &alg)],
        outcomes: vec![Outcome::FreeAlgebra {
            algebra: 0,
            arity,
            cap,
            complete,
            count: clone.len(),
            elements,
        }],
        exit_code: if complete { 0 } else { ctx.inconclusive() },
    })
}

fn blocks(r: &BinRel) -> Vec<Vec<usize>> {
    let n = r.universe_size();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for a in 0..n {
        if seen[a] {
            continue;
        }
        let block: Vec<usize> = (0..n).filter(|&b| r.contains(a, b)).collect();
        for &b in &block {
            seen[b] = true;
        }
        out.push(block);
    }
    out
}

/// Congruences ordered by size, with covering pairs and heights.
pub fn hasse(mut rels: Vec<BinRel>) -> Vec<CongruenceEntry> {
    rels.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let n = rels.len();
    let below = |i: usize, j: usize| i != j && rels[i].is_subset(&rels[j]);
    let mut covers = vec![Vec::new(); n];
    for j in 0..n {
        for i in 0..n {
            if below(i, j) && !(0..n).any(|k| below(i, k) && below(k, j)) {
                covers[j].push(i);
            }
        }
    }
    // sorted by size, so every cover of j comes before j
    let mut level = vec![0usize; n];
    for j in 0..n {
        level[j] = covers[j].iter().map(|&i| level[i] + 1).max().unwrap_or(0);
    }
    rels.iter()
        .enumerate()
        .map(|(i, r)| CongruenceEntry {
            blocks: blocks(r),
            pairs: r.len(),
            level: level[i],
            covers: covers[i].clone(),
        })
        .collect()
}

pub fn congruences(ctx: &Ctx, algebra: &str) -> Result<Run> {
    let alg = load_algebra(algebra)?;
    let cfg = EnumConfig {
        method: EnumMethod::Auto,
        exhaustive_threshold: ctx.caps.threshold,
        cap: ctx.caps.enum_cap,
        exec: ctx.exec,
    };
    let e = enumerate(&alg, RelKind::Congruence, &cfg);
    Ok(Run {
        algebras: vec![AlgebraRef::new(algebra, &alg)],
        outcomes: vec![Outcome::Congruences {
            algebra: 0,
            complete: e.complete,
            congruences: hasse(e.relations),
        }],
        exit_code: if e.complete { 0 } else { ctx.inconclusive() },
    })
}

pub fn expansions(ctx: &Ctx, spec_text: &str, params: &BuiltinParams, algebra: Option<&str>) -> Result<Run> {
    let spec = resolve_spec(spec_text, params)?;
    let exps = enumerate_expansions(&spec)?;
    let entry = |e: &relkit::maltsev::ExpansionSpec, verdict: Option<Verdict>| ExpansionEntry {
        map: e.rhs_map.iter().map(|c| c + 1).collect(),
        spec: e.spec.to_string(),
        verdict,
    };
    let Some(name) = algebra else {
        return Ok(Run {
            algebras: Vec::new(),
            outcomes: vec![Outcome::Expansions {
                source: spec.to_string(),
                expansions: exps.iter().map(|e| entry(e, None)).collect(),
                check: None,
            }],
            exit_code: 0,
        });
    };
    let alg = load_algebra(name)?;
    let rep = check_any_expansion(&alg, &spec, &ctx.check_config())?;
    let exit_code = ctx.status_code(rep.any_status);
    Ok(Run {
        algebras: vec![AlgebraRef::new(name, &alg)],
        outcomes: vec![Outcome::Expansions {
            source: spec.to_string(),
            expansions: rep.expansions.iter().map(|(e, v)| entry(e, Some(v.clone()))).collect(),
            check: Some(ExpansionCheck {
                algebra: 0,
                any_status: rep.any_status,
                witness: rep.witness,
                source_verdict: rep.source,
                agree: rep.agree,
            }),
        }],
        exit_code,
    })
}

// ------------------------------------------------------------- mainp preset

pub struct MainpArgs {
    pub random: usize,
    pub random_size: usize,
    pub seed: u64,
    pub max_size: usize,
    pub max_k: usize,
    pub h: usize,
    pub budget: u64,
    pub clone_cap: usize,
}

/// One idempotent binary operation with random off-diagonal entries.
pub fn random_algebra(rng: &mut ChaCha8Rng, n: usize) -> Result<FiniteAlgebra> {
    let table = (0..n * n)
        .map(|i| if i / n == i % n { i % n } else { rng.gen_range(0..n) })
        .collect();
    Ok(FiniteAlgebra::new(
        n,
        vec![Operation {
            name: "f".into(),
            arity: 2,
            table,
        }],
    )?)
}

/// The Θ classes tried for each identity; the first is the proven form.
/// `cor1` has no parameter, so a failure of a variant in a congruence
/// distributive variety settles that variant; the others are checked at one
/// fixed parameter only.
const VARIANTS: &[(&str, &[RelClass], bool)] = &[
    (
        "cor1",
        &[RelClass::Congruence, RelClass::ReflexiveAdmissible, RelClass::UAdmissible],
        true,
    ),
    (
        "cdist2",
        &[RelClass::Congruence, RelClass::ReflexiveAdmissible, RelClass::UAdmissible],
        false,
    ),
    ("modular2", &[RelClass::Congruence, RelClass::ReflexiveAdmissible], false),
];

fn short(s: Status) -> &'static str {
    match s {
        Status::Holds => "holds",
        Status::Refuted => "refuted",
        Status::NoCounterexample => "open",
    }
}

pub fn search_mainp(ctx: &Ctx, a: &MainpArgs) -> Result<Run> {
    if a.random_size < 2 {
        bail!("--random-size must be at least 2");
    }
    let mut algs: Vec<(AlgebraRef, FiniteAlgebra)> = fixture_names()
        .filter_map(|n| fixture(n).map(|alg| (n, alg)))
        .filter(|(_, alg)| alg.size() <= a.max_size)
        .map(|(n, alg)| (AlgebraRef::new(n, &alg), alg))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    for i in 0..a.random {
        let alg = random_algebra(&mut rng, a.random_size)?;
        let mut r = AlgebraRef::new(&format!("random:{}:{i}", a.seed), &alg);
        r.inline = Some(alg.clone());
        algs.push((r, alg));
    }

    let mut cfg = ctx.check_config();
    cfg.max_assignments = cfg.max_assignments.min(a.budget);
    let params = BuiltinParams {
        h: a.h,
        k: a.h,
        ..BuiltinParams::default()
    };
    let mut scfg = relkit::maltsev::SearchConfig {
        exec: ctx.exec,
        ..ctx.caps.search_config()
    };
    scfg.cap3 = scfg.cap3.min(a.clone_cap);

    let mut outcomes = Vec::new();
    for (idx, (_, alg)) in algs.iter().enumerate() {
        let search = match FreeContext::new(alg, scfg) {
            Ok(fc) => fc.find_jonsson(a.max_k),
            Err(e) => Search::Inconclusive(e.to_string()),
        };
        let cd = match &search {
            Search::Found(sys) => match sys.schema {
                relkit::maltsev::Schema::Jonsson { k } => format!("Jonsson terms with k = {k}"),
                _ => "Jonsson terms".into(),
            },
            Search::Absent => format!("no Jonsson terms with k <= {}", a.max_k),
            Search::Inconclusive(_) => "Jonsson search inconclusive".into(),
        };
        let found = search.found().is_some();
        outcomes.push(terms_outcome(idx, format!("jonsson (k <= {})", a.max_k), search));

        let mut summary = Vec::new();
        let mut notes = Vec::new();
        for &(name, classes, parameter_free) in VARIANTS {
            let base = builtin(name, &params)?;
            let theta = base.vars[0].name.clone();
            let mut parts = Vec::new();
            for &class in classes {
                let spec = if class == RelClass::Congruence {
                    base.clone()
                } else {
                    base.with_class(&theta, class)?
                };
                let verdict = check_for_all(alg, &spec, &cfg)?;
                parts.push(format!("{} {}", class.prefix(), short(verdict.status)));
                if parameter_free && found && class != RelClass::Congruence && verdict.refuted() {
                    notes.push(format!(
                        "{} with Θ {} fails although the variety is congruence distributive",
                        base.label(),
                        class.prefix()
                    ));
                }
                outcomes.push(Outcome::Check {
                    algebra: idx,
                    label: format!("{} [Θ {}]", base.label(), class.prefix()),
                    spec: spec.to_string(),
                    verdict,
                });
            }
            summary.push(format!("{}: {}", base.label(), parts.join(", ")));
        }
        let mut text = format!("{cd}; {}", summary.join("; "));
        if !notes.is_empty() {
            text.push_str("; note: ");
            text.push_str(&notes.join("; "));
        }
        outcomes.push(Outcome::Observation { algebra: idx, text });
    }
    Ok(Run {
        algebras: algs.into_iter().map(|(r, _)| r).collect(),
        outcomes,
        exit_code: 0,
    })
}
