mod caps;
mod commands;
mod report;
mod verify;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use commands::{CheckArgs, Ctx, MainpArgs, Run, SchemaArg, StrategyArg, ThetaMode};
use relkit::identities::BuiltinParams;
use relkit::maltsev::DEFAULT_BOUND;
use relkit::Exec;
use report::RunReport;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

/// Exit code for errors (bad input, unreadable files, stale reports).
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "relkit", version)]
#[command(about = "Relational identities, term conditions and congruences of finite algebras")]
struct Cli {
    /// Worker threads for sweeps; 1 runs sequentially. Results do not depend on it
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Record wall time in the report
    #[arg(long, global = true)]
    timing: bool,

    /// Print the machine-readable report instead of text
    #[arg(long, global = true)]
    json: bool,

    /// Also write the machine-readable report to FILE
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Exit 0 on truncated or sampled runs that found no counterexample
    #[arg(long, global = true)]
    allow_truncated: bool,

    /// Resource caps as key=value list, over RELKIT_CAPS
    #[arg(long, global = true, value_name = "LIST")]
    caps: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Params {
    #[arg(long, default_value_t = 2)]
    h: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Step labels for malA, e.g. 1,2,2
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    f: Vec<u8>,
    /// Weak form: congruence Θ and unions of two congruences
    #[arg(long)]
    weak: bool,
    /// Transitive-closure equality form where one exists
    #[arg(long)]
    eq: bool,
}

impl Params {
    fn builtin(&self) -> BuiltinParams {
        BuiltinParams {
            h: self.h,
            k: self.k,
            m: self.m,
            n: self.n,
            f: self.f.clone(),
            weak: self.weak,
            eq: self.eq,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check an identity over all relations of the algebra
    Check {
        /// Algebra file or bundled name
        algebra: String,
        /// Builtin name (cdist2, maj3, ...) or a literal like 'adm:R ; adm:R == adm:R'
        spec: String,
        #[command(flatten)]
        params: Params,
        /// Narrow variable classes, e.g. sigma=adm,Theta=cong
        #[arg(long, value_delimiter = ',')]
        classes: Vec<String>,
        /// Range of Θ-type tolerance variables
        #[arg(long, value_enum, default_value = "congruence")]
        theta: ThetaMode,
        #[arg(long, value_enum, default_value = "exhaustive")]
        strategy: StrategyArg,
        /// Assignments drawn by the sampled strategy
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Search the 3-variable clone for a term system
    FindTerms {
        algebra: String,
        #[arg(value_enum)]
        schema: SchemaArg,
        /// Largest k (jonsson) or n (directed)
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        max: usize,
        /// Chain length for vr and mal
        #[arg(long, default_value_t = 2)]
        h: usize,
    },
    /// List the k-variable term clone (the free algebra on k generators)
    FreeAlgebra {
        algebra: String,
        #[arg(long, default_value_t = 3)]
        arity: usize,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// List congruences with their Hasse diagram
    Congruences { algebra: String },
    /// List the admissible expansions of a U-admissible inclusion
    Expansions {
        spec: String,
        #[command(flatten)]
        params: Params,
        /// Also check every expansion on this algebra
        #[arg(long)]
        algebra: Option<String>,
    },
    /// Replay the counterexamples and certificates of a saved report
    Verify { report: PathBuf },
    /// Try wider classes for Θ on bundled and random algebras; observations only
    SearchMainp {
        /// Number of random algebras
        #[arg(long, default_value_t = 4)]
        random: usize,
        #[arg(long, default_value_t = 3)]
        random_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip bundled algebras larger than this
        #[arg(long, default_value_t = 4)]
        max_size: usize,
        #[arg(long, default_value_t = 6)]
        max_k: usize,
        /// Parameter for cdist2 and modular2
        #[arg(long, default_value_t = 2)]
        h: usize,
        /// Assignment budget per check
        #[arg(long, default_value_t = 2_000_000)]
        budget: u64,
        /// Cap on the 3-variable clone for the Jonsson search
        #[arg(long, default_value_t = 2000)]
        clone_cap: usize,
    },
}

/// Arguments with flags that cannot change results removed, so equal runs
/// give byte-identical reports.
fn command_echo() -> Vec<String> {
    let mut out = Vec::new();
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        match a.as_str() {
            "--jobs" | "--out" => {
                args.next();
            }
            "--timing" | "--json" => {}
            _ if a.starts_with("--jobs=") || a.starts_with("--out=") => {}
            _ => out.push(a),
        }
    }
    out
}

fn setup_exec(jobs: Option<usize>) -> Result<Exec> {
    match jobs {
        Some(1) => Ok(Exec::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("configuring worker threads")?;
            Ok(Exec::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Exec::Sequential),
        None if cfg!(feature = "parallel") => Ok(Exec::Parallel),
        None => Ok(Exec::Sequential),
    }
}

/// Write to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn run(cli: Cli) -> Result<u8> {
    let start = Instant::now();
    let exec = setup_exec(cli.jobs)?;
    let ctx = Ctx {
        caps: caps::Caps::resolve(cli.caps.as_deref())?,
        exec,
        allow_truncated: cli.allow_truncated,
    };

    let run: Run = match &cli.command {
        Command::Verify { report } => {
            let r = verify::verify_file(report)?;
            let mut text = r.lines.join("\n");
            if !text.is_empty() {
                text.push('\n');
            }
            text.push_str(&format!("verify: {} replayed, {} failed\n", r.checked, r.failed));
            emit(&text);
            return Ok(u8::from(r.failed > 0));
        }
        Command::Check {
            algebra,
            spec,
            params,
            classes,
            theta,
            strategy,
            samples,
            seed,
        } => commands::check(
            &ctx,
            &CheckArgs {
                algebra: algebra.clone(),
                spec: spec.clone(),
                params: params.builtin(),
                classes: classes.clone(),
                theta: *theta,
                strategy: *strategy,
                samples: *samples,
                seed: *seed,
            },
        )?,
        Command::FindTerms { algebra, schema, max, h } => commands::find_terms(&ctx, algebra, *schema, *max, *h)?,
        Command::FreeAlgebra { algebra, arity, cap } => commands::free_algebra(&ctx, algebra, *arity, *cap)?,
        Command::Congruences { algebra } => commands::congruences(&ctx, algebra)?,
        Command::Expansions { spec, params, algebra } => {
            commands::expansions(&ctx, spec, &params.builtin(), algebra.as_deref())?
        }
        Command::SearchMainp {
            random,
            random_size,
            seed,
            max_size,
            max_k,
            h,
            budget,
            clone_cap,
        } => commands::search_mainp(
            &ctx,
            &MainpArgs {
                random: *random,
                random_size: *random_size,
                seed: *seed,
                max_size: *max_size,
                max_k: *max_k,
                h: *h,
                budget: *budget,
                clone_cap: *clone_cap,
            },
        )?,
    };

    let report = RunReport {
        tool: format!("relkit {}", env!("CARGO_PKG_VERSION")),
        command: command_echo(),
        algebras: run.algebras,
        outcomes: run.outcomes,
        exit_code: run.exit_code,
        wall_time_ms: cli.timing.then(|| start.elapsed().as_millis() as u64),
    };
    let json = report.to_json();
    if let Some(path) = &cli.out {
        std::fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    if cli.json {
        emit(&json);
    } else {
        emit(&report.render());
    }
    Ok(report.exit_code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
