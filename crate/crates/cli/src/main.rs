//! `ordo` — growth-order comparison, Θ-classification, and evaluation-plan
//! composition from the command line.
//!
//! Batch, non-interactive. Exit codes: `0` success, `2` inconclusive
//! comparison (`<4>` — a distinguishable outcome, not a failure), `1`
//! errors, `64` usage.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ordo_core::classifier::{classify, insert_function, parse_function_list, refine};
use ordo_core::comparator::{comp, CompOutcome, ComparatorConfig, ComplexityFn};
use ordo_core::composer::{compose, emit_plan, execute_plan};
use ordo_core::registry::load_registry;

#[derive(Parser)]
#[command(name = "ordo", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the growth order of two complexity functions.
    Compare {
        /// First function, e.g. "n*log2(n)".
        #[arg(long)]
        f1: String,
        /// Second function, e.g. "n^2".
        #[arg(long)]
        f2: String,
        #[command(flatten)]
        flags: ComparatorFlags,
        /// Emit the outcome and the full comparator trace as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Partition a function library into Θ-classes, slowest-growing first.
    Classify {
        /// File of `id = expression` lines (# comments allowed).
        #[arg(long)]
        functions: PathBuf,
        #[command(flatten)]
        flags: ComparatorFlags,
    },
    /// Classify a library, then insert one more function into it.
    Insert {
        /// File of `id = expression` lines (# comments allowed).
        #[arg(long)]
        functions: PathBuf,
        /// The function to insert, as "id=EXPR".
        #[arg(long)]
        add: String,
        #[command(flatten)]
        flags: ComparatorFlags,
    },
    /// Classify a library, then re-check it with a widened comparator
    /// budget (4x the samples, a tenth of the tolerance), merging classes
    /// it now recognizes as Θ-equal.
    Refine {
        /// File of `id = expression` lines (# comments allowed).
        #[arg(long)]
        functions: PathBuf,
        #[command(flatten)]
        flags: ComparatorFlags,
    },
    /// Compose an executable evaluation plan for an expression.
    Compose {
        /// Registry JSON file of services and formulas.
        #[arg(long)]
        registry: PathBuf,
        /// Expression to cover, e.g. "sin(x) + x^2".
        #[arg(long)]
        expr: String,
        /// Also write the plan JSON to this file.
        #[arg(long, value_name = "FILE")]
        emit_plan: Option<PathBuf>,
        /// Execute the plan at these bindings, e.g. "x=1,y=2".
        #[arg(long, value_name = "BINDINGS")]
        eval: Option<String>,
    },
}

/// Comparator tuning; defaults match the library's.
#[derive(Args)]
struct ComparatorFlags {
    /// Geometric step between successive sample points.
    #[arg(long, default_value_t = ComparatorConfig::default().q)]
    q: u32,
    /// How many trailing ratios must agree before the limit counts as found.
    #[arg(long, default_value_t = ComparatorConfig::default().k)]
    k: usize,
    /// Agreement tolerance on the trailing ratios.
    #[arg(long = "eps", default_value_t = ComparatorConfig::default().epsilon)]
    eps: f64,
    /// Sample budget of each ratio pass.
    #[arg(long = "L", default_value_t = ComparatorConfig::default().max_samples)]
    samples: usize,
    /// Doubling budget of the root sweep.
    #[arg(long = "tmax", default_value_t = ComparatorConfig::default().max_doublings)]
    tmax: u32,
    /// Highest derivative order swept for sign changes.
    #[arg(long = "pmax", default_value_t = ComparatorConfig::default().max_order)]
    pmax: usize,
}

impl ComparatorFlags {
    fn config(&self) -> ComparatorConfig {
        ComparatorConfig {
            q: self.q,
            k: self.k,
            epsilon: self.eps,
            max_samples: self.samples,
            max_doublings: self.tmax,
            max_order: self.pmax,
            ..ComparatorConfig::default()
        }
    }
}

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// A one-line diagnostic; printed to stderr prefixed with `ordo:`.
#[derive(Debug)]
struct Failure {
    message: String,
    code: u8,
}

impl Failure {
    fn error(message: impl Into<String>) -> Failure {
        Failure {
            message: message.into(),
            code: EXIT_ERROR,
        }
    }

    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            message: message.into(),
            code: EXIT_USAGE,
        }
    }
}

/// Die quietly on a closed pipe (`ordo ... | head`) instead of panicking.
fn reset_sigpipe() {
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            // Help and version requests render to stdout and succeed;
            // everything else is a usage error.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("ordo: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Compare {
            f1,
            f2,
            flags,
            json,
        } => cmd_compare(&f1, &f2, &flags, json),
        Command::Classify { functions, flags } => {
            let lib = classified(&functions, &flags)?;
            print!("{lib}");
            if !lib.is_empty() {
                println!();
            }
            Ok(EXIT_OK)
        }
        Command::Insert {
            functions,
            add,
            flags,
        } => cmd_insert(&functions, &add, &flags),
        Command::Refine { functions, flags } => cmd_refine(&functions, &flags),
        Command::Compose {
            registry,
            expr,
            emit_plan,
            eval,
        } => cmd_compose(&registry, &expr, emit_plan.as_deref(), eval.as_deref()),
    }
}

fn checked_config(flags: &ComparatorFlags) -> Result<ComparatorConfig, Failure> {
    let cfg = flags.config();
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(cfg)
}

fn parse_fn(which: &str, src: &str) -> Result<ComplexityFn, Failure> {
    ComplexityFn::parse(src).map_err(|e| Failure::error(format!("{which} \"{src}\": {e}")))
}

fn cmd_compare(f1: &str, f2: &str, flags: &ComparatorFlags, json: bool) -> Result<u8, Failure> {
    let cfg = checked_config(flags)?;
    let a = parse_fn("--f1", f1)?;
    let b = parse_fn("--f2", f2)?;
    let result = comp(&a, &b, &cfg);
    if json {
        let doc = serde_json::json!({
            "f1": f1,
            "f2": f2,
            "outcome": result.outcome,
            "code": result.outcome.code(),
            "display": result.outcome.to_string(),
            "trace": result.trace,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("result serializes")
        );
    } else {
        println!("{}", result.outcome);
    }
    Ok(if result.outcome == CompOutcome::Inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    })
}

fn classified(
    path: &std::path::Path,
    flags: &ComparatorFlags,
) -> Result<ordo_core::ClassifiedLibrary, Failure> {
    let cfg = checked_config(flags)?;
    let src = std::fs::read_to_string(path)
        .map_err(|e| Failure::error(format!("{}: {e}", path.display())))?;
    let fns = parse_function_list(&src)
        .map_err(|e| Failure::error(format!("{}: {e}", path.display())))?;
    classify(fns, &cfg).map_err(|e| Failure::error(e.to_string()))
}

fn cmd_insert(path: &std::path::Path, add: &str, flags: &ComparatorFlags) -> Result<u8, Failure> {
    let lib = classified(path, flags)?;
    let (id, expr) = add
        .split_once('=')
        .ok_or_else(|| Failure::usage(format!("--add \"{add}\": expected \"id=EXPR\"")))?;
    let id = id.trim();
    if id.is_empty() {
        return Err(Failure::usage(format!("--add \"{add}\": empty id")));
    }
    let f = parse_fn("--add", expr.trim())?;
    let lib = insert_function(lib, id, f).map_err(|e| Failure::error(e.to_string()))?;
    println!("{lib}");
    Ok(EXIT_OK)
}

fn cmd_refine(path: &std::path::Path, flags: &ComparatorFlags) -> Result<u8, Failure> {
    let lib = classified(path, flags)?;
    let mut widened = lib.config().clone();
    widened.max_samples *= 4;
    widened.epsilon /= 10.0;
    let lib = refine(lib, |a, b| comp(a, b, &widened).outcome);
    print!("{lib}");
    if !lib.is_empty() {
        println!();
    }
    Ok(EXIT_OK)
}

fn parse_bindings(src: &str) -> Result<HashMap<String, f64>, Failure> {
    let mut out = HashMap::new();
    for item in src.split(',') {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("--eval \"{item}\": expected \"name=value\"")))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(Failure::usage(format!("--eval \"{item}\": empty name")));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("--eval \"{item}\": not a decimal value")))?;
        out.insert(name.to_owned(), value);
    }
    Ok(out)
}

fn cmd_compose(
    registry: &std::path::Path,
    expr: &str,
    emit_to: Option<&std::path::Path>,
    eval: Option<&str>,
) -> Result<u8, Failure> {
    let reg = load_registry(registry, &ComparatorConfig::default())
        .map_err(|e| Failure::error(format!("{}: {e}", registry.display())))?;
    let e: ordo_core::Expr = expr
        .parse()
        .map_err(|err| Failure::error(format!("--expr \"{expr}\": {err}")))?;
    let plan = compose(&e, &reg).map_err(|err| Failure::error(err.to_string()))?;
    let text = emit_plan(&plan);
    println!("{text}");
    if let Some(path) = emit_to {
        std::fs::write(path, format!("{text}\n"))
            .map_err(|err| Failure::error(format!("{}: {err}", path.display())))?;
    }
    if let Some(bindings) = eval {
        let b = parse_bindings(bindings)?;
        let value = execute_plan(&plan, &b).map_err(|err| Failure::error(err.to_string()))?;
        println!("value: {value}");
    }
    Ok(EXIT_OK)
}
