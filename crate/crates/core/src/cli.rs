//! The `foc` command line: check, eval, ground and mx over `.foc` files.
//!
//! [`run`] writes to the given streams and returns the exit status, so the
//! whole surface is testable in-process.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::evaluator::{eval, with_definitions, VarAssignment};
use crate::grounder::{self, GroundError};
use crate::kernel::diag::has_errors;
use crate::kernel::{Diagnostic, Theory, Vocabulary};
use crate::parser::{self, pretty, SourceFile};
use crate::solver::{self, SolveConfig, SolveError, Status};
use crate::structures::{
    build_structure, extend_structure, load_structure, save_structure, structure_to_json, Structure,
    DEFAULT_EXPANSION_CAP,
};
use crate::typecheck::{check_term, check_theory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNSAT: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "foc", version, about = "Reasoning in first-order logic with concepts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Input {
    file: PathBuf,
    /// Structure block to use; the first one by default
    #[arg(long)]
    structure: Option<String>,
    /// Theory block to use; the first one by default
    #[arg(long)]
    theory: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and check every block of a file
    Check { file: PathBuf },
    /// Evaluate the axioms, or queries, in a structure
    Eval {
        #[command(flatten)]
        input: Input,
        /// A term or formula to evaluate instead of the axioms
        #[arg(long)]
        query: Vec<String>,
    },
    /// Print the ground constraints of a theory over a structure
    Ground {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
        /// Skip simplification
        #[arg(long)]
        raw: bool,
        #[arg(long, default_value_t = DEFAULT_EXPANSION_CAP)]
        cap: u128,
    },
    /// Expand a structure into models of a theory
    Mx {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1)]
        models: usize,
        /// Enumerate every model
        #[arg(long, conflicts_with = "models")]
        all: bool,
        #[arg(long, default_value_t = DEFAULT_EXPANSION_CAP)]
        cap: u128,
        /// Time limit in seconds
        #[arg(long)]
        time: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Exit with status 2 when there is no model
        #[arg(long)]
        expect_sat: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Emit {
    Text,
    Smt2,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// A failure that has already been written to the error stream, with its exit status.
struct Reported(i32);

type Step<T> = Result<T, Reported>;

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    color: bool,
    file: String,
}

impl Ctx<'_> {
    fn line(&mut self, text: &str) {
        if self.color {
            let _ = writeln!(self.err, "\x1b[31m{text}\x1b[0m");
        } else {
            let _ = writeln!(self.err, "{text}");
        }
    }

    /// Reports the diagnostics; fails if any of them is an error.
    fn diags(&mut self, ds: &[Diagnostic]) -> Step<()> {
        for d in ds {
            let text = d.render(&self.file);
            if d.is_error() {
                self.line(&text);
            } else {
                let _ = writeln!(self.err, "{text}");
            }
        }
        if has_errors(ds) {
            Err(Reported(EXIT_ERROR))
        } else {
            Ok(())
        }
    }

    fn fail(&mut self, code: &str, msg: impl Display) -> Reported {
        let text = format!("{}: {code}: {msg}", self.file);
        self.line(&text);
        Reported(EXIT_ERROR)
    }

    fn solve_error(&mut self, e: SolveError) -> Reported {
        match e {
            SolveError::Ground(GroundError::Invalid(ds)) => {
                let _ = self.diags(&ds);
                Reported(EXIT_ERROR)
            }
            // hitting the cap while grounding is a resource limit, like hitting it while searching
            e @ SolveError::Ground(GroundError::CombinatorialLimit { .. }) => {
                self.fail(e.code(), &e);
                Reported(EXIT_LIMIT)
            }
            e => self.fail(e.code(), e),
        }
    }

    fn read(&mut self, path: &Path) -> Step<SourceFile> {
        let src = match std::fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => return Err(self.fail("Io", e)),
        };
        let (file, ds) = parser::parse_with_recovery(&self.file, &src);
        self.diags(&ds)?;
        Ok(file)
    }

    fn theory<'f>(&mut self, file: &'f SourceFile, name: Option<&str>) -> Step<&'f Theory> {
        let found = match name {
            Some(n) => file.theories().find(|t| t.name == n),
            None => file.theories().next(),
        };
        match found {
            Some(t) => Ok(t),
            None => Err(self.fail("UnknownTheory", format!("no theory {}", name.unwrap_or("in file")))),
        }
    }

    /// The chosen structure, or an empty one over the theory's vocabulary
    /// when the file has no structure block.
    fn structure(&mut self, file: &SourceFile, theory: &Theory, name: Option<&str>) -> Step<Structure> {
        let s = if name.is_none() && file.structures().next().is_none() {
            let Some(voc) = file.vocabulary(&theory.vocabulary) else {
                return Err(self.fail("UnknownVocabulary", format!("unknown vocabulary `{}`", theory.vocabulary)));
            };
            build_structure(Arc::new(voc.clone()), &[])
        } else {
            load_structure(file, name)
        };
        let s = s.map_err(|ds| {
            let _ = self.diags(&ds);
            Reported(EXIT_ERROR)
        })?;
        if s.vocabulary().name != theory.vocabulary {
            let msg = format!("structure is over `{}` but theory `{}` is over `{}`", s.vocabulary().name, theory.name, theory.vocabulary);
            return Err(self.fail("ConflictError", msg));
        }
        Ok(s)
    }

    fn checked(&mut self, voc: &Vocabulary, theory: &Theory) -> Step<()> {
        self.diags(&check_theory(voc, theory))
    }
}

fn check(cx: &mut Ctx, path: &Path) -> Step<()> {
    let file = cx.read(path)?;
    let mut ok = true;
    let mut theories = 0;
    for t in file.theories() {
        theories += 1;
        match file.vocabulary(&t.vocabulary) {
            Some(voc) => ok &= cx.checked(voc, t).is_ok(),
            None => {
                cx.fail("UnknownVocabulary", format!("theory `{}` is over unknown vocabulary `{}`", t.name, t.vocabulary));
                ok = false;
            }
        }
    }
    let mut structures = 0;
    for s in file.structures() {
        structures += 1;
        if let Err(ds) = load_structure(&file, Some(&s.name)) {
            ok &= cx.diags(&ds).is_ok();
        }
    }
    if !ok {
        return Err(Reported(EXIT_ERROR));
    }
    let vocabularies = file.vocabularies().count();
    let _ = writeln!(cx.out, "ok: {vocabularies} vocabularies, {theories} theories, {structures} structures");
    Ok(())
}

/// The structure with the theory's own assignments and, where the input
/// leaves them open, the defined symbols filled in.
fn completed(cx: &mut Ctx, theory: &Theory, s: &Structure) -> Step<Structure> {
    let own: Vec<_> = theory.assignments.iter().collect();
    let mut s = extend_structure(s, &own).map_err(|ds| {
        let _ = cx.diags(&ds);
        Reported(EXIT_ERROR)
    })?;
    let voc = s.vocabulary_arc().clone();
    let open_defined =
        theory.definitions.iter().any(|d| voc.symbol_id(d.symbol()).is_some_and(|sym| !s.is_interpreted(sym)));
    if open_defined {
        let fix = with_definitions(&s, &theory.definitions).map_err(|e| cx.fail(e.code(), e))?;
        for d in &theory.definitions {
            if let Some(sym) = voc.symbol_id(d.symbol()) {
                if !s.is_interpreted(sym) {
                    let table = fix.table(sym).expect("fixpoint is total").clone();
                    s.set_table(sym, table).expect("same shape");
                }
            }
        }
    }
    Ok(s)
}

fn eval_cmd(cx: &mut Ctx, input: &Input, queries: &[String]) -> Step<()> {
    let file = cx.read(&input.file)?;
    let theory = cx.theory(&file, input.theory.as_deref())?;
    let s = cx.structure(&file, theory, input.structure.as_deref())?;
    cx.checked(s.vocabulary(), theory)?;
    let full = completed(cx, theory, &s)?;
    if !queries.is_empty() {
        for q in queries {
            let e = parser::parse_expr(full.vocabulary(), q, &[]).map_err(|ds| {
                let _ = cx.diags(&ds);
                Reported(EXIT_ERROR)
            })?;
            check_term(full.vocabulary(), &full.typing_context(), &e).map_err(|ds| {
                let _ = cx.diags(&ds);
                Reported(EXIT_ERROR)
            })?;
            let v = eval(&full, &mut VarAssignment::new(), &e);
            let shown = v.map(|v| full.show(v)).unwrap_or_else(|| "undefined".into());
            let _ = writeln!(cx.out, "{} = {shown}", pretty::expr(&e));
        }
        return Ok(());
    }
    let report = solver::check_model(theory, &full).map_err(|e| cx.solve_error(e))?;
    for a in &report.axioms {
        let verdict = match &a.holds {
            Ok(b) => b.to_string(),
            Err(_) => "undefined".to_string(),
        };
        let _ = writeln!(cx.out, "{verdict}: {}", a.text);
    }
    for name in &report.definition_mismatches {
        let _ = writeln!(cx.out, "false: definition of {name}");
    }
    if let Some(e) = &report.definition_error {
        return Err(cx.fail(e.code(), e));
    }
    Ok(())
}

fn ground_cmd(cx: &mut Ctx, input: &Input, emit: Emit, raw: bool, cap: u128) -> Step<()> {
    let file = cx.read(&input.file)?;
    let theory = cx.theory(&file, input.theory.as_deref())?;
    let s = cx.structure(&file, theory, input.structure.as_deref())?;
    let g = grounder::ground_with_cap(theory, &s, cap).map_err(|e| cx.solve_error(e.into()))?;
    let g = if raw { g } else { grounder::simplify(&g) };
    let text = match emit {
        Emit::Text => grounder::render(&g),
        Emit::Smt2 => grounder::smt2(&g),
    };
    let _ = cx.out.write_all(text.as_bytes());
    Ok(())
}

struct MxOptions {
    cfg: SolveConfig,
    format: Format,
    expect_sat: bool,
}

fn mx_cmd(cx: &mut Ctx, input: &Input, opts: &MxOptions) -> Step<i32> {
    let file = cx.read(&input.file)?;
    let theory = cx.theory(&file, input.theory.as_deref())?;
    let s = cx.structure(&file, theory, input.structure.as_deref())?;
    let r = solver::model_expand(theory, &s, &opts.cfg).map_err(|e| cx.solve_error(e))?;
    match opts.format {
        Format::Text => {
            for m in &r.models {
                let _ = writeln!(cx.out, "{}", save_structure(m));
            }
            let n = r.models.len();
            let plural = if n == 1 { "" } else { "s" };
            let _ = writeln!(cx.out, "{}: {n} model{plural}", r.status.as_str());
        }
        Format::Json => {
            let doc = json!({
                "status": r.status.as_str(),
                "count": r.models.len(),
                "models": r.models.iter().map(structure_to_json).collect::<Vec<_>>(),
                "decisions": r.stats.decisions,
                "propagations": r.stats.propagations,
            });
            let _ = writeln!(cx.out, "{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
    }
    Ok(match r.status {
        Status::Capped | Status::Timeout => EXIT_LIMIT,
        Status::Unsat if opts.expect_sat => EXIT_UNSAT,
        _ => EXIT_OK,
    })
}

/// Runs one invocation. Colors error lines when `FOC_COLOR=1`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let color = std::env::var("FOC_COLOR").is_ok_and(|v| v == "1");
    let path = match &cli.command {
        Command::Check { file } => file,
        Command::Eval { input, .. } | Command::Ground { input, .. } | Command::Mx { input, .. } => &input.file,
    };
    let mut cx = Ctx { out, err, color, file: path.display().to_string() };
    let status = match &cli.command {
        Command::Check { file } => check(&mut cx, file).map(|()| EXIT_OK),
        Command::Eval { input, query } => eval_cmd(&mut cx, input, query).map(|()| EXIT_OK),
        Command::Ground { input, emit, raw, cap } => ground_cmd(&mut cx, input, *emit, *raw, *cap).map(|()| EXIT_OK),
        Command::Mx { input, models, all, cap, time, format, expect_sat } => {
            let time_limit = match time {
                Some(t) if !(t.is_finite() && *t >= 0.0) => {
                    let _ = writeln!(cx.err, "error: --time expects a non-negative number of seconds");
                    return EXIT_USAGE;
                }
                t => t.map(Duration::from_secs_f64),
            };
            let cfg = SolveConfig { max_models: if *all { 0 } else { *models }, expansion_cap: *cap, time_limit };
            mx_cmd(&mut cx, input, &MxOptions { cfg, format: *format, expect_sat: *expect_sat })
        }
    };
    let _ = cx.out.flush();
    status.unwrap_or_else(|Reported(code)| code)
}

/// Stack size for the thread running [`run`]; very deep formulas recurse far.
pub const STACK_SIZE: usize = 256 << 20;
