//! The `flux` command-line frontend.
//!
//! Four subcommands share one pipeline: load the schema, parse the script
//! (source syntax by default, core with `--core`), and then check, run,
//! normalize, or analyze.  A source script addresses the document through
//! a synthetic root element wrapped around it, so a path step like `db`
//! selects a top-level `db` document; a core script transforms the
//! document forest directly.
//!
//! Exit codes: 0 success, 1 unreadable input, 2 type error, 3 runtime
//! failure.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser as ClapParser, Subcommand};
use serde_json::json;

use crate::diag::{Class, Code, Diag, Result};
use crate::patherr::{self, Labeled};
use crate::source::normalize_stmt;
use crate::source_typing::SrcChecker;
use crate::syntax::{
    parse_core_script, parse_schema, parse_source_script, parse_value, ParseOptions,
};
use crate::types::{Atom, Signature, Type};
use crate::typing::{Arity, Checker, TypeEnv};
use crate::update::{exec_update_with, Options, Procs, Stmt, DEFAULT_FUEL};
use crate::value::{parse_xml, write_xml, Forest, Tree};

/// Label of the synthetic element wrapped around the document forest.  Not
/// a valid element name, so user documents and scripts can never mention it.
pub const ROOT_LABEL: &str = "#document";

#[derive(ClapParser, Debug)]
#[command(
    name = "flux",
    version,
    about = "Typed functional XML updates: check, run, normalize, and analyze update scripts"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Typecheck a script against a schema and print the resulting document type.
    Check(CommonArgs),
    /// Typecheck, then run a script on an input document.
    Run(RunArgs),
    /// Translate a source script to the core language.
    Normalize(CommonArgs),
    /// Report dead subexpressions (update path-errors).
    Analyze(AnalyzeArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Schema file: `type X = τ` lines followed by `schema τ`.
    #[arg(long)]
    schema: PathBuf,
    /// Update script.
    #[arg(long)]
    script: PathBuf,
    /// Treat the script as core syntax (with optional procedure declarations).
    #[arg(long)]
    core: bool,
    /// Step budget for execution.
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    /// Emit machine-readable JSON records (one per line).
    #[arg(long)]
    json: bool,
    /// Accept `transform e by { s }` query expressions.
    #[arg(long)]
    enable_transform: bool,
    /// Write output here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Input document (XML, or native value syntax if it does not start with `<`).
    #[arg(long)]
    input: PathBuf,
    /// Skip typechecking and schema validation.
    #[arg(long)]
    unchecked: bool,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also write the script with every reported subexpression replaced by `skip`.
    #[arg(long)]
    optimize: bool,
    /// Additionally analyze each procedure body in isolation (core scripts).
    #[arg(long)]
    include_procs: bool,
}

/// Search `FLUX_SCHEMA_PATH` (colon-separated) when a schema path does not
/// resolve as given.
fn resolve_schema_path(path: &FsPath) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    if let Ok(dirs) = std::env::var("FLUX_SCHEMA_PATH") {
        for dir in dirs.split(':').filter(|d| !d.is_empty()) {
            let candidate = FsPath::new(dir).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

fn read_file(path: &FsPath) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Diag::new(Code::Io, format!("cannot read `{}`: {e}", path.display())))
}

fn write_output(target: &Option<PathBuf>, text: &str) -> Result<()> {
    match target {
        Some(path) => fs::write(path, text)
            .map_err(|e| Diag::new(Code::Io, format!("cannot write `{}`: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

struct Loaded {
    sig: Signature,
    doc_ty: Type,
    procs: Procs,
    /// The statement to check/run, in core form.
    core: Stmt,
    /// The source form, when the script was source syntax.
    source: Option<crate::source::SrcStmt>,
}

fn load(common: &CommonArgs) -> Result<Loaded> {
    let schema_path = resolve_schema_path(&common.schema);
    let (sig, doc_ty) = parse_schema(&read_file(&schema_path)?)
        .map_err(|d| d.context(format!("{}", schema_path.display())))?;
    let script_text = read_file(&common.script)?;
    let opts = ParseOptions {
        enable_transform: common.enable_transform,
    };
    let in_script = |d: Diag| d.context(format!("{}", common.script.display()));
    if common.core {
        let (procs, stmt) = parse_core_script(&script_text, opts).map_err(in_script)?;
        Ok(Loaded {
            sig,
            doc_ty,
            procs,
            core: stmt,
            source: None,
        })
    } else {
        let stmt = parse_source_script(&script_text, opts).map_err(in_script)?;
        Ok(Loaded {
            sig,
            doc_ty,
            procs: Procs::new(),
            core: normalize_stmt(&stmt),
            source: Some(stmt),
        })
    }
}

fn root_atom(doc_ty: &Type) -> Type {
    Type::elem(ROOT_LABEL, doc_ty.clone())
}

/// Strip the synthetic root from a result type.  Conditional updates
/// produce alternations of rooted atoms.
fn strip_root(ty: &Type) -> Result<Type> {
    match ty {
        Type::Atom(Atom::Elem(n, body)) if n == ROOT_LABEL => Ok((**body).clone()),
        Type::Alt(l, r) => Ok(Type::alt(strip_root(l)?, strip_root(r)?)),
        other => Err(Diag::new(
            Code::TypeError,
            format!("update result is not a document: {other}"),
        )),
    }
}

/// Typecheck the loaded script; returns the resulting document type.
///
/// Source scripts address the document through the synthetic root (so a
/// step like `db` selects the document); core scripts transform the
/// document forest directly, at plural arity.
fn check(loaded: &Loaded) -> Result<Type> {
    match &loaded.source {
        Some(src) => {
            let rooted = root_atom(&loaded.doc_ty);
            let mut checker = SrcChecker::new(loaded.sig.clone(), &loaded.procs);
            let out = checker.check_compound(&TypeEnv::new(), &rooted, src)?;
            for span in checker.empty_splits() {
                eprintln!("warning: {span}: path step matches nothing in the input type");
            }
            strip_root(&out)
        }
        None => {
            let mut checker = Checker::new(loaded.sig.clone(), &loaded.procs);
            checker.check_declarations()?;
            checker.update_type(&TypeEnv::new(), Arity::Plural, &loaded.doc_ty, &loaded.core)
        }
    }
}

fn emit_diag(diag: &Diag, json: bool) {
    if json {
        let record = json!({
            "kind": match diag.code.class() {
                Class::Syntax => "syntax",
                Class::Type => "type",
                Class::Runtime => "runtime",
            },
            "code": diag.code.name(),
            "line": diag.span.map(|s| s.line),
            "col": diag.span.map(|s| s.col),
            "message": diag.message,
            "expected": diag.expected,
            "found": diag.found,
        });
        println!("{record}");
    } else {
        eprintln!("error: {diag}");
    }
}

fn cmd_check(args: &CommonArgs) -> Result<()> {
    let loaded = load(args)?;
    let ty = check(&loaded)?.simplified();
    if args.json {
        let record = json!({ "kind": "result-type", "type": ty.to_string() });
        write_output(&args.output, &format!("{record}\n"))
    } else {
        write_output(&args.output, &format!("{ty}\n"))
    }
}

fn load_document(path: &FsPath) -> Result<Forest> {
    let text = read_file(path)?;
    if text.trim_start().starts_with('<') {
        parse_xml(&text)
    } else {
        parse_value(&text)
    }
    .map_err(|d| d.context(format!("{}", path.display())))
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let loaded = load(&args.common)?;
    let doc = load_document(&args.input)?;
    if !args.unchecked {
        check(&loaded)?;
        let mut ctx = crate::inclusion::TypeCtx::new(loaded.sig.clone());
        if !ctx.member(&doc, &loaded.doc_ty)? {
            return Err(Diag::new(
                Code::TypeError,
                format!(
                    "input document does not match the schema type {}",
                    loaded.doc_ty
                ),
            ));
        }
    }
    let env = crate::value::Env::new();
    let options = Options {
        fuel: args.common.fuel,
        ..Options::default()
    };
    let result = if loaded.source.is_some() {
        let rooted = Forest::singleton(Tree::elem(ROOT_LABEL, doc));
        let out = exec_update_with(&env, &rooted, &loaded.core, &loaded.procs, options)?;
        match out.as_singleton() {
            Some(Tree::Elem(n, children)) if n == ROOT_LABEL => children.clone(),
            _ => {
                return Err(Diag::new(
                    Code::Stuck,
                    "update did not preserve the document root",
                ))
            }
        }
    } else {
        exec_update_with(&env, &doc, &loaded.core, &loaded.procs, options)?
    };
    write_output(&args.common.output, &write_xml(&result)?)
}

fn cmd_normalize(args: &CommonArgs) -> Result<()> {
    let loaded = load(args)?;
    match &loaded.source {
        Some(src) => {
            let core = normalize_stmt(src);
            write_output(&args.output, &format!("{core}\n"))
        }
        None => write_output(&args.output, &format!("{}\n", loaded.core)),
    }
}

struct Report {
    span: Option<crate::diag::Span>,
    label: usize,
    input_ty: Option<Type>,
}

/// Hide the synthetic root wrapper from displayed types.
fn display_ty(ty: &Type) -> Type {
    match ty {
        Type::Atom(Atom::Elem(n, body)) if n == ROOT_LABEL => (**body).clone(),
        other => other.clone(),
    }
    .simplified()
}

fn analyze_statement(
    sig: &Signature,
    procs: &Procs,
    env: &TypeEnv,
    arity: Arity,
    input: &Type,
    stmt: &Stmt,
) -> Result<(Labeled, Vec<Report>)> {
    let labeled = patherr::label_statement(stmt);
    let analysis = patherr::analyze(env, arity, input, &labeled, procs, sig)?;
    let reported = patherr::report_errors(&labeled, &analysis.unproductive);
    // Normalization expands one source construct into several core nodes
    // sharing a span; report each position once (outermost node first).
    let mut seen_spans = std::collections::HashSet::new();
    let reports = reported
        .iter()
        .filter(|&&l| {
            let span = labeled.span_of(l);
            seen_spans.insert(span)
        })
        .map(|&l| Report {
            span: labeled.span_of(l).filter(|s| !s.is_unknown()),
            label: l,
            input_ty: analysis.input_types.get(&l).cloned(),
        })
        .collect();
    Ok((labeled, reports))
}

fn print_reports(scope: &str, reports: &[Report], json: bool, out: &mut String) {
    for r in reports {
        let span = r
            .span
            .map(|s| s.to_string())
            .unwrap_or_else(|| "?:?".to_string());
        let ty = r
            .input_ty
            .as_ref()
            .map(|t| display_ty(t).to_string())
            .unwrap_or_else(|| "?".to_string());
        if json {
            let record = json!({
                "kind": "path-error",
                "scope": scope,
                "line": r.span.map(|s| s.line),
                "col": r.span.map(|s| s.col),
                "label": r.label,
                "input_type": ty,
            });
            out.push_str(&format!("{record}\n"));
        } else if scope.is_empty() {
            out.push_str(&format!(
                "path-error at {span}: subexpression is dead under input type {ty}\n"
            ));
        } else {
            out.push_str(&format!(
                "path-error at {span} (in {scope}): subexpression is dead under input type {ty}\n"
            ));
        }
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let loaded = load(&args.common)?;
    check(&loaded)?;
    let env = TypeEnv::new();
    let (arity, input) = if loaded.source.is_some() {
        (Arity::Singular, root_atom(&loaded.doc_ty))
    } else {
        (Arity::Plural, loaded.doc_ty.clone())
    };
    let (labeled, reports) = analyze_statement(
        &loaded.sig,
        &loaded.procs,
        &env,
        arity,
        &input,
        &loaded.core,
    )?;
    let mut out = String::new();
    print_reports("", &reports, args.common.json, &mut out);
    let mut optimized = None;
    if args.optimize {
        // optimize over the full label set, not the span-deduplicated one
        let analysis = patherr::analyze(&env, arity, &input, &labeled, &loaded.procs, &loaded.sig)?;
        let labels = patherr::report_errors(&labeled, &analysis.unproductive);
        optimized = Some(patherr::optimize(&labeled, &labels));
    }
    if args.include_procs {
        for decl in loaded.procs.iter() {
            let mut penv = TypeEnv::new();
            for (param, ty) in &decl.params {
                penv = penv.with_forest(param, ty.clone());
            }
            let (_, preports) = analyze_statement(
                &loaded.sig,
                &loaded.procs,
                &penv,
                Arity::Plural,
                &decl.input,
                &decl.body,
            )?;
            print_reports(
                &format!("procedure {}", decl.name),
                &preports,
                args.common.json,
                &mut out,
            );
        }
    }
    if reports.is_empty() && !args.common.json && !args.include_procs {
        out.push_str("no path-errors\n");
    }
    if let Some(opt) = optimized {
        out.push_str(&format!("{opt}\n"));
    }
    write_output(&args.common.output, &out)
}

/// Run the CLI; returns the process exit code.
pub fn main_with(cli: Cli) -> u8 {
    let (result, json) = match &cli.command {
        Command::Check(args) => (cmd_check(args), args.json),
        Command::Run(args) => (cmd_run(args), args.common.json),
        Command::Normalize(args) => (cmd_normalize(args), args.json),
        Command::Analyze(args) => (cmd_analyze(args), args.common.json),
    };
    match result {
        Ok(()) => 0,
        Err(diag) => {
            emit_diag(&diag, json);
            match diag.code.class() {
                Class::Syntax => 1,
                Class::Type => 2,
                Class::Runtime => 3,
            }
        }
    }
}

pub fn run() -> u8 {
    main_with(Cli::parse())
}

/// The set of unproductive labels for a checked statement, exposed for
/// integration tests.
pub fn unproductive_labels(
    sig: &Signature,
    procs: &Procs,
    env: &TypeEnv,
    arity: Arity,
    input: &Type,
    stmt: &Stmt,
) -> Result<BTreeSet<usize>> {
    let labeled = patherr::label_statement(stmt);
    Ok(patherr::analyze(env, arity, input, &labeled, procs, sig)?.unproductive)
}
