//! The core query language: abstract syntax, big-step evaluation, and entry
//! points for query typechecking.
//!
//! Tree variables (bound by `for`) always hold single trees; forest
//! variables (bound by `let`, snapshots, path binders, and procedure
//! parameters) hold arbitrary forests.  The AST keeps the two apart.

use std::fmt;

use crate::diag::{Result, Span};
use crate::types::{Signature, Type};
use crate::typing::{Checker, TypeEnv};
use crate::update::{Interp, Options, Procs, Stmt};
use crate::value::{Env, Forest, Label};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ExprKind {
    Empty,
    Concat(Box<Expr>, Box<Expr>),
    Elem(Label, Box<Expr>),
    Text(String),
    Bool(bool),
    ForestVar(String),
    TreeVar(String),
    Let(String, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    /// `$x/child` for a tree variable `x`.
    ChildAxis(String),
    /// `e::n` keeps the `n`-labeled elements of `e`'s result.
    LabelFilter(Box<Expr>, Label),
    For(String, Box<Expr>, Box<Expr>),
    /// `transform e by { s }`: run update `s` on the value of `e`.
    Transform(Box<Expr>, Box<Stmt>),
}

impl Expr {
    pub fn new(kind: ExprKind) -> Expr {
        Expr {
            kind,
            span: Span::default(),
        }
    }

    pub fn at(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }
}

/// Evaluate a query under `env`.  Procedures are only consulted by
/// `transform` subexpressions.
pub fn eval_query(env: &Env, e: &Expr, procs: &Procs) -> Result<Forest> {
    Interp::new(procs, Options::default()).eval(env, e)
}

/// Infer the type of a query: `Γ ⊢ e : τ`.
pub fn infer_query_type(env: &TypeEnv, e: &Expr, sig: &Signature, procs: &Procs) -> Result<Type> {
    Checker::new(sig.clone(), procs).query_type(env, e)
}

/// The label projection judgment `τ::n ⇒ τ'`: the type of keeping only the
/// `n`-labeled elements of a forest of type `τ`.
pub fn label_project(ty: &Type, label: &str, sig: &Signature) -> Result<Type> {
    Checker::new(sig.clone(), &Procs::new()).label_project(ty, label)
}

/// The for-iteration typing judgment: the type of
/// `for $var in (_ : τ) return body`.
pub fn iterate_query_type(
    env: &TypeEnv,
    var: &str,
    ty: &Type,
    body: &Expr,
    sig: &Signature,
    procs: &Procs,
) -> Result<Type> {
    Checker::new(sig.clone(), procs).iter_query_type(env, var, ty, body)
}

// -- printing ----------------------------------------------------------------

// Precedence levels: 0 concat, 1 comparison, 2 postfix/primary.  Binder
// forms print like primaries but parenthesize when used as operands.
fn fmt_expr(e: &Expr, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    match &e.kind {
        ExprKind::Empty => f.write_str("()"),
        ExprKind::Concat(l, r) => {
            if prec > 0 {
                f.write_str("(")?;
            }
            fmt_expr(l, f, 1)?;
            f.write_str(", ")?;
            fmt_expr(r, f, 0)?;
            if prec > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        ExprKind::Elem(n, body) => {
            if body.kind == ExprKind::Empty {
                write!(f, "{n}[]")
            } else {
                write!(f, "{n}[")?;
                fmt_expr(body, f, 0)?;
                f.write_str("]")
            }
        }
        ExprKind::Text(s) => {
            f.write_str("\"")?;
            for c in s.chars() {
                match c {
                    '"' => f.write_str("\\\"")?,
                    '\\' => f.write_str("\\\\")?,
                    '\n' => f.write_str("\\n")?,
                    '\t' => f.write_str("\\t")?,
                    _ => write!(f, "{c}")?,
                }
            }
            f.write_str("\"")
        }
        ExprKind::Bool(b) => write!(f, "{b}"),
        ExprKind::ForestVar(x) | ExprKind::TreeVar(x) => write!(f, "${x}"),
        ExprKind::ChildAxis(x) => write!(f, "${x}/child"),
        ExprKind::LabelFilter(inner, n) => {
            fmt_expr(inner, f, 2)?;
            write!(f, "::{n}")
        }
        ExprKind::Eq(l, r) => {
            if prec > 1 {
                f.write_str("(")?;
            }
            fmt_expr(l, f, 2)?;
            f.write_str(" = ")?;
            fmt_expr(r, f, 2)?;
            if prec > 1 {
                f.write_str(")")?;
            }
            Ok(())
        }
        ExprKind::Let(x, bound, body) => {
            if prec > 0 {
                f.write_str("(")?;
            }
            write!(f, "let ${x} := ")?;
            fmt_expr(bound, f, 1)?;
            f.write_str(" return ")?;
            fmt_expr(body, f, 1)?;
            if prec > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        ExprKind::If(c, t, e2) => {
            if prec > 0 {
                f.write_str("(")?;
            }
            f.write_str("if ")?;
            fmt_expr(c, f, 1)?;
            f.write_str(" then ")?;
            fmt_expr(t, f, 1)?;
            f.write_str(" else ")?;
            fmt_expr(e2, f, 1)?;
            if prec > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        ExprKind::For(x, seq, body) => {
            if prec > 0 {
                f.write_str("(")?;
            }
            write!(f, "for ${x} in ")?;
            fmt_expr(seq, f, 1)?;
            f.write_str(" return ")?;
            fmt_expr(body, f, 1)?;
            if prec > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        ExprKind::Transform(input, s) => {
            if prec > 0 {
                f.write_str("(")?;
            }
            f.write_str("transform ")?;
            fmt_expr(input, f, 1)?;
            write!(f, " by {{ {s} }}")?;
            if prec > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, f, 0)
    }
}

/// Prints an expression in "single expression" position (binder bodies,
/// conditions, call arguments): top-level concatenation gets parentheses.
pub(crate) struct ExprSingle<'a>(pub &'a Expr);

impl fmt::Display for ExprSingle<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self.0, f, 1)
    }
}
