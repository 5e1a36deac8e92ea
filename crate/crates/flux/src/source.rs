//! The high-level update language and its normalization to core statements.
//!
//! A simple update pairs a path with a small core kernel; normalization
//! expands the path into `children`/`iter`/test navigation around that
//! kernel.  `WHERE` clauses are sugar: the condition becomes a filter on the
//! update's path, inside the scope of every variable the path binds.
//! Normalization is total on the grammar.

use std::fmt;

use crate::diag::Span;
use crate::query::{Expr, ExprSingle};
use crate::types::Test;
use crate::update::{Stmt, StmtKind};
use crate::value::Label;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Path {
    pub kind: PathKind,
    pub span: Span,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum PathKind {
    /// `.` — the current focus.
    Here,
    /// A child step: label, `node()` (also written `*`), or `text()`.
    Step(Test),
    Slash(Box<Path>, Box<Path>),
    /// `p[e]` — keep matches of `p` satisfying `e`.
    Filter(Box<Path>, Expr),
    /// `$x AS p` — bind each match of `p` to `$x`.
    Bind(String, Box<Path>),
}

impl Path {
    pub fn new(kind: PathKind) -> Path {
        Path {
            kind,
            span: Span::default(),
        }
    }

    pub fn at(kind: PathKind, span: Span) -> Path {
        Path { kind, span }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Upd {
    pub kind: UpdKind,
    pub span: Span,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum UpdKind {
    InsertBefore(Path, Expr),
    InsertAfter(Path, Expr),
    InsertFirst(Path, Expr),
    InsertLast(Path, Expr),
    Delete(Path),
    DeleteFrom(Path),
    Rename(Path, Label),
    Replace(Path, Expr),
    ReplaceIn(Path, Expr),
    UpdateBy(Path, Box<SrcStmt>),
}

impl Upd {
    pub fn new(kind: UpdKind) -> Upd {
        Upd {
            kind,
            span: Span::default(),
        }
    }

    pub fn at(kind: UpdKind, span: Span) -> Upd {
        Upd { kind, span }
    }

    pub fn path(&self) -> &Path {
        match &self.kind {
            UpdKind::InsertBefore(p, _)
            | UpdKind::InsertAfter(p, _)
            | UpdKind::InsertFirst(p, _)
            | UpdKind::InsertLast(p, _)
            | UpdKind::Delete(p)
            | UpdKind::DeleteFrom(p)
            | UpdKind::Rename(p, _)
            | UpdKind::Replace(p, _)
            | UpdKind::ReplaceIn(p, _)
            | UpdKind::UpdateBy(p, _) => p,
        }
    }

    fn map_path(self, f: impl FnOnce(Path) -> Path) -> Upd {
        let span = self.span;
        let kind = match self.kind {
            UpdKind::InsertBefore(p, e) => UpdKind::InsertBefore(f(p), e),
            UpdKind::InsertAfter(p, e) => UpdKind::InsertAfter(f(p), e),
            UpdKind::InsertFirst(p, e) => UpdKind::InsertFirst(f(p), e),
            UpdKind::InsertLast(p, e) => UpdKind::InsertLast(f(p), e),
            UpdKind::Delete(p) => UpdKind::Delete(f(p)),
            UpdKind::DeleteFrom(p) => UpdKind::DeleteFrom(f(p)),
            UpdKind::Rename(p, n) => UpdKind::Rename(f(p), n),
            UpdKind::Replace(p, e) => UpdKind::Replace(f(p), e),
            UpdKind::ReplaceIn(p, e) => UpdKind::ReplaceIn(f(p), e),
            UpdKind::UpdateBy(p, s) => UpdKind::UpdateBy(f(p), s),
        };
        Upd { kind, span }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SrcStmt {
    pub kind: SrcStmtKind,
    pub span: Span,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum SrcStmtKind {
    /// An update with an optional `WHERE` guard.
    Upd(Upd, Option<Expr>),
    IfThen(Expr, Box<SrcStmt>),
    Seq(Box<SrcStmt>, Box<SrcStmt>),
    Let(String, Expr, Box<SrcStmt>),
    Block(Box<SrcStmt>),
}

impl SrcStmt {
    pub fn new(kind: SrcStmtKind) -> SrcStmt {
        SrcStmt {
            kind,
            span: Span::default(),
        }
    }

    pub fn at(kind: SrcStmtKind, span: Span) -> SrcStmt {
        SrcStmt { kind, span }
    }
}

/// `u WHERE cond` abbreviates `u` with its path wrapped in a filter, so the
/// condition sees every variable the path binds.
pub fn desugar_where(u: Upd, cond: Expr) -> Upd {
    u.map_path(|p| {
        let span = p.span;
        Path::at(PathKind::Filter(Box::new(p), cond), span)
    })
}

/// Recursively eliminate every `WHERE` clause.
pub fn desugar(s: SrcStmt) -> SrcStmt {
    let span = s.span;
    let kind = match s.kind {
        SrcStmtKind::Upd(u, Some(cond)) => {
            SrcStmtKind::Upd(desugar_upd(desugar_where(u, cond)), None)
        }
        SrcStmtKind::Upd(u, None) => SrcStmtKind::Upd(desugar_upd(u), None),
        SrcStmtKind::IfThen(e, body) => SrcStmtKind::IfThen(e, Box::new(desugar(*body))),
        SrcStmtKind::Seq(a, b) => SrcStmtKind::Seq(Box::new(desugar(*a)), Box::new(desugar(*b))),
        SrcStmtKind::Let(x, e, body) => SrcStmtKind::Let(x, e, Box::new(desugar(*body))),
        SrcStmtKind::Block(body) => SrcStmtKind::Block(Box::new(desugar(*body))),
    };
    SrcStmt { kind, span }
}

fn desugar_upd(u: Upd) -> Upd {
    match u.kind {
        UpdKind::UpdateBy(p, body) => Upd {
            kind: UpdKind::UpdateBy(p, Box::new(desugar(*body))),
            span: u.span,
        },
        _ => u,
    }
}

// -- normalization ------------------------------------------------------------

/// Statement normalization `⟦s⟧`.
pub fn normalize_stmt(s: &SrcStmt) -> Stmt {
    match &s.kind {
        SrcStmtKind::Upd(u, None) => normalize_upd(u),
        SrcStmtKind::Upd(u, Some(cond)) => normalize_upd(&desugar_where(u.clone(), cond.clone())),
        SrcStmtKind::IfThen(e, body) => Stmt::at(
            StmtKind::If(
                e.clone(),
                Box::new(normalize_stmt(body)),
                Box::new(Stmt::at(StmtKind::Skip, s.span)),
            ),
            s.span,
        ),
        SrcStmtKind::Seq(a, b) => Stmt::at(
            StmtKind::Seq(Box::new(normalize_stmt(a)), Box::new(normalize_stmt(b))),
            s.span,
        ),
        SrcStmtKind::Let(x, e, body) => Stmt::at(
            StmtKind::Let(x.clone(), e.clone(), Box::new(normalize_stmt(body))),
            s.span,
        ),
        SrcStmtKind::Block(body) => normalize_stmt(body),
    }
}

/// Simple update normalization `⟦u⟧`: expand the path around the kernel.
pub fn normalize_upd(u: &Upd) -> Stmt {
    let kernel = update_kernel(u);
    normalize_path(u.path(), kernel)
}

/// The core kernel a simple update applies at each path match.  `INSERT AS
/// FIRST` prepends (`left`) and `INSERT AS LAST` appends (`right`),
/// matching the operational behavior of the two directions.
pub fn update_kernel(u: &Upd) -> Stmt {
    let sp = u.span;
    let at = |kind| Stmt::at(kind, sp);
    match &u.kind {
        UpdKind::InsertBefore(_, e) => {
            at(StmtKind::Left(Box::new(at(StmtKind::Insert(e.clone())))))
        }
        UpdKind::InsertAfter(_, e) => {
            at(StmtKind::Right(Box::new(at(StmtKind::Insert(e.clone())))))
        }
        UpdKind::InsertFirst(_, e) => at(StmtKind::Children(Box::new(at(StmtKind::Left(
            Box::new(at(StmtKind::Insert(e.clone()))),
        ))))),
        UpdKind::InsertLast(_, e) => at(StmtKind::Children(Box::new(at(StmtKind::Right(
            Box::new(at(StmtKind::Insert(e.clone()))),
        ))))),
        UpdKind::Delete(_) => at(StmtKind::Delete),
        UpdKind::DeleteFrom(_) => at(StmtKind::Children(Box::new(at(StmtKind::Delete)))),
        UpdKind::Rename(_, n) => at(StmtKind::Rename(n.clone())),
        UpdKind::Replace(_, e) => at(StmtKind::Seq(
            Box::new(at(StmtKind::Delete)),
            Box::new(at(StmtKind::Insert(e.clone()))),
        )),
        UpdKind::ReplaceIn(_, e) => at(StmtKind::Children(Box::new(at(StmtKind::Seq(
            Box::new(at(StmtKind::Delete)),
            Box::new(at(StmtKind::Insert(e.clone()))),
        ))))),
        UpdKind::UpdateBy(_, body) => normalize_stmt(body),
    }
}

/// Path normalization `⟦p⟧(s)`: navigate to `p`'s matches, then do `s`.
pub fn normalize_path(p: &Path, s: Stmt) -> Stmt {
    let sp = p.span;
    match &p.kind {
        PathKind::Here => s,
        PathKind::Slash(a, b) => normalize_path(a, normalize_path(b, s)),
        PathKind::Step(test) => Stmt::at(
            StmtKind::Children(Box::new(Stmt::at(
                StmtKind::Iter(Box::new(Stmt::at(
                    StmtKind::Test(test.clone(), Box::new(s)),
                    sp,
                ))),
                sp,
            ))),
            sp,
        ),
        PathKind::Filter(inner, e) => normalize_path(
            inner,
            Stmt::at(
                StmtKind::If(
                    e.clone(),
                    Box::new(s),
                    Box::new(Stmt::at(StmtKind::Skip, sp)),
                ),
                sp,
            ),
        ),
        PathKind::Bind(x, inner) => normalize_path(
            inner,
            Stmt::at(StmtKind::Snapshot(x.clone(), Box::new(s)), sp),
        ),
    }
}

// -- printing ----------------------------------------------------------------

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PathKind::Here => f.write_str("."),
            PathKind::Step(Test::Label(n)) => write!(f, "{n}"),
            PathKind::Step(Test::Node) => f.write_str("node()"),
            PathKind::Step(Test::Text) => f.write_str("text()"),
            PathKind::Slash(a, b) => write!(f, "{a}/{b}"),
            PathKind::Filter(p, e) => write!(f, "{p}[{}]", ExprSingle(e)),
            PathKind::Bind(x, p) => write!(f, "${x} AS {p}"),
        }
    }
}

impl fmt::Display for Upd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            UpdKind::InsertBefore(p, e) => write!(f, "INSERT BEFORE {p} VALUE {e}"),
            UpdKind::InsertAfter(p, e) => write!(f, "INSERT AFTER {p} VALUE {e}"),
            UpdKind::InsertFirst(p, e) => write!(f, "INSERT AS FIRST INTO {p} VALUE {e}"),
            UpdKind::InsertLast(p, e) => write!(f, "INSERT AS LAST INTO {p} VALUE {e}"),
            UpdKind::Delete(p) => write!(f, "DELETE {p}"),
            UpdKind::DeleteFrom(p) => write!(f, "DELETE FROM {p}"),
            UpdKind::Rename(p, n) => write!(f, "RENAME {p} TO {n}"),
            UpdKind::Replace(p, e) => write!(f, "REPLACE {p} WITH {e}"),
            UpdKind::ReplaceIn(p, e) => write!(f, "REPLACE IN {p} WITH {e}"),
            // The body is always braced so a following WHERE stays with the
            // outer update on reparse.
            UpdKind::UpdateBy(p, s) => match &s.kind {
                SrcStmtKind::Block(_) => write!(f, "UPDATE {p} BY {s}"),
                _ => write!(f, "UPDATE {p} BY {{ {s} }}"),
            },
        }
    }
}

impl fmt::Display for SrcStmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SrcStmtKind::Upd(u, None) => write!(f, "{u}"),
            SrcStmtKind::Upd(u, Some(cond)) => write!(f, "{u} WHERE {}", ExprSingle(cond)),
            SrcStmtKind::IfThen(e, body) => write!(f, "IF {} THEN {body}", ExprSingle(e)),
            SrcStmtKind::Seq(a, b) => write!(f, "{a}; {b}"),
            SrcStmtKind::Let(x, e, body) => write!(f, "LET ${x} := {} IN {body}", ExprSingle(e)),
            SrcStmtKind::Block(body) => write!(f, "{{ {body} }}"),
        }
    }
}
