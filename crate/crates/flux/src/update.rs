//! The core update language: statements, procedures, and the interpreter.
//!
//! An update transforms a *focus* (a forest) into a new forest.  Navigation
//! operators move the focus: `children` into an element's child list,
//! `iter` over each tree of a forest, `left`/`right` to the empty forest at
//! either edge.  The semantics is purely value-based; execution never
//! mutates its input.

use std::collections::HashMap;
use std::fmt;

use crate::diag::{Code, Diag, Result, Span};
use crate::query::{Expr, ExprKind, ExprSingle};
use crate::types::{test_member, Test, Type};
use crate::value::{Env, Forest, Label, Tree};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum StmtKind {
    Skip,
    Seq(Box<Stmt>, Box<Stmt>),
    If(Expr, Box<Stmt>, Box<Stmt>),
    Let(String, Expr, Box<Stmt>),
    Insert(Expr),
    Delete,
    Rename(Label),
    Snapshot(String, Box<Stmt>),
    /// `φ?s`: run `s` if the focused tree matches `φ`, otherwise keep it.
    Test(Test, Box<Stmt>),
    Left(Box<Stmt>),
    Right(Box<Stmt>),
    Children(Box<Stmt>),
    Iter(Box<Stmt>),
    Call(String, Vec<Expr>),
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Stmt {
        Stmt {
            kind,
            span: Span::default(),
        }
    }

    pub fn at(kind: StmtKind, span: Span) -> Stmt {
        Stmt { kind, span }
    }

    pub fn skip() -> Stmt {
        Stmt::new(StmtKind::Skip)
    }

    pub fn seq(a: Stmt, b: Stmt) -> Stmt {
        let span = a.span;
        Stmt::at(StmtKind::Seq(Box::new(a), Box::new(b)), span)
    }

    pub fn is_skip(&self) -> bool {
        self.kind == StmtKind::Skip
    }
}

/// A procedure declaration `P($x:τ, ...) : τ1 => τ2 = s`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProcDecl {
    pub name: String,
    pub params: Vec<(String, Type)>,
    pub input: Type,
    pub output: Type,
    pub body: Stmt,
    pub span: Span,
}

/// Named procedure declarations; names are unique.
#[derive(Clone, Debug, Default)]
pub struct Procs {
    decls: Vec<ProcDecl>,
    index: HashMap<String, usize>,
}

impl Procs {
    pub fn new() -> Procs {
        Procs::default()
    }

    pub fn insert(&mut self, decl: ProcDecl) -> Result<()> {
        if self.index.contains_key(&decl.name) {
            return Err(
                Diag::new(Code::Syntax, format!("duplicate procedure `{}`", decl.name))
                    .at(decl.span),
            );
        }
        self.index.insert(decl.name.clone(), self.decls.len());
        self.decls.push(decl);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ProcDecl> {
        self.index.get(name).map(|&i| &self.decls[i])
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ProcDecl> {
        self.decls.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }
}

/// Traversal order for `iter`.  The result is assembled in document order
/// either way; the language guarantees traversal-order independence, and the
/// test suite checks it by running both orders.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum IterOrder {
    #[default]
    LeftToRight,
    RightToLeft,
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    /// Maximum number of statement rule applications; recursive procedures
    /// may otherwise diverge.
    pub fuel: u64,
    pub order: IterOrder,
    /// Nested procedure-call limit; keeps runaway recursion from exhausting
    /// the stack before it exhausts the fuel.
    pub max_call_depth: u32,
}

pub const DEFAULT_FUEL: u64 = 1_000_000;
pub const DEFAULT_MAX_CALL_DEPTH: u32 = 256;

impl Default for Options {
    fn default() -> Options {
        Options {
            fuel: DEFAULT_FUEL,
            order: IterOrder::default(),
            max_call_depth: DEFAULT_MAX_CALL_DEPTH,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum FocusStep {
    Iter(usize),
    Children,
}

/// The update/query interpreter.  Holds the remaining fuel and the focus
/// path used to describe stuck states.
pub struct Interp<'a> {
    procs: &'a Procs,
    fuel: u64,
    order: IterOrder,
    depth: u32,
    max_call_depth: u32,
    path: Vec<FocusStep>,
}

fn preview(v: &Forest) -> String {
    let s = v.to_string();
    if s.chars().count() > 40 {
        let cut: String = s.chars().take(40).collect();
        format!("{cut}…")
    } else {
        s
    }
}

impl<'a> Interp<'a> {
    pub fn new(procs: &'a Procs, options: Options) -> Interp<'a> {
        Interp {
            procs,
            fuel: options.fuel,
            order: options.order,
            depth: 0,
            max_call_depth: options.max_call_depth,
            path: Vec::new(),
        }
    }

    fn focus_desc(&self) -> String {
        if self.path.is_empty() {
            return "at the top-level focus".to_string();
        }
        let steps: Vec<String> = self
            .path
            .iter()
            .map(|s| match s {
                FocusStep::Iter(i) => format!("iter {i}"),
                FocusStep::Children => "children".to_string(),
            })
            .collect();
        format!("at focus path [{}]", steps.join(" > "))
    }

    fn stuck(&self, span: Span, msg: String, focus: &Forest) -> Diag {
        Diag::new(
            Code::Stuck,
            format!("{msg} {} (focus: {})", self.focus_desc(), preview(focus)),
        )
        .at(span)
    }

    fn tick(&mut self, span: Span) -> Result<()> {
        if self.fuel == 0 {
            return Err(Diag::new(Code::FuelExhausted, "step budget exhausted").at(span));
        }
        self.fuel -= 1;
        Ok(())
    }

    /// Big-step execution: `γ ⊢ v -s-> v'`.
    pub fn exec(&mut self, env: &Env, focus: &Forest, s: &Stmt) -> Result<Forest> {
        self.tick(s.span)?;
        match &s.kind {
            StmtKind::Skip => Ok(focus.clone()),
            StmtKind::Seq(a, b) => {
                let mid = self.exec(env, focus, a)?;
                self.exec(env, &mid, b)
            }
            StmtKind::If(c, then, els) => {
                let cond = self.eval(env, c)?;
                match cond.as_singleton() {
                    Some(Tree::Bool(true)) => self.exec(env, focus, then),
                    Some(Tree::Bool(false)) => self.exec(env, focus, els),
                    _ => Err(self.stuck(
                        c.span,
                        format!(
                            "condition evaluated to {} rather than a boolean",
                            preview(&cond)
                        ),
                        focus,
                    )),
                }
            }
            StmtKind::Let(x, e, body) => {
                let v = self.eval(env, e)?;
                self.exec(&env.with_forest(x, v), focus, body)
            }
            StmtKind::Insert(e) => {
                if !focus.is_empty() {
                    return Err(self.stuck(
                        s.span,
                        "insert requires the empty focus".to_string(),
                        focus,
                    ));
                }
                self.eval(env, e)
            }
            StmtKind::Delete => Ok(Forest::empty()),
            StmtKind::Rename(n) => match focus.as_singleton() {
                Some(Tree::Elem(_, children)) => {
                    Ok(Forest::singleton(Tree::Elem(n.clone(), children.clone())))
                }
                _ => Err(self.stuck(
                    s.span,
                    "rename requires a single element focus".to_string(),
                    focus,
                )),
            },
            StmtKind::Snapshot(x, body) => {
                self.exec(&env.with_forest(x, focus.clone()), focus, body)
            }
            StmtKind::Test(test, body) => match focus.as_singleton() {
                Some(t) => {
                    if test_member(t, test) {
                        self.exec(env, focus, body)
                    } else {
                        Ok(focus.clone())
                    }
                }
                None => Err(self.stuck(
                    s.span,
                    format!("test `{test}?` requires a single-tree focus"),
                    focus,
                )),
            },
            StmtKind::Children(body) => match focus.as_singleton() {
                Some(Tree::Elem(n, children)) => {
                    self.path.push(FocusStep::Children);
                    let out = self.exec(env, children, body);
                    self.path.pop();
                    Ok(Forest::singleton(Tree::Elem(n.clone(), out?)))
                }
                _ => Err(self.stuck(
                    s.span,
                    "children requires a single element focus".to_string(),
                    focus,
                )),
            },
            StmtKind::Left(body) => {
                let v = self.exec(env, &Forest::empty(), body)?;
                Ok(v.concat(focus))
            }
            StmtKind::Right(body) => {
                let v = self.exec(env, &Forest::empty(), body)?;
                Ok(focus.concat(&v))
            }
            StmtKind::Iter(body) => {
                let n = focus.len();
                let mut slots: Vec<Option<Forest>> = vec![None; n];
                let indices: Vec<usize> = match self.order {
                    IterOrder::LeftToRight => (0..n).collect(),
                    IterOrder::RightToLeft => (0..n).rev().collect(),
                };
                for i in indices {
                    self.path.push(FocusStep::Iter(i));
                    let out = self.exec(env, &Forest::singleton(focus.0[i].clone()), body);
                    self.path.pop();
                    slots[i] = Some(out?);
                }
                let mut items = Vec::new();
                for slot in slots {
                    items.extend(slot.expect("every slot visited").0);
                }
                Ok(Forest(items))
            }
            StmtKind::Call(name, args) => {
                let decl = self.procs.get(name).ok_or_else(|| {
                    Diag::new(
                        Code::UnknownProcedure,
                        format!("unknown procedure `{name}`"),
                    )
                    .at(s.span)
                })?;
                if args.len() != decl.params.len() {
                    return Err(Diag::new(
                        Code::TypeError,
                        format!(
                            "procedure `{name}` expects {} argument(s), got {}",
                            decl.params.len(),
                            args.len()
                        ),
                    )
                    .at(s.span));
                }
                let mut callee = env.clone();
                for ((param, _), arg) in decl.params.iter().zip(args) {
                    let v = self.eval(env, arg)?;
                    callee = callee.with_forest(param, v);
                }
                if self.depth >= self.max_call_depth {
                    return Err(Diag::new(
                        Code::FuelExhausted,
                        format!(
                            "procedure call depth exceeds {} (possible unbounded recursion)",
                            self.max_call_depth
                        ),
                    )
                    .at(s.span));
                }
                self.depth += 1;
                let out = self.exec(&callee, focus, &decl.body);
                self.depth -= 1;
                out
            }
        }
    }

    /// Big-step query evaluation: `⟦e⟧γ`.
    pub fn eval(&mut self, env: &Env, e: &Expr) -> Result<Forest> {
        match &e.kind {
            ExprKind::Empty => Ok(Forest::empty()),
            ExprKind::Concat(l, r) => Ok(self.eval(env, l)?.concat(&self.eval(env, r)?)),
            ExprKind::Elem(n, body) => {
                let children = self.eval(env, body)?;
                Ok(Forest::singleton(Tree::Elem(n.clone(), children)))
            }
            ExprKind::Text(w) => Ok(Forest::singleton(Tree::Text(w.clone()))),
            ExprKind::Bool(b) => Ok(Forest::singleton(Tree::Bool(*b))),
            ExprKind::ForestVar(x) => env.forest(x).cloned().ok_or_else(|| {
                Diag::new(Code::UnboundVariable, format!("unbound variable `${x}`")).at(e.span)
            }),
            ExprKind::TreeVar(x) => env
                .tree(x)
                .map(|t| Forest::singleton(t.clone()))
                .ok_or_else(|| {
                    Diag::new(Code::UnboundVariable, format!("unbound variable `${x}`")).at(e.span)
                }),
            ExprKind::Let(x, bound, body) => {
                let v = self.eval(env, bound)?;
                self.eval(&env.with_forest(x, v), body)
            }
            ExprKind::If(c, then, els) => {
                let cond = self.eval(env, c)?;
                match cond.as_singleton() {
                    Some(Tree::Bool(true)) => self.eval(env, then),
                    Some(Tree::Bool(false)) => self.eval(env, els),
                    _ => Err(Diag::new(
                        Code::Stuck,
                        format!(
                            "condition evaluated to {} rather than a boolean",
                            preview(&cond)
                        ),
                    )
                    .at(c.span)),
                }
            }
            ExprKind::Eq(l, r) => {
                let lv = self.eval(env, l)?;
                let rv = self.eval(env, r)?;
                Ok(Forest::singleton(Tree::Bool(lv == rv)))
            }
            ExprKind::ChildAxis(x) => env.tree(x).map(Tree::children).ok_or_else(|| {
                Diag::new(Code::UnboundVariable, format!("unbound variable `${x}`")).at(e.span)
            }),
            ExprKind::LabelFilter(inner, n) => {
                let v = self.eval(env, inner)?;
                Ok(v.iter()
                    .filter(|t| matches!(t, Tree::Elem(m, _) if m == n))
                    .cloned()
                    .collect())
            }
            ExprKind::For(x, seq, body) => {
                let v = self.eval(env, seq)?;
                v.try_for_each(|t| self.eval(&env.with_tree(x, t.clone()), body))
            }
            ExprKind::Transform(input, s) => {
                let v = self.eval(env, input)?;
                self.exec(env, &v, s)
            }
        }
    }
}

/// Execute update `s` on `focus` with default options.
pub fn exec_update(
    env: &Env,
    focus: &Forest,
    s: &Stmt,
    procs: &Procs,
    fuel: u64,
) -> Result<Forest> {
    exec_update_with(
        env,
        focus,
        s,
        procs,
        Options {
            fuel,
            ..Options::default()
        },
    )
}

/// Execute update `s` with explicit options (fuel and iteration order).
pub fn exec_update_with(
    env: &Env,
    focus: &Forest,
    s: &Stmt,
    procs: &Procs,
    options: Options,
) -> Result<Forest> {
    Interp::new(procs, options).exec(env, focus, s)
}

// -- printing ----------------------------------------------------------------

// `;` is the loosest statement operator; `φ?s` and the prefix forms bind
// tighter.  Braces group.
fn fmt_stmt(s: &Stmt, f: &mut fmt::Formatter<'_>, top: bool) -> fmt::Result {
    match &s.kind {
        StmtKind::Seq(a, b) => {
            if !top {
                f.write_str("{ ")?;
            }
            fmt_stmt(a, f, false)?;
            f.write_str("; ")?;
            // Right-nested sequences print flat.
            if matches!(b.kind, StmtKind::Seq(..)) {
                fmt_stmt(b, f, true)?;
            } else {
                fmt_stmt(b, f, false)?;
            }
            if !top {
                f.write_str(" }")?;
            }
            Ok(())
        }
        StmtKind::Skip => f.write_str("skip"),
        StmtKind::If(c, a, b) => {
            write!(f, "if {} then ", ExprSingle(c))?;
            fmt_stmt(a, f, false)?;
            f.write_str(" else ")?;
            fmt_stmt(b, f, false)
        }
        StmtKind::Let(x, e, body) => {
            write!(f, "let ${x} := {} in ", ExprSingle(e))?;
            fmt_stmt(body, f, false)
        }
        StmtKind::Insert(e) => write!(f, "insert {e}"),
        StmtKind::Delete => f.write_str("delete"),
        StmtKind::Rename(n) => write!(f, "rename {n}"),
        StmtKind::Snapshot(x, body) => {
            write!(f, "snapshot ${x} in ")?;
            fmt_stmt(body, f, false)
        }
        StmtKind::Test(test, body) => {
            write!(f, "{test}?")?;
            fmt_stmt(body, f, false)
        }
        StmtKind::Left(body) => {
            f.write_str("left[")?;
            fmt_stmt(body, f, true)?;
            f.write_str("]")
        }
        StmtKind::Right(body) => {
            f.write_str("right[")?;
            fmt_stmt(body, f, true)?;
            f.write_str("]")
        }
        StmtKind::Children(body) => {
            f.write_str("children[")?;
            fmt_stmt(body, f, true)?;
            f.write_str("]")
        }
        StmtKind::Iter(body) => {
            f.write_str("iter[")?;
            fmt_stmt(body, f, true)?;
            f.write_str("]")
        }
        StmtKind::Call(name, args) => {
            write!(f, "{name}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", ExprSingle(a))?;
            }
            f.write_str(")")
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_stmt(self, f, true)
    }
}

impl fmt::Display for ProcDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "procedure {}(", self.name)?;
        for (i, (x, ty)) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "${x}:{ty}")?;
        }
        write!(f, ") : {} => {} = {}", self.input, self.output, self.body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(kind: StmtKind) -> Stmt {
        Stmt::new(kind)
    }

    fn elem(n: &str, children: Vec<Tree>) -> Tree {
        Tree::elem(n, Forest(children))
    }

    fn run(focus: Forest, stmt: &Stmt) -> Result<Forest> {
        exec_update(&Env::new(), &focus, stmt, &Procs::new(), 10_000)
    }

    #[test]
    fn skip_is_identity() {
        let v = Forest(vec![elem("a", vec![]), Tree::text("w")]);
        assert_eq!(run(v.clone(), &Stmt::skip()).unwrap(), v);
    }

    #[test]
    fn rename_relabels_a_single_element() {
        let v = Forest::singleton(elem("a", vec![elem("b", vec![])]));
        let out = run(v, &s(StmtKind::Rename("c".into()))).unwrap();
        assert_eq!(out, Forest::singleton(elem("c", vec![elem("b", vec![])])));
    }

    #[test]
    fn rename_on_text_is_stuck() {
        let v = Forest::singleton(Tree::text("w"));
        let err = run(v, &s(StmtKind::Rename("c".into()))).unwrap_err();
        assert_eq!(err.code, Code::Stuck);
    }

    #[test]
    fn insert_requires_empty_focus() {
        let insert = s(StmtKind::Insert(Expr::new(ExprKind::Empty)));
        assert_eq!(run(Forest::empty(), &insert).unwrap(), Forest::empty());
        let err = run(Forest::singleton(elem("a", vec![])), &insert).unwrap_err();
        assert_eq!(err.code, Code::Stuck);
    }

    #[test]
    fn worked_insert_after_each_b() {
        // iter[a? children[iter[b? right[insert c[]]]]]
        // on a[b[],c[],b[]],d[]  ==>  a[b[],c[],c[],b[],c[]],d[]
        let insert_c = s(StmtKind::Insert(Expr::new(ExprKind::Elem(
            "c".into(),
            Box::new(Expr::new(ExprKind::Empty)),
        ))));
        let inner = s(StmtKind::Iter(Box::new(s(StmtKind::Test(
            Test::Label("b".into()),
            Box::new(s(StmtKind::Right(Box::new(insert_c)))),
        )))));
        let upd = s(StmtKind::Iter(Box::new(s(StmtKind::Test(
            Test::Label("a".into()),
            Box::new(s(StmtKind::Children(Box::new(inner)))),
        )))));
        let input = Forest(vec![
            elem(
                "a",
                vec![elem("b", vec![]), elem("c", vec![]), elem("b", vec![])],
            ),
            elem("d", vec![]),
        ]);
        let expected = Forest(vec![
            elem(
                "a",
                vec![
                    elem("b", vec![]),
                    elem("c", vec![]),
                    elem("c", vec![]),
                    elem("b", vec![]),
                    elem("c", vec![]),
                ],
            ),
            elem("d", vec![]),
        ]);
        assert_eq!(run(input.clone(), &upd).unwrap(), expected);

        // Traversal order cannot be observed.
        let reversed = exec_update_with(
            &Env::new(),
            &input,
            &upd,
            &Procs::new(),
            Options {
                fuel: 10_000,
                order: IterOrder::RightToLeft,
                ..Options::default()
            },
        )
        .unwrap();
        assert_eq!(reversed, expected);
    }

    #[test]
    fn snapshot_binds_focus() {
        // snapshot $x in children[delete; insert $x]  duplicates a[..] into itself
        let body = Stmt::seq(
            s(StmtKind::Delete),
            s(StmtKind::Insert(Expr::new(ExprKind::ForestVar("x".into())))),
        );
        let upd = s(StmtKind::Snapshot(
            "x".into(),
            Box::new(s(StmtKind::Children(Box::new(body)))),
        ));
        let v = Forest::singleton(elem("a", vec![elem("b", vec![])]));
        let out = run(v.clone(), &upd).unwrap();
        assert_eq!(
            out,
            Forest::singleton(elem("a", vec![elem("a", vec![elem("b", vec![])])]))
        );
    }

    #[test]
    fn recursive_procedure_exhausts_fuel() {
        let mut procs = Procs::new();
        let body = Stmt::new(StmtKind::Call("loopy".into(), vec![]));
        procs
            .insert(ProcDecl {
                name: "loopy".into(),
                params: vec![],
                input: Type::Empty,
                output: Type::Empty,
                body,
                span: Span::default(),
            })
            .unwrap();
        let call = Stmt::new(StmtKind::Call("loopy".into(), vec![]));
        let err = exec_update(&Env::new(), &Forest::empty(), &call, &procs, 1000).unwrap_err();
        assert_eq!(err.code, Code::FuelExhausted);
    }

    #[test]
    fn unknown_procedure_errors() {
        let call = Stmt::new(StmtKind::Call("nope".into(), vec![]));
        let err = run(Forest::empty(), &call).unwrap_err();
        assert_eq!(err.code, Code::UnknownProcedure);
    }
}
