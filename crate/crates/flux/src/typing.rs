//! Typechecking for queries and core updates.
//!
//! Inference is syntax-directed and synthesizes a minimal type; subtyping is
//! consulted only where a rule demands a specific type (booleans, strings,
//! procedure boundaries) and at explicit expectation boundaries via
//! [`Checker::check_update`].
//!
//! The update judgment is indexed by an arity: plural updates transform any
//! forest, singular updates transform a single tree, and the constructs
//! `rename`, `children`, and tests are only meaningful at singular arity.
//! Iterating over a recursive type variable maps its definition through the
//! body; a memo table mints a fresh defined variable per (environment,
//! variable, statement) so that re-entrant unfoldings stay finite, and the
//! minted definition is kept only if the result actually refers to it.

use std::collections::{BTreeMap, HashMap};

use crate::diag::{Code, Diag, Result, Span};
use crate::inclusion::TypeCtx;
use crate::query::{Expr, ExprKind};
use crate::types::{test_match, Atom, Signature, Type};
use crate::update::{Procs, Stmt, StmtKind};

/// Arity index of the update judgment.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Arity {
    Singular,
    Plural,
}

/// Static environment: forest variables map to sequence types, tree
/// variables to atomic types.  Ordered maps keep iteration (sampling,
/// diagnostics) deterministic.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TypeEnv {
    forests: BTreeMap<String, Type>,
    trees: BTreeMap<String, Atom>,
}

impl TypeEnv {
    pub fn new() -> TypeEnv {
        TypeEnv::default()
    }

    pub fn forest(&self, name: &str) -> Option<&Type> {
        self.forests.get(name)
    }

    pub fn tree(&self, name: &str) -> Option<&Atom> {
        self.trees.get(name)
    }

    pub fn with_forest(&self, name: impl Into<String>, ty: Type) -> TypeEnv {
        let mut env = self.clone();
        env.forests.insert(name.into(), ty);
        env
    }

    pub fn with_tree(&self, name: impl Into<String>, atom: Atom) -> TypeEnv {
        let mut env = self.clone();
        env.trees.insert(name.into(), atom);
        env
    }

    /// Canonical ordered form, used for memo keys.
    fn canon(&self) -> (BTreeMap<String, Type>, BTreeMap<String, Atom>) {
        (self.forests.clone(), self.trees.clone())
    }

    pub fn forests(&self) -> impl Iterator<Item = (&str, &Type)> {
        self.forests.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn trees(&self) -> impl Iterator<Item = (&str, &Atom)> {
        self.trees.iter().map(|(k, v)| (k.as_str(), v))
    }
}

type IterKey = (
    (BTreeMap<String, Type>, BTreeMap<String, Atom>),
    String,
    Stmt,
);

enum IterEntry {
    InProgress(String),
    Done(Type),
}

/// A typechecking run over a fixed signature and procedure set.  The
/// signature may grow with minted definitions; retrieve it afterwards with
/// [`Checker::signature`].
pub struct Checker<'p> {
    ctx: TypeCtx,
    procs: &'p Procs,
    iter_memo: HashMap<IterKey, IterEntry>,
    minted: u32,
}

impl<'p> Checker<'p> {
    pub fn new(sig: Signature, procs: &'p Procs) -> Checker<'p> {
        Checker {
            ctx: TypeCtx::new(sig),
            procs,
            iter_memo: HashMap::new(),
            minted: 0,
        }
    }

    pub fn signature(&self) -> &Signature {
        self.ctx.sig()
    }

    pub fn subtype(&mut self, t1: &Type, t2: &Type) -> Result<bool> {
        self.ctx.subtype(t1, t2)
    }

    pub fn equiv(&mut self, t1: &Type, t2: &Type) -> Result<bool> {
        self.ctx.equiv(t1, t2)
    }

    fn require_subtype(&mut self, found: &Type, want: &Type, span: Span, what: &str) -> Result<()> {
        if self.ctx.subtype(found, want)? {
            Ok(())
        } else {
            Err(
                Diag::new(Code::TypeError, format!("{what} has the wrong type"))
                    .at(span)
                    .expected_found(want.to_string(), found.to_string()),
            )
        }
    }

    /// Resolve a type to an atom, unfolding defined variables at top level.
    pub fn as_atom(&self, ty: &Type) -> Result<Option<Atom>> {
        match ty {
            Type::Atom(a) => Ok(Some(a.clone())),
            Type::Var(x) => {
                let def = self.ctx.sig().get(x).cloned().ok_or_else(|| {
                    Diag::new(
                        Code::UndeclaredTypeVar,
                        format!("type variable `{x}` is not declared"),
                    )
                })?;
                self.as_atom(&def)
            }
            _ => Ok(None),
        }
    }

    // -- queries -----------------------------------------------------------

    pub fn query_type(&mut self, env: &TypeEnv, e: &Expr) -> Result<Type> {
        match &e.kind {
            ExprKind::Empty => Ok(Type::Empty),
            ExprKind::Text(_) => Ok(Type::string()),
            ExprKind::Bool(_) => Ok(Type::bool()),
            ExprKind::Concat(l, r) => Ok(Type::seq(
                self.query_type(env, l)?,
                self.query_type(env, r)?,
            )),
            ExprKind::Elem(n, body) => Ok(Type::elem(n.clone(), self.query_type(env, body)?)),
            ExprKind::ForestVar(x) => env.forest(x).cloned().ok_or_else(|| {
                Diag::new(Code::UnboundVariable, format!("unbound variable `${x}`")).at(e.span)
            }),
            ExprKind::TreeVar(x) => env.tree(x).map(|a| Type::Atom(a.clone())).ok_or_else(|| {
                Diag::new(Code::UnboundVariable, format!("unbound variable `${x}`")).at(e.span)
            }),
            ExprKind::Let(x, bound, body) => {
                let t1 = self.query_type(env, bound)?;
                self.query_type(&env.with_forest(x, t1), body)
            }
            ExprKind::If(c, then, els) => {
                let tc = self.query_type(env, c)?;
                self.require_subtype(&tc, &Type::bool(), c.span, "condition")?;
                Ok(Type::alt(
                    self.query_type(env, then)?,
                    self.query_type(env, els)?,
                ))
            }
            ExprKind::Eq(l, r) => {
                let tl = self.query_type(env, l)?;
                self.require_subtype(&tl, &Type::string(), l.span, "equality operand")?;
                let tr = self.query_type(env, r)?;
                self.require_subtype(&tr, &Type::string(), r.span, "equality operand")?;
                Ok(Type::bool())
            }
            ExprKind::ChildAxis(x) => match env.tree(x) {
                Some(Atom::Elem(_, body)) => Ok((**body).clone()),
                Some(atom) => Err(Diag::new(
                    Code::TypeError,
                    format!("child axis requires an element-typed variable `${x}`"),
                )
                .at(e.span)
                .expected_found("an element type n[τ]", atom.to_string())),
                None => Err(
                    Diag::new(Code::UnboundVariable, format!("unbound variable `${x}`")).at(e.span),
                ),
            },
            ExprKind::LabelFilter(inner, n) => {
                let t = self.query_type(env, inner)?;
                self.label_project(&t, n)
            }
            ExprKind::For(x, seq, body) => {
                let t1 = self.query_type(env, seq)?;
                self.iter_query_type(env, x, &t1, body)
            }
            ExprKind::Transform(input, s) => {
                let t1 = self.query_type(env, input)?;
                self.update_type(env, Arity::Plural, &t1, s)
            }
        }
    }

    /// `τ::n ⇒ τ'` — structural projection keeping `n`-labeled atoms.
    pub fn label_project(&mut self, ty: &Type, label: &str) -> Result<Type> {
        match ty {
            Type::Empty => Ok(Type::Empty),
            Type::Atom(Atom::Elem(n, body)) if n == label => {
                Ok(Type::elem(n.clone(), (**body).clone()))
            }
            Type::Atom(_) => Ok(Type::Empty),
            Type::Seq(l, r) => Ok(Type::seq(
                self.label_project(l, label)?,
                self.label_project(r, label)?,
            )),
            Type::Alt(l, r) => Ok(Type::alt(
                self.label_project(l, label)?,
                self.label_project(r, label)?,
            )),
            Type::Star(t) => Ok(Type::star(self.label_project(t, label)?)),
            Type::Var(x) => {
                let def = self.ctx.sig().get(x).cloned().ok_or_else(|| {
                    Diag::new(
                        Code::UndeclaredTypeVar,
                        format!("type variable `{x}` is not declared"),
                    )
                })?;
                self.label_project(&def, label)
            }
            Type::Flex(z) => Err(Diag::new(
                Code::TypeError,
                format!("internal type variable Z{z} in label projection"),
            )),
        }
    }

    /// Iteration typing for `for`: map the body's type over the structure
    /// of the sequence type.
    pub fn iter_query_type(
        &mut self,
        env: &TypeEnv,
        var: &str,
        ty: &Type,
        body: &Expr,
    ) -> Result<Type> {
        match ty {
            Type::Empty => Ok(Type::Empty),
            Type::Atom(a) => self.query_type(&env.with_tree(var, a.clone()), body),
            Type::Seq(l, r) => Ok(Type::seq(
                self.iter_query_type(env, var, l, body)?,
                self.iter_query_type(env, var, r, body)?,
            )),
            Type::Alt(l, r) => Ok(Type::alt(
                self.iter_query_type(env, var, l, body)?,
                self.iter_query_type(env, var, r, body)?,
            )),
            Type::Star(t) => Ok(Type::star(self.iter_query_type(env, var, t, body)?)),
            Type::Var(x) => {
                let def = self.ctx.sig().get(x).cloned().ok_or_else(|| {
                    Diag::new(
                        Code::UndeclaredTypeVar,
                        format!("type variable `{x}` is not declared"),
                    )
                })?;
                self.iter_query_type(env, var, &def, body)
            }
            Type::Flex(z) => Err(Diag::new(
                Code::TypeError,
                format!("internal type variable Z{z} in iteration typing"),
            )),
        }
    }

    // -- updates -----------------------------------------------------------

    /// The main judgment `Γ ⊢a τ {s} τ'`, synthesizing the minimal `τ'`.
    pub fn update_type(
        &mut self,
        env: &TypeEnv,
        arity: Arity,
        ty: &Type,
        s: &Stmt,
    ) -> Result<Type> {
        match &s.kind {
            StmtKind::Skip => Ok(ty.clone()),
            StmtKind::Seq(a, b) => {
                let mid = self.update_type(env, arity, ty, a)?;
                self.update_type(env, arity, &mid, b)
            }
            StmtKind::If(c, then, els) => {
                let tc = self.query_type(env, c)?;
                self.require_subtype(&tc, &Type::bool(), c.span, "condition")?;
                Ok(Type::alt(
                    self.update_type(env, arity, ty, then)?,
                    self.update_type(env, arity, ty, els)?,
                ))
            }
            StmtKind::Let(x, e, body) => {
                let te = self.query_type(env, e)?;
                self.update_type(&env.with_forest(x, te), arity, ty, body)
            }
            StmtKind::Insert(e) => {
                if !self.ctx.equiv(ty, &Type::Empty)? {
                    return Err(
                        Diag::new(Code::TypeError, "insert requires the empty focus type")
                            .at(s.span)
                            .expected_found("()", ty.to_string()),
                    );
                }
                self.query_type(env, e)
            }
            StmtKind::Delete => Ok(Type::Empty),
            StmtKind::Rename(n) => {
                let atom = self.singular_atom(arity, ty, s.span, "rename")?;
                match atom {
                    Atom::Elem(_, body) => Ok(Type::elem(n.clone(), *body)),
                    other => Err(
                        Diag::new(Code::TypeError, "rename requires an element focus")
                            .at(s.span)
                            .expected_found("n[τ]", other.to_string()),
                    ),
                }
            }
            StmtKind::Snapshot(x, body) => {
                self.update_type(&env.with_forest(x, ty.clone()), arity, ty, body)
            }
            StmtKind::Test(test, body) => {
                let atom = self.singular_atom(arity, ty, s.span, "a test")?;
                if test_match(&atom, test) {
                    self.update_type(env, Arity::Singular, &Type::Atom(atom), body)
                } else {
                    Ok(Type::Atom(atom))
                }
            }
            StmtKind::Children(body) => {
                let atom = self.singular_atom(arity, ty, s.span, "children")?;
                match atom {
                    Atom::Elem(n, content) => {
                        let out = self.update_type(env, Arity::Plural, &content, body)?;
                        Ok(Type::elem(n, out))
                    }
                    other => Err(
                        Diag::new(Code::TypeError, "children requires an element focus")
                            .at(s.span)
                            .expected_found("n[τ]", other.to_string()),
                    ),
                }
            }
            StmtKind::Left(body) => {
                let t = self.update_type(env, Arity::Plural, &Type::Empty, body)?;
                Ok(Type::seq(t, ty.clone()))
            }
            StmtKind::Right(body) => {
                let t = self.update_type(env, Arity::Plural, &Type::Empty, body)?;
                Ok(Type::seq(ty.clone(), t))
            }
            StmtKind::Iter(body) => {
                if arity == Arity::Singular {
                    return Err(Diag::new(
                        Code::ArityError,
                        "iter is a plural update but was used at singular arity",
                    )
                    .at(s.span));
                }
                self.iter_update_type(env, ty, body)
            }
            StmtKind::Call(name, args) => {
                let decl = self
                    .procs
                    .get(name)
                    .ok_or_else(|| {
                        Diag::new(
                            Code::UnknownProcedure,
                            format!("unknown procedure `{name}`"),
                        )
                        .at(s.span)
                    })?
                    .clone();
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
                for (arg, (param, want)) in args.iter().zip(&decl.params) {
                    let got = self.query_type(env, arg)?;
                    self.require_subtype(&got, want, arg.span, &format!("argument `${param}`"))?;
                }
                self.require_subtype(ty, &decl.input, s.span, &format!("input to `{name}`"))?;
                Ok(decl.output)
            }
        }
    }

    // Singular constructs need an atomic input type; the declaration rule
    // checks bodies at plural arity, so an atomic input is accepted at
    // either arity and only the error class depends on the arity index.
    fn singular_atom(&mut self, arity: Arity, ty: &Type, span: Span, what: &str) -> Result<Atom> {
        match self.as_atom(ty)? {
            Some(atom) => Ok(atom),
            None if arity == Arity::Plural => Err(Diag::new(
                Code::ArityError,
                format!("{what} is a singular update but was applied to a plural focus type"),
            )
            .at(span)
            .expected_found("an atomic type", ty.to_string())),
            None => Err(Diag::new(
                Code::TypeError,
                format!("{what} requires a single-tree focus type"),
            )
            .at(span)
            .expected_found("an atomic type", ty.to_string())),
        }
    }

    /// Iteration typing: map `s` over the structure of `ty`.
    pub fn iter_update_type(&mut self, env: &TypeEnv, ty: &Type, s: &Stmt) -> Result<Type> {
        match ty {
            Type::Empty => Ok(Type::Empty),
            Type::Atom(a) => self.update_type(env, Arity::Singular, &Type::Atom(a.clone()), s),
            Type::Seq(l, r) => Ok(Type::seq(
                self.iter_update_type(env, l, s)?,
                self.iter_update_type(env, r, s)?,
            )),
            Type::Alt(l, r) => Ok(Type::alt(
                self.iter_update_type(env, l, s)?,
                self.iter_update_type(env, r, s)?,
            )),
            Type::Star(t) => Ok(Type::star(self.iter_update_type(env, t, s)?)),
            Type::Var(x) => {
                let key: IterKey = (env.canon(), x.clone(), s.clone());
                match self.iter_memo.get(&key) {
                    Some(IterEntry::InProgress(name)) => return Ok(Type::Var(name.clone())),
                    Some(IterEntry::Done(t)) => return Ok(t.clone()),
                    None => {}
                }
                let def = self.ctx.sig().get(x).cloned().ok_or_else(|| {
                    Diag::new(
                        Code::UndeclaredTypeVar,
                        format!("type variable `{x}` is not declared"),
                    )
                })?;
                let minted = format!("{x}#{}", self.minted);
                self.minted += 1;
                self.iter_memo
                    .insert(key.clone(), IterEntry::InProgress(minted.clone()));
                let mapped = self.iter_update_type(env, &def, s)?;
                let result = if mapped.mentions_var(&minted) {
                    self.ctx.add_def(minted.clone(), mapped)?;
                    Type::Var(minted)
                } else {
                    mapped
                };
                self.iter_memo.insert(key, IterEntry::Done(result.clone()));
                Ok(result)
            }
            Type::Flex(z) => Err(Diag::new(
                Code::TypeError,
                format!("internal type variable Z{z} in iteration typing"),
            )),
        }
    }

    /// Subsumption boundary: infer and check against an expected type.
    pub fn check_update(
        &mut self,
        env: &TypeEnv,
        arity: Arity,
        ty: &Type,
        s: &Stmt,
        expected: &Type,
    ) -> Result<()> {
        let inferred = self.update_type(env, arity, ty, s)?;
        if self.ctx.subtype(&inferred, expected)? {
            Ok(())
        } else {
            Err(
                Diag::new(Code::SubtypeFailure, "update result type mismatch")
                    .at(s.span)
                    .expected_found(expected.to_string(), inferred.to_string()),
            )
        }
    }

    /// `⊢ Δ`: every procedure body maps its declared input to its declared
    /// output at plural arity, under its parameters.
    pub fn check_declarations(&mut self) -> Result<()> {
        for decl in self.procs.iter() {
            let mut seen = std::collections::HashSet::new();
            for (param, ty) in &decl.params {
                if !seen.insert(param.clone()) {
                    return Err(Diag::new(
                        Code::TypeError,
                        format!("duplicate parameter `${param}`"),
                    )
                    .at(decl.span)
                    .context(format!("procedure `{}`", decl.name)));
                }
                self.ctx.sig().check_type(ty)?;
            }
            self.ctx.sig().check_type(&decl.input)?;
            self.ctx.sig().check_type(&decl.output)?;
            let mut env = TypeEnv::new();
            for (param, ty) in &decl.params {
                env = env.with_forest(param, ty.clone());
            }
            let out = self
                .update_type(&env, Arity::Plural, &decl.input, &decl.body)
                .map_err(|d| d.context(format!("procedure `{}`", decl.name)))?;
            if !self.ctx.subtype(&out, &decl.output)? {
                return Err(Diag::new(
                    Code::SubtypeFailure,
                    format!(
                        "body of procedure `{}` does not produce its declared output type",
                        decl.name
                    ),
                )
                .at(decl.span)
                .expected_found(decl.output.to_string(), out.to_string()));
            }
        }
        Ok(())
    }
}

/// One-shot inference for `Γ ⊢a τ {s} τ'`.  Returns the synthesized type
/// together with the signature, which may have gained minted definitions
/// that the type refers to.
pub fn infer_update_type(
    env: &TypeEnv,
    arity: Arity,
    ty: &Type,
    s: &Stmt,
    procs: &Procs,
    sig: &Signature,
) -> Result<(Type, Signature)> {
    let mut checker = Checker::new(sig.clone(), procs);
    let out = checker.update_type(env, arity, ty, s)?;
    Ok((out, checker.signature().clone()))
}

/// One-shot iteration typing.
pub fn infer_iter_type(
    env: &TypeEnv,
    ty: &Type,
    s: &Stmt,
    procs: &Procs,
    sig: &Signature,
) -> Result<(Type, Signature)> {
    let mut checker = Checker::new(sig.clone(), procs);
    let out = checker.iter_update_type(env, ty, s)?;
    Ok((out, checker.signature().clone()))
}

/// One-shot check against an expected output type.
pub fn check_update_type(
    env: &TypeEnv,
    arity: Arity,
    ty: &Type,
    s: &Stmt,
    expected: &Type,
    procs: &Procs,
    sig: &Signature,
) -> Result<()> {
    Checker::new(sig.clone(), procs).check_update(env, arity, ty, s, expected)
}

/// One-shot declaration check `⊢ Δ`.
pub fn check_declarations(procs: &Procs, sig: &Signature) -> Result<()> {
    Checker::new(sig.clone(), procs).check_declarations()
}
