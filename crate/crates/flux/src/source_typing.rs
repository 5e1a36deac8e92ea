//! Direct typechecking of source updates.
//!
//! A path is checked against an atomic type by *splitting* the type: each
//! match point is replaced by a fresh flex variable `Z` bound (together
//! with the variable scope at that point) in a context-tagged substitution
//! `Θ`.  The update's kernel is then typechecked simultaneously against
//! every binding, and substituting the updated bindings back into the split
//! type produces the result.  This is sound and complete with respect to
//! typechecking the normalized core statement.

use std::fmt::Write as _;

use crate::diag::{Code, Diag, Result};
use crate::query::Expr;
use crate::source::{update_kernel, Path, PathKind, SrcStmt, SrcStmtKind, Upd, UpdKind};
use crate::types::{test_match, Atom, Signature, Test, Type};
use crate::typing::{Arity, Checker, TypeEnv};
use crate::update::Procs;

/// A context-tagged type substitution: ordered bindings `Z ↦ (Γ ▷ τ)` with
/// unique `Z`s.  Substitution application ignores the contexts; they exist
/// so kernels can be typechecked in the scope of the path that produced
/// each match point.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct CtxSubst {
    bindings: Vec<(u32, TypeEnv, Type)>,
}

impl CtxSubst {
    pub fn new() -> CtxSubst {
        CtxSubst::default()
    }

    pub fn single(z: u32, env: TypeEnv, ty: Type) -> CtxSubst {
        CtxSubst {
            bindings: vec![(z, env, ty)],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn get(&self, z: u32) -> Option<&Type> {
        self.bindings
            .iter()
            .find(|(name, _, _)| *name == z)
            .map(|(_, _, ty)| ty)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(u32, TypeEnv, Type)> {
        self.bindings.iter()
    }

    /// Disjoint union; the domains may not overlap.
    pub fn merge_disjoint(mut self, other: CtxSubst) -> Result<CtxSubst> {
        for (z, env, ty) in other.bindings {
            if self.get(z).is_some() {
                return Err(Diag::new(
                    Code::DomainOverlap,
                    format!("substitution domains overlap at Z{z}"),
                ));
            }
            self.bindings.push((z, env, ty));
        }
        Ok(self)
    }

    /// Pointwise alternation `Θ|Θ'`: both substitutions must bind the same
    /// variables under the same contexts.
    pub fn merge_or(&self, other: &CtxSubst) -> Result<CtxSubst> {
        if self.bindings.len() != other.bindings.len() {
            return Err(Diag::new(
                Code::DomainMismatch,
                "substitutions bind different variables",
            ));
        }
        let mut out = Vec::with_capacity(self.bindings.len());
        for (z, env, ty) in &self.bindings {
            let Some((_, env2, ty2)) = other.bindings.iter().find(|(z2, _, _)| z2 == z) else {
                return Err(Diag::new(
                    Code::DomainMismatch,
                    format!("Z{z} is bound on only one side"),
                ));
            };
            if env != env2 {
                return Err(Diag::new(
                    Code::DomainMismatch,
                    format!("contexts for Z{z} differ"),
                ));
            }
            out.push((*z, env.clone(), Type::alt(ty.clone(), ty2.clone())));
        }
        Ok(CtxSubst { bindings: out })
    }

    /// `Θ ⊕ x`: add `x : τ` to the context of each binding `Z ↦ (Γ ▷ τ)`.
    pub fn extend_scope(&self, x: &str) -> CtxSubst {
        CtxSubst {
            bindings: self
                .bindings
                .iter()
                .map(|(z, env, ty)| (*z, env.with_forest(x, ty.clone()), ty.clone()))
                .collect(),
        }
    }

    /// `maybe(Θ)`: each `Z ↦ (Γ ▷ τ)` becomes `Z ↦ (Γ ▷ Z|τ)`, for match
    /// points that may or may not be updated.
    pub fn maybe(&self) -> CtxSubst {
        CtxSubst {
            bindings: self
                .bindings
                .iter()
                .map(|(z, env, ty)| (*z, env.clone(), Type::alt(Type::Flex(*z), ty.clone())))
                .collect(),
        }
    }
}

/// Replace each bound flex variable by its type; unbound flex variables and
/// defined variables are left alone.
pub fn apply_subst(ty: &Type, theta: &CtxSubst) -> Type {
    match ty {
        Type::Flex(z) => match theta.get(*z) {
            Some(t) => t.clone(),
            None => ty.clone(),
        },
        Type::Empty | Type::Var(_) => ty.clone(),
        Type::Atom(Atom::Bool) | Type::Atom(Atom::Str) => ty.clone(),
        Type::Atom(Atom::Elem(n, body)) => Type::elem(n.clone(), apply_subst(body, theta)),
        Type::Alt(l, r) => Type::alt(apply_subst(l, theta), apply_subst(r, theta)),
        Type::Seq(l, r) => Type::seq(apply_subst(l, theta), apply_subst(r, theta)),
        Type::Star(t) => Type::star(apply_subst(t, theta)),
    }
}

fn scope_desc(env: &TypeEnv) -> String {
    let mut parts: Vec<String> = env
        .forests()
        .map(|(x, ty)| format!("${x}:{ty}"))
        .chain(env.trees().map(|(x, a)| format!("${x}:{a}")))
        .collect();
    parts.sort();
    let mut out = String::from("{");
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{p}");
    }
    out.push('}');
    out
}

/// A source-typechecking run.  Owns a core [`Checker`] and the flex-variable
/// counter; fresh names are deterministic per run.
pub struct SrcChecker<'p> {
    chk: Checker<'p>,
    next_flex: u32,
    empty_splits: Vec<crate::diag::Span>,
}

impl<'p> SrcChecker<'p> {
    pub fn new(sig: Signature, procs: &'p Procs) -> SrcChecker<'p> {
        SrcChecker {
            chk: Checker::new(sig, procs),
            next_flex: 0,
            empty_splits: Vec::new(),
        }
    }

    /// Positions of path steps whose split found no matching atoms; such a
    /// step can never select anything and usually signals a dead update.
    pub fn empty_splits(&self) -> &[crate::diag::Span] {
        &self.empty_splits
    }

    pub fn core(&mut self) -> &mut Checker<'p> {
        &mut self.chk
    }

    fn fresh(&mut self) -> u32 {
        let z = self.next_flex;
        self.next_flex += 1;
        z
    }

    /// Compound statement typing `Γ ⊢ τ {s} τ'`.
    pub fn check_compound(&mut self, env: &TypeEnv, ty: &Type, s: &SrcStmt) -> Result<Type> {
        match &s.kind {
            SrcStmtKind::Seq(a, b) => {
                let mid = self.check_compound(env, ty, a)?;
                self.check_compound(env, &mid, b)
            }
            SrcStmtKind::IfThen(e, body) => {
                let tc = self.chk.query_type(env, e)?;
                if !self.chk.subtype(&tc, &Type::bool())? {
                    return Err(Diag::new(Code::TypeError, "condition has the wrong type")
                        .at(e.span)
                        .expected_found("bool", tc.to_string()));
                }
                let t2 = self.check_compound(env, ty, body)?;
                Ok(Type::alt(ty.clone(), t2))
            }
            SrcStmtKind::Let(x, e, body) => {
                let te = self.chk.query_type(env, e)?;
                self.check_compound(&env.with_forest(x, te), ty, body)
            }
            SrcStmtKind::Block(body) => self.check_compound(env, ty, body),
            SrcStmtKind::Upd(u, guard) => {
                let desugared;
                let u = match guard {
                    Some(cond) => {
                        desugared = crate::source::desugar_where(u.clone(), cond.clone());
                        &desugared
                    }
                    None => u,
                };
                self.check_simple(env, ty, u)
            }
        }
    }

    /// Simple update typing `Γ ⊢ α {u} α'`.  A `.`-path accepts any input
    /// type (mirroring the kernels, which the core checks without an
    /// atomicity constraint); a step path requires a single element.
    pub fn check_simple(&mut self, env: &TypeEnv, ty: &Type, u: &Upd) -> Result<Type> {
        let (split, theta) = self.check_path(env, ty, u.path())?;
        let updated = match &u.kind {
            UpdKind::UpdateBy(_, body) => self.simult_stmt(&theta, body)?,
            _ => self.simult_core(&theta, &update_kernel(u))?,
        };
        Ok(apply_subst(&split, &updated))
    }

    /// Path typing `Γ ⊢ α after p ⇒ α' via Θ`: split the input around `p`'s
    /// match points, so that the input equals `α'[Θ]` up to type equality.
    pub fn check_path(&mut self, env: &TypeEnv, ty: &Type, p: &Path) -> Result<(Type, CtxSubst)> {
        match &p.kind {
            // `.` matches the focus itself, so the whole input is one match
            // point.
            PathKind::Here => {
                let z = self.fresh();
                Ok((Type::Flex(z), CtxSubst::single(z, env.clone(), ty.clone())))
            }
            PathKind::Step(test) => match self.chk.as_atom(ty)? {
                Some(Atom::Elem(n, body)) => {
                    let (split, theta) = self.check_filter(env, &body, test)?;
                    if theta.is_empty() {
                        self.empty_splits.push(p.span);
                    }
                    Ok((Type::elem(n, split), theta))
                }
                Some(other) => Err(Diag::new(
                    Code::PathTypeError,
                    format!("a step `{test}` cannot select inside `{other}`"),
                )
                .at(p.span)
                .expected_found("an element type n[τ]", other.to_string())),
                None => Err(Diag::new(
                    Code::NonAtomicSimpleUpdate,
                    "a path step needs a single-tree input type",
                )
                .at(p.span)
                .expected_found("an atomic type", ty.to_string())),
            },
            PathKind::Slash(a, b) => {
                let (split, theta1) = self.check_path(env, ty, a)?;
                let (theta2, theta2_out) = self.simult_path(&theta1, b)?;
                Ok((apply_subst(&split, &theta2), theta2_out))
            }
            PathKind::Filter(inner, e) => {
                let (split, theta) = self.check_path(env, ty, inner)?;
                self.simult_expr(&theta, e, &Type::bool())?;
                Ok((apply_subst(&split, &theta.maybe()), theta))
            }
            PathKind::Bind(x, inner) => {
                let (split, theta) = self.check_path(env, ty, inner)?;
                Ok((split, theta.extend_scope(x)))
            }
        }
    }

    /// Filter typing: split a sequence type around the atoms matching `φ`.
    pub fn check_filter(
        &mut self,
        env: &TypeEnv,
        ty: &Type,
        test: &Test,
    ) -> Result<(Type, CtxSubst)> {
        match ty {
            Type::Empty => Ok((Type::Empty, CtxSubst::new())),
            Type::Atom(atom) => {
                if test_match(atom, test) {
                    let z = self.fresh();
                    Ok((
                        Type::Flex(z),
                        CtxSubst::single(z, env.clone(), Type::Atom(atom.clone())),
                    ))
                } else {
                    Ok((ty.clone(), CtxSubst::new()))
                }
            }
            Type::Seq(l, r) => {
                let (tl, thl) = self.check_filter(env, l, test)?;
                let (tr, thr) = self.check_filter(env, r, test)?;
                Ok((Type::seq(tl, tr), thl.merge_disjoint(thr)?))
            }
            Type::Alt(l, r) => {
                let (tl, thl) = self.check_filter(env, l, test)?;
                let (tr, thr) = self.check_filter(env, r, test)?;
                Ok((Type::alt(tl, tr), thl.merge_disjoint(thr)?))
            }
            Type::Star(t) => {
                let (inner, theta) = self.check_filter(env, t, test)?;
                Ok((Type::star(inner), theta))
            }
            Type::Var(x) => {
                let def = self.chk.signature().get(x).cloned().ok_or_else(|| {
                    Diag::new(
                        Code::UndeclaredTypeVar,
                        format!("type variable `{x}` is not declared"),
                    )
                })?;
                self.check_filter(env, &def, test)
            }
            Type::Flex(z) => Err(Diag::new(
                Code::TypeError,
                format!("internal type variable Z{z} in a path filter"),
            )),
        }
    }

    /// Check `e : expected` under every binding of `Θ`.
    pub fn simult_expr(&mut self, theta: &CtxSubst, e: &Expr, expected: &Type) -> Result<()> {
        for (z, env, _) in theta.iter() {
            let got = self.chk.query_type(env, e).map_err(|d| {
                d.context(format!("in match site Z{z} with scope {}", scope_desc(env)))
            })?;
            if !self.chk.subtype(&got, expected)? {
                return Err(Diag::new(
                    Code::TypeError,
                    format!(
                        "guard has the wrong type in match site Z{z} with scope {}",
                        scope_desc(env)
                    ),
                )
                .at(e.span)
                .expected_found(expected.to_string(), got.to_string()));
            }
        }
        Ok(())
    }

    /// Run a core kernel through each binding at singular arity.
    pub fn simult_core(&mut self, theta: &CtxSubst, s: &crate::update::Stmt) -> Result<CtxSubst> {
        let mut out = CtxSubst::new();
        for (z, env, ty) in theta.iter() {
            let updated = self
                .chk
                .update_type(env, Arity::Singular, ty, s)
                .map_err(|d| {
                    d.context(format!("in match site Z{z} with scope {}", scope_desc(env)))
                })?;
            out.bindings.push((*z, env.clone(), updated));
        }
        Ok(out)
    }

    /// Run a compound source statement through each binding.
    pub fn simult_stmt(&mut self, theta: &CtxSubst, s: &SrcStmt) -> Result<CtxSubst> {
        let mut out = CtxSubst::new();
        for (z, env, ty) in theta.iter() {
            let updated = self.check_compound(env, ty, s).map_err(|d| {
                d.context(format!("in match site Z{z} with scope {}", scope_desc(env)))
            })?;
            out.bindings.push((*z, env.clone(), updated));
        }
        Ok(out)
    }

    /// Continue a path from each binding: returns the per-binding split
    /// types and the union of the residual substitutions.
    pub fn simult_path(&mut self, theta: &CtxSubst, p: &Path) -> Result<(CtxSubst, CtxSubst)> {
        let mut splits = CtxSubst::new();
        let mut residual = CtxSubst::new();
        for (z, env, ty) in theta.iter() {
            let (split, inner) = self.check_path(env, ty, p).map_err(|d| {
                d.context(format!("in match site Z{z} with scope {}", scope_desc(env)))
            })?;
            splits.bindings.push((*z, env.clone(), split));
            residual = residual.merge_disjoint(inner)?;
        }
        Ok((splits, residual))
    }
}

/// One-shot compound check, returning the final (flex-free) type.
pub fn check_compound(
    env: &TypeEnv,
    ty: &Type,
    s: &SrcStmt,
    sig: &Signature,
    procs: &Procs,
) -> Result<Type> {
    let mut checker = SrcChecker::new(sig.clone(), procs);
    checker.check_compound(env, ty, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::ExprKind;
    use crate::source::{desugar_where, Path, PathKind};

    fn elem(n: &str) -> Type {
        Type::elem(n, Type::Empty)
    }

    fn step(n: &str) -> Path {
        Path::new(PathKind::Step(Test::Label(n.into())))
    }

    fn checker(procs: &Procs) -> SrcChecker<'_> {
        SrcChecker::new(Signature::new(), procs)
    }

    #[test]
    fn apply_subst_replaces_flex_vars() {
        // a[Z,c[]] [Z ↦ b[]]  =  a[b[],c[]]
        let theta = CtxSubst::single(0, TypeEnv::new(), elem("b"));
        let ty = Type::elem("a", Type::seq(Type::Flex(0), elem("c")));
        assert_eq!(
            apply_subst(&ty, &theta),
            Type::elem("a", Type::seq(elem("b"), elem("c")))
        );
        // no flex vars: unchanged
        let plain = Type::elem("a", Type::string());
        assert_eq!(apply_subst(&plain, &theta), plain);
        // Z ↦ ()
        let theta_empty = CtxSubst::single(0, TypeEnv::new(), Type::Empty);
        assert_eq!(
            apply_subst(&ty, &theta_empty),
            Type::elem("a", Type::seq(Type::Empty, elem("c")))
        );
    }

    #[test]
    fn merge_or_and_maybe() {
        let env = TypeEnv::new();
        let t1 = CtxSubst::single(0, env.clone(), elem("b"));
        let t2 = CtxSubst::single(0, env.clone(), Type::Empty);
        let merged = t1.merge_or(&t2).unwrap();
        assert_eq!(merged.get(0), Some(&Type::alt(elem("b"), Type::Empty)));

        let maybed = t1.maybe();
        assert_eq!(maybed.get(0), Some(&Type::alt(Type::Flex(0), elem("b"))));

        assert!(CtxSubst::new()
            .merge_disjoint(CtxSubst::new())
            .unwrap()
            .is_empty());
        let overlap = t1.clone().merge_disjoint(t2.clone());
        assert_eq!(overlap.unwrap_err().code, Code::DomainOverlap);
        let mismatch = t1.merge_or(&CtxSubst::single(1, env, elem("b")));
        assert_eq!(mismatch.unwrap_err().code, Code::DomainMismatch);
    }

    #[test]
    fn filter_splits_matching_atoms() {
        let procs = Procs::new();
        let mut c = checker(&procs);
        let env = TypeEnv::new();

        let (ty, theta) = c
            .check_filter(&env, &Type::Empty, &Test::Label("b".into()))
            .unwrap();
        assert_eq!(ty, Type::Empty);
        assert!(theta.is_empty());

        let (ty, theta) = c
            .check_filter(&env, &elem("c"), &Test::Label("b".into()))
            .unwrap();
        assert_eq!(ty, elem("c"));
        assert!(theta.is_empty());

        let (ty, theta) = c
            .check_filter(&env, &elem("b"), &Test::Label("b".into()))
            .unwrap();
        assert_eq!(ty, Type::Flex(0));
        assert_eq!(theta.get(0), Some(&elem("b")));
    }

    #[test]
    fn path_step_splits_children() {
        // ⊢ a[b[],c[]] after b ⇒ a[Z0,c[]] via {Z0 ↦ b[]}
        let procs = Procs::new();
        let mut c = checker(&procs);
        let atom = Type::elem("a", Type::seq(elem("b"), elem("c")));
        let (split, theta) = c.check_path(&TypeEnv::new(), &atom, &step("b")).unwrap();
        assert_eq!(split, Type::elem("a", Type::seq(Type::Flex(0), elem("c"))));
        assert_eq!(theta.get(0), Some(&elem("b")));
    }

    #[test]
    fn path_step_on_string_is_an_error() {
        let procs = Procs::new();
        let mut c = checker(&procs);
        let err = c
            .check_path(&TypeEnv::new(), &Type::string(), &step("b"))
            .unwrap_err();
        assert_eq!(err.code, Code::PathTypeError);
    }

    #[test]
    fn simple_delete_section_example() {
        // DELETE b against a[b[],c[]] gives a[(),c[]].
        let procs = Procs::new();
        let mut c = checker(&procs);
        let atom = Type::elem("a", Type::seq(elem("b"), elem("c")));
        let u = Upd::new(UpdKind::Delete(step("b")));
        let out = c.check_simple(&TypeEnv::new(), &atom, &u).unwrap();
        assert_eq!(out, Type::elem("a", Type::seq(Type::Empty, elem("c"))));
        assert!(!out.mentions_flex());
    }

    #[test]
    fn insert_as_last_into_appends() {
        // INSERT AS LAST INTO db VALUE books[] at root[db[()]] gives
        // root[db[books[]]] (wrapped in the caller's root element).
        let procs = Procs::new();
        let mut c = checker(&procs);
        let atom = Type::elem("root", Type::elem("db", Type::Empty));
        let u = Upd::new(UpdKind::InsertLast(
            step("db"),
            Expr::new(ExprKind::Elem(
                "books".into(),
                Box::new(Expr::new(ExprKind::Empty)),
            )),
        ));
        let out = c.check_simple(&TypeEnv::new(), &atom, &u).unwrap();
        assert!(c
            .core()
            .equiv(&out, &Type::elem("root", Type::elem("db", elem("books"))))
            .unwrap());
    }

    #[test]
    fn where_guard_sees_path_variables() {
        // DELETE $x AS b WHERE <cond using $x>, against a[b["w"]]: the
        // guard typechecks only because $x is in scope.
        let procs = Procs::new();
        let mut c = checker(&procs);
        let atom = Type::elem("a", Type::elem("b", Type::string()));
        let path = Path::new(PathKind::Bind("x".into(), Box::new(step("b"))));
        // for $t in $x return $t/child  — the text under the match
        let cond = Expr::new(ExprKind::Eq(
            Box::new(Expr::new(ExprKind::For(
                "t".into(),
                Box::new(Expr::new(ExprKind::ForestVar("x".into()))),
                Box::new(Expr::new(ExprKind::ChildAxis("t".into()))),
            ))),
            Box::new(Expr::new(ExprKind::Text("w".into()))),
        ));
        let u = desugar_where(Upd::new(UpdKind::Delete(path)), cond);
        let out = c.check_simple(&TypeEnv::new(), &atom, &u).unwrap();
        // b[] either deleted or kept: a[()|b[string]] ≡ a[b[string]?]
        assert!(c
            .core()
            .equiv(
                &out,
                &Type::elem("a", Type::opt(Type::elem("b", Type::string())))
            )
            .unwrap());
        assert!(!out.mentions_flex());
    }

    #[test]
    fn compound_rejects_plural_input_for_simple_updates() {
        let procs = Procs::new();
        let mut c = checker(&procs);
        let s = SrcStmt::new(SrcStmtKind::Upd(Upd::new(UpdKind::Delete(step("b"))), None));
        let err = c
            .check_compound(&TypeEnv::new(), &Type::star(elem("a")), &s)
            .unwrap_err();
        assert_eq!(err.code, Code::NonAtomicSimpleUpdate);
    }
}

#[cfg(test)]
mod here_tests {
    use super::*;
    use crate::query::ExprKind;
    use crate::source::PathKind;
    use crate::update::{Stmt, StmtKind};

    // `.` splits the whole input: the result is (Z0, {Z0 ↦ (Γ ▷ α)}).
    // Returning (α, ∅) instead would skip the kernel entirely (an empty Θ
    // checks nothing), so `DELETE .` would typecheck to the unchanged type
    // while its normalization `delete` checks to `()`.
    #[test]
    fn here_path_binds_the_whole_focus() {
        let procs = Procs::new();
        let mut c = SrcChecker::new(Signature::new(), &procs);
        let atom = Type::elem("a", Type::Empty);
        let (split, theta) = c
            .check_path(&TypeEnv::new(), &atom, &Path::new(PathKind::Here))
            .unwrap();
        assert_eq!(split, Type::Flex(0));
        assert_eq!(theta.get(0), Some(&atom));
    }

    #[test]
    fn delete_here_agrees_with_its_normalization() {
        let procs = Procs::new();
        let mut c = SrcChecker::new(Signature::new(), &procs);
        let atom = Type::elem("a", Type::string());
        let u = Upd::new(UpdKind::Delete(Path::new(PathKind::Here)));
        let out = c.check_simple(&TypeEnv::new(), &atom, &u).unwrap();
        assert_eq!(out, Type::Empty);
    }

    #[test]
    fn simult_core_updates_each_binding() {
        let procs = Procs::new();
        let mut c = SrcChecker::new(Signature::new(), &procs);
        // ∅ ⊢ s ⇒ ∅
        let empty = c
            .simult_core(&CtxSubst::new(), &Stmt::new(StmtKind::Delete))
            .unwrap();
        assert!(empty.is_empty());
        // {Z ↦ b[]} ⊢ delete ⇒ {Z ↦ ()}
        let theta = CtxSubst::single(0, TypeEnv::new(), Type::elem("b", Type::Empty));
        let out = c.simult_core(&theta, &Stmt::new(StmtKind::Delete)).unwrap();
        assert_eq!(out.get(0), Some(&Type::Empty));
    }

    #[test]
    fn simult_expr_checks_under_each_context() {
        let procs = Procs::new();
        let mut c = SrcChecker::new(Signature::new(), &procs);
        let env = TypeEnv::new().with_forest("x", Type::string());
        let theta = CtxSubst::single(0, env, Type::elem("b", Type::Empty));
        // $x = "w" is bool under the binding's context
        let cond = crate::query::Expr::new(ExprKind::Eq(
            Box::new(crate::query::Expr::new(ExprKind::ForestVar("x".into()))),
            Box::new(crate::query::Expr::new(ExprKind::Text("w".into()))),
        ));
        c.simult_expr(&theta, &cond, &Type::bool()).unwrap();
        // and fails when checked against string
        assert!(c.simult_expr(&theta, &cond, &Type::string()).is_err());
    }
}
