//! Dead-code ("path-error") analysis for core updates.
//!
//! Every statement node carries an implicit label: its preorder index.  The
//! analysis refines typechecking to also return a set of labels whose
//! subexpressions are *unproductive*: replacing the subexpression at such a
//! label with `skip` cannot change any execution result over the given
//! typing context.  Reported path-errors are the unproductive labels whose
//! subexpression is not already `skip`; replacing them with `skip` is a
//! sound optimization.
//!
//! The analysis is intraprocedural: a procedure call is conservatively
//! assumed productive and its body is not entered.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::diag::{Code, Diag, Result, Span};
use crate::types::{test_match, Atom, Signature, Type};
use crate::typing::{Arity, Checker, TypeEnv};
use crate::update::{Procs, Stmt, StmtKind};

/// A statement label: the preorder index of the node.
pub type Loc = usize;

/// A statement with its implicit preorder labeling (root = 0, then each
/// child subtree in order).  Stripping the labels is the identity.
#[derive(Clone, Debug)]
pub struct Labeled {
    root: Stmt,
}

/// Assign labels to a statement.  Deterministic: two calls on equal
/// statements agree.
pub fn label_statement(s: &Stmt) -> Labeled {
    Labeled { root: s.clone() }
}

fn stmt_children(s: &Stmt) -> Vec<&Stmt> {
    match &s.kind {
        StmtKind::Seq(a, b) | StmtKind::If(_, a, b) => vec![a, b],
        StmtKind::Let(_, _, b)
        | StmtKind::Snapshot(_, b)
        | StmtKind::Test(_, b)
        | StmtKind::Left(b)
        | StmtKind::Right(b)
        | StmtKind::Children(b)
        | StmtKind::Iter(b) => vec![b],
        StmtKind::Skip
        | StmtKind::Insert(_)
        | StmtKind::Delete
        | StmtKind::Rename(_)
        | StmtKind::Call(..) => vec![],
    }
}

fn subtree_size(s: &Stmt) -> usize {
    1 + stmt_children(s)
        .iter()
        .map(|c| subtree_size(c))
        .sum::<usize>()
}

fn find_at(s: &Stmt, base: Loc, l: Loc) -> Option<&Stmt> {
    if l == base {
        return Some(s);
    }
    let mut offset = base + 1;
    for child in stmt_children(s) {
        let size = subtree_size(child);
        if l < offset + size {
            return find_at(child, offset, l);
        }
        offset += size;
    }
    None
}

fn replace_in(s: &Stmt, base: Loc, l: Loc) -> Stmt {
    if l == base {
        return Stmt::at(StmtKind::Skip, s.span);
    }
    let rebuild = |children: Vec<Stmt>| -> Stmt {
        let mut it = children.into_iter();
        let kind = match &s.kind {
            StmtKind::Seq(..) => {
                StmtKind::Seq(Box::new(it.next().unwrap()), Box::new(it.next().unwrap()))
            }
            StmtKind::If(e, ..) => StmtKind::If(
                e.clone(),
                Box::new(it.next().unwrap()),
                Box::new(it.next().unwrap()),
            ),
            StmtKind::Let(x, e, _) => {
                StmtKind::Let(x.clone(), e.clone(), Box::new(it.next().unwrap()))
            }
            StmtKind::Snapshot(x, _) => StmtKind::Snapshot(x.clone(), Box::new(it.next().unwrap())),
            StmtKind::Test(t, _) => StmtKind::Test(t.clone(), Box::new(it.next().unwrap())),
            StmtKind::Left(_) => StmtKind::Left(Box::new(it.next().unwrap())),
            StmtKind::Right(_) => StmtKind::Right(Box::new(it.next().unwrap())),
            StmtKind::Children(_) => StmtKind::Children(Box::new(it.next().unwrap())),
            StmtKind::Iter(_) => StmtKind::Iter(Box::new(it.next().unwrap())),
            other => other.clone(),
        };
        Stmt::at(kind, s.span)
    };
    let mut offset = base + 1;
    let mut new_children = Vec::new();
    for child in stmt_children(s) {
        let size = subtree_size(child);
        if l >= offset && l < offset + size {
            new_children.push(replace_in(child, offset, l));
        } else {
            new_children.push(child.clone());
        }
        offset += size;
    }
    rebuild(new_children)
}

impl Labeled {
    pub fn root(&self) -> &Stmt {
        &self.root
    }

    /// Total number of labels (statement nodes).
    pub fn node_count(&self) -> usize {
        subtree_size(&self.root)
    }

    /// The subexpression at label `l`, if any.
    pub fn at(&self, l: Loc) -> Option<&Stmt> {
        find_at(&self.root, 0, l)
    }

    pub fn span_of(&self, l: Loc) -> Option<Span> {
        self.at(l).map(|s| s.span)
    }

    /// `s|_l`: the statement with the subexpression at `l` replaced by
    /// `skip`.
    pub fn replace_at(&self, l: Loc) -> Result<Stmt> {
        if self.at(l).is_none() {
            return Err(Diag::new(
                Code::UnknownLabel,
                format!("no subexpression at label {l}"),
            ));
        }
        Ok(replace_in(&self.root, 0, l))
    }
}

/// Conditional union: add `l` exactly when every trigger is already in the
/// set.
pub fn cond_union(mut set: BTreeSet<Loc>, triggers: &[Loc], l: Loc) -> BTreeSet<Loc> {
    if triggers.iter().all(|t| set.contains(t)) {
        set.insert(l);
    }
    set
}

/// Analysis result: the refined output type, the unproductive labels, and
/// the input type observed at each visited label (for reporting).
pub struct Analysis {
    pub ty: Type,
    pub unproductive: BTreeSet<Loc>,
    pub input_types: HashMap<Loc, Type>,
}

struct Analyzer<'a, 'p> {
    chk: &'a mut Checker<'p>,
    inputs: HashMap<Loc, Type>,
    in_progress: HashSet<(String, Loc)>,
}

impl<'a, 'p> Analyzer<'a, 'p> {
    fn record(&mut self, l: Loc, ty: &Type) {
        self.inputs.entry(l).or_insert_with(|| ty.clone());
    }

    fn analyze(
        &mut self,
        env: &TypeEnv,
        arity: Arity,
        ty: &Type,
        s: &Stmt,
        l: Loc,
    ) -> Result<(Type, BTreeSet<Loc>)> {
        self.record(l, ty);
        match &s.kind {
            StmtKind::Skip => Ok((ty.clone(), BTreeSet::from([l]))),
            StmtKind::Seq(a, b) => {
                let la = l + 1;
                let lb = la + subtree_size(a);
                let (t1, s1) = self.analyze(env, arity, ty, a, la)?;
                let (t2, s2) = self.analyze(env, arity, &t1, b, lb)?;
                let mut set = s1;
                set.extend(s2);
                Ok((t2, cond_union(set, &[la, lb], l)))
            }
            StmtKind::If(c, a, b) => {
                let tc = self.chk.query_type(env, c)?;
                if !self.chk.subtype(&tc, &Type::bool())? {
                    return Err(Diag::new(Code::TypeError, "condition has the wrong type")
                        .at(c.span)
                        .expected_found("bool", tc.to_string()));
                }
                let la = l + 1;
                let lb = la + subtree_size(a);
                let (t1, s1) = self.analyze(env, arity, ty, a, la)?;
                let (t2, s2) = self.analyze(env, arity, ty, b, lb)?;
                let mut set = s1;
                set.extend(s2);
                Ok((Type::alt(t1, t2), cond_union(set, &[la, lb], l)))
            }
            StmtKind::Let(x, e, body) => {
                let te = self.chk.query_type(env, e)?;
                let lb = l + 1;
                let (t, set) = self.analyze(&env.with_forest(x, te), arity, ty, body, lb)?;
                Ok((t, cond_union(set, &[lb], l)))
            }
            StmtKind::Insert(e) => {
                if !self.chk.equiv(ty, &Type::Empty)? {
                    return Err(
                        Diag::new(Code::TypeError, "insert requires the empty focus type")
                            .at(s.span)
                            .expected_found("()", ty.to_string()),
                    );
                }
                let te = self.chk.query_type(env, e)?;
                let mut set = BTreeSet::new();
                if self.chk.subtype(&te, &Type::Empty)? {
                    set.insert(l);
                }
                Ok((te, set))
            }
            StmtKind::Delete => {
                let mut set = BTreeSet::new();
                if self.chk.subtype(ty, &Type::Empty)? {
                    set.insert(l);
                }
                Ok((Type::Empty, set))
            }
            StmtKind::Rename(n) => {
                // Mirror the typing rule, then flag renames to the same label.
                let out = self.chk.update_type(env, arity, ty, s)?;
                let mut set = BTreeSet::new();
                if let Some(Atom::Elem(old, _)) = self.chk.as_atom(ty)? {
                    if &old == n {
                        set.insert(l);
                    }
                }
                Ok((out, set))
            }
            StmtKind::Snapshot(x, body) => {
                let lb = l + 1;
                let (t, set) =
                    self.analyze(&env.with_forest(x, ty.clone()), arity, ty, body, lb)?;
                Ok((t, cond_union(set, &[lb], l)))
            }
            StmtKind::Test(test, body) => {
                let atom = match self.chk.as_atom(ty)? {
                    Some(atom) => atom,
                    None => {
                        // Reuse the typing error for the arity/shape failure.
                        return self
                            .chk
                            .update_type(env, arity, ty, s)
                            .map(|t| (t, BTreeSet::new()));
                    }
                };
                if test_match(&atom, test) {
                    let lb = l + 1;
                    let (t, set) =
                        self.analyze(env, Arity::Singular, &Type::Atom(atom), body, lb)?;
                    Ok((t, cond_union(set, &[lb], l)))
                } else {
                    Ok((Type::Atom(atom), BTreeSet::from([l])))
                }
            }
            StmtKind::Children(body) => {
                let atom = match self.chk.as_atom(ty)? {
                    Some(atom) => atom,
                    None => {
                        return self
                            .chk
                            .update_type(env, arity, ty, s)
                            .map(|t| (t, BTreeSet::new()));
                    }
                };
                match atom {
                    Atom::Elem(n, content) => {
                        let lb = l + 1;
                        let (t, set) = self.analyze(env, Arity::Plural, &content, body, lb)?;
                        Ok((Type::elem(n, t), cond_union(set, &[lb], l)))
                    }
                    other => Err(
                        Diag::new(Code::TypeError, "children requires an element focus")
                            .at(s.span)
                            .expected_found("n[τ]", other.to_string()),
                    ),
                }
            }
            StmtKind::Left(body) => {
                let lb = l + 1;
                let (t, set) = self.analyze(env, Arity::Plural, &Type::Empty, body, lb)?;
                Ok((Type::seq(t, ty.clone()), cond_union(set, &[lb], l)))
            }
            StmtKind::Right(body) => {
                let lb = l + 1;
                let (t, set) = self.analyze(env, Arity::Plural, &Type::Empty, body, lb)?;
                Ok((Type::seq(ty.clone(), t), cond_union(set, &[lb], l)))
            }
            StmtKind::Iter(body) => {
                if arity == Arity::Singular {
                    return Err(Diag::new(
                        Code::ArityError,
                        "iter is a plural update but was used at singular arity",
                    )
                    .at(s.span));
                }
                let lb = l + 1;
                let (t, set) = self.analyze_iter(env, ty, body, lb)?;
                Ok((t, cond_union(set, &[lb], l)))
            }
            StmtKind::Call(..) => {
                // Conservative: no path error at a call, body not analyzed.
                let t = self.chk.update_type(env, arity, ty, s)?;
                Ok((t, BTreeSet::new()))
            }
        }
    }

    fn analyze_iter(
        &mut self,
        env: &TypeEnv,
        ty: &Type,
        body: &Stmt,
        lb: Loc,
    ) -> Result<(Type, BTreeSet<Loc>)> {
        match ty {
            Type::Empty => {
                self.record(lb, &Type::Empty);
                Ok((Type::Empty, BTreeSet::from([lb])))
            }
            Type::Atom(a) => self.analyze(env, Arity::Singular, &Type::Atom(a.clone()), body, lb),
            Type::Seq(l, r) => {
                let (t1, s1) = self.analyze_iter(env, l, body, lb)?;
                let (t2, s2) = self.analyze_iter(env, r, body, lb)?;
                Ok((Type::seq(t1, t2), s1.intersection(&s2).copied().collect()))
            }
            Type::Alt(l, r) => {
                let (t1, s1) = self.analyze_iter(env, l, body, lb)?;
                let (t2, s2) = self.analyze_iter(env, r, body, lb)?;
                Ok((Type::alt(t1, t2), s1.intersection(&s2).copied().collect()))
            }
            Type::Star(t) => {
                let (t1, set) = self.analyze_iter(env, t, body, lb)?;
                Ok((Type::star(t1), set))
            }
            Type::Var(x) => {
                let key = (x.clone(), lb);
                if self.in_progress.contains(&key) {
                    // Re-entrant unfolding: contribute the body's full label
                    // set, the neutral element for intersection.
                    let all: BTreeSet<Loc> = (lb..lb + subtree_size(body)).collect();
                    return Ok((Type::Var(x.clone()), all));
                }
                let def = self.chk.signature().get(x).cloned().ok_or_else(|| {
                    Diag::new(
                        Code::UndeclaredTypeVar,
                        format!("type variable `{x}` is not declared"),
                    )
                })?;
                self.in_progress.insert(key.clone());
                let out = self.analyze_iter(env, &def, body, lb);
                self.in_progress.remove(&key);
                out
            }
            Type::Flex(z) => Err(Diag::new(
                Code::TypeError,
                format!("internal type variable Z{z} in path-error analysis"),
            )),
        }
    }
}

/// Run the analysis.  The statement must typecheck; the returned type
/// agrees with plain type inference.
pub fn analyze(
    env: &TypeEnv,
    arity: Arity,
    ty: &Type,
    labeled: &Labeled,
    procs: &Procs,
    sig: &Signature,
) -> Result<Analysis> {
    let mut chk = Checker::new(sig.clone(), procs);
    let mut analyzer = Analyzer {
        chk: &mut chk,
        inputs: HashMap::new(),
        in_progress: HashSet::new(),
    };
    let (out, set) = analyzer.analyze(env, arity, ty, &labeled.root, 0)?;
    let inputs = std::mem::take(&mut analyzer.inputs);
    Ok(Analysis {
        ty: out,
        unproductive: set,
        input_types: inputs,
    })
}

/// The reportable path-errors: unproductive labels that are not already
/// `skip`.
pub fn report_errors(labeled: &Labeled, unproductive: &BTreeSet<Loc>) -> Vec<Loc> {
    unproductive
        .iter()
        .copied()
        .filter(|&l| labeled.at(l).map(|s| !s.is_skip()).unwrap_or(false))
        .collect()
}

/// Replace every reported subexpression with `skip`, outermost first so
/// nested reports collapse into a single replacement.
pub fn optimize(labeled: &Labeled, reported: &[Loc]) -> Stmt {
    let mut sorted: Vec<Loc> = reported.to_vec();
    sorted.sort_unstable();
    let mut result = labeled.root.clone();
    let mut covered_until: Option<Loc> = None;
    for &l in &sorted {
        if let Some(end) = covered_until {
            if l < end {
                continue;
            }
        }
        let size = labeled.at(l).map(subtree_size).unwrap_or(1);
        covered_until = Some(l + size);
        result = replace_in(&result, 0, l);
    }
    result
}
