//! Shared generators and oracles for the integration suites.
//!
//! The membership/subtyping oracle here is deliberately independent of the
//! library's inclusion engine: it re-derives linear factors directly on the
//! type syntax and decides inclusion by brute force over every forest of
//! bounded depth and width.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use flux::query::{Expr, ExprKind};
use flux::source::{Path, PathKind, SrcStmt, SrcStmtKind, Upd, UpdKind};
use flux::types::{Atom, Signature, Test, Type};
use flux::typing::{Arity, Checker, TypeEnv};
use flux::update::{ProcDecl, Procs, Stmt, StmtKind};
use flux::value::{Env, Forest, Tree};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn e(kind: ExprKind) -> Expr {
    Expr::new(kind)
}

pub fn st(kind: StmtKind) -> Stmt {
    Stmt::new(kind)
}

pub fn elem_ty(n: &str) -> Type {
    Type::elem(n, Type::Empty)
}

// ---------------------------------------------------------------------------
// Independent membership oracle (naive matcher on type syntax)
// ---------------------------------------------------------------------------

fn o_nullable(ty: &Type, sig: &Signature) -> bool {
    match ty {
        Type::Empty | Type::Star(_) => true,
        Type::Atom(_) => false,
        Type::Alt(l, r) => o_nullable(l, sig) || o_nullable(r, sig),
        Type::Seq(l, r) => o_nullable(l, sig) && o_nullable(r, sig),
        Type::Var(x) => o_nullable(sig.get(x).expect("declared"), sig),
        Type::Flex(_) => panic!("flex var in oracle"),
    }
}

fn o_first(ty: &Type, sig: &Signature) -> Vec<(Atom, Type)> {
    match ty {
        Type::Empty => vec![],
        Type::Atom(a) => vec![(a.clone(), Type::Empty)],
        Type::Alt(l, r) => {
            let mut out = o_first(l, sig);
            out.extend(o_first(r, sig));
            out
        }
        Type::Seq(l, r) => {
            let mut out: Vec<(Atom, Type)> = o_first(l, sig)
                .into_iter()
                .map(|(a, rest)| {
                    (
                        a,
                        if rest == Type::Empty {
                            (**r).clone()
                        } else {
                            Type::seq(rest, (**r).clone())
                        },
                    )
                })
                .collect();
            if o_nullable(l, sig) {
                out.extend(o_first(r, sig));
            }
            out
        }
        Type::Star(t) => o_first(t, sig)
            .into_iter()
            .map(|(a, rest)| {
                (
                    a,
                    if rest == Type::Empty {
                        ty.clone()
                    } else {
                        Type::seq(rest, ty.clone())
                    },
                )
            })
            .collect(),
        Type::Var(x) => o_first(sig.get(x).expect("declared"), sig),
        Type::Flex(_) => panic!("flex var in oracle"),
    }
}

fn o_tree_matches(t: &Tree, atom: &Atom, sig: &Signature) -> bool {
    match (t, atom) {
        (Tree::Bool(_), Atom::Bool) => true,
        (Tree::Text(_), Atom::Str) => true,
        (Tree::Elem(n, children), Atom::Elem(m, body)) if n == m => {
            oracle_member(children, body, sig)
        }
        _ => false,
    }
}

/// Naive membership: backtracking over linear factors.  Exponential in the
/// worst case; fine for oracle-sized inputs.
pub fn oracle_member(v: &Forest, ty: &Type, sig: &Signature) -> bool {
    fn go(items: &[Tree], ty: &Type, sig: &Signature) -> bool {
        match items {
            [] => o_nullable(ty, sig),
            [t, rest @ ..] => o_first(ty, sig)
                .into_iter()
                .any(|(a, tail)| o_tree_matches(t, &a, sig) && go(rest, &tail, sig)),
        }
    }
    go(&v.0, ty, sig)
}

/// Every tree of depth ≤ 2 over the given labels (child forests up to
/// `child_width`), plus a string and a boolean leaf.
pub fn oracle_tree_space(labels: &[&str], child_width: usize) -> Vec<Tree> {
    let mut leaves: Vec<Tree> = vec![Tree::text("w"), Tree::Bool(true)];
    for l in labels {
        leaves.push(Tree::elem(*l, Forest::empty()));
    }
    let mut child_forests: Vec<Vec<Tree>> = vec![vec![]];
    let mut layer: Vec<Vec<Tree>> = vec![vec![]];
    for _ in 0..child_width {
        let mut next = Vec::new();
        for f in &layer {
            for leaf in &leaves {
                let mut g = f.clone();
                g.push(leaf.clone());
                next.push(g);
            }
        }
        child_forests.extend(next.clone());
        layer = next;
    }
    let mut trees = leaves.clone();
    for l in labels {
        for f in &child_forests {
            if !f.is_empty() {
                trees.push(Tree::elem(*l, Forest(f.clone())));
            }
        }
    }
    trees
}

type OracleState = BTreeSet<Type>;

fn oracle_step(
    state: &OracleState,
    tree_idx: usize,
    trees: &[Tree],
    sig: &Signature,
    match_memo: &mut HashMap<(usize, Atom), bool>,
) -> OracleState {
    let mut next = BTreeSet::new();
    for ty in state {
        for (atom, rest) in o_first(ty, sig) {
            let hit = *match_memo
                .entry((tree_idx, atom.clone()))
                .or_insert_with(|| o_tree_matches(&trees[tree_idx], &atom, sig));
            if hit {
                next.insert(rest);
            }
        }
    }
    next
}

fn oracle_accepts(state: &OracleState, sig: &Signature) -> bool {
    state.iter().any(|t| o_nullable(t, sig))
}

/// Brute-force inclusion over every forest of width ≤ `width` built from
/// `trees`: returns a counterexample `w ∈ ⟦t1⟧ \ ⟦t2⟧` if one exists in the
/// space.  Shared prefixes are explored once, so the decision equals plain
/// enumeration at a fraction of the cost.
pub fn oracle_counterexample(
    t1: &Type,
    t2: &Type,
    sig: &Signature,
    trees: &[Tree],
    width: usize,
) -> Option<Forest> {
    let mut match_memo = HashMap::new();
    let mut seen: HashSet<(usize, OracleState, OracleState)> = HashSet::new();
    let start1: OracleState = BTreeSet::from([t1.clone()]);
    let start2: OracleState = BTreeSet::from([t2.clone()]);

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        depth: usize,
        width: usize,
        s1: &OracleState,
        s2: &OracleState,
        prefix: &mut Vec<Tree>,
        trees: &[Tree],
        sig: &Signature,
        match_memo: &mut HashMap<(usize, Atom), bool>,
        seen: &mut HashSet<(usize, OracleState, OracleState)>,
    ) -> Option<Forest> {
        if oracle_accepts(s1, sig) && !oracle_accepts(s2, sig) {
            return Some(Forest(prefix.clone()));
        }
        if depth == width {
            return None;
        }
        if !seen.insert((depth, s1.clone(), s2.clone())) {
            return None;
        }
        for i in 0..trees.len() {
            let n1 = oracle_step(s1, i, trees, sig, match_memo);
            if n1.is_empty() {
                continue;
            }
            let n2 = oracle_step(s2, i, trees, sig, match_memo);
            prefix.push(trees[i].clone());
            let found = dfs(
                depth + 1,
                width,
                &n1,
                &n2,
                prefix,
                trees,
                sig,
                match_memo,
                seen,
            );
            prefix.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    dfs(
        0,
        width,
        &start1,
        &start2,
        &mut Vec::new(),
        trees,
        sig,
        &mut match_memo,
        &mut seen,
    )
}

// ---------------------------------------------------------------------------
// Random types and member sampling
// ---------------------------------------------------------------------------

/// Is `⟦ty⟧` nonempty?  Least fixpoint: variables in progress count as
/// empty.
pub fn inhabited(ty: &Type, sig: &Signature) -> bool {
    fn go(ty: &Type, sig: &Signature, busy: &mut HashSet<String>) -> bool {
        match ty {
            Type::Empty | Type::Star(_) => true,
            Type::Atom(Atom::Bool) | Type::Atom(Atom::Str) => true,
            Type::Atom(Atom::Elem(_, body)) => go(body, sig, busy),
            Type::Alt(l, r) => go(l, sig, busy) || go(r, sig, busy),
            Type::Seq(l, r) => go(l, sig, busy) && go(r, sig, busy),
            Type::Var(x) => {
                if !busy.insert(x.clone()) {
                    return false;
                }
                let out = go(sig.get(x).expect("declared"), sig, busy);
                busy.remove(x);
                out
            }
            Type::Flex(_) => panic!("flex var in inhabited"),
        }
    }
    go(ty, sig, &mut HashSet::new())
}

/// Does `⟦ty⟧` contain a value whose trees all have height ≤ `k`?
fn inhabited_within(ty: &Type, sig: &Signature, k: usize) -> bool {
    fn go(ty: &Type, sig: &Signature, k: usize, busy: &mut HashSet<String>) -> bool {
        match ty {
            Type::Empty | Type::Star(_) => true,
            Type::Atom(Atom::Bool) | Type::Atom(Atom::Str) => k >= 1,
            Type::Atom(Atom::Elem(_, body)) => k >= 1 && go(body, sig, k - 1, busy),
            Type::Alt(l, r) => go(l, sig, k, busy) || go(r, sig, k, busy),
            Type::Seq(l, r) => go(l, sig, k, busy) && go(r, sig, k, busy),
            Type::Var(x) => {
                if !busy.insert(x.clone()) {
                    return false;
                }
                let out = go(sig.get(x).expect("declared"), sig, k, busy);
                busy.remove(x);
                out
            }
            Type::Flex(_) => panic!("flex var"),
        }
    }
    go(ty, sig, k, &mut HashSet::new())
}

const STRING_POOL: &[&str] = &["", "w", "x y", "1859"];

/// Sample a member of `⟦ty⟧` (which must be inhabited).  `depth` bounds the
/// nesting appetite; once exhausted the smallest viable branches are taken.
pub fn sample_member(rng: &mut ChaCha8Rng, ty: &Type, sig: &Signature, depth: usize) -> Forest {
    match ty {
        Type::Empty => Forest::empty(),
        Type::Atom(Atom::Str) => Forest::singleton(Tree::text(*STRING_POOL.choose(rng).unwrap())),
        Type::Atom(Atom::Bool) => Forest::singleton(Tree::Bool(rng.gen())),
        Type::Atom(Atom::Elem(n, body)) => {
            let children = sample_member(rng, body, sig, depth.saturating_sub(1));
            Forest::singleton(Tree::Elem(n.clone(), children))
        }
        Type::Seq(l, r) => {
            let a = sample_member(rng, l, sig, depth);
            a.concat(&sample_member(rng, r, sig, depth))
        }
        Type::Alt(l, r) => {
            let l_ok = inhabited(l, sig);
            let r_ok = inhabited(r, sig);
            let pick_left = match (l_ok, r_ok) {
                (true, false) => true,
                (false, true) => false,
                (true, true) => {
                    if depth == 0 {
                        // prefer a branch realizable within the remaining depth
                        match (inhabited_within(l, sig, 1), inhabited_within(r, sig, 1)) {
                            (true, false) => true,
                            (false, true) => false,
                            _ => rng.gen(),
                        }
                    } else {
                        rng.gen()
                    }
                }
                (false, false) => panic!("uninhabited alternation in sample_member"),
            };
            if pick_left {
                sample_member(rng, l, sig, depth)
            } else {
                sample_member(rng, r, sig, depth)
            }
        }
        Type::Star(t) => {
            let reps = if depth == 0 || !inhabited(t, sig) {
                0
            } else {
                rng.gen_range(0..=2)
            };
            let mut out = Forest::empty();
            for _ in 0..reps {
                out = out.concat(&sample_member(rng, t, sig, depth));
            }
            out
        }
        Type::Var(x) => sample_member(rng, sig.get(x).expect("declared"), sig, depth),
        Type::Flex(_) => panic!("flex var in sample_member"),
    }
}

/// Sample an environment in `⟦Γ⟧`.
pub fn sample_env(rng: &mut ChaCha8Rng, env: &TypeEnv, sig: &Signature, depth: usize) -> Env {
    let mut out = Env::new();
    for (x, ty) in env.forests() {
        out = out.with_forest(x, sample_member(rng, ty, sig, depth));
    }
    for (x, atom) in env.trees() {
        let v = sample_member(rng, &Type::Atom(atom.clone()), sig, depth);
        out = out.with_tree(x, v.as_singleton().expect("atoms are singletons").clone());
    }
    out
}

/// A random non-recursive type over `labels`; `depth` bounds element
/// nesting, `budget` the number of atoms per level.
pub fn gen_type(rng: &mut ChaCha8Rng, labels: &[&str], depth: usize, budget: usize) -> Type {
    let items = rng.gen_range(0..=budget.max(1));
    if items == 0 {
        return Type::Empty;
    }
    let mut parts: Vec<Type> = Vec::new();
    for _ in 0..items {
        let base = gen_type_item(rng, labels, depth);
        let decorated = match rng.gen_range(0..10) {
            0 | 1 => Type::star(base),
            2 => Type::opt(base),
            3 => Type::alt(base, gen_type_item(rng, labels, depth)),
            4 => Type::star(Type::alt(base, gen_type_item(rng, labels, depth))),
            _ => base,
        };
        parts.push(decorated);
    }
    let mut out = parts.pop().unwrap();
    while let Some(p) = parts.pop() {
        out = Type::seq(p, out);
    }
    out
}

fn gen_type_item(rng: &mut ChaCha8Rng, labels: &[&str], depth: usize) -> Type {
    match rng.gen_range(0..8) {
        0 => Type::string(),
        _ => {
            let label = *labels.choose(rng).unwrap();
            if depth == 0 {
                Type::elem(label, Type::Empty)
            } else {
                let body = gen_type(rng, labels, depth - 1, 2);
                Type::elem(label, body)
            }
        }
    }
}

/// Collect the atoms syntactically reachable at the top level of a
/// (non-flex) type.
pub fn atoms_of(ty: &Type, sig: &Signature) -> Vec<Atom> {
    fn go(ty: &Type, sig: &Signature, busy: &mut HashSet<String>, out: &mut Vec<Atom>) {
        match ty {
            Type::Empty | Type::Flex(_) => {}
            Type::Atom(a) => out.push(a.clone()),
            Type::Alt(l, r) | Type::Seq(l, r) => {
                go(l, sig, busy, out);
                go(r, sig, busy, out);
            }
            Type::Star(t) => go(t, sig, busy, out),
            Type::Var(x) => {
                if busy.insert(x.clone()) {
                    go(sig.get(x).expect("declared"), sig, busy, out);
                    busy.remove(x);
                }
            }
        }
    }
    let mut out = Vec::new();
    go(ty, sig, &mut HashSet::new(), &mut out);
    out
}

// ---------------------------------------------------------------------------
// Well-typed query generation
// ---------------------------------------------------------------------------

pub fn gen_bool_query(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
    match if depth == 0 { 0 } else { rng.gen_range(0..4) } {
        0 | 1 => e(ExprKind::Bool(rng.gen())),
        2 => e(ExprKind::Eq(
            Box::new(gen_string_query(rng, depth - 1)),
            Box::new(gen_string_query(rng, depth - 1)),
        )),
        _ => e(ExprKind::If(
            Box::new(gen_bool_query(rng, depth - 1)),
            Box::new(gen_bool_query(rng, depth - 1)),
            Box::new(gen_bool_query(rng, depth - 1)),
        )),
    }
}

pub fn gen_string_query(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
    if depth > 0 && rng.gen_bool(0.25) {
        e(ExprKind::If(
            Box::new(gen_bool_query(rng, depth - 1)),
            Box::new(gen_string_query(rng, depth - 1)),
            Box::new(gen_string_query(rng, depth - 1)),
        ))
    } else {
        e(ExprKind::Text(STRING_POOL.choose(rng).unwrap().to_string()))
    }
}

/// A well-typed query under `env`.  Uses whatever variables are around.
pub fn gen_query(
    rng: &mut ChaCha8Rng,
    env: &TypeEnv,
    labels: &[&str],
    depth: usize,
    fresh: &mut u32,
) -> Expr {
    let forest_vars: Vec<String> = env.forests().map(|(x, _)| x.to_string()).collect();
    let tree_vars: Vec<String> = env.trees().map(|(x, _)| x.to_string()).collect();
    let elem_tree_vars: Vec<String> = env
        .trees()
        .filter(|(_, a)| matches!(a, Atom::Elem(..)))
        .map(|(x, _)| x.to_string())
        .collect();
    let mut choices: Vec<u8> = vec![0, 1, 2];
    if depth > 0 {
        choices.extend([3, 4, 5, 6, 7, 10]);
    }
    if !forest_vars.is_empty() {
        choices.push(8);
    }
    if !tree_vars.is_empty() {
        choices.push(9);
    }
    if !elem_tree_vars.is_empty() {
        choices.extend([11, 11]);
    }
    match *choices.choose(rng).unwrap() {
        0 => e(ExprKind::Empty),
        1 => e(ExprKind::Text(STRING_POOL.choose(rng).unwrap().to_string())),
        2 => e(ExprKind::Bool(rng.gen())),
        3 => e(ExprKind::Concat(
            Box::new(gen_query(rng, env, labels, depth - 1, fresh)),
            Box::new(gen_query(rng, env, labels, depth - 1, fresh)),
        )),
        4 => e(ExprKind::Elem(
            labels.choose(rng).unwrap().to_string(),
            Box::new(gen_query(rng, env, labels, depth - 1, fresh)),
        )),
        5 => {
            // the body does not mention the bound variable, which keeps the
            // generator checker-free; the binding itself is still exercised
            let x = format!("q{}", *fresh);
            *fresh += 1;
            let bound = gen_query(rng, env, labels, depth - 1, fresh);
            let body = gen_query(rng, env, labels, depth - 1, fresh);
            e(ExprKind::Let(x, Box::new(bound), Box::new(body)))
        }
        6 => e(ExprKind::If(
            Box::new(gen_bool_query(rng, depth - 1)),
            Box::new(gen_query(rng, env, labels, depth - 1, fresh)),
            Box::new(gen_query(rng, env, labels, depth - 1, fresh)),
        )),
        7 => e(ExprKind::Eq(
            Box::new(gen_string_query(rng, depth - 1)),
            Box::new(gen_string_query(rng, depth - 1)),
        )),
        8 => e(ExprKind::ForestVar(
            forest_vars.choose(rng).unwrap().clone(),
        )),
        9 => e(ExprKind::TreeVar(tree_vars.choose(rng).unwrap().clone())),
        10 => e(ExprKind::LabelFilter(
            Box::new(gen_query(rng, env, labels, depth - 1, fresh)),
            labels.choose(rng).unwrap().to_string(),
        )),
        _ => {
            let x = elem_tree_vars.choose(rng).unwrap().clone();
            let axis = e(ExprKind::ChildAxis(x));
            if depth > 0 && rng.gen_bool(0.5) {
                let var = format!("q{}", *fresh);
                *fresh += 1;
                let inner = gen_for_body(rng, env, labels, &var, depth - 1, fresh);
                e(ExprKind::For(var, Box::new(axis), Box::new(inner)))
            } else {
                axis
            }
        }
    }
}

fn gen_for_body(
    rng: &mut ChaCha8Rng,
    env: &TypeEnv,
    labels: &[&str],
    var: &str,
    depth: usize,
    fresh: &mut u32,
) -> Expr {
    // A body that is well-typed whatever atom the variable gets: use the
    // variable itself, wrap it, or ignore it.
    match rng.gen_range(0..4) {
        0 => e(ExprKind::TreeVar(var.to_string())),
        1 => e(ExprKind::Elem(
            labels.choose(rng).unwrap().to_string(),
            Box::new(e(ExprKind::TreeVar(var.to_string()))),
        )),
        2 => e(ExprKind::LabelFilter(
            Box::new(e(ExprKind::TreeVar(var.to_string()))),
            labels.choose(rng).unwrap().to_string(),
        )),
        _ => gen_query(rng, env, labels, depth, fresh),
    }
}

// ---------------------------------------------------------------------------
// Well-typed update statement generation
// ---------------------------------------------------------------------------

pub fn test_procs() -> Procs {
    let mut procs = Procs::new();
    procs
        .insert(ProcDecl {
            name: "pad".into(),
            params: vec![],
            input: Type::Empty,
            output: elem_ty("pad"),
            body: st(StmtKind::Insert(e(ExprKind::Elem(
                "pad".into(),
                Box::new(e(ExprKind::Empty)),
            )))),
            span: Default::default(),
        })
        .expect("unique");
    procs
        .insert(ProcDecl {
            name: "wipe".into(),
            params: vec![("why".into(), Type::string())],
            input: Type::star(Type::alt(
                Type::alt(elem_ty("a"), elem_ty("b")),
                Type::alt(elem_ty("c"), Type::string()),
            )),
            output: Type::Empty,
            body: st(StmtKind::Delete),
            span: Default::default(),
        })
        .expect("unique");
    procs
}

/// A statement that is well-typed at `(arity, ty)` by construction; the
/// caller's checker verifies it anyway.
#[allow(clippy::too_many_arguments)]
pub fn gen_stmt(
    rng: &mut ChaCha8Rng,
    chk: &mut Checker<'_>,
    env: &TypeEnv,
    arity: Arity,
    ty: &Type,
    labels: &[&str],
    depth: usize,
    fresh: &mut u32,
) -> Stmt {
    let atom = chk.as_atom(ty).expect("wf");
    let is_empty_ty = chk.equiv(ty, &Type::Empty).expect("wf");
    let mut choices: Vec<u8> = vec![0, 1]; // skip, delete
    if depth > 0 {
        choices.extend([2, 2, 3, 4, 5]); // seq, if, let, snapshot
        choices.extend([8, 8]); // left/right
        if arity == Arity::Plural {
            choices.extend([9, 9, 9]); // iter
        }
    }
    if is_empty_ty {
        choices.extend([6, 6, 6]); // insert
        choices.push(10); // call pad()
    }
    if let Some(a) = &atom {
        if matches!(a, Atom::Elem(..)) {
            choices.extend([7, 7]); // rename
            if depth > 0 {
                choices.extend([11, 11]); // children
            }
        }
        if depth > 0 {
            choices.extend([12, 12]); // test
        }
    }
    match *choices.choose(rng).unwrap() {
        0 => Stmt::skip(),
        1 => st(StmtKind::Delete),
        2 => {
            let a = gen_stmt(rng, chk, env, arity, ty, labels, depth - 1, fresh);
            let mid = chk
                .update_type(env, arity, ty, &a)
                .expect("generated well-typed");
            let b = gen_stmt(rng, chk, env, arity, &mid, labels, depth - 1, fresh);
            Stmt::seq(a, b)
        }
        3 => st(StmtKind::If(
            gen_bool_query(rng, 2),
            Box::new(gen_stmt(rng, chk, env, arity, ty, labels, depth - 1, fresh)),
            Box::new(gen_stmt(rng, chk, env, arity, ty, labels, depth - 1, fresh)),
        )),
        4 => {
            let x = format!("v{}", *fresh);
            *fresh += 1;
            let bound = gen_query(rng, env, labels, 2, fresh);
            let bty = chk.query_type(env, &bound).expect("generated well-typed");
            let benv = env.with_forest(&x, bty);
            let body = gen_stmt(rng, chk, &benv, arity, ty, labels, depth - 1, fresh);
            st(StmtKind::Let(x, bound, Box::new(body)))
        }
        5 => {
            let x = format!("v{}", *fresh);
            *fresh += 1;
            let benv = env.with_forest(&x, ty.clone());
            let body = gen_stmt(rng, chk, &benv, arity, ty, labels, depth - 1, fresh);
            st(StmtKind::Snapshot(x, Box::new(body)))
        }
        6 => {
            let q = gen_query(rng, env, labels, 2, fresh);
            st(StmtKind::Insert(q))
        }
        7 => {
            let Some(Atom::Elem(old, _)) = &atom else {
                unreachable!()
            };
            let new = if rng.gen_bool(0.3) {
                old.clone()
            } else {
                labels.choose(rng).unwrap().to_string()
            };
            st(StmtKind::Rename(new))
        }
        8 => {
            let body = gen_stmt(
                rng,
                chk,
                env,
                Arity::Plural,
                &Type::Empty,
                labels,
                depth - 1,
                fresh,
            );
            if rng.gen() {
                st(StmtKind::Left(Box::new(body)))
            } else {
                st(StmtKind::Right(Box::new(body)))
            }
        }
        9 => {
            // Retry a few times for a body that typechecks over every atom.
            for _ in 0..4 {
                let body = gen_iter_body(rng, chk, env, ty, labels, depth - 1, fresh);
                let probe = st(StmtKind::Iter(Box::new(body.clone())));
                if chk.update_type(env, arity, ty, &probe).is_ok() {
                    return probe;
                }
            }
            st(StmtKind::Iter(Box::new(st(StmtKind::Delete))))
        }
        10 => st(StmtKind::Call("pad".into(), vec![])),
        11 => {
            let Some(Atom::Elem(_, body_ty)) = atom.clone() else {
                unreachable!()
            };
            let body = gen_stmt(
                rng,
                chk,
                env,
                Arity::Plural,
                &body_ty,
                labels,
                depth - 1,
                fresh,
            );
            st(StmtKind::Children(Box::new(body)))
        }
        _ => {
            let a = atom.clone().expect("atom present");
            let test = gen_test(rng, labels);
            if flux::types::test_match(&a, &test) {
                let body = gen_stmt(
                    rng,
                    chk,
                    env,
                    Arity::Singular,
                    &Type::Atom(a),
                    labels,
                    depth - 1,
                    fresh,
                );
                st(StmtKind::Test(test, Box::new(body)))
            } else {
                // non-matching guard: body is never typechecked or run
                st(StmtKind::Test(test, Box::new(st(StmtKind::Delete))))
            }
        }
    }
}

fn gen_test(rng: &mut ChaCha8Rng, labels: &[&str]) -> Test {
    match rng.gen_range(0..6) {
        0 => Test::Node,
        1 => Test::Text,
        2 => Test::Label("zz".into()),
        _ => Test::Label(labels.choose(rng).unwrap().to_string()),
    }
}

fn gen_iter_body(
    rng: &mut ChaCha8Rng,
    chk: &mut Checker<'_>,
    env: &TypeEnv,
    ty: &Type,
    labels: &[&str],
    depth: usize,
    fresh: &mut u32,
) -> Stmt {
    // Guarded bodies are safe on heterogeneous forests; pick an atom the
    // guard matches and generate the body against it.
    let candidates = atoms_of(ty, chk.signature());
    if candidates.is_empty() || rng.gen_bool(0.2) {
        return match rng.gen_range(0..3) {
            0 => st(StmtKind::Delete),
            1 => Stmt::skip(),
            _ => st(StmtKind::Test(
                gen_test(rng, labels),
                Box::new(st(StmtKind::Delete)),
            )),
        };
    }
    // Body generated against one matching atom; the caller retries when the
    // test happens to match differently-shaped atoms elsewhere in the type.
    let atom = candidates.choose(rng).unwrap().clone();
    let test = match &atom {
        Atom::Elem(n, _) => {
            if rng.gen_bool(0.25) {
                Test::Node
            } else {
                Test::Label(n.clone())
            }
        }
        Atom::Str => Test::Text,
        Atom::Bool => Test::Node,
    };
    let body = if depth == 0 {
        st(StmtKind::Delete)
    } else {
        gen_stmt(
            rng,
            chk,
            env,
            Arity::Singular,
            &Type::Atom(atom),
            labels,
            depth,
            fresh,
        )
    };
    st(StmtKind::Test(test, Box::new(body)))
}

// ---------------------------------------------------------------------------
// Random source statements (for normalization soundness/completeness)
// ---------------------------------------------------------------------------

pub fn gen_source_stmt(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    doc: &Atom,
    labels: &[&str],
    depth: usize,
    fresh: &mut u32,
) -> SrcStmt {
    let kind = if depth == 0 { 4 } else { rng.gen_range(0..6) };
    match kind {
        0 => SrcStmt::new(SrcStmtKind::Seq(
            Box::new(gen_source_stmt(rng, sig, doc, labels, depth - 1, fresh)),
            Box::new(gen_source_stmt(rng, sig, doc, labels, depth - 1, fresh)),
        )),
        1 => SrcStmt::new(SrcStmtKind::IfThen(
            gen_bool_query(rng, 2),
            Box::new(gen_source_stmt(rng, sig, doc, labels, depth - 1, fresh)),
        )),
        2 => {
            let x = format!("s{}", *fresh);
            *fresh += 1;
            SrcStmt::new(SrcStmtKind::Let(
                x,
                gen_string_query(rng, 1),
                Box::new(gen_source_stmt(rng, sig, doc, labels, depth - 1, fresh)),
            ))
        }
        3 => SrcStmt::new(SrcStmtKind::Block(Box::new(gen_source_stmt(
            rng,
            sig,
            doc,
            labels,
            depth - 1,
            fresh,
        )))),
        _ => {
            let upd = gen_source_upd(rng, sig, doc, labels, depth, fresh);
            let guard = if rng.gen_bool(0.3) {
                Some(if rng.gen_bool(0.12) {
                    // deliberately ill-typed guard: both sides must agree on
                    // the rejection
                    e(ExprKind::Eq(
                        Box::new(e(ExprKind::Bool(true))),
                        Box::new(e(ExprKind::Bool(false))),
                    ))
                } else {
                    gen_bool_query(rng, 2)
                })
            } else {
                None
            };
            SrcStmt::new(SrcStmtKind::Upd(upd, guard))
        }
    }
}

fn gen_closed_value_query(rng: &mut ChaCha8Rng, labels: &[&str], depth: usize) -> Expr {
    match if depth == 0 {
        rng.gen_range(0..2)
    } else {
        rng.gen_range(0..5)
    } {
        0 => e(ExprKind::Text(STRING_POOL.choose(rng).unwrap().to_string())),
        1 => e(ExprKind::Empty),
        2 => e(ExprKind::Elem(
            labels.choose(rng).unwrap().to_string(),
            Box::new(gen_closed_value_query(rng, labels, depth - 1)),
        )),
        3 => e(ExprKind::Concat(
            Box::new(gen_closed_value_query(rng, labels, depth - 1)),
            Box::new(gen_closed_value_query(rng, labels, depth - 1)),
        )),
        _ => e(ExprKind::If(
            Box::new(gen_bool_query(rng, 1)),
            Box::new(gen_closed_value_query(rng, labels, depth - 1)),
            Box::new(gen_closed_value_query(rng, labels, depth - 1)),
        )),
    }
}

fn gen_source_path(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    atom: &Atom,
    labels: &[&str],
    depth: usize,
    fresh: &mut u32,
) -> Path {
    if rng.gen_bool(0.08) {
        return Path::new(PathKind::Here);
    }
    let Atom::Elem(_, body) = atom else {
        return Path::new(PathKind::Here);
    };
    let content_atoms = atoms_of(body, sig);
    let elem_atoms: Vec<&Atom> = content_atoms
        .iter()
        .filter(|a| matches!(a, Atom::Elem(..)))
        .collect();
    let step_test = match rng.gen_range(0..10) {
        0 => Test::Node,
        1 => Test::Text,
        2 => Test::Label("zz".into()),
        _ => match elem_atoms.choose(rng) {
            Some(Atom::Elem(n, _)) => Test::Label(n.clone()),
            _ => Test::Label(labels.choose(rng).unwrap().to_string()),
        },
    };
    let mut path = Path::new(PathKind::Step(step_test.clone()));
    // descend through a matching element atom when possible
    if depth > 0 && rng.gen_bool(0.5) {
        if let Test::Label(n) = &step_test {
            if let Some(next) = content_atoms
                .iter()
                .find(|a| matches!(a, Atom::Elem(m, _) if m == n))
            {
                let rest = gen_source_path(rng, sig, next, labels, depth - 1, fresh);
                path = Path::new(PathKind::Slash(Box::new(path), Box::new(rest)));
            }
        }
    }
    if rng.gen_bool(0.25) {
        path = Path::new(PathKind::Filter(Box::new(path), gen_bool_query(rng, 1)));
    }
    if rng.gen_bool(0.25) {
        let x = format!("p{}", *fresh);
        *fresh += 1;
        path = Path::new(PathKind::Bind(x, Box::new(path)));
    }
    path
}

fn gen_source_upd(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    doc: &Atom,
    labels: &[&str],
    depth: usize,
    fresh: &mut u32,
) -> Upd {
    let path = gen_source_path(rng, sig, doc, labels, 2, fresh);
    let value = gen_closed_value_query(rng, labels, 2);
    let kind = match rng.gen_range(0..10) {
        0 => UpdKind::InsertBefore(path, value),
        1 => UpdKind::InsertAfter(path, value),
        2 => UpdKind::InsertFirst(path, value),
        3 => UpdKind::InsertLast(path, value),
        4 => UpdKind::Delete(path),
        5 => UpdKind::DeleteFrom(path),
        6 => UpdKind::Rename(path, labels.choose(rng).unwrap().to_string()),
        7 => UpdKind::Replace(path, value),
        8 => UpdKind::ReplaceIn(path, value),
        _ => {
            let inner = if depth == 0 {
                SrcStmt::new(SrcStmtKind::Upd(
                    Upd::new(UpdKind::Delete(Path::new(PathKind::Step(Test::Node)))),
                    None,
                ))
            } else {
                gen_source_stmt(rng, sig, doc, labels, depth - 1, fresh)
            };
            UpdKind::UpdateBy(path, Box::new(inner))
        }
    };
    Upd::new(kind)
}

/// A random document atom for source-statement fuzzing.
pub fn gen_doc_atom(rng: &mut ChaCha8Rng, labels: &[&str]) -> Atom {
    let content = gen_type(rng, labels, 2, 3);
    Atom::elem("doc", content)
}
