//! Membership and subtyping for regular expression forest types.
//!
//! Types are compiled on demand into interned states.  A state's *linear
//! factors* are the pairs `(atom, rest)` such that the state's language
//! contains `⟦atom⟧ · L(rest)`; together with nullability this is a
//! nondeterministic automaton whose alphabet symbols are atomic types.
//!
//! Membership is automaton matching with memoization on (forest position,
//! state).  Inclusion `L(τ1) ⊆ L(τ2)` runs the classic top-down check with a
//! set of coinductive assumptions: on revisiting an obligation it is assumed
//! to hold, element contents are compared through the subset decomposition
//! of product inclusions, and assumptions recorded under a failed branch are
//! rolled back.  The check is sound and complete for regular types and
//! terminates because the reachable state space is finite.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::diag::{Code, Diag, Result};
use crate::types::{Atom, Signature, Type};
use crate::value::{Forest, Label, Tree};

type StateId = u32;

#[derive(Clone, PartialEq, Eq, Debug)]
enum Sym {
    Bool,
    Str,
    Elem(Label, StateId),
}

struct StateData {
    ty: Type,
    nullable: Option<bool>,
    first: Option<Rc<Vec<(Sym, StateId)>>>,
}

/// Interning context for membership and subtype queries.  The signature is
/// owned so that typechecking can extend it with minted definitions while
/// existing states stay valid.
pub struct TypeCtx {
    sig: Signature,
    intern: HashMap<Type, StateId>,
    states: Vec<StateData>,
    sub_cache: HashMap<(StateId, StateId), bool>,
}

/// Subset enumeration bound for product decomposition; beyond this the type
/// is too ambiguous to be a practical schema.
const MAX_OVERLAP: usize = 24;

fn seq_norm(l: Type, r: Type) -> Type {
    match (l, r) {
        (Type::Empty, r) => r,
        (l, Type::Empty) => l,
        (l, r) => Type::seq(l, r),
    }
}

#[derive(Default)]
struct Assumptions {
    set: HashSet<(StateId, Box<[StateId]>)>,
    trail: Vec<(StateId, Box<[StateId]>)>,
}

impl Assumptions {
    fn contains(&self, key: &(StateId, Box<[StateId]>)) -> bool {
        self.set.contains(key)
    }

    fn insert(&mut self, key: (StateId, Box<[StateId]>)) {
        self.trail.push(key.clone());
        self.set.insert(key);
    }

    fn mark(&self) -> usize {
        self.trail.len()
    }

    fn rollback(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let key = self.trail.pop().unwrap();
            self.set.remove(&key);
        }
    }
}

impl TypeCtx {
    pub fn new(sig: Signature) -> TypeCtx {
        TypeCtx {
            sig,
            intern: HashMap::new(),
            states: Vec::new(),
            sub_cache: HashMap::new(),
        }
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    /// Extend the signature with a minted definition (used by iteration
    /// typing over recursive types).
    pub fn add_def(&mut self, name: String, def: Type) -> Result<()> {
        self.sig.insert(name, def)
    }

    pub fn fresh_name(&self, base: &str) -> String {
        self.sig.fresh_name(base)
    }

    fn state(&mut self, ty: &Type) -> Result<StateId> {
        if let Some(&id) = self.intern.get(ty) {
            return Ok(id);
        }
        // A variable state is an alias of its definition's state.
        if let Type::Var(x) = ty {
            let def = self
                .sig
                .get(x)
                .ok_or_else(|| {
                    Diag::new(
                        Code::UndeclaredTypeVar,
                        format!("type variable `{x}` is not declared"),
                    )
                })?
                .clone();
            let id = self.state(&def)?;
            self.intern.insert(ty.clone(), id);
            return Ok(id);
        }
        if let Type::Flex(z) = ty {
            return Err(Diag::new(
                Code::TypeError,
                format!("internal type variable Z{z} escaped into a semantic check"),
            ));
        }
        let id = self.states.len() as StateId;
        self.states.push(StateData {
            ty: ty.clone(),
            nullable: None,
            first: None,
        });
        self.intern.insert(ty.clone(), id);
        Ok(id)
    }

    fn nullable_ty(&self, ty: &Type) -> Result<bool> {
        match ty {
            Type::Empty | Type::Star(_) => Ok(true),
            Type::Atom(_) => Ok(false),
            Type::Alt(l, r) => Ok(self.nullable_ty(l)? || self.nullable_ty(r)?),
            Type::Seq(l, r) => Ok(self.nullable_ty(l)? && self.nullable_ty(r)?),
            Type::Var(x) => {
                let def = self.sig.get(x).ok_or_else(|| {
                    Diag::new(
                        Code::UndeclaredTypeVar,
                        format!("type variable `{x}` is not declared"),
                    )
                })?;
                self.nullable_ty(def)
            }
            Type::Flex(z) => Err(Diag::new(
                Code::TypeError,
                format!("internal type variable Z{z} escaped into a semantic check"),
            )),
        }
    }

    fn nullable(&mut self, id: StateId) -> Result<bool> {
        if let Some(b) = self.states[id as usize].nullable {
            return Ok(b);
        }
        let ty = self.states[id as usize].ty.clone();
        let b = self.nullable_ty(&ty)?;
        self.states[id as usize].nullable = Some(b);
        Ok(b)
    }

    fn linear(&self, ty: &Type) -> Result<Vec<(Atom, Type)>> {
        match ty {
            Type::Empty => Ok(Vec::new()),
            Type::Atom(a) => Ok(vec![(a.clone(), Type::Empty)]),
            Type::Alt(l, r) => {
                let mut out = self.linear(l)?;
                out.extend(self.linear(r)?);
                Ok(out)
            }
            Type::Seq(l, r) => {
                let mut out: Vec<(Atom, Type)> = self
                    .linear(l)?
                    .into_iter()
                    .map(|(a, rest)| (a, seq_norm(rest, (**r).clone())))
                    .collect();
                if self.nullable_ty(l)? {
                    out.extend(self.linear(r)?);
                }
                Ok(out)
            }
            Type::Star(t) => Ok(self
                .linear(t)?
                .into_iter()
                .map(|(a, rest)| (a, seq_norm(rest, ty.clone())))
                .collect()),
            Type::Var(x) => {
                let def = self.sig.get(x).ok_or_else(|| {
                    Diag::new(
                        Code::UndeclaredTypeVar,
                        format!("type variable `{x}` is not declared"),
                    )
                })?;
                self.linear(def)
            }
            Type::Flex(z) => Err(Diag::new(
                Code::TypeError,
                format!("internal type variable Z{z} escaped into a semantic check"),
            )),
        }
    }

    fn first(&mut self, id: StateId) -> Result<Rc<Vec<(Sym, StateId)>>> {
        if let Some(edges) = &self.states[id as usize].first {
            return Ok(Rc::clone(edges));
        }
        let ty = self.states[id as usize].ty.clone();
        let mut edges = Vec::new();
        for (atom, rest) in self.linear(&ty)? {
            let rest_id = self.state(&rest)?;
            let sym = match atom {
                Atom::Bool => Sym::Bool,
                Atom::Str => Sym::Str,
                Atom::Elem(n, body) => Sym::Elem(n, self.state(&body)?),
            };
            edges.push((sym, rest_id));
        }
        let edges = Rc::new(edges);
        self.states[id as usize].first = Some(Rc::clone(&edges));
        Ok(edges)
    }

    // -- membership --------------------------------------------------------

    pub fn member(&mut self, v: &Forest, ty: &Type) -> Result<bool> {
        let st = self.state(ty)?;
        let mut memo = HashMap::new();
        self.match_forest(&v.0, 0, st, &mut memo)
    }

    fn match_forest(
        &mut self,
        forest: &[Tree],
        pos: usize,
        st: StateId,
        memo: &mut HashMap<(usize, usize, StateId), bool>,
    ) -> Result<bool> {
        if pos == forest.len() {
            return self.nullable(st);
        }
        let key = (forest.as_ptr() as usize, pos, st);
        if let Some(&b) = memo.get(&key) {
            return Ok(b);
        }
        let edges = self.first(st)?;
        let mut ok = false;
        for (sym, rest) in edges.iter() {
            if self.match_tree(&forest[pos], sym, memo)?
                && self.match_forest(forest, pos + 1, *rest, memo)?
            {
                ok = true;
                break;
            }
        }
        memo.insert(key, ok);
        Ok(ok)
    }

    fn match_tree(
        &mut self,
        t: &Tree,
        sym: &Sym,
        memo: &mut HashMap<(usize, usize, StateId), bool>,
    ) -> Result<bool> {
        match (t, sym) {
            (Tree::Bool(_), Sym::Bool) => Ok(true),
            (Tree::Text(_), Sym::Str) => Ok(true),
            (Tree::Elem(n, children), Sym::Elem(m, content)) if n == m => {
                self.match_forest(&children.0, 0, *content, memo)
            }
            _ => Ok(false),
        }
    }

    // -- inclusion ---------------------------------------------------------

    pub fn subtype(&mut self, t1: &Type, t2: &Type) -> Result<bool> {
        let l = self.state(t1)?;
        let r = self.state(t2)?;
        if let Some(&b) = self.sub_cache.get(&(l, r)) {
            return Ok(b);
        }
        let mut asm = Assumptions::default();
        let b = self.include(l, vec![r], &mut asm)?;
        self.sub_cache.insert((l, r), b);
        Ok(b)
    }

    pub fn equiv(&mut self, t1: &Type, t2: &Type) -> Result<bool> {
        Ok(self.subtype(t1, t2)? && self.subtype(t2, t1)?)
    }

    /// `L(l) ⊆ ⋃ L(r)` for `r ∈ rs`.
    fn include(&mut self, l: StateId, mut rs: Vec<StateId>, asm: &mut Assumptions) -> Result<bool> {
        rs.sort_unstable();
        rs.dedup();
        if rs.binary_search(&l).is_ok() {
            return Ok(true);
        }
        let key = (l, rs.clone().into_boxed_slice());
        if asm.contains(&key) {
            return Ok(true);
        }
        let mark = asm.mark();
        asm.insert(key);
        let ok = self.include_unfold(l, &rs, asm)?;
        if !ok {
            asm.rollback(mark);
        }
        Ok(ok)
    }

    fn include_unfold(
        &mut self,
        l: StateId,
        rs: &[StateId],
        asm: &mut Assumptions,
    ) -> Result<bool> {
        if self.nullable(l)? {
            let mut some_nullable = false;
            for &r in rs {
                if self.nullable(r)? {
                    some_nullable = true;
                    break;
                }
            }
            if !some_nullable {
                return Ok(false);
            }
        }
        let ledges = self.first(l)?;
        let mut redges: Vec<(Sym, StateId)> = Vec::new();
        for &r in rs {
            let e = self.first(r)?;
            redges.extend(e.iter().cloned());
        }
        for (sym, lrest) in ledges.iter() {
            match sym {
                Sym::Bool | Sym::Str => {
                    let succ: Vec<StateId> = redges
                        .iter()
                        .filter(|(s, _)| s == sym)
                        .map(|&(_, rest)| rest)
                        .collect();
                    if !self.include(*lrest, succ, asm)? {
                        return Ok(false);
                    }
                }
                Sym::Elem(label, content) => {
                    let mut cands: Vec<(StateId, StateId)> = redges
                        .iter()
                        .filter_map(|(s, rest)| match s {
                            Sym::Elem(m, c) if m == label => Some((*c, *rest)),
                            _ => None,
                        })
                        .collect();
                    cands.sort_unstable();
                    cands.dedup();
                    if cands.len() > MAX_OVERLAP {
                        return Err(Diag::new(
                            Code::TypeError,
                            format!(
                                "subtype check exceeds the ambiguity bound ({} overlapping \
                                 `{label}` alternatives)",
                                cands.len()
                            ),
                        ));
                    }
                    // ⟦c⟧·L(p) ⊆ ⋃ᵢ ⟦cᵢ⟧·L(pᵢ) iff for every subset S of the
                    // candidates, c ⊆ ⋃_{i∈S} cᵢ or p ⊆ ⋃_{i∉S} pᵢ.
                    for mask in 0u64..(1u64 << cands.len()) {
                        let picked: Vec<StateId> = cands
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask & (1 << i) != 0)
                            .map(|(_, &(c, _))| c)
                            .collect();
                        let rest_succ: Vec<StateId> = cands
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask & (1 << i) == 0)
                            .map(|(_, &(_, p))| p)
                            .collect();
                        let mark = asm.mark();
                        if self.include(*content, picked, asm)? {
                            continue;
                        }
                        asm.rollback(mark);
                        if self.include(*lrest, rest_succ, asm)? {
                            continue;
                        }
                        asm.rollback(mark);
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// One-shot membership check: `v ∈ ⟦τ⟧` under signature `sig`.
pub fn member(v: &Forest, ty: &Type, sig: &Signature) -> Result<bool> {
    TypeCtx::new(sig.clone()).member(v, ty)
}

/// One-shot subtype check: `⟦τ1⟧ ⊆ ⟦τ2⟧`.
pub fn subtype(t1: &Type, t2: &Type, sig: &Signature) -> Result<bool> {
    TypeCtx::new(sig.clone()).subtype(t1, t2)
}

/// Language equality by mutual inclusion.
pub fn type_equiv(t1: &Type, t2: &Type, sig: &Signature) -> Result<bool> {
    TypeCtx::new(sig.clone()).equiv(t1, t2)
}
