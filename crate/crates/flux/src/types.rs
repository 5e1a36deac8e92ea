//! Regular expression types over forests, recursive type signatures, and
//! structural tests.
//!
//! Atomic types denote single trees; sequence types are regular expressions
//! over atomic types and denote forests.  Type variables `X` refer to
//! definitions in a [`Signature`]; each definition must be *guarded*: every
//! variable occurrence sits inside some element body, so a definition never
//! starts with a bare variable.

use std::collections::HashMap;
use std::fmt;

use crate::diag::{Code, Diag, Result};
use crate::value::{Label, Tree};

/// A type with only singleton-forest members.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    Bool,
    Str,
    Elem(Label, Box<Type>),
}

impl Atom {
    pub fn elem(label: impl Into<Label>, body: Type) -> Atom {
        Atom::Elem(label.into(), Box::new(body))
    }
}

/// Sequence (forest) types.  `Flex` variables are internal: they are minted
/// while typechecking source updates and never appear in user syntax or in
/// final reported types.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Type {
    Empty,
    Atom(Atom),
    Alt(Box<Type>, Box<Type>),
    Seq(Box<Type>, Box<Type>),
    Star(Box<Type>),
    Var(String),
    Flex(u32),
}

impl Type {
    pub fn elem(label: impl Into<Label>, body: Type) -> Type {
        Type::Atom(Atom::elem(label, body))
    }

    pub fn string() -> Type {
        Type::Atom(Atom::Str)
    }

    pub fn bool() -> Type {
        Type::Atom(Atom::Bool)
    }

    pub fn alt(l: Type, r: Type) -> Type {
        Type::Alt(Box::new(l), Box::new(r))
    }

    pub fn seq(l: Type, r: Type) -> Type {
        Type::Seq(Box::new(l), Box::new(r))
    }

    pub fn star(t: Type) -> Type {
        Type::Star(Box::new(t))
    }

    /// `t?` is shorthand for `t | ()`.
    pub fn opt(t: Type) -> Type {
        Type::alt(t, Type::Empty)
    }

    /// `t+` is shorthand for `t, t*`.
    pub fn plus(t: Type) -> Type {
        Type::seq(t.clone(), Type::star(t))
    }

    pub fn var(name: impl Into<String>) -> Type {
        Type::Var(name.into())
    }

    /// Cosmetic normalization for display: drops `()` units, collapses
    /// duplicate alternatives, and flattens redundant stars.  Used when
    /// printing inferred types; inference itself keeps the raw shape.
    pub fn simplified(&self) -> Type {
        match self {
            Type::Empty | Type::Var(_) | Type::Flex(_) => self.clone(),
            Type::Atom(Atom::Bool) | Type::Atom(Atom::Str) => self.clone(),
            Type::Atom(Atom::Elem(n, body)) => Type::elem(n.clone(), body.simplified()),
            Type::Seq(l, r) => match (l.simplified(), r.simplified()) {
                (Type::Empty, t) | (t, Type::Empty) => t,
                (l, r) => Type::seq(l, r),
            },
            Type::Alt(l, r) => {
                let (l, r) = (l.simplified(), r.simplified());
                if l == r {
                    l
                } else {
                    Type::alt(l, r)
                }
            }
            Type::Star(t) => match t.simplified() {
                Type::Empty => Type::Empty,
                Type::Star(inner) => Type::Star(inner),
                // (t|())* and (()|t)* iterate the same language as t*
                Type::Alt(a, b) if *b == Type::Empty => Type::star(*a),
                Type::Alt(a, b) if *a == Type::Empty => Type::star(*b),
                t => Type::star(t),
            },
        }
    }

    pub fn mentions_var(&self, name: &str) -> bool {
        match self {
            Type::Empty | Type::Flex(_) => false,
            Type::Var(x) => x == name,
            Type::Atom(Atom::Bool) | Type::Atom(Atom::Str) => false,
            Type::Atom(Atom::Elem(_, body)) => body.mentions_var(name),
            Type::Alt(l, r) | Type::Seq(l, r) => l.mentions_var(name) || r.mentions_var(name),
            Type::Star(t) => t.mentions_var(name),
        }
    }

    pub fn mentions_flex(&self) -> bool {
        match self {
            Type::Empty | Type::Var(_) => false,
            Type::Flex(_) => true,
            Type::Atom(Atom::Bool) | Type::Atom(Atom::Str) => false,
            Type::Atom(Atom::Elem(_, body)) => body.mentions_flex(),
            Type::Alt(l, r) | Type::Seq(l, r) => l.mentions_flex() || r.mentions_flex(),
            Type::Star(t) => t.mentions_flex(),
        }
    }
}

/// An ordered set of recursive type definitions `X = τ`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Signature {
    defs: Vec<(String, Type)>,
    index: HashMap<String, usize>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, def: Type) -> Result<()> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Diag::new(
                Code::Syntax,
                format!("duplicate type definition `{name}`"),
            ));
        }
        self.index.insert(name.clone(), self.defs.len());
        self.defs.push((name, def));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Type> {
        self.index.get(name).map(|&i| &self.defs[i].1)
    }

    pub fn defs(&self) -> impl Iterator<Item = (&str, &Type)> {
        self.defs.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// Mint a definition name that cannot clash with user-written names
    /// (user identifiers never contain `#`).
    pub fn fresh_name(&self, base: &str) -> String {
        let mut i = 0usize;
        loop {
            let candidate = format!("{base}#{i}");
            if !self.index.contains_key(&candidate) {
                return candidate;
            }
            i += 1;
        }
    }

    /// Well-formedness: every variable used anywhere is declared, and no
    /// definition has a variable at top level (outside an element body).
    pub fn check(&self) -> Result<()> {
        for (name, def) in &self.defs {
            self.check_def(name, def, true)?;
        }
        Ok(())
    }

    fn check_def(&self, owner: &str, ty: &Type, top: bool) -> Result<()> {
        match ty {
            Type::Empty | Type::Atom(Atom::Bool) | Type::Atom(Atom::Str) => Ok(()),
            Type::Flex(_) => Err(Diag::new(
                Code::UndeclaredTypeVar,
                format!("internal type variable in definition of `{owner}`"),
            )),
            Type::Var(x) => {
                if self.get(x).is_none() {
                    Err(Diag::new(
                        Code::UndeclaredTypeVar,
                        format!("type variable `{x}` is not declared (in definition of `{owner}`)"),
                    ))
                } else if top {
                    Err(Diag::new(
                        Code::UnguardedTypeVar,
                        format!("type variable `{x}` occurs unguarded in definition of `{owner}`"),
                    ))
                } else {
                    Ok(())
                }
            }
            Type::Atom(Atom::Elem(_, body)) => self.check_def(owner, body, false),
            Type::Alt(l, r) | Type::Seq(l, r) => {
                self.check_def(owner, l, top)?;
                self.check_def(owner, r, top)
            }
            Type::Star(t) => self.check_def(owner, t, top),
        }
    }

    /// Check that every variable mentioned by `ty` is declared here.
    pub fn check_type(&self, ty: &Type) -> Result<()> {
        match ty {
            Type::Empty | Type::Atom(Atom::Bool) | Type::Atom(Atom::Str) | Type::Flex(_) => Ok(()),
            Type::Var(x) => {
                if self.get(x).is_none() {
                    Err(Diag::new(
                        Code::UndeclaredTypeVar,
                        format!("type variable `{x}` is not declared"),
                    ))
                } else {
                    Ok(())
                }
            }
            Type::Atom(Atom::Elem(_, body)) => self.check_type(body),
            Type::Alt(l, r) | Type::Seq(l, r) => {
                self.check_type(l)?;
                self.check_type(r)
            }
            Type::Star(t) => self.check_type(t),
        }
    }
}

/// Structural tests on a single tree: a label, any tree, or any string.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Test {
    Label(Label),
    Node,
    Text,
}

/// Static test matching: `string <: text()`, `n[τ] <: n`, `α <: node()`.
pub fn test_match(atom: &Atom, test: &Test) -> bool {
    match (atom, test) {
        (_, Test::Node) => true,
        (Atom::Str, Test::Text) => true,
        (Atom::Elem(n, _), Test::Label(m)) => n == m,
        _ => false,
    }
}

/// Dynamic test membership: `⟦text()⟧` is the strings, `⟦n⟧` the n-labeled
/// elements, `⟦node()⟧` every tree.
pub fn test_member(tree: &Tree, test: &Test) -> bool {
    match (tree, test) {
        (_, Test::Node) => true,
        (Tree::Text(_), Test::Text) => true,
        (Tree::Elem(n, _), Test::Label(m)) => n == m,
        _ => false,
    }
}

impl fmt::Display for Test {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Test::Label(n) => write!(f, "{n}"),
            Test::Node => f.write_str("node()"),
            Test::Text => f.write_str("text()"),
        }
    }
}

// Precedence for printing: alternation 0, sequence 1, postfix 2.
fn fmt_type(ty: &Type, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    // Recognize the derived forms first so output stays readable.
    if let Type::Alt(l, r) = ty {
        if **r == Type::Empty && **l != Type::Empty {
            fmt_type(l, f, 2)?;
            return f.write_str("?");
        }
    }
    if let Type::Seq(l, r) = ty {
        if let Type::Star(inner) = &**r {
            if inner == l {
                fmt_type(l, f, 2)?;
                return f.write_str("+");
            }
        }
    }
    match ty {
        Type::Empty => f.write_str("()"),
        Type::Atom(Atom::Bool) => f.write_str("bool"),
        Type::Atom(Atom::Str) => f.write_str("string"),
        Type::Atom(Atom::Elem(n, body)) => {
            if **body == Type::Empty {
                write!(f, "{n}[]")
            } else {
                write!(f, "{n}[")?;
                fmt_type(body, f, 0)?;
                f.write_str("]")
            }
        }
        Type::Alt(l, r) => {
            if prec > 0 {
                f.write_str("(")?;
            }
            fmt_type(l, f, 1)?;
            f.write_str("|")?;
            fmt_type(r, f, 0)?;
            if prec > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Type::Seq(l, r) => {
            if prec > 1 {
                f.write_str("(")?;
            }
            fmt_type(l, f, 2)?;
            f.write_str(",")?;
            fmt_type(r, f, 1)?;
            if prec > 1 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Type::Star(t) => {
            fmt_type(t, f, 2)?;
            f.write_str("*")
        }
        Type::Var(x) => write!(f, "{x}"),
        Type::Flex(z) => write!(f, "Z{z}"),
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_type(self, f, 0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_type(&Type::Atom(self.clone()), f, 0)
    }
}
