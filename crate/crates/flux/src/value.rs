//! The XML value universe: trees, forests, and evaluation environments.
//!
//! Forests are immutable; every operation builds a new forest.  Equality
//! (`==`) is deep structural equality on labels, text, booleans, order, and
//! arity.

use std::collections::HashMap;
use std::fmt;

use crate::diag::{Code, Diag, Result};

pub type Label = String;

/// A single XML item: an element, a text node, or a (computed) boolean.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Tree {
    Text(String),
    Bool(bool),
    Elem(Label, Forest),
}

impl Tree {
    pub fn elem(label: impl Into<Label>, children: Forest) -> Tree {
        Tree::Elem(label.into(), children)
    }

    pub fn text(s: impl Into<String>) -> Tree {
        Tree::Text(s.into())
    }

    /// The child forest of an element; the empty forest for text and
    /// boolean nodes.
    pub fn children(&self) -> Forest {
        match self {
            Tree::Elem(_, children) => children.clone(),
            _ => Forest::empty(),
        }
    }
}

/// An ordered sequence of trees.  Concatenation is associative with the
/// empty forest as unit, and a singleton forest is interchangeable with its
/// tree.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Forest(pub Vec<Tree>);

impl Forest {
    pub fn empty() -> Forest {
        Forest(Vec::new())
    }

    pub fn singleton(t: Tree) -> Forest {
        Forest(vec![t])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Tree> {
        self.0.iter()
    }

    /// If the forest holds exactly one tree, that tree.
    pub fn as_singleton(&self) -> Option<&Tree> {
        match self.0.as_slice() {
            [t] => Some(t),
            _ => None,
        }
    }

    pub fn concat(&self, other: &Forest) -> Forest {
        let mut items = self.0.clone();
        items.extend(other.0.iter().cloned());
        Forest(items)
    }

    /// The comprehension operation: apply `f` to each tree in order and
    /// concatenate the resulting forests.
    pub fn for_each(&self, mut f: impl FnMut(&Tree) -> Forest) -> Forest {
        let mut out = Vec::new();
        for t in &self.0 {
            out.extend(f(t).0);
        }
        Forest(out)
    }

    /// Fallible variant of [`Forest::for_each`]; stops at the first error.
    pub fn try_for_each(&self, mut f: impl FnMut(&Tree) -> Result<Forest>) -> Result<Forest> {
        let mut out = Vec::new();
        for t in &self.0 {
            out.extend(f(t)?.0);
        }
        Ok(Forest(out))
    }
}

impl From<Tree> for Forest {
    fn from(t: Tree) -> Forest {
        Forest::singleton(t)
    }
}

impl FromIterator<Tree> for Forest {
    fn from_iter<I: IntoIterator<Item = Tree>>(iter: I) -> Forest {
        Forest(iter.into_iter().collect())
    }
}

/// Evaluation environment: forest variables and tree variables live in
/// separate maps; the binder kind decides which map a name goes into.
#[derive(Clone, Debug, Default)]
pub struct Env {
    forests: HashMap<String, Forest>,
    trees: HashMap<String, Tree>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn forest(&self, name: &str) -> Option<&Forest> {
        self.forests.get(name)
    }

    pub fn tree(&self, name: &str) -> Option<&Tree> {
        self.trees.get(name)
    }

    pub fn with_forest(&self, name: impl Into<String>, v: Forest) -> Env {
        let mut env = self.clone();
        env.forests.insert(name.into(), v);
        env
    }

    pub fn with_tree(&self, name: impl Into<String>, t: Tree) -> Env {
        let mut env = self.clone();
        env.trees.insert(name.into(), t);
        env
    }
}

/// Element names: a restricted NCName (no namespaces, no leading digit).
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '.')
}

// ---------------------------------------------------------------------------
// Native value syntax: n[v], "text", true, false, comma-separated forests,
// () for the empty forest.  `Display` on trees and forests prints it.
// ---------------------------------------------------------------------------

fn write_escaped_string(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
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

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Text(s) => write_escaped_string(f, s),
            Tree::Bool(b) => write!(f, "{b}"),
            Tree::Elem(n, children) => {
                if children.is_empty() {
                    write!(f, "{n}[]")
                } else {
                    write!(f, "{n}[{children}]")
                }
            }
        }
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("()");
        }
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Restricted XML reader/writer: elements and text only.  Attributes,
// comments, processing instructions, and doctypes are rejected with a clear
// error.  Whitespace-only text between elements is dropped on input; the
// writer never introduces whitespace, so output is byte-stable.
// ---------------------------------------------------------------------------

struct XmlReader<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> XmlReader<'a> {
    fn new(src: &'a str) -> XmlReader<'a> {
        XmlReader {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Diag {
        Diag::syntax(crate::diag::Span::new(self.line, self.col), msg)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn read_name(&mut self) -> Result<String> {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || b == b'.' {
                self.bump();
            } else {
                break;
            }
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .expect("name bytes are ascii")
            .to_string();
        if !is_valid_name(&name) {
            return Err(self.err(format!("invalid element name `{name}`")));
        }
        Ok(name)
    }

    fn read_entity(&mut self) -> Result<char> {
        // positioned just after '&'
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b == b';' {
                let entity = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let c = match entity {
                    "lt" => '<',
                    "gt" => '>',
                    "amp" => '&',
                    "quot" => '"',
                    "apos" => '\'',
                    _ => return Err(self.err(format!("unsupported entity `&{entity};`"))),
                };
                self.bump();
                return Ok(c);
            }
            self.bump();
        }
        Err(self.err("unterminated entity reference"))
    }

    fn read_text(&mut self) -> Result<String> {
        let mut out = String::new();
        while let Some(b) = self.peek() {
            match b {
                b'<' => break,
                b'&' => {
                    self.bump();
                    out.push(self.read_entity()?);
                }
                _ => {
                    // Re-decode multi-byte sequences as UTF-8.
                    let rest = std::str::from_utf8(&self.src[self.pos..])
                        .map_err(|_| self.err("invalid UTF-8 in document"))?;
                    let c = rest.chars().next().unwrap();
                    for _ in 0..c.len_utf8() {
                        self.bump();
                    }
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    fn read_forest(&mut self, out: &mut Vec<Tree>) -> Result<Option<String>> {
        // Reads siblings until EOF or a closing tag; returns the close name.
        loop {
            if self.peek().is_none() {
                return Ok(None);
            }
            if self.peek() == Some(b'<') {
                match self.src.get(self.pos + 1).copied() {
                    Some(b'/') => {
                        self.bump();
                        self.bump();
                        let name = self.read_name()?;
                        if self.peek() != Some(b'>') {
                            return Err(self.err("expected `>` after closing tag name"));
                        }
                        self.bump();
                        return Ok(Some(name));
                    }
                    Some(b'!') => return Err(self.err("comments and doctypes are not supported")),
                    Some(b'?') => return Err(self.err("processing instructions are not supported")),
                    _ => {
                        self.bump();
                        let name = self.read_name()?;
                        match self.peek() {
                            Some(b'>') => {
                                self.bump();
                                let mut children = Vec::new();
                                match self.read_forest(&mut children)? {
                                    Some(close) if close == name => {
                                        out.push(Tree::Elem(name, Forest(children)));
                                    }
                                    Some(close) => {
                                        return Err(self.err(format!(
                                            "mismatched tags: `{name}` closed by `{close}`"
                                        )))
                                    }
                                    None => {
                                        return Err(self.err(format!("unclosed element `{name}`")))
                                    }
                                }
                            }
                            Some(b'/') => {
                                self.bump();
                                if self.peek() != Some(b'>') {
                                    return Err(self.err("expected `>` after `/`"));
                                }
                                self.bump();
                                out.push(Tree::Elem(name, Forest::empty()));
                            }
                            Some(b' ') | Some(b'\t') | Some(b'\n') | Some(b'\r') => {
                                return Err(self.err(format!(
                                    "attributes are not supported (element `{name}`)"
                                )))
                            }
                            _ => return Err(self.err("malformed start tag")),
                        }
                    }
                }
            } else {
                let text = self.read_text()?;
                if !text.chars().all(char::is_whitespace) {
                    out.push(Tree::Text(text));
                }
            }
        }
    }
}

/// Parse a restricted XML document into a forest.  Whitespace-only text
/// nodes are dropped.
pub fn parse_xml(src: &str) -> Result<Forest> {
    let mut reader = XmlReader::new(src);
    let mut out = Vec::new();
    match reader.read_forest(&mut out)? {
        None => Ok(Forest(out)),
        Some(close) => Err(reader.err(format!("unmatched closing tag `</{close}>`"))),
    }
}

fn escape_xml_into(out: &mut String, text: &str) {
    for c in text.chars() {
        match c {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            _ => out.push(c),
        }
    }
}

fn write_tree_xml(out: &mut String, t: &Tree) -> Result<()> {
    match t {
        Tree::Text(s) => {
            escape_xml_into(out, s);
            Ok(())
        }
        Tree::Bool(_) => Err(Diag::new(
            Code::Io,
            "boolean values cannot be serialized as XML",
        )),
        Tree::Elem(n, children) => {
            if children.is_empty() {
                out.push('<');
                out.push_str(n);
                out.push_str("/>");
            } else {
                out.push('<');
                out.push_str(n);
                out.push('>');
                for c in children.iter() {
                    write_tree_xml(out, c)?;
                }
                out.push_str("</");
                out.push_str(n);
                out.push('>');
            }
            Ok(())
        }
    }
}

/// Serialize a forest as attribute-free XML with no added whitespace.
pub fn write_xml(v: &Forest) -> Result<String> {
    let mut out = String::new();
    for t in v.iter() {
        write_tree_xml(&mut out, t)?;
    }
    out.push('\n');
    Ok(out)
}
