//! A typed, purely functional XML update language.
//!
//! The crate is organized around a small pipeline:
//!
//! * [`value`] — the XML data model (trees, forests, environments) plus
//!   readers/writers for a restricted XML format and a native value syntax.
//! * [`types`] / [`inclusion`] — regular expression types over forests,
//!   recursive signatures, membership, and sound-and-complete subtyping.
//! * [`query`] — the core query language: AST and big-step evaluator.
//! * [`update`] — the core update language: AST and interpreter.
//! * [`typing`] — typechecking for queries and core updates.
//! * [`source`] — the high-level update syntax and its normalization to
//!   core statements.
//! * [`source_typing`] — direct typechecking of source updates, sound and
//!   complete with respect to typechecking the normalized core form.
//! * [`patherr`] — the dead-code ("path-error") analysis for updates.
//! * [`syntax`] — lexer and recursive-descent parsers for all concrete
//!   syntaxes (schemas, values, queries, core and source scripts).
//! * [`cli`] — the `flux` command-line frontend.

pub mod cli;
pub mod diag;
pub mod inclusion;
pub mod patherr;
pub mod query;
pub mod source;
pub mod source_typing;
pub mod syntax;
pub mod types;
pub mod typing;
pub mod update;
pub mod value;

pub use diag::{Diag, Result, Span};
pub use types::{Atom, Signature, Test, Type};
pub use value::{Forest, Tree};
