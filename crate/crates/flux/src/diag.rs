//! Diagnostics shared by every stage: a source position, an error code, and
//! a rendered message.  Error codes partition into syntax, type, and runtime
//! classes; the CLI maps each class to a fixed exit code.

use std::fmt;

/// A source position (1-based line and column).  Synthesized nodes carry the
/// position of the construct they were derived from.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Span {
        Span { line, col }
    }

    /// True for spans on nodes built programmatically rather than parsed.
    pub fn is_unknown(&self) -> bool {
        self.line == 0
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Code {
    Syntax,
    Io,
    UndeclaredTypeVar,
    UnguardedTypeVar,
    UnboundVariable,
    UnknownProcedure,
    TypeError,
    ArityError,
    SubtypeFailure,
    NonAtomicSimpleUpdate,
    PathTypeError,
    DomainOverlap,
    DomainMismatch,
    UnknownLabel,
    Stuck,
    FuelExhausted,
}

/// Coarse class of a diagnostic; determines the process exit code.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Class {
    /// Unreadable input: exit code 1.
    Syntax,
    /// Static (type) error: exit code 2.
    Type,
    /// Dynamic failure: exit code 3.
    Runtime,
}

impl Code {
    pub fn class(self) -> Class {
        match self {
            Code::Syntax | Code::Io => Class::Syntax,
            Code::Stuck | Code::FuelExhausted => Class::Runtime,
            _ => Class::Type,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Code::Syntax => "syntax",
            Code::Io => "io",
            Code::UndeclaredTypeVar => "undeclared-type-var",
            Code::UnguardedTypeVar => "unguarded-type-var",
            Code::UnboundVariable => "unbound-variable",
            Code::UnknownProcedure => "unknown-procedure",
            Code::TypeError => "type-error",
            Code::ArityError => "arity-error",
            Code::SubtypeFailure => "subtype-failure",
            Code::NonAtomicSimpleUpdate => "non-atomic-simple-update",
            Code::PathTypeError => "path-type-error",
            Code::DomainOverlap => "domain-overlap",
            Code::DomainMismatch => "domain-mismatch",
            Code::UnknownLabel => "unknown-label",
            Code::Stuck => "stuck",
            Code::FuelExhausted => "fuel-exhausted",
        }
    }
}

/// One diagnostic: code, optional position, message, and (for type errors)
/// the pretty-printed expected/found types.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Diag {
    pub code: Code,
    pub span: Option<Span>,
    pub message: String,
    pub expected: Option<String>,
    pub found: Option<String>,
}

impl Diag {
    pub fn new(code: Code, message: impl Into<String>) -> Diag {
        Diag {
            code,
            span: None,
            message: message.into(),
            expected: None,
            found: None,
        }
    }

    pub fn syntax(span: Span, message: impl Into<String>) -> Diag {
        Diag::new(Code::Syntax, message).at(span)
    }

    pub fn at(mut self, span: Span) -> Diag {
        if !span.is_unknown() {
            self.span = Some(span);
        }
        self
    }

    /// Attach a span only if none is set yet; inner errors keep the more
    /// precise position.
    pub fn or_at(mut self, span: Span) -> Diag {
        if self.span.is_none() {
            self = self.at(span);
        }
        self
    }

    pub fn expected_found(mut self, expected: impl Into<String>, found: impl Into<String>) -> Diag {
        self.expected = Some(expected.into());
        self.found = Some(found.into());
        self
    }

    pub fn context(mut self, note: impl fmt::Display) -> Diag {
        self.message = format!("{}: {}", note, self.message);
        self
    }
}

impl fmt::Display for Diag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(span) = self.span {
            write!(f, "{span}: ")?;
        }
        write!(f, "{} [{}]", self.message, self.code.name())?;
        if let (Some(e), Some(g)) = (&self.expected, &self.found) {
            write!(f, " (expected {e}, found {g})")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diag {}

pub type Result<T> = std::result::Result<T, Diag>;
