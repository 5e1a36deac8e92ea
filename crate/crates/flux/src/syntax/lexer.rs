//! Token stream shared by every concrete syntax.  Keywords are not
//! distinguished here; parsers match identifiers case-insensitively in
//! context, since keywords and element names share the identifier space.

use crate::diag::{Diag, Result, Span};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Tok {
    Ident(String),
    /// `$name`
    Var(String),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Slash,
    Dot,
    Star,
    Plus,
    Question,
    Pipe,
    Colon,
    ColonColon,
    Assign,
    Arrow,
    Eq,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Var(s) => format!("`${s}`"),
            Tok::Str(_) => "a string literal".to_string(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Star => "`*`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Question => "`?`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Colon => "`:`".into(),
            Tok::ColonColon => "`::`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Arrow => "`=>`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '.'
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            chars: src.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_comment(&mut self, start: Span) -> Result<()> {
        // positioned after `(*`; comments nest
        let mut depth = 1usize;
        let mut prev = ' ';
        while let Some(c) = self.bump() {
            if prev == '(' && c == '*' {
                depth += 1;
                prev = ' ';
            } else if prev == '*' && c == ')' {
                depth -= 1;
                if depth == 0 {
                    return Ok(());
                }
                prev = ' ';
            } else {
                prev = c;
            }
        }
        Err(Diag::syntax(start, "unterminated comment"))
    }

    fn lex_string(&mut self, start: Span) -> Result<Tok> {
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(Diag::syntax(start, "unterminated string literal")),
                Some('"') => return Ok(Tok::Str(out)),
                Some('\\') => match self.bump() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some(c) => {
                        return Err(Diag::syntax(
                            self.span(),
                            format!("unknown escape `\\{c}` in string literal"),
                        ))
                    }
                    None => return Err(Diag::syntax(start, "unterminated string literal")),
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn lex_ident(&mut self, first: char) -> String {
        let mut out = String::new();
        out.push(first);
        while let Some(&c) = self.chars.peek() {
            if is_ident_continue(c) {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        out
    }

    fn run(&mut self) -> Result<Vec<Token>> {
        let mut out = Vec::new();
        loop {
            let span = self.span();
            let Some(c) = self.bump() else {
                out.push(Token {
                    tok: Tok::Eof,
                    span,
                });
                return Ok(out);
            };
            let tok = match c {
                c if c.is_whitespace() => continue,
                '(' => {
                    if self.chars.peek() == Some(&'*') {
                        self.bump();
                        self.skip_comment(span)?;
                        continue;
                    }
                    Tok::LParen
                }
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '/' => Tok::Slash,
                '.' => Tok::Dot,
                '*' => Tok::Star,
                '+' => Tok::Plus,
                '?' => Tok::Question,
                '|' => Tok::Pipe,
                ':' => match self.chars.peek() {
                    Some(':') => {
                        self.bump();
                        Tok::ColonColon
                    }
                    Some('=') => {
                        self.bump();
                        Tok::Assign
                    }
                    _ => Tok::Colon,
                },
                '=' => {
                    if self.chars.peek() == Some(&'>') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        Tok::Eq
                    }
                }
                '"' => self.lex_string(span)?,
                '$' => match self.bump() {
                    Some(c) if is_ident_start(c) => Tok::Var(self.lex_ident(c)),
                    _ => return Err(Diag::syntax(span, "expected a variable name after `$`")),
                },
                c if is_ident_start(c) => Tok::Ident(self.lex_ident(c)),
                c => {
                    return Err(Diag::syntax(span, format!("unexpected character `{c}`")));
                }
            };
            out.push(Token { tok, span });
        }
    }
}

pub fn lex(src: &str) -> Result<Vec<Token>> {
    Lexer::new(src).run()
}
