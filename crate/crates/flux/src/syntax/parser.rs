//! Recursive-descent parsers for the concrete syntaxes: types and schema
//! files, native values, queries, core scripts, and source scripts.
//!
//! Keywords are case-insensitive in every language.  Whether `$x` denotes a
//! tree or forest variable is decided by its binder: `for` binds tree
//! variables, everything else (let, snapshot, path binders, procedure
//! parameters) binds forest variables.

use crate::diag::{Diag, Result, Span};
use crate::query::{Expr, ExprKind};
use crate::source::{Path, PathKind, SrcStmt, SrcStmtKind, Upd, UpdKind};
use crate::types::{Signature, Test, Type};
use crate::update::{ProcDecl, Procs, Stmt, StmtKind};
use crate::value::{is_valid_name, Forest, Tree};

use super::lexer::{lex, Tok, Token};

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Accept `transform e by { s }` query expressions.
    pub enable_transform: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VarKind {
    Tree,
    Forest,
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    opts: ParseOptions,
    scopes: Vec<(String, VarKind)>,
}

impl Parser {
    pub fn new(src: &str, opts: ParseOptions) -> Result<Parser> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            opts,
            scopes: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        let i = (self.pos + 1).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> Diag {
        Diag::syntax(
            self.span(),
            format!("expected {expected}, found {}", self.peek().describe()),
        )
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    /// Case-insensitive keyword check without consuming.
    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(&format!("`{kw}`")))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    fn expect_name(&mut self, what: &str) -> Result<String> {
        let span = self.span();
        let name = self.expect_ident(what)?;
        if !is_valid_name(&name) {
            return Err(Diag::syntax(span, format!("invalid name `{name}`")));
        }
        Ok(name)
    }

    fn expect_var(&mut self) -> Result<String> {
        match self.peek() {
            Tok::Var(x) => {
                let x = x.clone();
                self.bump();
                Ok(x)
            }
            _ => Err(self.error("a variable like `$x`")),
        }
    }

    fn expect_eof(&mut self) -> Result<()> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    fn var_kind(&self, name: &str) -> VarKind {
        self.scopes
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, k)| *k)
            .unwrap_or(VarKind::Forest)
    }

    fn scoped<T>(
        &mut self,
        binds: Vec<(String, VarKind)>,
        f: impl FnOnce(&mut Self) -> Result<T>,
    ) -> Result<T> {
        let depth = self.scopes.len();
        self.scopes.extend(binds);
        let out = f(self);
        self.scopes.truncate(depth);
        out
    }

    // -- types ---------------------------------------------------------------

    pub fn ty(&mut self) -> Result<Type> {
        let left = self.ty_seq()?;
        if self.eat(&Tok::Pipe) {
            Ok(Type::alt(left, self.ty()?))
        } else {
            Ok(left)
        }
    }

    fn ty_seq(&mut self) -> Result<Type> {
        let left = self.ty_postfix()?;
        if self.eat(&Tok::Comma) {
            Ok(Type::seq(left, self.ty_seq()?))
        } else {
            Ok(left)
        }
    }

    fn ty_postfix(&mut self) -> Result<Type> {
        let mut ty = self.ty_primary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    ty = Type::star(ty);
                }
                Tok::Plus => {
                    self.bump();
                    ty = Type::plus(ty);
                }
                Tok::Question => {
                    self.bump();
                    ty = Type::opt(ty);
                }
                _ => return Ok(ty),
            }
        }
    }

    fn ty_primary(&mut self) -> Result<Type> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok(Type::Empty);
                }
                let ty = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(ty)
            }
            Tok::Ident(name) => {
                if name.eq_ignore_ascii_case("string") {
                    self.bump();
                    Ok(Type::string())
                } else if name.eq_ignore_ascii_case("bool") {
                    self.bump();
                    Ok(Type::bool())
                } else {
                    let span = self.span();
                    self.bump();
                    if self.eat(&Tok::LBracket) {
                        if !is_valid_name(&name) {
                            return Err(Diag::syntax(
                                span,
                                format!("invalid element name `{name}`"),
                            ));
                        }
                        if self.eat(&Tok::RBracket) {
                            return Ok(Type::elem(name, Type::Empty));
                        }
                        let body = self.ty()?;
                        self.expect(Tok::RBracket, "`]`")?;
                        Ok(Type::elem(name, body))
                    } else {
                        Ok(Type::var(name))
                    }
                }
            }
            _ => Err(self.error("a type")),
        }
    }

    // -- schema files ----------------------------------------------------------

    pub fn schema(&mut self) -> Result<(Signature, Type)> {
        let mut sig = Signature::new();
        loop {
            if self.eat_kw("type") {
                let span = self.span();
                let name = self.expect_ident("a type variable name")?;
                self.expect(Tok::Eq, "`=`")?;
                let def = self.ty()?;
                sig.insert(name, def).map_err(|d| d.at(span))?;
            } else if self.eat_kw("schema") {
                let doc = self.ty()?;
                self.expect_eof()?;
                sig.check()?;
                sig.check_type(&doc)?;
                return Ok((sig, doc));
            } else {
                return Err(self.error("`type X = ...` or `schema ...`"));
            }
        }
    }

    // -- native values -----------------------------------------------------------

    pub fn value(&mut self) -> Result<Forest> {
        if self.peek() == &Tok::Eof {
            return Ok(Forest::empty());
        }
        let v = self.value_forest()?;
        self.expect_eof()?;
        Ok(v)
    }

    fn value_forest(&mut self) -> Result<Forest> {
        let mut items = Vec::new();
        loop {
            self.value_item(&mut items)?;
            if !self.eat(&Tok::Comma) {
                return Ok(Forest(items));
            }
        }
    }

    fn value_item(&mut self, out: &mut Vec<Tree>) -> Result<()> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok(());
                }
                let inner = self.value_forest()?;
                self.expect(Tok::RParen, "`)`")?;
                out.extend(inner.0);
                Ok(())
            }
            Tok::Str(s) => {
                self.bump();
                out.push(Tree::Text(s));
                Ok(())
            }
            Tok::Ident(name) => {
                if name.eq_ignore_ascii_case("true") {
                    self.bump();
                    out.push(Tree::Bool(true));
                    return Ok(());
                }
                if name.eq_ignore_ascii_case("false") {
                    self.bump();
                    out.push(Tree::Bool(false));
                    return Ok(());
                }
                let span = self.span();
                self.bump();
                if !is_valid_name(&name) {
                    return Err(Diag::syntax(span, format!("invalid element name `{name}`")));
                }
                self.expect(Tok::LBracket, "`[`")?;
                let children = if self.eat(&Tok::RBracket) {
                    Forest::empty()
                } else {
                    let v = self.value_forest()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    v
                };
                out.push(Tree::Elem(name, children));
                Ok(())
            }
            _ => Err(self.error("a value")),
        }
    }

    // -- queries -----------------------------------------------------------------

    pub fn expr(&mut self) -> Result<Expr> {
        let span = self.span();
        let left = self.expr_single()?;
        if self.eat(&Tok::Comma) {
            let right = self.expr()?;
            Ok(Expr::at(
                ExprKind::Concat(Box::new(left), Box::new(right)),
                span,
            ))
        } else {
            Ok(left)
        }
    }

    pub fn expr_single(&mut self) -> Result<Expr> {
        let span = self.span();
        if self.at_kw("let") && matches!(self.peek2(), Tok::Var(_)) {
            self.bump();
            let x = self.expect_var()?;
            self.expect(Tok::Assign, "`:=`")?;
            let bound = self.expr_single()?;
            self.expect_kw("return")?;
            let body = self.scoped(vec![(x.clone(), VarKind::Forest)], |p| p.expr_single())?;
            return Ok(Expr::at(
                ExprKind::Let(x, Box::new(bound), Box::new(body)),
                span,
            ));
        }
        if self.at_kw("for") && matches!(self.peek2(), Tok::Var(_)) {
            self.bump();
            let x = self.expect_var()?;
            self.expect_kw("in")?;
            let seq = self.expr_single()?;
            self.expect_kw("return")?;
            let body = self.scoped(vec![(x.clone(), VarKind::Tree)], |p| p.expr_single())?;
            return Ok(Expr::at(
                ExprKind::For(x, Box::new(seq), Box::new(body)),
                span,
            ));
        }
        if self.at_kw("if") {
            self.bump();
            let cond = self.expr_single()?;
            self.expect_kw("then")?;
            let then = self.expr_single()?;
            self.expect_kw("else")?;
            let els = self.expr_single()?;
            return Ok(Expr::at(
                ExprKind::If(Box::new(cond), Box::new(then), Box::new(els)),
                span,
            ));
        }
        if self.at_kw("transform") {
            if !self.opts.enable_transform {
                return Err(Diag::syntax(
                    span,
                    "`transform` expressions require --enable-transform",
                ));
            }
            self.bump();
            let input = self.expr_single()?;
            self.expect_kw("by")?;
            self.expect(Tok::LBrace, "`{`")?;
            let s = self.stmt()?;
            self.expect(Tok::RBrace, "`}`")?;
            return Ok(Expr::at(
                ExprKind::Transform(Box::new(input), Box::new(s)),
                span,
            ));
        }
        let left = self.expr_postfix()?;
        if self.eat(&Tok::Eq) {
            let right = self.expr_postfix()?;
            return Ok(Expr::at(
                ExprKind::Eq(Box::new(left), Box::new(right)),
                span,
            ));
        }
        Ok(left)
    }

    fn expr_postfix(&mut self) -> Result<Expr> {
        let mut e = self.expr_primary()?;
        while self.peek() == &Tok::ColonColon {
            let span = self.span();
            self.bump();
            let n = self.expect_name("an element name")?;
            e = Expr::at(ExprKind::LabelFilter(Box::new(e), n), span);
        }
        Ok(e)
    }

    fn expr_primary(&mut self) -> Result<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok(Expr::at(ExprKind::Empty, span));
                }
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::at(ExprKind::Text(s), span))
            }
            Tok::Var(x) => {
                self.bump();
                if self.peek() == &Tok::Slash {
                    self.bump();
                    self.expect_kw("child")?;
                    if self.var_kind(&x) != VarKind::Tree {
                        return Err(Diag::syntax(
                            span,
                            format!("`${x}/child` needs a for-bound (tree) variable"),
                        ));
                    }
                    return Ok(Expr::at(ExprKind::ChildAxis(x), span));
                }
                match self.var_kind(&x) {
                    VarKind::Tree => Ok(Expr::at(ExprKind::TreeVar(x), span)),
                    VarKind::Forest => Ok(Expr::at(ExprKind::ForestVar(x), span)),
                }
            }
            Tok::Ident(name) => {
                if name.eq_ignore_ascii_case("true") {
                    self.bump();
                    return Ok(Expr::at(ExprKind::Bool(true), span));
                }
                if name.eq_ignore_ascii_case("false") {
                    self.bump();
                    return Ok(Expr::at(ExprKind::Bool(false), span));
                }
                self.bump();
                if !is_valid_name(&name) {
                    return Err(Diag::syntax(span, format!("invalid element name `{name}`")));
                }
                self.expect(Tok::LBracket, "`[`")?;
                let body = if self.eat(&Tok::RBracket) {
                    Expr::at(ExprKind::Empty, span)
                } else {
                    let e = self.expr()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    e
                };
                Ok(Expr::at(ExprKind::Elem(name, Box::new(body)), span))
            }
            _ => Err(self.error("an expression")),
        }
    }

    // -- core statements ---------------------------------------------------------

    pub fn core_script(&mut self) -> Result<(Procs, Stmt)> {
        let mut procs = Procs::new();
        while self.at_kw("procedure") {
            let decl = self.proc_decl()?;
            procs.insert(decl)?;
        }
        let stmt = self.stmt()?;
        self.expect_eof()?;
        Ok((procs, stmt))
    }

    fn proc_decl(&mut self) -> Result<ProcDecl> {
        let span = self.span();
        self.expect_kw("procedure")?;
        let name = self.expect_name("a procedure name")?;
        self.expect(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let x = self.expect_var()?;
                self.expect(Tok::Colon, "`:`")?;
                let ty = self.ty()?;
                params.push((x, ty));
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma, "`,` or `)`")?;
            }
        }
        self.expect(Tok::Colon, "`:`")?;
        let input = self.ty()?;
        self.expect(Tok::Arrow, "`=>`")?;
        let output = self.ty()?;
        self.expect(Tok::Eq, "`=`")?;
        let binds: Vec<(String, VarKind)> = params
            .iter()
            .map(|(x, _)| (x.clone(), VarKind::Forest))
            .collect();
        let body = self.scoped(binds, |p| p.stmt())?;
        Ok(ProcDecl {
            name,
            params,
            input,
            output,
            body,
            span,
        })
    }

    pub fn stmt(&mut self) -> Result<Stmt> {
        let span = self.span();
        let left = self.stmt_single()?;
        if self.eat(&Tok::Semi) {
            // Tolerate a trailing semicolon before a declaration or EOF.
            if self.peek() == &Tok::Eof || self.at_kw("procedure") {
                return Ok(left);
            }
            let right = self.stmt()?;
            return Ok(Stmt::at(
                StmtKind::Seq(Box::new(left), Box::new(right)),
                span,
            ));
        }
        Ok(left)
    }

    fn bracketed_stmt(&mut self) -> Result<Stmt> {
        self.expect(Tok::LBracket, "`[`")?;
        let s = self.stmt()?;
        self.expect(Tok::RBracket, "`]`")?;
        Ok(s)
    }

    fn stmt_single(&mut self) -> Result<Stmt> {
        let span = self.span();
        if self.eat(&Tok::LBrace) {
            let s = self.stmt()?;
            self.expect(Tok::RBrace, "`}`")?;
            return Ok(s);
        }
        match self.peek().clone() {
            Tok::Ident(name) => {
                let lower = name.to_ascii_lowercase();
                match lower.as_str() {
                    "skip" => {
                        self.bump();
                        Ok(Stmt::at(StmtKind::Skip, span))
                    }
                    "delete" => {
                        self.bump();
                        Ok(Stmt::at(StmtKind::Delete, span))
                    }
                    "insert" => {
                        self.bump();
                        let e = self.expr()?;
                        Ok(Stmt::at(StmtKind::Insert(e), span))
                    }
                    "rename" => {
                        self.bump();
                        let n = self.expect_name("an element name")?;
                        Ok(Stmt::at(StmtKind::Rename(n), span))
                    }
                    "if" => {
                        self.bump();
                        let cond = self.expr_single()?;
                        self.expect_kw("then")?;
                        let then = self.stmt_single()?;
                        self.expect_kw("else")?;
                        let els = self.stmt_single()?;
                        Ok(Stmt::at(
                            StmtKind::If(cond, Box::new(then), Box::new(els)),
                            span,
                        ))
                    }
                    "let" => {
                        self.bump();
                        let x = self.expect_var()?;
                        self.expect(Tok::Assign, "`:=`")?;
                        let e = self.expr_single()?;
                        self.expect_kw("in")?;
                        let body =
                            self.scoped(vec![(x.clone(), VarKind::Forest)], |p| p.stmt_single())?;
                        Ok(Stmt::at(StmtKind::Let(x, e, Box::new(body)), span))
                    }
                    "snapshot" => {
                        self.bump();
                        let x = self.expect_var()?;
                        self.expect_kw("in")?;
                        let body =
                            self.scoped(vec![(x.clone(), VarKind::Forest)], |p| p.stmt_single())?;
                        Ok(Stmt::at(StmtKind::Snapshot(x, Box::new(body)), span))
                    }
                    "left" => {
                        self.bump();
                        Ok(Stmt::at(
                            StmtKind::Left(Box::new(self.bracketed_stmt()?)),
                            span,
                        ))
                    }
                    "right" => {
                        self.bump();
                        Ok(Stmt::at(
                            StmtKind::Right(Box::new(self.bracketed_stmt()?)),
                            span,
                        ))
                    }
                    "children" => {
                        self.bump();
                        Ok(Stmt::at(
                            StmtKind::Children(Box::new(self.bracketed_stmt()?)),
                            span,
                        ))
                    }
                    "iter" => {
                        self.bump();
                        Ok(Stmt::at(
                            StmtKind::Iter(Box::new(self.bracketed_stmt()?)),
                            span,
                        ))
                    }
                    "node" | "text" if self.peek2() == &Tok::LParen => {
                        self.bump();
                        self.expect(Tok::LParen, "`(`")?;
                        self.expect(Tok::RParen, "`)`")?;
                        self.expect(Tok::Question, "`?`")?;
                        let body = self.stmt_single()?;
                        let test = if lower == "node" {
                            Test::Node
                        } else {
                            Test::Text
                        };
                        Ok(Stmt::at(StmtKind::Test(test, Box::new(body)), span))
                    }
                    _ => {
                        // A label test `n?s` or a procedure call `P(...)`.
                        self.bump();
                        match self.peek() {
                            Tok::Question => {
                                if !is_valid_name(&name) {
                                    return Err(Diag::syntax(
                                        span,
                                        format!("invalid element name `{name}`"),
                                    ));
                                }
                                self.bump();
                                let body = self.stmt_single()?;
                                Ok(Stmt::at(
                                    StmtKind::Test(Test::Label(name), Box::new(body)),
                                    span,
                                ))
                            }
                            Tok::LParen => {
                                self.bump();
                                let mut args = Vec::new();
                                if !self.eat(&Tok::RParen) {
                                    loop {
                                        args.push(self.expr_single()?);
                                        if self.eat(&Tok::RParen) {
                                            break;
                                        }
                                        self.expect(Tok::Comma, "`,` or `)`")?;
                                    }
                                }
                                Ok(Stmt::at(StmtKind::Call(name, args), span))
                            }
                            _ => Err(self.error("`?` (test) or `(` (procedure call)")),
                        }
                    }
                }
            }
            _ => Err(self.error("a statement")),
        }
    }

    // -- source statements ---------------------------------------------------------

    pub fn source_script(&mut self) -> Result<SrcStmt> {
        let s = self.src_stmt()?;
        self.expect_eof()?;
        Ok(s)
    }

    fn src_stmt(&mut self) -> Result<SrcStmt> {
        let span = self.span();
        let left = self.src_single(true)?;
        if self.eat(&Tok::Semi) {
            if self.peek() == &Tok::Eof {
                return Ok(left);
            }
            let right = self.src_stmt()?;
            return Ok(SrcStmt::at(
                SrcStmtKind::Seq(Box::new(left), Box::new(right)),
                span,
            ));
        }
        Ok(left)
    }

    fn src_single(&mut self, allow_where: bool) -> Result<SrcStmt> {
        let span = self.span();
        if self.eat(&Tok::LBrace) {
            let s = self.src_stmt()?;
            self.expect(Tok::RBrace, "`}`")?;
            return Ok(SrcStmt::at(SrcStmtKind::Block(Box::new(s)), span));
        }
        if self.at_kw("if") {
            self.bump();
            let cond = self.expr_single()?;
            self.expect_kw("then")?;
            let body = self.src_single(allow_where)?;
            return Ok(SrcStmt::at(SrcStmtKind::IfThen(cond, Box::new(body)), span));
        }
        if self.at_kw("let") {
            self.bump();
            let x = self.expect_var()?;
            self.expect(Tok::Assign, "`:=`")?;
            let e = self.expr_single()?;
            self.expect_kw("in")?;
            let body = self.scoped(vec![(x.clone(), VarKind::Forest)], |p| {
                p.src_single(allow_where)
            })?;
            return Ok(SrcStmt::at(SrcStmtKind::Let(x, e, Box::new(body)), span));
        }
        let (upd, guard) = self.src_upd(allow_where)?;
        Ok(SrcStmt::at(SrcStmtKind::Upd(upd, guard), span))
    }

    /// Parse one simple update, plus its `WHERE` clause when allowed.  The
    /// path's variables stay in scope for the value/body and the guard.
    fn src_upd(&mut self, allow_where: bool) -> Result<(Upd, Option<Expr>)> {
        let span = self.span();
        if self.eat_kw("insert") {
            let kind = if self.eat_kw("before") {
                0
            } else if self.eat_kw("after") {
                1
            } else if self.eat_kw("as") {
                let first = if self.eat_kw("first") {
                    true
                } else if self.eat_kw("last") {
                    false
                } else {
                    return Err(self.error("`FIRST` or `LAST`"));
                };
                self.expect_kw("into")?;
                if first {
                    2
                } else {
                    3
                }
            } else if self.eat_kw("into") {
                // plain `INSERT INTO` appends
                3
            } else {
                return Err(
                    self.error("`BEFORE`, `AFTER`, `AS FIRST INTO`, `AS LAST INTO`, or `INTO`")
                );
            };
            let (path, binds) = self.path()?;
            return self.scoped(binds, |p| {
                p.expect_kw("value")?;
                let e = p.expr()?;
                let upd = Upd::at(
                    match kind {
                        0 => UpdKind::InsertBefore(path, e),
                        1 => UpdKind::InsertAfter(path, e),
                        2 => UpdKind::InsertFirst(path, e),
                        _ => UpdKind::InsertLast(path, e),
                    },
                    span,
                );
                let guard = p.src_where(allow_where)?;
                Ok((upd, guard))
            });
        }
        if self.eat_kw("delete") {
            let from = self.eat_kw("from");
            let (path, binds) = self.path()?;
            return self.scoped(binds, |p| {
                let upd = Upd::at(
                    if from {
                        UpdKind::DeleteFrom(path)
                    } else {
                        UpdKind::Delete(path)
                    },
                    span,
                );
                let guard = p.src_where(allow_where)?;
                Ok((upd, guard))
            });
        }
        if self.eat_kw("rename") {
            let (path, binds) = self.path()?;
            return self.scoped(binds, |p| {
                p.expect_kw("to")?;
                let n = p.expect_name("an element name")?;
                let upd = Upd::at(UpdKind::Rename(path, n), span);
                let guard = p.src_where(allow_where)?;
                Ok((upd, guard))
            });
        }
        if self.eat_kw("replace") {
            let in_place = self.eat_kw("in");
            let (path, binds) = self.path()?;
            return self.scoped(binds, |p| {
                p.expect_kw("with")?;
                let e = p.expr()?;
                let upd = Upd::at(
                    if in_place {
                        UpdKind::ReplaceIn(path, e)
                    } else {
                        UpdKind::Replace(path, e)
                    },
                    span,
                );
                let guard = p.src_where(allow_where)?;
                Ok((upd, guard))
            });
        }
        if self.eat_kw("update") {
            let (path, binds) = self.path()?;
            return self.scoped(binds, |p| {
                p.expect_kw("by")?;
                // The body never takes the WHERE: write braces to attach a
                // guard to an inner update.
                let body = p.src_single(false)?;
                let upd = Upd::at(UpdKind::UpdateBy(path, Box::new(body)), span);
                let guard = p.src_where(allow_where)?;
                Ok((upd, guard))
            });
        }
        Err(self.error("an update (INSERT, DELETE, RENAME, REPLACE, or UPDATE)"))
    }

    fn src_where(&mut self, allow_where: bool) -> Result<Option<Expr>> {
        if allow_where && self.eat_kw("where") {
            Ok(Some(self.expr_single()?))
        } else {
            Ok(None)
        }
    }

    /// A path, together with the variables it binds (already usable in the
    /// rest of the update that follows it).
    fn path(&mut self) -> Result<(Path, Vec<(String, VarKind)>)> {
        let span = self.span();
        if let Tok::Var(x) = self.peek().clone() {
            self.bump();
            self.expect_kw("as")?;
            let (inner, mut binds) = self.path()?;
            binds.push((x.clone(), VarKind::Forest));
            return Ok((Path::at(PathKind::Bind(x, Box::new(inner)), span), binds));
        }
        let first = self.path_step()?;
        if self.eat(&Tok::Slash) {
            let (rest, binds) = self.path()?;
            return Ok((
                Path::at(PathKind::Slash(Box::new(first), Box::new(rest)), span),
                binds,
            ));
        }
        Ok((first, Vec::new()))
    }

    fn path_step(&mut self) -> Result<Path> {
        let span = self.span();
        let mut step = match self.peek().clone() {
            Tok::Dot => {
                self.bump();
                Path::at(PathKind::Here, span)
            }
            Tok::Star => {
                self.bump();
                Path::at(PathKind::Step(Test::Node), span)
            }
            Tok::Ident(name) => {
                let lower = name.to_ascii_lowercase();
                if (lower == "node" || lower == "text") && self.peek2() == &Tok::LParen {
                    self.bump();
                    self.expect(Tok::LParen, "`(`")?;
                    self.expect(Tok::RParen, "`)`")?;
                    let test = if lower == "node" {
                        Test::Node
                    } else {
                        Test::Text
                    };
                    Path::at(PathKind::Step(test), span)
                } else {
                    self.bump();
                    if !is_valid_name(&name) {
                        return Err(Diag::syntax(span, format!("invalid element name `{name}`")));
                    }
                    Path::at(PathKind::Step(Test::Label(name)), span)
                }
            }
            _ => return Err(self.error("a path step (`.`, a label, `*`, `node()`, or `text()`)")),
        };
        while self.peek() == &Tok::LBracket {
            let span = self.span();
            self.bump();
            let cond = self.expr_single()?;
            self.expect(Tok::RBracket, "`]`")?;
            step = Path::at(PathKind::Filter(Box::new(step), cond), span);
        }
        Ok(step)
    }
}

// -- public entry points --------------------------------------------------------

pub fn parse_type(src: &str) -> Result<Type> {
    let mut p = Parser::new(src, ParseOptions::default())?;
    let ty = p.ty()?;
    p.expect_eof()?;
    Ok(ty)
}

/// Parse a schema file: `type X = τ` declarations followed by `schema τ`.
/// The signature is checked for guardedness and undeclared variables.
pub fn parse_schema(src: &str) -> Result<(Signature, Type)> {
    Parser::new(src, ParseOptions::default())?.schema()
}

/// Parse a value in native syntax.
pub fn parse_value(src: &str) -> Result<Forest> {
    Parser::new(src, ParseOptions::default())?.value()
}

/// Parse a query; free variables default to forest kind.
pub fn parse_query(src: &str, opts: ParseOptions) -> Result<Expr> {
    let mut p = Parser::new(src, opts)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parse a query with explicitly kinded free variables.
pub fn parse_query_with(
    src: &str,
    opts: ParseOptions,
    binders: &[(String, VarKind)],
) -> Result<Expr> {
    let mut p = Parser::new(src, opts)?;
    p.scopes.extend(binders.iter().cloned());
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parse a core script: procedure declarations followed by one statement.
pub fn parse_core_script(src: &str, opts: ParseOptions) -> Result<(Procs, Stmt)> {
    Parser::new(src, opts)?.core_script()
}

/// Parse a source script (one compound statement).
pub fn parse_source_script(src: &str, opts: ParseOptions) -> Result<SrcStmt> {
    Parser::new(src, opts)?.source_script()
}
