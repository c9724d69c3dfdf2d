//! Parsers for the text formats: declarations, formulas, recursive
//! definitions, programs, triples, and separation-logic files.
//!
//! Identifier resolution is signature-driven: `name(args)` is a function
//! application, an inductive application, or a base-relation atom depending
//! on the declarations in scope; bare names are constants if declared and
//! variables otherwise (foreground-sorted unless declared or annotated).

use std::collections::BTreeMap;
use std::sync::Arc;

use framelogic::ast::{Definition, DefinitionSet, Formula, Signature, Sort, Term};
use framelogic::hoare::Triple;
use framelogic::psl::{SlDef, SlDefs, SlFormula, StackFormula};
use framelogic::whilelang::Stmt;

use crate::lex::{lex, Spanned, Tok};
use crate::span::{ParseError, SourceSpan};

/// Declarations accumulated while parsing a file.
#[derive(Debug, Clone)]
pub struct FileCtx {
    pub sig: Signature,
    pub defs: DefinitionSet,
    pub vars: BTreeMap<String, Sort>,
}

impl FileCtx {
    pub fn new() -> FileCtx {
        FileCtx { sig: Signature::new(), defs: DefinitionSet::new(), vars: BTreeMap::new() }
    }

    pub fn sig_arc(&self) -> Arc<Signature> {
        Arc::new(self.sig.clone())
    }
}

impl Default for FileCtx {
    fn default() -> Self {
        FileCtx::new()
    }
}

/// A parsed formula/definition file: declarations plus named query formulas.
#[derive(Debug, Clone)]
pub struct FlFile {
    pub ctx: FileCtx,
    pub formulas: Vec<Formula>,
}

/// A parsed triple file.
#[derive(Debug, Clone)]
pub struct TripleFile {
    pub ctx: FileCtx,
    pub triple: Triple,
    /// Single-static-assignment lint warnings, if any.
    pub warnings: Vec<String>,
}

/// A parsed program file (declarations plus a bare program).
#[derive(Debug, Clone)]
pub struct ProgramFile {
    pub ctx: FileCtx,
    pub program: Stmt,
    pub warnings: Vec<String>,
}

/// A parsed separation-logic file.
#[derive(Debug, Clone)]
pub struct SlFile {
    pub fields: Vec<String>,
    pub defs: SlDefs,
    pub formulas: Vec<SlFormula>,
}

/// Formula or term, before the context disambiguates.
enum FT {
    F(Formula),
    T(Term),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    ctx: FileCtx,
    /// Binder stack with sorts.
    scope: Vec<(String, Sort)>,
}

const RESERVED: &[&str] = &[
    "true", "false", "ite", "exists", "forall", "Sp", "Star", "cup", "cap", "emptyset", "in",
    "subseteq", "def", "formula", "mutable", "fn", "const", "var", "rel", "if", "then", "else",
    "while", "do", "invariant", "alloc", "free", "skip", "emp", "field", "sldef", "slformula",
];

impl Parser {
    fn new(src: &str, ctx: FileCtx) -> Result<Parser, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0, ctx, scope: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::expecting(self.span(), &[what], self.peek().describe()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::expecting(self.span(), &[kw], self.peek().describe()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(ParseError::expecting(self.span(), &[what], other.describe())),
        }
    }

    fn sort(&mut self) -> Result<Sort, ParseError> {
        let span = self.span();
        let name = self.ident("sort")?;
        match name.as_str() {
            "fg" => Ok(Sort::Fg),
            "int" => Ok(Sort::Int),
            "bool" => Ok(Sort::Bool),
            "set" => Ok(Sort::FgSet),
            other => Err(ParseError::new(span, format!("unknown sort `{other}`"))),
        }
    }

    // -- declarations -------------------------------------------------------

    fn decl(&mut self) -> Result<(), ParseError> {
        if self.is_kw("mutable") || self.is_kw("fn") {
            let mutable = self.is_kw("mutable");
            self.bump();
            let name = self.ident("function name")?;
            self.eat(&Tok::Colon, ":")?;
            let mut args = vec![self.sort()?];
            while self.peek() == &Tok::Comma {
                self.bump();
                args.push(self.sort()?);
            }
            self.eat(&Tok::Arrow, "->")?;
            let ret = self.sort()?;
            self.eat(&Tok::Semi, ";")?;
            self.ctx.sig.funcs.insert(
                name,
                framelogic::ast::FnSig { args, ret, mutable },
            );
            Ok(())
        } else if self.is_kw("const") {
            self.bump();
            let name = self.ident("constant name")?;
            self.eat(&Tok::Colon, ":")?;
            let sort = self.sort()?;
            self.eat(&Tok::Semi, ";")?;
            self.ctx.sig.consts.insert(name, sort);
            Ok(())
        } else if self.is_kw("var") {
            self.bump();
            let name = self.ident("variable name")?;
            self.eat(&Tok::Colon, ":")?;
            let sort = self.sort()?;
            self.eat(&Tok::Semi, ";")?;
            self.ctx.vars.insert(name, sort);
            Ok(())
        } else if self.is_kw("rel") {
            self.bump();
            let name = self.ident("relation name")?;
            self.eat(&Tok::Colon, ":")?;
            let mut args = vec![self.sort()?];
            while self.peek() == &Tok::Comma {
                self.bump();
                args.push(self.sort()?);
            }
            self.eat(&Tok::Semi, ";")?;
            self.ctx.sig.rels.insert(name, args);
            Ok(())
        } else {
            Err(ParseError::expecting(
                self.span(),
                &["mutable", "fn", "const", "var", "rel"],
                self.peek().describe(),
            ))
        }
    }

    /// Pre-registers definition headers so bodies can reference definitions
    /// appearing later in the file.
    fn prescan_defs(&mut self) {
        let mut i = self.pos;
        while i < self.toks.len() {
            if let Tok::Ident(s) = &self.toks[i].tok {
                if s == "def" || s == "sldef" {
                    if let Tok::Ident(name) = &self.toks[i + 1].tok {
                        let mut params = Vec::new();
                        let mut j = i + 3; // past `(`.
                        let mut sort = Sort::Fg;
                        let mut count = 0usize;
                        while j < self.toks.len() {
                            match &self.toks[j].tok {
                                Tok::Ident(_) if count % 2 == 0 => {
                                    count += 1;
                                    sort = Sort::Fg;
                                }
                                Tok::Colon => {
                                    if let Tok::Ident(sn) = &self.toks[j + 1].tok {
                                        sort = match sn.as_str() {
                                            "int" => Sort::Int,
                                            "bool" => Sort::Bool,
                                            _ => Sort::Fg,
                                        };
                                    }
                                    j += 1;
                                }
                                Tok::Comma => {
                                    params.push(sort);
                                    count = 0;
                                }
                                Tok::RParen => {
                                    if count > 0 {
                                        params.push(sort);
                                    }
                                    break;
                                }
                                _ => {}
                            }
                            j += 1;
                        }
                        self.ctx.sig.inductives.insert(name.clone(), params);
                    }
                }
            }
            i += 1;
        }
    }

    fn def(&mut self) -> Result<(), ParseError> {
        self.eat_kw("def")?;
        let name = self.ident("definition name")?;
        self.eat(&Tok::LParen, "(")?;
        let mut params = Vec::new();
        loop {
            let pname = self.ident("parameter")?;
            let sort = if self.peek() == &Tok::Colon {
                self.bump();
                self.sort()?
            } else {
                Sort::Fg
            };
            params.push((pname, sort));
            if self.peek() == &Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.eat(&Tok::RParen, ")")?;
        self.eat(&Tok::Assign, ":=")?;
        for (p, s) in &params {
            self.scope.push((p.clone(), *s));
        }
        let body = self.formula()?;
        for _ in &params {
            self.scope.pop();
        }
        self.eat(&Tok::Semi, ";")?;
        self.ctx
            .sig
            .inductives
            .insert(name.clone(), params.iter().map(|(_, s)| *s).collect());
        self.ctx
            .defs
            .insert(Definition { name, params, body })
            .map_err(|e| ParseError::new(self.span(), e.to_string()))?;
        Ok(())
    }

    // -- formulas and terms -------------------------------------------------

    fn var_sort(&self, name: &str) -> Sort {
        for (n, s) in self.scope.iter().rev() {
            if n == name {
                return *s;
            }
        }
        self.ctx.vars.get(name).copied().unwrap_or(Sort::Fg)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let span = self.span();
        match self.ft_implies()? {
            FT::F(f) => Ok(f),
            FT::T(t) => Err(ParseError::new(
                span,
                format!("expected a formula, found the term `{}`", crate::print::term_to_string(&t)),
            )),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let span = self.span();
        match self.ft_cup()? {
            FT::T(t) => Ok(t),
            FT::F(_) => Err(ParseError::new(span, "expected a term, found a formula")),
        }
    }

    fn ft_implies(&mut self) -> Result<FT, ParseError> {
        let lhs = self.ft_or()?;
        if self.peek() == &Tok::Implies {
            let span = self.span();
            self.bump();
            let rhs = self.ft_implies()?;
            match (lhs, rhs) {
                (FT::F(a), FT::F(b)) => Ok(FT::F(Formula::implies(a, b))),
                _ => Err(ParseError::new(span, "`=>` connects formulas")),
            }
        } else {
            Ok(lhs)
        }
    }

    fn ft_or(&mut self) -> Result<FT, ParseError> {
        let mut lhs = self.ft_and()?;
        while self.peek() == &Tok::OrOr {
            let span = self.span();
            self.bump();
            let rhs = self.ft_and()?;
            lhs = match (lhs, rhs) {
                (FT::F(a), FT::F(b)) => FT::F(Formula::or(a, b)),
                _ => return Err(ParseError::new(span, "`||` connects formulas")),
            };
        }
        Ok(lhs)
    }

    fn ft_and(&mut self) -> Result<FT, ParseError> {
        let mut lhs = self.ft_cmp()?;
        while self.peek() == &Tok::AndAnd {
            let span = self.span();
            self.bump();
            let rhs = self.ft_cmp()?;
            lhs = match (lhs, rhs) {
                (FT::F(a), FT::F(b)) => FT::F(Formula::and(a, b)),
                _ => return Err(ParseError::new(span, "`&&` connects formulas")),
            };
        }
        Ok(lhs)
    }

    fn ft_cmp(&mut self) -> Result<FT, ParseError> {
        let lhs = self.ft_cup()?;
        let op = match self.peek() {
            Tok::Eq => Some("="),
            Tok::Ne => Some("!="),
            Tok::Le => Some("<="),
            Tok::Lt => Some("<"),
            Tok::Ge => Some(">="),
            Tok::Gt => Some(">"),
            Tok::Ident(s) if s == "in" => Some("in"),
            Tok::Ident(s) if s == "subseteq" => Some("subseteq"),
            _ => None,
        };
        let Some(op) = op else { return Ok(lhs) };
        let span = self.span();
        self.bump();
        let rhs = self.ft_cup()?;
        let (FT::T(a), FT::T(b)) = (lhs, rhs) else {
            return Err(ParseError::new(span, format!("`{op}` compares terms")));
        };
        Ok(FT::F(match op {
            "=" => Formula::Eq(a, b),
            "!=" => Formula::ne(a, b),
            "in" => Formula::member(a, b),
            "subseteq" => Formula::subset(a, b),
            cmp => Formula::rel(cmp, vec![a, b]),
        }))
    }

    fn ft_cup(&mut self) -> Result<FT, ParseError> {
        let mut lhs = self.ft_cap()?;
        while self.is_kw("cup") {
            let span = self.span();
            self.bump();
            let rhs = self.ft_cap()?;
            lhs = match (lhs, rhs) {
                (FT::T(a), FT::T(b)) => FT::T(Term::union(a, b)),
                _ => return Err(ParseError::new(span, "`cup` joins set terms")),
            };
        }
        Ok(lhs)
    }

    fn ft_cap(&mut self) -> Result<FT, ParseError> {
        let mut lhs = self.ft_add()?;
        while self.is_kw("cap") {
            let span = self.span();
            self.bump();
            let rhs = self.ft_add()?;
            lhs = match (lhs, rhs) {
                (FT::T(a), FT::T(b)) => FT::T(Term::inter(a, b)),
                _ => return Err(ParseError::new(span, "`cap` joins set terms")),
            };
        }
        Ok(lhs)
    }

    fn ft_add(&mut self) -> Result<FT, ParseError> {
        let mut lhs = self.ft_unary()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => '+',
                Tok::Minus => '-',
                _ => break,
            };
            let span = self.span();
            self.bump();
            let rhs = self.ft_unary()?;
            lhs = match (lhs, rhs) {
                (FT::T(a), FT::T(b)) => FT::T(if op == '+' {
                    Term::add(a, b)
                } else {
                    Term::sub(a, b)
                }),
                _ => return Err(ParseError::new(span, "arithmetic connects terms")),
            };
        }
        Ok(lhs)
    }

    fn ft_unary(&mut self) -> Result<FT, ParseError> {
        match self.peek().clone() {
            Tok::Bang => {
                let span = self.span();
                self.bump();
                match self.ft_unary()? {
                    FT::F(f) => Ok(FT::F(Formula::not(f))),
                    FT::T(_) => Err(ParseError::new(span, "`!` negates a formula")),
                }
            }
            Tok::Tilde => {
                let span = self.span();
                self.bump();
                match self.ft_unary()? {
                    FT::T(t) => Ok(FT::T(Term::compl(t))),
                    FT::F(_) => Err(ParseError::new(span, "`~` complements a set term")),
                }
            }
            Tok::Minus => {
                self.bump();
                match self.peek().clone() {
                    Tok::Int(i) => {
                        self.bump();
                        Ok(FT::T(Term::Int(-i)))
                    }
                    other => Err(ParseError::expecting(
                        self.span(),
                        &["integer literal"],
                        other.describe(),
                    )),
                }
            }
            _ => self.ft_atom(),
        }
    }

    fn ft_atom(&mut self) -> Result<FT, ParseError> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(FT::T(Term::Int(i)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.ft_implies()?;
                self.eat(&Tok::RParen, ")")?;
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "true" => {
                    self.bump();
                    Ok(FT::F(Formula::True))
                }
                "false" => {
                    self.bump();
                    Ok(FT::F(Formula::False))
                }
                "emptyset" => {
                    self.bump();
                    Ok(FT::T(Term::Empty))
                }
                "Sp" => {
                    self.bump();
                    self.eat(&Tok::LParen, "(")?;
                    let inner = self.ft_implies()?;
                    self.eat(&Tok::RParen, ")")?;
                    Ok(FT::T(match inner {
                        FT::F(f) => Term::sp(f),
                        FT::T(t) => Term::sp_term(t),
                    }))
                }
                "Star" => {
                    self.bump();
                    self.eat(&Tok::LParen, "(")?;
                    let a = self.formula()?;
                    self.eat(&Tok::Comma, ",")?;
                    let b = self.formula()?;
                    self.eat(&Tok::RParen, ")")?;
                    Ok(FT::F(Formula::star(a, b)))
                }
                "ite" => {
                    self.bump();
                    self.eat(&Tok::LParen, "(")?;
                    let guard = self.formula()?;
                    self.eat(&Tok::Colon, ":")?;
                    let then = self.ft_implies()?;
                    self.eat(&Tok::Comma, ",")?;
                    let els = self.ft_implies()?;
                    let span = self.span();
                    self.eat(&Tok::RParen, ")")?;
                    match (then, els) {
                        (FT::F(a), FT::F(b)) => Ok(FT::F(Formula::ite(guard, a, b))),
                        (FT::T(a), FT::T(b)) => Ok(FT::T(Term::ite(guard, a, b))),
                        _ => Err(ParseError::new(
                            span,
                            "conditional branches must both be formulas or both be terms",
                        )),
                    }
                }
                "exists" | "forall" => {
                    let universal = name == "forall";
                    self.bump();
                    let mut binders = Vec::new();
                    loop {
                        let bname = self.ident("binder")?;
                        let sort = if self.peek() == &Tok::LBracket {
                            self.bump();
                            let s = self.sort()?;
                            self.eat(&Tok::RBracket, "]")?;
                            s
                        } else {
                            Sort::Fg
                        };
                        binders.push((bname, sort));
                        if self.peek() == &Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.eat(&Tok::Colon, ":")?;
                    for (b, s) in &binders {
                        self.scope.push((b.clone(), *s));
                    }
                    let guard = self.formula()?;
                    self.eat(&Tok::Dot, ".")?;
                    let body = self.formula()?;
                    for _ in &binders {
                        self.scope.pop();
                    }
                    // The guard attaches to the innermost binder; outer
                    // binders carry the trivial guard.
                    let mut inner_body = if universal { Formula::not(body) } else { body };
                    for (i, (b, s)) in binders.iter().enumerate().rev() {
                        let g = if i == binders.len() - 1 { guard.clone() } else { Formula::True };
                        inner_body = Formula::exists(b, *s, g, inner_body);
                    }
                    Ok(FT::F(if universal {
                        Formula::not(inner_body)
                    } else {
                        inner_body
                    }))
                }
                _ => self.name_atom(name),
            },
            other => Err(ParseError::expecting(
                self.span(),
                &["formula", "term"],
                other.describe(),
            )),
        }
    }

    fn name_atom(&mut self, name: String) -> Result<FT, ParseError> {
        let span = self.span();
        self.bump();
        if self.peek() == &Tok::LParen {
            self.bump();
            let mut args = Vec::new();
            if self.peek() != &Tok::RParen {
                loop {
                    args.push(self.term()?);
                    if self.peek() == &Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.eat(&Tok::RParen, ")")?;
            if self.ctx.sig.funcs.contains_key(&name) {
                Ok(FT::T(Term::App(name, args)))
            } else if self.ctx.sig.inductives.contains_key(&name) {
                Ok(FT::F(Formula::Ind(name, args)))
            } else if self.ctx.sig.rels.contains_key(&name) {
                Ok(FT::F(Formula::Rel(name, args)))
            } else {
                Err(ParseError::new(span, format!("unknown symbol `{name}`")))
            }
        } else if self.ctx.sig.consts.contains_key(&name) {
            Ok(FT::T(Term::Const(name)))
        } else if RESERVED.contains(&name.as_str()) {
            Err(ParseError::new(span, format!("`{name}` is reserved")))
        } else {
            let sort = self.var_sort(&name);
            Ok(FT::T(Term::Var(name, sort)))
        }
    }

    // -- programs ------------------------------------------------------------

    fn stmt_seq(&mut self) -> Result<Stmt, ParseError> {
        let mut stmts = vec![self.stmt()?];
        while self.peek() == &Tok::Semi {
            self.bump();
            if self.seq_ended() {
                break;
            }
            stmts.push(self.stmt()?);
        }
        Ok(if stmts.len() == 1 {
            stmts.pop().unwrap()
        } else {
            Stmt::Seq(stmts)
        })
    }

    fn seq_ended(&self) -> bool {
        matches!(self.peek(), Tok::RBrace | Tok::LBrace | Tok::Eof)
            || matches!(self.peek(), Tok::Ident(s) if s == "else")
    }

    fn block_or_seq(&mut self) -> Result<Stmt, ParseError> {
        if self.peek() == &Tok::LBrace {
            self.bump();
            let s = self.stmt_seq()?;
            self.eat(&Tok::RBrace, "}")?;
            Ok(s)
        } else {
            self.stmt_seq()
        }
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        if self.is_kw("skip") {
            self.bump();
            return Ok(Stmt::Skip);
        }
        if self.is_kw("alloc") || self.is_kw("free") {
            let is_alloc = self.is_kw("alloc");
            self.bump();
            self.eat(&Tok::LParen, "(")?;
            let x = self.ident("variable")?;
            self.eat(&Tok::RParen, ")")?;
            return Ok(if is_alloc { Stmt::Alloc { x } } else { Stmt::Free { x } });
        }
        if self.is_kw("if") {
            self.bump();
            self.eat(&Tok::LParen, "(")?;
            let cond = self.formula()?;
            self.eat(&Tok::RParen, ")")?;
            self.eat_kw("then")?;
            let then_branch = self.block_or_seq()?;
            self.eat_kw("else")?;
            let else_branch = self.block_or_seq()?;
            return Ok(Stmt::If {
                cond,
                then_branch: Box::new(then_branch),
                else_branch: Box::new(else_branch),
            });
        }
        if self.is_kw("while") {
            self.bump();
            self.eat(&Tok::LParen, "(")?;
            let cond = self.formula()?;
            self.eat(&Tok::RParen, ")")?;
            let invariant = if self.is_kw("invariant") {
                self.bump();
                self.eat(&Tok::Colon, ":")?;
                Some(self.formula()?)
            } else {
                None
            };
            self.eat_kw("do")?;
            let body = self.block_or_seq()?;
            return Ok(Stmt::While { cond, invariant, body: Box::new(body) });
        }
        // Assignments: x := rhs | x.f := y
        let x = self.ident("statement")?;
        if self.peek() == &Tok::Dot {
            self.bump();
            let field = self.ident("field")?;
            self.eat(&Tok::Assign, ":=")?;
            let y = self.ident("variable")?;
            return Ok(Stmt::Mutate { x, field, y });
        }
        self.eat(&Tok::Assign, ":=")?;
        // Lookup: ident '.' field
        if let Tok::Ident(y) = self.peek().clone() {
            if self.peek_at(1) == &Tok::Dot && matches!(self.peek_at(2), Tok::Ident(_)) {
                self.bump();
                self.bump();
                let field = self.ident("field")?;
                return Ok(Stmt::Lookup { x, y, field });
            }
        }
        let rhs = self.term()?;
        Ok(match &rhs {
            Term::Var(y, Sort::Fg) => Stmt::AssignVar { x, y: y.clone() },
            Term::Const(_) => Stmt::AssignConst { x, c: rhs },
            _ => Stmt::AssignBg { v: x, expr: rhs },
        })
    }

    // -- separation logic ----------------------------------------------------

    fn stack_formula(&mut self) -> Result<StackFormula, ParseError> {
        self.stack_or()
    }

    fn stack_or(&mut self) -> Result<StackFormula, ParseError> {
        let mut lhs = self.stack_and()?;
        while self.peek() == &Tok::OrOr {
            self.bump();
            let rhs = self.stack_and()?;
            lhs = StackFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn stack_and(&mut self) -> Result<StackFormula, ParseError> {
        let mut lhs = self.stack_unary()?;
        while self.peek() == &Tok::AndAnd {
            self.bump();
            let rhs = self.stack_unary()?;
            lhs = StackFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn stack_unary(&mut self) -> Result<StackFormula, ParseError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(StackFormula::Not(Box::new(self.stack_unary()?)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.stack_or()?;
                self.eat(&Tok::RParen, ")")?;
                Ok(f)
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(StackFormula::True)
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(StackFormula::False)
            }
            Tok::Ident(_) => {
                let a = self.ident("variable")?;
                match self.peek() {
                    Tok::Eq => {
                        self.bump();
                        let b = self.ident("variable")?;
                        Ok(StackFormula::Eq(a, b))
                    }
                    Tok::Ne => {
                        self.bump();
                        let b = self.ident("variable")?;
                        Ok(StackFormula::Not(Box::new(StackFormula::Eq(a, b))))
                    }
                    other => Err(ParseError::expecting(
                        self.span(),
                        &["=", "!="],
                        other.describe(),
                    )),
                }
            }
            other => Err(ParseError::expecting(
                self.span(),
                &["stack formula"],
                other.describe(),
            )),
        }
    }

    fn sl_formula(&mut self) -> Result<SlFormula, ParseError> {
        let mut lhs = self.sl_and()?;
        while self.peek() == &Tok::Star {
            self.bump();
            let rhs = self.sl_and()?;
            lhs = SlFormula::star(lhs, rhs);
        }
        Ok(lhs)
    }

    fn sl_and(&mut self) -> Result<SlFormula, ParseError> {
        let mut lhs = self.sl_atom()?;
        while self.peek() == &Tok::AndAnd {
            self.bump();
            let rhs = self.sl_atom()?;
            lhs = SlFormula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn sl_atom(&mut self) -> Result<SlFormula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.sl_formula()?;
                self.eat(&Tok::RParen, ")")?;
                Ok(f)
            }
            Tok::Bang => Ok(SlFormula::Stack(self.stack_formula()?)),
            Tok::Ident(s) if s == "emp" => {
                self.bump();
                Ok(SlFormula::Emp)
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(SlFormula::Stack(if s == "true" {
                    StackFormula::True
                } else {
                    StackFormula::False
                }))
            }
            Tok::Ident(s) if s == "ite" => {
                self.bump();
                self.eat(&Tok::LParen, "(")?;
                let sf = self.stack_formula()?;
                self.eat(&Tok::Comma, ",")?;
                let a = self.sl_formula()?;
                self.eat(&Tok::Comma, ",")?;
                let b = self.sl_formula()?;
                self.eat(&Tok::RParen, ")")?;
                Ok(SlFormula::Ite(sf, Box::new(a), Box::new(b)))
            }
            Tok::Ident(s) if s == "exists" => {
                self.bump();
                let y = self.ident("binder")?;
                self.eat(&Tok::Dot, ".")?;
                self.eat(&Tok::LParen, "(")?;
                let x = self.ident("variable")?;
                self.eat(&Tok::PtLeft, "|-")?;
                let field = self.ident("field")?;
                self.eat(&Tok::Arrow, "->")?;
                let y2 = self.ident("variable")?;
                let span = self.span();
                self.eat(&Tok::RParen, ")")?;
                if y2 != y {
                    return Err(ParseError::new(
                        span,
                        "the points-to target must be the bound variable",
                    ));
                }
                self.eat(&Tok::Star, "*")?;
                let body = self.sl_formula()?;
                Ok(SlFormula::ExistsPointsTo { y, x, field, body: Box::new(body) })
            }
            Tok::Ident(name) => {
                // Points-to, predicate application, or a stack atom.
                if self.peek_at(1) == &Tok::PtLeft {
                    self.bump();
                    self.bump();
                    let field = self.ident("field")?;
                    self.eat(&Tok::Arrow, "->")?;
                    let y = self.ident("variable")?;
                    Ok(SlFormula::PointsTo { x: name, field, y })
                } else if self.peek_at(1) == &Tok::LParen {
                    self.bump();
                    self.bump();
                    let arg = self.ident("argument")?;
                    self.eat(&Tok::RParen, ")")?;
                    Ok(SlFormula::Pred { name, arg })
                } else {
                    Ok(SlFormula::Stack(self.stack_formula()?))
                }
            }
            other => Err(ParseError::expecting(
                self.span(),
                &["separation-logic formula"],
                other.describe(),
            )),
        }
    }
}

fn is_decl_start(p: &Parser) -> bool {
    ["mutable", "fn", "const", "var", "rel"].iter().any(|k| p.is_kw(k))
}

/// Parses a formula/definition file: declarations, definitions, and
/// `formula ...;` items.
pub fn parse_fl(src: &str) -> Result<FlFile, ParseError> {
    let mut p = Parser::new(src, FileCtx::new())?;
    p.prescan_defs();
    let mut formulas = Vec::new();
    loop {
        if p.peek() == &Tok::Eof {
            break;
        }
        if is_decl_start(&p) {
            p.decl()?;
        } else if p.is_kw("def") {
            p.def()?;
        } else if p.is_kw("formula") {
            p.bump();
            let f = p.formula()?;
            p.eat(&Tok::Semi, ";")?;
            formulas.push(f);
        } else {
            return Err(ParseError::expecting(
                p.span(),
                &["declaration", "def", "formula"],
                p.peek().describe(),
            ));
        }
    }
    Ok(FlFile { ctx: p.ctx, formulas })
}

/// Parses a single formula against an existing context.
pub fn parse_formula_in(src: &str, ctx: &FileCtx) -> Result<Formula, ParseError> {
    let mut p = Parser::new(src, ctx.clone())?;
    let f = p.formula()?;
    p.eat(&Tok::Eof, "end of input")?;
    Ok(f)
}

/// Parses a triple file: declarations and definitions followed by
/// `{ pre } program { post }`.
pub fn parse_triple(src: &str) -> Result<TripleFile, ParseError> {
    let mut p = Parser::new(src, FileCtx::new())?;
    p.prescan_defs();
    loop {
        if is_decl_start(&p) {
            p.decl()?;
        } else if p.is_kw("def") {
            p.def()?;
        } else {
            break;
        }
    }
    p.eat(&Tok::LBrace, "{")?;
    let pre = p.formula()?;
    p.eat(&Tok::RBrace, "}")?;
    let program = p.stmt_seq()?;
    p.eat(&Tok::LBrace, "{")?;
    let post = p.formula()?;
    p.eat(&Tok::RBrace, "}")?;
    p.eat(&Tok::Eof, "end of input")?;
    let warnings = framelogic::whilelang::ssa_lint(&program);
    let ctx = p.ctx.clone();
    let vars: Vec<(String, Sort)> = ctx.vars.iter().map(|(n, s)| (n.clone(), *s)).collect();
    let triple = Triple {
        sig: ctx.sig_arc(),
        defs: ctx.defs.clone(),
        pre,
        program,
        post,
        vars,
    };
    Ok(TripleFile { ctx, triple, warnings })
}

/// Parses a program file: declarations and definitions followed by a bare
/// statement sequence.
pub fn parse_program(src: &str) -> Result<ProgramFile, ParseError> {
    let mut p = Parser::new(src, FileCtx::new())?;
    p.prescan_defs();
    loop {
        if is_decl_start(&p) {
            p.decl()?;
        } else if p.is_kw("def") {
            p.def()?;
        } else {
            break;
        }
    }
    let program = p.stmt_seq()?;
    p.eat(&Tok::Eof, "end of input")?;
    let warnings = framelogic::whilelang::ssa_lint(&program);
    Ok(ProgramFile { ctx: p.ctx, program, warnings })
}

/// Parses a program against an existing context (used by tests that supply
/// the declarations separately).
pub fn parse_program_in(src: &str, ctx: &FileCtx) -> Result<Stmt, ParseError> {
    let mut p = Parser::new(src, ctx.clone())?;
    let s = p.stmt_seq()?;
    p.eat(&Tok::Eof, "end of input")?;
    Ok(s)
}

/// Parses a separation-logic file: `field f;` declarations, `sldef` items,
/// and `slformula ...;` items.
pub fn parse_sl(src: &str) -> Result<SlFile, ParseError> {
    let mut p = Parser::new(src, FileCtx::new())?;
    let mut fields = Vec::new();
    let mut defs = SlDefs::new();
    let mut formulas = Vec::new();
    loop {
        if p.peek() == &Tok::Eof {
            break;
        }
        if p.is_kw("field") {
            p.bump();
            let name = p.ident("field name")?;
            p.eat(&Tok::Semi, ";")?;
            fields.push(name);
        } else if p.is_kw("sldef") {
            p.bump();
            let name = p.ident("definition name")?;
            p.eat(&Tok::LParen, "(")?;
            let param = p.ident("parameter")?;
            p.eat(&Tok::RParen, ")")?;
            p.eat(&Tok::Assign, ":=")?;
            let body = p.sl_formula()?;
            p.eat(&Tok::Semi, ";")?;
            defs.insert(SlDef { name, param, body });
        } else if p.is_kw("slformula") {
            p.bump();
            let f = p.sl_formula()?;
            p.eat(&Tok::Semi, ";")?;
            formulas.push(f);
        } else {
            return Err(ParseError::expecting(
                p.span(),
                &["field", "sldef", "slformula"],
                p.peek().describe(),
            ));
        }
    }
    Ok(SlFile { fields, defs, formulas })
}
