//! Surface syntax for formulas, constraints, type lists, tuples and terms.
//!
//! ```text
//! formula  := impl
//! impl     := join ( "->" impl )?
//! join     := meet ( "\/" meet )*
//! meet     := unary ( ("/\" | "\") unary )*
//! unary    := "~" unary | primary
//! primary  := IDENT | "(" formula ")"
//!           | ("exists" | "forall" | "subst") "[" morph "]" "(" formula ")"
//!           | ("top" | "bot") "[" list "]"
//! list     := "{" (IDENT ":" IDENT ("," IDENT ":" IDENT)*)? "}" | IDENT
//! morph    := IDENT | list "->" list "<" (IDENT "->" IDENT ("," ...)*)? ">"
//! ```
//!
//! The printer parenthesizes every binary connective, so printing and
//! reparsing is the identity on syntax trees.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::algebra::Term;
use crate::error::{Error, Result};
use crate::formula::{Constraint, Formula, Sequent};
use crate::kernel::{Tuple, TypeList, TypeListMorphism};
use crate::name::{Index, RelName, Symbol, Token};
use crate::schema::Schema;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Eq,
    Lt,
    Gt,
    Arrow,
    Meet,
    Join,
    Backslash,
    Tilde,
    Turnstile,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) | Tok::Number(s) => return write!(f, "`{s}`"),
            Tok::Str(s) => return write!(f, "\"{s}\""),
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Colon => "`:`",
            Tok::Eq => "`=`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::Arrow => "`->`",
            Tok::Meet => "`/\\`",
            Tok::Join => "`\\/`",
            Tok::Backslash => "`\\`",
            Tok::Tilde => "`~`",
            Tok::Turnstile => "`|-`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Tokenizes `text`, reporting positions relative to `line`/`column`.
pub(crate) fn lex(text: &str, line: usize, column: usize) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut ln, mut col) = (line, column);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (start_ln, start_col) = (ln, col);
        let push = |out: &mut Vec<Spanned>, tok| {
            out.push(Spanned {
                tok,
                line: start_ln,
                column: start_col,
            })
        };
        let two = chars.get(i + 1).copied();
        #[allow(clippy::needless_late_init)]
        let width;
        match c {
            '\n' => {
                ln += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => width = 1,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                push(&mut out, Tok::Ident(chars[i..j].iter().collect()));
                width = j - i;
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                push(&mut out, Tok::Number(chars[i..j].iter().collect()));
                width = j - i;
            }
            '"' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '"' && chars[j] != '\n' {
                    j += 1;
                }
                if j >= chars.len() || chars[j] != '"' {
                    return Err(Error::Syntax {
                        line: start_ln,
                        column: start_col,
                        message: "unterminated string".into(),
                    });
                }
                push(&mut out, Tok::Str(chars[i + 1..j].iter().collect()));
                width = j + 1 - i;
            }
            '-' if two == Some('>') => {
                push(&mut out, Tok::Arrow);
                width = 2;
            }
            '/' if two == Some('\\') => {
                push(&mut out, Tok::Meet);
                width = 2;
            }
            '\\' if two == Some('/') => {
                push(&mut out, Tok::Join);
                width = 2;
            }
            '|' if two == Some('-') => {
                push(&mut out, Tok::Turnstile);
                width = 2;
            }
            _ => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    '=' => Tok::Eq,
                    '<' => Tok::Lt,
                    '>' => Tok::Gt,
                    '\\' => Tok::Backslash,
                    '~' => Tok::Tilde,
                    other => {
                        return Err(Error::Syntax {
                            line: start_ln,
                            column: start_col,
                            message: format!("unexpected character `{other}`"),
                        })
                    }
                };
                push(&mut out, tok);
                width = 1;
            }
        }
        i += width;
        col += width;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line: ln,
        column: col,
    });
    Ok(out)
}

/// Names visible to the parser.
#[derive(Clone, Copy, Default)]
pub struct Scope<'a> {
    /// Lets `top[R]` and `bot[R]` use a relation type's signature.
    pub schema: Option<&'a Schema>,
    /// Named type-list morphisms usable inside flow brackets.
    pub morphisms: Option<&'a BTreeMap<String, TypeListMorphism>>,
}

impl<'a> Scope<'a> {
    pub fn new(schema: Option<&'a Schema>, morphisms: Option<&'a BTreeMap<String, TypeListMorphism>>) -> Self {
        Scope { schema, morphisms }
    }
}

pub(crate) struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    scope: Scope<'a>,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(text: &str, scope: Scope<'a>) -> Result<Self> {
        Parser::at(text, 1, 1, scope)
    }

    pub(crate) fn at(text: &str, line: usize, column: usize, scope: Scope<'a>) -> Result<Self> {
        Ok(Parser {
            toks: lex(text, line, column)?,
            pos: 0,
            scope,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> Error {
        let s = &self.toks[self.pos];
        Error::Syntax {
            line: s.line,
            column: s.column,
            message: message.into(),
        }
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {tok}, found {}", self.peek())))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.error(format!("expected an identifier, found {other}"))),
        }
    }

    pub(crate) fn string(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.error(format!("expected a quoted string, found {other}"))),
        }
    }

    pub(crate) fn number(&mut self) -> Result<usize> {
        match self.peek().clone() {
            Tok::Number(s) => {
                let n = s.parse().map_err(|_| self.error(format!("number `{s}` is too large")))?;
                self.bump();
                Ok(n)
            }
            other => Err(self.error(format!("expected a number, found {other}"))),
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub(crate) fn finish(&mut self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected {}", self.peek())))
        }
    }

    pub(crate) fn formula(&mut self) -> Result<Formula> {
        let lhs = self.join()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn join(&mut self) -> Result<Formula> {
        let mut acc = self.meet()?;
        while self.eat(&Tok::Join) {
            let rhs = self.meet()?;
            acc = Formula::join(acc, rhs);
        }
        Ok(acc)
    }

    fn meet(&mut self) -> Result<Formula> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(&Tok::Meet) {
                let rhs = self.unary()?;
                acc = Formula::meet(acc, rhs);
            } else if self.eat(&Tok::Backslash) {
                let rhs = self.unary()?;
                acc = Formula::diff(acc, rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat(&Tok::Tilde) {
            return Ok(Formula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula> {
        if self.eat(&Tok::LParen) {
            let f = self.formula()?;
            self.expect(&Tok::RParen)?;
            return Ok(f);
        }
        let name = self.ident()?;
        if self.peek() != &Tok::LBrack {
            return Ok(Formula::atom(name));
        }
        match name.as_str() {
            "exists" | "forall" | "subst" => {
                self.bump();
                let h = self.morphism()?;
                self.expect(&Tok::RBrack)?;
                self.expect(&Tok::LParen)?;
                let body = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(match name.as_str() {
                    "exists" => Formula::exists(h, body),
                    "forall" => Formula::forall(h, body),
                    _ => Formula::subst(h, body),
                })
            }
            "top" | "bot" => {
                self.bump();
                let l = self.list_ref()?;
                self.expect(&Tok::RBrack)?;
                Ok(if name == "top" { Formula::top(l) } else { Formula::bottom(l) })
            }
            _ => Err(self.error(format!("`{name}` does not take a bracketed argument"))),
        }
    }

    pub(crate) fn type_list(&mut self) -> Result<TypeList> {
        self.expect(&Tok::LBrace)?;
        let mut entries: Vec<(String, String)> = Vec::new();
        if !self.eat(&Tok::RBrace) {
            loop {
                let i = self.ident()?;
                self.expect(&Tok::Colon)?;
                let s = self.ident()?;
                if entries.iter().any(|(j, _)| *j == i) {
                    return Err(self.error(format!("index `{i}` repeated")));
                }
                entries.push((i, s));
                if self.eat(&Tok::RBrace) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        TypeList::new(entries)
    }

    fn list_ref(&mut self) -> Result<TypeList> {
        if self.peek() == &Tok::LBrace {
            return self.type_list();
        }
        let name = self.ident()?;
        match self.scope.schema.and_then(|s| s.relations().get(&RelName::new(&name))) {
            Some(l) => Ok(l.clone()),
            None => {
                self.pos -= 1;
                Err(self.error(format!("`{name}` is not a relation type with a known signature")))
            }
        }
    }

    pub(crate) fn morphism(&mut self) -> Result<TypeListMorphism> {
        if let Tok::Ident(name) = self.peek().clone() {
            return match self.scope.morphisms.and_then(|m| m.get(&name)) {
                Some(h) => {
                    self.bump();
                    Ok(h.clone().with_label(name))
                }
                None => Err(self.error(format!("unknown type-list morphism `{name}`"))),
            };
        }
        self.inline_morphism()
    }

    pub(crate) fn inline_morphism(&mut self) -> Result<TypeListMorphism> {
        let source = self.type_list()?;
        self.expect(&Tok::Arrow)?;
        let target = self.type_list()?;
        self.expect(&Tok::Lt)?;
        let mut map = BTreeMap::new();
        if !self.eat(&Tok::Gt) {
            loop {
                let a = self.ident()?;
                self.expect(&Tok::Arrow)?;
                let b = self.ident()?;
                map.insert(Index::new(a), Index::new(b));
                if self.eat(&Tok::Gt) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        TypeListMorphism::new(source, target, map).map_err(|e| self.error(e.to_string()))
    }

    pub(crate) fn constraint(&mut self) -> Result<Constraint> {
        let premise = self.formula()?;
        self.expect(&Tok::Turnstile)?;
        let along = if self.eat(&Tok::LBrack) {
            let h = self.morphism()?;
            self.expect(&Tok::RBrack)?;
            Some(Arc::new(h))
        } else {
            None
        };
        let conclusion = self.formula()?;
        Ok(Constraint {
            along,
            premise,
            conclusion,
        })
    }

    /// `(i: tok, ...)`.
    pub(crate) fn tuple(&mut self) -> Result<Tuple> {
        self.expect(&Tok::LParen)?;
        let mut entries: Vec<(Index, Token)> = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let i = Index::new(self.ident()?);
                self.expect(&Tok::Colon)?;
                let y = Token::new(self.ident()?);
                if entries.iter().any(|(j, _)| *j == i) {
                    return Err(self.error(format!("index `{i}` repeated")));
                }
                entries.push((i, y));
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        Ok(entries.into_iter().collect())
    }

    /// A bare identifier is a variable; `f(slot: term, ...)` applies a symbol.
    pub(crate) fn term(&mut self, depth: usize, cap: usize) -> Result<Term> {
        if depth > cap {
            return Err(Error::DepthExceeded(cap));
        }
        let name = self.ident()?;
        if !self.eat(&Tok::LParen) {
            return Ok(Term::Var(Index::new(name)));
        }
        let mut args = BTreeMap::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let slot = Index::new(self.ident()?);
                self.expect(&Tok::Colon)?;
                let t = self.term(depth + 1, cap)?;
                if args.insert(slot.clone(), t).is_some() {
                    return Err(self.error(format!("argument `{slot}` repeated")));
                }
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        Ok(Term::App(Symbol::new(name), args))
    }
}

pub fn parse_formula(text: &str, scope: Scope<'_>) -> Result<Formula> {
    let mut p = Parser::new(text, scope)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

/// Parses `φ |- ψ` or `φ |-[h] ψ`.
pub fn parse_constraint(text: &str, scope: Scope<'_>) -> Result<Constraint> {
    let mut p = Parser::new(text, scope)?;
    let c = p.constraint()?;
    p.finish()?;
    Ok(c)
}

pub fn parse_sequent(text: &str, scope: Scope<'_>) -> Result<Sequent> {
    let c = parse_constraint(text, scope)?;
    if c.along.is_some() {
        return Err(Error::Syntax {
            line: 1,
            column: 1,
            message: "expected a plain sequent".into(),
        });
    }
    Ok(c.as_sequent())
}

pub fn parse_type_list(text: &str) -> Result<TypeList> {
    let mut p = Parser::new(text, Scope::default())?;
    let l = p.type_list()?;
    p.finish()?;
    Ok(l)
}

pub fn parse_morphism(text: &str, scope: Scope<'_>) -> Result<TypeListMorphism> {
    let mut p = Parser::new(text, scope)?;
    let h = p.morphism()?;
    p.finish()?;
    Ok(h)
}

pub fn parse_tuple(text: &str) -> Result<Tuple> {
    let mut p = Parser::new(text, Scope::default())?;
    let t = p.tuple()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_term(text: &str) -> Result<Term> {
    let mut p = Parser::new(text, Scope::default())?;
    let t = p.term(0, crate::limits::Limits::global().max_term_depth)?;
    p.finish()?;
    Ok(t)
}

/// Writes a morphism by label when it has one, inline otherwise.
pub(crate) fn write_morphism_ref(f: &mut fmt::Formatter<'_>, h: &TypeListMorphism) -> fmt::Result {
    match h.label() {
        Some(l) => f.write_str(l),
        None => write!(f, "{h}"),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bin = |f: &mut fmt::Formatter<'_>, a: &Formula, op: &str, b: &Formula| write!(f, "({a} {op} {b})");
        match self {
            Formula::Atom(r) => write!(f, "{r}"),
            Formula::Top(l) => write!(f, "top[{l}]"),
            Formula::Bottom(l) => write!(f, "bot[{l}]"),
            Formula::Meet(a, b) => bin(f, a, "/\\", b),
            Formula::Join(a, b) => bin(f, a, "\\/", b),
            Formula::Impl(a, b) => bin(f, a, "->", b),
            Formula::Diff(a, b) => bin(f, a, "\\", b),
            Formula::Neg(a) => write!(f, "~{a}"),
            Formula::SumFlow(h, a) | Formula::ProdFlow(h, a) | Formula::Subst(h, a) => {
                let kw = match self {
                    Formula::SumFlow(..) => "exists",
                    Formula::ProdFlow(..) => "forall",
                    _ => "subst",
                };
                write!(f, "{kw}[")?;
                write_morphism_ref(f, h)?;
                write!(f, "]({a})")
            }
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "{i}"),
            Term::App(e, args) => {
                write!(f, "{e}(")?;
                for (n, (slot, t)) in args.iter().enumerate() {
                    if n > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{slot}: {t}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
