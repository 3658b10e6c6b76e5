//! Recursive-descent parser for the formula and term grammar.
//!
//! The grammar is whitespace-insensitive and LL(1) after lexing. Identifier
//! sorts (variable / name / constant / function symbol) are not decidable
//! lexically, so parsing happens against a [`Signature`] that classifies
//! them. `::` is accepted as a tuple separator and normalized away; variable
//! tuples are sorted on construction.
//!
//! ```text
//! phi    ::= iff
//! iff    ::= imp { "<->" imp }
//! imp    ::= conj [ "->" imp ]
//! conj   ::= unary { "&" unary }
//! unary  ::= "!" unary | "[" assign {"," assign} "]" ("E"|"L") unary | primary
//! primary::= "top" | atom | "(" phi ")"
//! atom   ::= "pos(" posarg ")" | cpred "(" vt ";" vt [";" vt] ")" | opnd "==" opnd
//! opnd   ::= term | kref
//! term   ::= tuple | ident | canon-name | kref "(" [term {"," term}] ")"
//!          | "margin(" term ";" vt ")"
//! kref   ::= fsym | "cond(" vt ";" vt ";" [fix {"," fix}] ")" | canon-fsym
//! tuple  ::= "<" [term { ("," | "::") term }] ">"
//! assign ::= var ":=" const          fix ::= var "=" const
//! canon-name ::= "#n(" genref ";" vt ")"    canon-fsym ::= "#f(" genref ";" kref ")"
//! genref ::= ident { "[" assign {"," assign} "]" ("E"|"L") }
//! ```

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::syntax::{
    Assignments, Atom, CausalPred, CausalTerm, CondVar, Formula, GenRef, KernelRef, Mode, PosArg,
    Term, VarTuple,
};

/// Classification of identifiers into the four sorts.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    pub vars: BTreeSet<String>,
    pub names: BTreeSet<String>,
    pub consts: BTreeSet<String>,
    pub fsyms: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentClass {
    Var,
    Name,
    Const,
    Fsym,
}

impl Signature {
    pub fn classify(&self, ident: &str) -> Option<IdentClass> {
        if self.vars.contains(ident) {
            Some(IdentClass::Var)
        } else if self.names.contains(ident) {
            Some(IdentClass::Name)
        } else if self.consts.contains(ident) {
            Some(IdentClass::Const)
        } else if self.fsyms.contains(ident) {
            Some(IdentClass::Fsym)
        } else {
            None
        }
    }
}

/// Parse failure with source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    HashN,
    HashF,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Comma,
    Semi,
    ColonColon,
    Assign, // :=
    Eq,     // =
    EqEq,   // ==
    Arrow,  // ->
    Iff,    // <->
    And,
    Not,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::HashN => "`#n`",
            Tok::HashF => "`#f`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::ColonColon => "`::`",
            Tok::Assign => "`:=`",
            Tok::Eq => "`=`",
            Tok::EqEq => "`==`",
            Tok::Arrow => "`->`",
            Tok::Iff => "`<->`",
            Tok::And => "`&`",
            Tok::Not => "`!`",
            Tok::Eof => "end of input",
        };
        write!(f, "{s}")
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_cont(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'\''
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = *self.src.get(self.pos)?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn next_tok(&mut self) -> Result<(Tok, usize, usize), ParseError> {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.bump();
        }
        let (line, col) = (self.line, self.col);
        let Some(c) = self.peek() else {
            return Ok((Tok::Eof, line, col));
        };
        let tok = match c {
            b'(' => {
                self.bump();
                Tok::LParen
            }
            b')' => {
                self.bump();
                Tok::RParen
            }
            b'[' => {
                self.bump();
                Tok::LBracket
            }
            b']' => {
                self.bump();
                Tok::RBracket
            }
            b'>' => {
                self.bump();
                Tok::Gt
            }
            b',' => {
                self.bump();
                Tok::Comma
            }
            b';' => {
                self.bump();
                Tok::Semi
            }
            b'&' => {
                self.bump();
                Tok::And
            }
            b'!' => {
                self.bump();
                Tok::Not
            }
            b'<' => {
                if self.peek2() == Some(b'-') {
                    self.bump();
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        Tok::Iff
                    } else {
                        return Err(self.err("expected `>` after `<-`"));
                    }
                } else {
                    self.bump();
                    Tok::Lt
                }
            }
            b'-' => {
                self.bump();
                if self.peek() == Some(b'>') {
                    self.bump();
                    Tok::Arrow
                } else {
                    return Err(self.err("expected `>` after `-`"));
                }
            }
            b':' => {
                self.bump();
                match self.peek() {
                    Some(b':') => {
                        self.bump();
                        Tok::ColonColon
                    }
                    Some(b'=') => {
                        self.bump();
                        Tok::Assign
                    }
                    _ => return Err(self.err("expected `::` or `:=`")),
                }
            }
            b'=' => {
                self.bump();
                if self.peek() == Some(b'=') {
                    self.bump();
                    Tok::EqEq
                } else {
                    Tok::Eq
                }
            }
            b'#' => {
                self.bump();
                match self.bump() {
                    Some(b'n') => Tok::HashN,
                    Some(b'f') => Tok::HashF,
                    _ => return Err(self.err("expected `#n` or `#f`")),
                }
            }
            c if is_ident_start(c) => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if is_ident_cont(c)) {
                    self.bump();
                }
                let s = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
                Tok::Ident(s.to_string())
            }
            c => return Err(self.err(format!("unexpected character `{}`", c as char))),
        };
        Ok((tok, line, col))
    }
}

/// One parsed operand of an `==` atom.
enum Operand {
    Term(Term),
    Kref(KernelRef),
}

pub struct Parser<'a> {
    sig: &'a Signature,
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    pub fn new(src: &str, sig: &'a Signature) -> Result<Self, ParseError> {
        let mut lex = Lexer::new(src);
        let mut toks = Vec::new();
        loop {
            let t = lex.next_tok()?;
            let stop = t.0 == Tok::Eof;
            toks.push(t);
            if stop {
                break;
            }
        }
        Ok(Parser { sig, toks, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    fn here(&self) -> (usize, usize) {
        let (_, l, c) = self.toks[self.pos];
        (l, c)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {tok}, found {}", self.peek())))
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => Err(self.err(format!("expected identifier, found {t}"))),
        }
    }

    fn classify(&self, ident: &str) -> Result<crate::parse::IdentClass, ParseError> {
        self.sig
            .classify(ident)
            .ok_or_else(|| self.err(format!("unknown identifier `{ident}`")))
    }

    // ---- formulas ----

    pub fn formula(&mut self) -> Result<Formula, ParseError> {
        let f = self.iff()?;
        self.expect(Tok::Eof)?;
        Ok(f)
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.imp()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let g = self.imp()?;
            f = Formula::iff(f, g);
        }
        Ok(f)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let f = self.conj()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let g = self.imp()?;
            Ok(Formula::imp(f, g))
        } else {
            Ok(f)
        }
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let f = self.unary()?;
        if *self.peek() == Tok::And {
            self.bump();
            let g = self.conj()?;
            Ok(Formula::and(f, g))
        } else {
            Ok(f)
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LBracket => {
                let assigns = self.assignments()?;
                let mode = self.mode()?;
                let body = self.unary()?;
                Ok(match mode {
                    Mode::Eager => Formula::Eager(assigns, Box::new(body)),
                    Mode::Lazy => Formula::Lazy(assigns, Box::new(body)),
                })
            }
            _ => self.primary(),
        }
    }

    fn assignments(&mut self) -> Result<Assignments, ParseError> {
        self.expect(Tok::LBracket)?;
        let mut pairs = Vec::new();
        loop {
            let v = self.expect_ident()?;
            self.expect(Tok::Assign)?;
            let c = self.expect_ident()?;
            pairs.push((v, c));
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::RBracket)?;
        Assignments::new(pairs).map_err(|e| self.err(format!("{e}")))
    }

    fn mode(&mut self) -> Result<Mode, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "E" => {
                self.bump();
                Ok(Mode::Eager)
            }
            Tok::Ident(s) if s == "L" => {
                self.bump();
                Ok(Mode::Lazy)
            }
            t => Err(self.err(format!("expected intervention mode `E` or `L`, found {t}"))),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.iff()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(s) if s == "top" => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Ident(s) if s == "pos" && *self.peek2() == Tok::LParen => {
                self.bump();
                self.bump();
                let arg = if matches!(self.peek(), Tok::Ident(k) if k == "cond") {
                    PosArg::Cond(self.cond_var()?)
                } else {
                    PosArg::Tuple(self.var_tuple()?)
                };
                self.expect(Tok::RParen)?;
                Ok(Formula::Pos(arg))
            }
            Tok::Ident(s)
                if CausalPred::from_name(&s).is_some() && *self.peek2() == Tok::LParen =>
            {
                let pred = CausalPred::from_name(&s).unwrap();
                self.bump();
                self.bump();
                let mut args = vec![self.var_tuple()?];
                while *self.peek() == Tok::Semi {
                    self.bump();
                    args.push(self.var_tuple()?);
                }
                self.expect(Tok::RParen)?;
                if args.len() != pred.arity() {
                    return Err(self.err(format!(
                        "`{}` takes {} tuples, found {}",
                        pred.name(),
                        pred.arity(),
                        args.len()
                    )));
                }
                Ok(Formula::CausalPred(pred, args))
            }
            _ => self.equality(),
        }
    }

    fn equality(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.operand()?;
        self.expect(Tok::EqEq)?;
        let rhs = self.operand()?;
        match (lhs, rhs) {
            (Operand::Term(a), Operand::Term(b)) => Ok(Formula::EqTerm(a, b)),
            (Operand::Kref(a), Operand::Kref(b)) => Ok(Formula::EqKernel(a, b)),
            _ => Err(self.err("cannot equate a distribution term with a kernel")),
        }
    }

    // ---- terms and kernel references ----

    fn operand(&mut self) -> Result<Operand, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "cond" => {
                let cv = self.cond_var()?;
                self.kref_or_app(KernelRef::Cond(cv))
            }
            Tok::HashF => {
                self.bump();
                self.expect(Tok::LParen)?;
                let gref = self.gen_ref()?;
                self.expect(Tok::Semi)?;
                let cv = self.cond_var()?;
                self.expect(Tok::RParen)?;
                self.kref_or_app(KernelRef::CanonCond(gref, cv))
            }
            Tok::Ident(s)
                if self.sig.fsyms.contains(&s) && s != "margin" =>
            {
                self.bump();
                self.kref_or_app(KernelRef::Fsym(s))
            }
            _ => Ok(Operand::Term(self.term_inner()?)),
        }
    }

    /// After a kernel reference: an argument list makes it an application
    /// (a term); otherwise it stays a kernel reference.
    fn kref_or_app(&mut self, k: KernelRef) -> Result<Operand, ParseError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let mut args = Vec::new();
            if *self.peek() != Tok::RParen {
                loop {
                    args.push(self.term()?);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
            Ok(Operand::Term(Term::App(k, args)))
        } else {
            Ok(Operand::Kref(k))
        }
    }

    pub fn term(&mut self) -> Result<Term, ParseError> {
        match self.operand()? {
            Operand::Term(t) => Ok(t),
            Operand::Kref(k) => Err(self.err(format!(
                "kernel reference `{k}` is not a term (missing argument list?)"
            ))),
        }
    }

    fn term_inner(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Lt => self.tuple_term(),
            Tok::HashN => {
                self.bump();
                self.expect(Tok::LParen)?;
                let gref = self.gen_ref()?;
                self.expect(Tok::Semi)?;
                let vt = self.var_tuple()?;
                self.expect(Tok::RParen)?;
                Ok(Term::CanonName(gref, vt))
            }
            Tok::Ident(s) if s == "margin" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let body = self.term()?;
                self.expect(Tok::Semi)?;
                let keep = self.var_tuple()?;
                self.expect(Tok::RParen)?;
                Ok(Term::Margin(Box::new(body), keep))
            }
            Tok::Ident(s) => {
                self.bump();
                match self.classify(&s)? {
                    IdentClass::Var => Ok(Term::Vars(VarTuple::single(s))),
                    IdentClass::Name => Ok(Term::Name(s)),
                    IdentClass::Const => Ok(Term::Const(s)),
                    IdentClass::Fsym => {
                        Err(self.err(format!("function symbol `{s}` used as a term")))
                    }
                }
            }
            t => Err(self.err(format!("expected term, found {t}"))),
        }
    }

    /// `<...>`: a variable tuple when every element is a bare variable,
    /// a general term tuple otherwise.
    fn tuple_term(&mut self) -> Result<Term, ParseError> {
        self.expect(Tok::Lt)?;
        let mut elems = Vec::new();
        if *self.peek() != Tok::Gt {
            loop {
                elems.push(self.term()?);
                match self.peek() {
                    Tok::Comma | Tok::ColonColon => {
                        self.bump();
                    }
                    _ => break,
                }
            }
        }
        self.expect(Tok::Gt)?;
        let all_vars: Option<Vec<String>> = elems
            .iter()
            .map(|t| match t {
                Term::Vars(vt) if vt.len() == 1 => Some(vt.as_slice()[0].clone()),
                _ => None,
            })
            .collect();
        match all_vars {
            Some(vs) => {
                let vt = VarTuple::new(vs).map_err(|e| self.err(format!("{e}")))?;
                Ok(Term::Vars(vt))
            }
            None => {
                if elems.is_empty() {
                    Ok(Term::Vars(VarTuple::empty()))
                } else {
                    Ok(Term::Tuple(elems))
                }
            }
        }
    }

    /// Strict variable tuple `<x,y,...>`.
    pub fn var_tuple(&mut self) -> Result<VarTuple, ParseError> {
        self.expect(Tok::Lt)?;
        let mut vars = Vec::new();
        if *self.peek() != Tok::Gt {
            loop {
                let v = self.expect_ident()?;
                match self.classify(&v)? {
                    IdentClass::Var => vars.push(v),
                    _ => return Err(self.err(format!("`{v}` is not a causal variable"))),
                }
                match self.peek() {
                    Tok::Comma | Tok::ColonColon => {
                        self.bump();
                    }
                    _ => break,
                }
            }
        }
        self.expect(Tok::Gt)?;
        VarTuple::new(vars).map_err(|e| self.err(format!("{e}")))
    }

    /// `cond(targets; givens; fixes)`.
    pub fn cond_var(&mut self) -> Result<CondVar, ParseError> {
        match self.bump() {
            Tok::Ident(s) if s == "cond" => {}
            t => return Err(self.err(format!("expected `cond`, found {t}"))),
        }
        self.expect(Tok::LParen)?;
        let target = self.var_tuple()?;
        self.expect(Tok::Semi)?;
        let given = self.var_tuple()?;
        self.expect(Tok::Semi)?;
        let mut fixed = Vec::new();
        let mut vals = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let v = self.expect_ident()?;
                self.expect(Tok::Eq)?;
                let c = self.expect_ident()?;
                fixed.push(v);
                vals.push(c);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        // Fixed pairs are sorted by variable to align with the tuple order.
        let mut pairs: Vec<(String, String)> = fixed.into_iter().zip(vals).collect();
        pairs.sort();
        let fixed = VarTuple::new(pairs.iter().map(|(v, _)| v.clone()))
            .map_err(|e| self.err(format!("{e}")))?;
        let vals = pairs.into_iter().map(|(_, c)| c).collect();
        CondVar::new(target, given, fixed, vals).map_err(|e| self.err(format!("{e}")))
    }

    /// Generator reference `id` with optional intervention suffixes.
    pub fn gen_ref(&mut self) -> Result<GenRef, ParseError> {
        let base = self.expect_ident()?;
        let mut gref = GenRef::base(base);
        while *self.peek() == Tok::LBracket {
            let assigns = self.assignments()?;
            let mode = self.mode()?;
            gref = gref.intervened(mode, assigns);
        }
        Ok(gref)
    }

    /// Depth-≤1 causal term, as used in generator definitions.
    pub fn causal_term(&mut self) -> Result<CausalTerm, ParseError> {
        let s = self.expect_ident()?;
        if *self.peek() == Tok::LParen {
            match self.classify(&s)? {
                IdentClass::Fsym => {}
                _ => return Err(self.err(format!("`{s}` is not a function symbol"))),
            }
            self.bump();
            let mut args = Vec::new();
            if *self.peek() != Tok::RParen {
                loop {
                    let a = self.expect_ident()?;
                    args.push(match self.classify(&a)? {
                        IdentClass::Var => Atom::Var(a),
                        IdentClass::Name => Atom::Name(a),
                        IdentClass::Const => Atom::Const(a),
                        IdentClass::Fsym => {
                            return Err(self.err(format!(
                                "`{a}` is a function symbol; causal-term arguments are atoms"
                            )))
                        }
                    });
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
            Ok(CausalTerm::App(s, args))
        } else {
            Ok(match self.classify(&s)? {
                IdentClass::Var => CausalTerm::Var(s),
                IdentClass::Name => CausalTerm::Name(s),
                IdentClass::Const => CausalTerm::Const(s),
                IdentClass::Fsym => CausalTerm::App(s, Vec::new()),
            })
        }
    }
}

impl<'a> Parser<'a> {
    fn finishing<T>(&mut self, value: T) -> Result<T, ParseError> {
        self.expect(Tok::Eof)?;
        Ok(value)
    }
}

/// Parses a complete assignment list `[x:=c,...]`.
pub fn parse_assignments(src: &str, sig: &Signature) -> Result<Assignments, ParseError> {
    let mut p = Parser::new(src, sig)?;
    let a = p.assignments()?;
    p.finishing(a)
}

/// Parses a complete kernel reference (a function symbol, `cond(...)`, or
/// a canonical `#f(...)` symbol).
pub fn parse_kernel_ref(src: &str, sig: &Signature) -> Result<KernelRef, ParseError> {
    let mut p = Parser::new(src, sig)?;
    match p.operand()? {
        Operand::Kref(k) => p.finishing(k),
        Operand::Term(t) => Err(p.err(format!("`{t}` is a term, not a kernel reference"))),
    }
}

/// Parses a complete formula.
pub fn parse_formula(src: &str, sig: &Signature) -> Result<Formula, ParseError> {
    Parser::new(src, sig)?.formula()
}

/// Parses a complete term.
pub fn parse_term(src: &str, sig: &Signature) -> Result<Term, ParseError> {
    let mut p = Parser::new(src, sig)?;
    let t = p.term()?;
    p.finishing(t)
}

/// Parses a complete depth-≤1 causal term.
pub fn parse_causal_term(src: &str, sig: &Signature) -> Result<CausalTerm, ParseError> {
    let mut p = Parser::new(src, sig)?;
    let t = p.causal_term()?;
    p.finishing(t)
}

/// Parses a complete generator reference.
pub fn parse_gen_ref(src: &str, sig: &Signature) -> Result<GenRef, ParseError> {
    let mut p = Parser::new(src, sig)?;
    let g = p.gen_ref()?;
    p.finishing(g)
}

/// Parses a complete variable tuple.
pub fn parse_var_tuple(src: &str, sig: &Signature) -> Result<VarTuple, ParseError> {
    let mut p = Parser::new(src, sig)?;
    let vt = p.var_tuple()?;
    p.finishing(vt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn sig() -> Signature {
        let mut s = Signature::default();
        for v in ["x", "y", "z", "w", "v"] {
            s.vars.insert(v.to_string());
        }
        for n in ["n0", "n1", "n2", "nz"] {
            s.names.insert(n.to_string());
        }
        for c in ["c0", "c1", "c"] {
            s.consts.insert(c.to_string());
        }
        for f in ["f", "g", "fx", "fy"] {
            s.fsyms.insert(f.to_string());
        }
        s
    }

    fn roundtrip(src: &str) -> Formula {
        let s = sig();
        let f = parse_formula(src, &s).unwrap();
        let printed = f.to_string();
        let f2 = parse_formula(&printed, &s)
            .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
        assert_eq!(f, f2, "round trip through `{printed}`");
        f
    }

    #[test]
    fn parses_rct_formula() {
        let f = roundtrip("[x:=c1]E (n0 == <y>)");
        let want = Formula::Eager(
            Assignments::single("x", "c1"),
            alloc::boxed::Box::new(Formula::EqTerm(
                Term::Name("n0".into()),
                Term::Vars(VarTuple::single("y")),
            )),
        );
        assert_eq!(f, want);
    }

    #[test]
    fn parses_bda_conjunction() {
        let f = roundtrip(
            "f == cond(<y>; <z>; x=c1) & n1 == <z> & n0 == margin(f(n1); <y>)",
        );
        match f {
            Formula::And(a, rest) => {
                assert!(matches!(*a, Formula::EqKernel(_, _)));
                match *rest {
                    Formula::And(b, c) => {
                        assert!(matches!(*b, Formula::EqTerm(_, _)));
                        assert!(matches!(*c, Formula::EqTerm(_, _)));
                    }
                    other => panic!("unexpected shape: {other:?}"),
                }
            }
            other => panic!("unexpected shape: {other:?}"),
        }
    }

    #[test]
    fn parses_top() {
        assert_eq!(roundtrip("top"), Formula::Top);
    }

    #[test]
    fn rejects_duplicate_intervention_variable() {
        let e = parse_formula("[x:=c0,x:=c1]E top", &sig()).unwrap_err();
        assert!(e.msg.contains("assigned more than once"), "{e}");
    }

    #[test]
    fn colons_normalize_in_tuples() {
        let s = sig();
        assert_eq!(
            parse_formula("pos(<z :: x>)", &s).unwrap(),
            parse_formula("pos(<x,z>)", &s).unwrap()
        );
    }

    #[test]
    fn var_tuples_sort_and_general_tuples_keep_order() {
        let s = sig();
        let t = parse_term("<y,x>", &s).unwrap();
        assert_eq!(t, Term::Vars(VarTuple::new(["x", "y"]).unwrap()));
        let t = parse_term("<n0,n0>", &s).unwrap();
        assert_eq!(
            t,
            Term::Tuple(alloc::vec![Term::Name("n0".into()), Term::Name("n0".into())])
        );
    }

    #[test]
    fn parses_causal_predicates_and_sugar() {
        let f = roundtrip("pa(<z>;<x>) -> [x:=c1]L dsep(<x>;<y>;<z>)");
        assert!(matches!(f, Formula::Not(_)));
        roundtrip("dsep(<x>;<y>;<>)");
        roundtrip("allnanc(<x>;<x,y>;<z>)");
    }

    #[test]
    fn parses_canonical_symbols() {
        let f = roundtrip("#n(drug[x:=c1]E; <y>) == <y>");
        match f {
            Formula::EqTerm(Term::CanonName(g, vt), _) => {
                assert_eq!(g.base, "drug");
                assert_eq!(g.transforms.len(), 1);
                assert_eq!(vt, VarTuple::single("y"));
            }
            other => panic!("unexpected: {other:?}"),
        }
        roundtrip("#f(drug; cond(<y>;<z>;x=c1)) == cond(<y>;<z>;x=c1)");
        roundtrip("n0 == margin(#f(drug; cond(<y>;<z>;x=c1))(n1); <y>)");
    }

    #[test]
    fn reports_position() {
        let e = parse_formula("top &\n  !!", &sig()).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.col >= 3);
    }

    #[test]
    fn parses_causal_terms() {
        let s = sig();
        assert_eq!(
            parse_causal_term("fx(z, nz)", &s).unwrap(),
            CausalTerm::App("fx".into(), alloc::vec![
                Atom::Var("z".into()),
                Atom::Name("nz".into())
            ])
        );
        assert_eq!(parse_causal_term("nz", &s).unwrap(), CausalTerm::Name("nz".into()));
        assert_eq!(parse_causal_term("x", &s).unwrap(), CausalTerm::Var("x".into()));
    }

    #[test]
    fn cond_with_empty_parts() {
        let s = sig();
        let f = parse_formula("f == cond(<y>;<>;)", &s).unwrap();
        match f {
            Formula::EqKernel(_, KernelRef::Cond(cv)) => {
                assert!(cv.given.is_empty());
                assert!(cv.fixed.is_empty());
            }
            other => panic!("unexpected: {other:?}"),
        }
    }
}
