//! Recursive-descent parser for `.ew` sources.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::lexer::{lex, Tok, Token};
use super::subst::{fresh_name, subst_pattern};
use super::{
    CircuitAbbrev, CircuitTerm, Decl, GateRef, HostTerm, HostType, Item, Pattern, PrimOp,
    Program, Span, WireType,
};

/// Cardinality of the classical wire base `int` when the program does not
/// declare one.
pub const DEFAULT_INT_CARD: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
    pub message: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.span)?;
        if let Some(m) = &self.message {
            return write!(f, "{m}");
        }
        write!(f, "expected ")?;
        match self.expected.as_slice() {
            [] => write!(f, "something else")?,
            [one] => write!(f, "{one}")?,
            many => write!(f, "one of {}", many.join(", "))?,
        }
        write!(f, ", found {}", self.found)
    }
}

const KEYWORDS: &[&str] = &[
    "output", "unbox", "init", "lift", "qlift", "gate", "box", "run", "qrun", "return", "let",
    "in", "if", "then", "else", "lambda", "fst", "snd", "true", "false", "def", "rec", "circuit",
    "classical", "Y", "CR", "R", "control", "bit-control",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

type PResult<T> = Result<T, ParseError>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    classical: BTreeMap<String, usize>,
    abbrevs: BTreeMap<String, CircuitAbbrev>,
    // Furthest failure, for error reporting.
    err_pos: usize,
    expected: BTreeSet<String>,
}

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        let toks = lex(src).map_err(|e| ParseError {
            span: e.span,
            expected: vec![],
            found: format!("`{}`", e.found),
            message: Some(format!("unexpected character `{}`", e.found)),
        })?;
        let mut classical = BTreeMap::new();
        classical.insert("bit".to_string(), 2);
        classical.insert("int".to_string(), DEFAULT_INT_CARD);
        Ok(Parser {
            toks,
            pos: 0,
            classical,
            abbrevs: BTreeMap::new(),
            err_pos: 0,
            expected: BTreeSet::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
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

    fn note(&mut self, what: &str) {
        if self.pos > self.err_pos {
            self.err_pos = self.pos;
            self.expected.clear();
        }
        if self.pos == self.err_pos {
            self.expected.insert(what.to_string());
        }
    }

    fn fail<T>(&mut self, what: &str) -> PResult<T> {
        self.note(what);
        let tok = &self.toks[self.err_pos];
        Err(ParseError {
            span: tok.span,
            expected: self.expected.iter().cloned().collect(),
            found: tok.tok.describe(),
            message: None,
        })
    }

    fn fail_msg<T>(&self, span: Span, msg: String) -> PResult<T> {
        Err(ParseError {
            span,
            expected: vec![],
            found: String::new(),
            message: Some(msg),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            self.note(&format!("`{s}`"));
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            self.note(&format!("`{s}`"));
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.fail(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            self.fail(&format!("`{s}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            _ => self.fail("identifier"),
        }
    }

    fn int(&mut self) -> PResult<i64> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => self.fail("integer"),
        }
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    // ---- types ----

    fn wire_type(&mut self) -> PResult<WireType> {
        let left = self.wire_atom()?;
        if self.eat_sym("*") || self.eat_sym("⊗") {
            let right = self.wire_type()?;
            Ok(WireType::tensor(left, right))
        } else {
            Ok(left)
        }
    }

    fn wire_atom(&mut self) -> PResult<WireType> {
        if self.eat_sym("(") {
            if self.eat_sym(")") {
                return Ok(WireType::Unit);
            }
            let w = self.wire_type()?;
            self.expect_sym(")")?;
            return Ok(w);
        }
        if let Tok::Ident(name) = self.peek().clone() {
            let found = match name.as_str() {
                "I" => Some(WireType::Unit),
                "qubit" => Some(WireType::qubit()),
                "qlist" => Some(WireType::QList),
                n => self.classical.get(n).map(|&card| WireType::Classical {
                    name: n.to_string(),
                    card,
                }),
            };
            if let Some(w) = found {
                self.bump();
                return Ok(w);
            }
        }
        self.fail("wire type")
    }

    fn host_type(&mut self) -> PResult<HostType> {
        let left = self.host_product()?;
        if self.eat_sym("->") {
            let right = self.host_type()?;
            Ok(HostType::arrow(left, right))
        } else {
            Ok(left)
        }
    }

    fn host_product(&mut self) -> PResult<HostType> {
        let left = self.host_atom_type()?;
        if self.eat_sym("*") || self.eat_sym("×") {
            let right = self.host_product()?;
            Ok(HostType::product(left, right))
        } else {
            Ok(left)
        }
    }

    fn host_atom_type(&mut self) -> PResult<HostType> {
        if self.eat_sym("(") {
            if self.eat_sym(")") {
                return Ok(HostType::Unit);
            }
            let t = self.host_type()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        match self.peek().clone() {
            Tok::Int(1) => {
                self.bump();
                Ok(HostType::Unit)
            }
            Tok::Ident(n) if n == "T" && matches!(self.peek_at(1), Tok::Sym("(")) => {
                self.bump();
                self.expect_sym("(")?;
                let a = self.host_type()?;
                self.expect_sym(")")?;
                Ok(HostType::monadic(a))
            }
            Tok::Ident(n) if n == "Circ" => {
                self.bump();
                self.expect_sym("(")?;
                let a = self.wire_type()?;
                self.expect_sym(",")?;
                let b = self.wire_type()?;
                self.expect_sym(")")?;
                Ok(HostType::Circ(a, b))
            }
            Tok::Ident(n) if n == "int" => {
                self.bump();
                Ok(HostType::Int)
            }
            Tok::Ident(n) if self.classical.contains_key(&n) => {
                self.bump();
                let card = self.classical[&n];
                Ok(HostType::Classical { name: n, card })
            }
            _ => self.fail("host type"),
        }
    }

    // ---- patterns ----

    fn pattern(&mut self) -> PResult<Pattern> {
        if self.eat_sym("(") {
            if self.eat_sym(")") {
                return Ok(Pattern::Unit);
            }
            let mut parts = vec![self.pattern()?];
            while self.eat_sym(",") {
                parts.push(self.pattern()?);
            }
            self.expect_sym(")")?;
            let last = parts.pop().expect("nonempty");
            return Ok(parts.into_iter().rev().fold(last, |acc, p| Pattern::pair(p, acc)));
        }
        Ok(Pattern::Wire(self.ident()?))
    }

    fn try_pattern(&mut self) -> Option<Pattern> {
        let save = self.pos;
        match self.pattern() {
            Ok(p) => Some(p),
            Err(_) => {
                self.pos = save;
                None
            }
        }
    }

    fn starts_pattern(&self) -> bool {
        match self.peek() {
            Tok::Sym("(") => true,
            Tok::Ident(s) => !is_keyword(s),
            _ => false,
        }
    }

    // ---- gates ----

    fn gate_ref(&mut self) -> PResult<GateRef> {
        fn wrap(inner: &GateRef) -> String {
            if inner.name.contains(' ') {
                format!("({})", inner.name)
            } else {
                inner.name.clone()
            }
        }
        if self.eat_sym("(") {
            let g = self.gate_ref()?;
            self.expect_sym(")")?;
            return Ok(g);
        }
        for prefix in ["bit-control", "control"] {
            if self.eat_kw(prefix) {
                let inner = self.gate_ref()?;
                return Ok(GateRef::new(format!("{prefix} {}", wrap(&inner))));
            }
        }
        for family in ["CR", "R"] {
            if self.eat_kw(family) {
                let n = self.int()?;
                return Ok(GateRef::new(format!("{family} {n}")));
            }
        }
        // `Y` names the Pauli gate here, not the fixpoint combinator.
        if self.eat_kw("Y") {
            return Ok(GateRef::new("Y"));
        }
        Ok(GateRef::new(self.ident()?))
    }

    // ---- circuits ----

    fn circuit(&mut self) -> PResult<CircuitTerm> {
        // x <= lift p; C  (also accepted with `<-`)
        if let Tok::Ident(x) = self.peek().clone() {
            if !is_keyword(&x) {
                let arrow = matches!(self.peek_at(1), Tok::Sym("<=") | Tok::Sym("<-"));
                let kw = match self.peek_at(2) {
                    Tok::Ident(k) if k == "lift" || k == "qlift" => Some(k.clone()),
                    _ => None,
                };
                if arrow && (kw.is_some() || matches!(self.peek_at(1), Tok::Sym("<="))) {
                    self.bump();
                    self.bump();
                    let quantum = if self.eat_kw("qlift") {
                        true
                    } else {
                        self.expect_kw("lift")?;
                        false
                    };
                    let p = self.pattern()?;
                    self.expect_sym(";")?;
                    let rest = Box::new(self.circuit()?);
                    return Ok(if quantum {
                        CircuitTerm::QLift(x, p, rest)
                    } else {
                        CircuitTerm::Lift(x, p, rest)
                    });
                }
            }
        }
        if self.starts_pattern() {
            let save = self.pos;
            if let Some(binder) = self.try_pattern() {
                if self.eat_sym("<-") {
                    return self.statement(binder);
                }
            }
            self.pos = save;
        }
        self.tail()
    }

    fn tail(&mut self) -> PResult<CircuitTerm> {
        if self.eat_kw("output") {
            return Ok(CircuitTerm::Output(self.pattern()?));
        }
        if self.eat_kw("unbox") {
            let t = self.host_atom()?;
            let p = self.pattern()?;
            return Ok(CircuitTerm::Unbox(Box::new(t), p));
        }
        if self.eat_kw("init") {
            let t = self.host_atom()?;
            return Ok(CircuitTerm::Init(Box::new(t)));
        }
        if self.eat_sym("(") {
            let c = self.circuit()?;
            self.expect_sym(")")?;
            return Ok(c);
        }
        if let Tok::Ident(name) = self.peek().clone() {
            if !is_keyword(&name) || name == "control" || name == "bit-control" {
                // `name p` as a tail: abbreviation or gate call.
                let span = self.span();
                if let Some(c) = self.call(span)? {
                    return Ok(c);
                }
            }
        }
        self.fail("circuit")
    }

    /// `name arg` in circuit position: an abbreviation use or a gate
    /// applied without the `gate` keyword. Returns the circuit producing
    /// the call's outputs.
    fn call(&mut self, span: Span) -> PResult<Option<CircuitTerm>> {
        if let Tok::Ident(name) = self.peek().clone() {
            if let Some(abbrev) = self.abbrevs.get(&name).cloned() {
                self.bump();
                let arg = self.pattern()?;
                return match subst_pattern(&abbrev.body, &abbrev.params, &arg) {
                    Ok(c) => Ok(Some(c)),
                    Err(e) => self.fail_msg(span, format!("in use of `{name}`: {e}")),
                };
            }
        }
        let g = self.gate_ref()?;
        let arg = self.pattern()?;
        let used: BTreeSet<String> = arg.wires().into_iter().map(String::from).collect();
        let out = fresh_name("out", &used);
        Ok(Some(CircuitTerm::Gate(
            Pattern::wire(&out),
            g,
            arg,
            Box::new(CircuitTerm::Output(Pattern::wire(out))),
        )))
    }

    fn statement(&mut self, binder: Pattern) -> PResult<CircuitTerm> {
        let span = self.span();
        if let Some(w) = binder.duplicate_wire() {
            return self.fail_msg(span, format!("wire `{w}` bound twice in one pattern"));
        }
        if self.eat_kw("gate") {
            let g = self.gate_ref()?;
            let p1 = self.pattern()?;
            self.expect_sym(";")?;
            let rest = self.circuit()?;
            return Ok(CircuitTerm::Gate(binder, g, p1, Box::new(rest)));
        }
        let first = if self.is_kw("output") || self.is_kw("unbox") || self.is_kw("init") {
            Some(self.tail()?)
        } else if self.is_sym("(") {
            let save = self.pos;
            match self.try_pattern() {
                Some(p) if self.is_sym(";") => return self.bare(binder, p),
                _ => {
                    self.pos = save;
                    Some(self.tail()?)
                }
            }
        } else if let Tok::Ident(name) = self.peek().clone() {
            if !is_keyword(&name) && matches!(self.peek_at(1), Tok::Sym(";")) {
                self.bump();
                return self.bare(binder, Pattern::Wire(name));
            }
            self.call(span)?
        } else {
            None
        };
        let Some(first) = first else {
            return self.fail("circuit");
        };
        self.expect_sym(";")?;
        let rest = self.circuit()?;
        Ok(CircuitTerm::Compose(binder, Box::new(first), Box::new(rest)))
    }

    fn bare(&mut self, binder: Pattern, p: Pattern) -> PResult<CircuitTerm> {
        self.expect_sym(";")?;
        let rest = Box::new(self.circuit()?);
        Ok(match binder {
            Pattern::Unit => CircuitTerm::UnitElim(p, rest),
            Pattern::Pair(a, b) => match (*a, *b) {
                (Pattern::Wire(w1), Pattern::Wire(w2)) => CircuitTerm::PairElim(w1, w2, p, rest),
                (a, b) => CircuitTerm::Compose(
                    Pattern::pair(a, b),
                    Box::new(CircuitTerm::Output(p)),
                    rest,
                ),
            },
            w @ Pattern::Wire(_) => CircuitTerm::Compose(w, Box::new(CircuitTerm::Output(p)), rest),
        })
    }

    // ---- host terms ----

    fn host_term(&mut self) -> PResult<HostTerm> {
        if self.eat_kw("lambda") || self.eat_sym("λ") || self.eat_sym("\\") {
            let x = self.ident()?;
            self.expect_sym(":")?;
            let ty = self.host_type()?;
            self.expect_sym(".")?;
            let body = self.host_term()?;
            return Ok(HostTerm::Lambda(x, ty, Box::new(body)));
        }
        if self.eat_kw("let") {
            let x = self.ident()?;
            self.expect_sym("<-")?;
            let t = self.host_term()?;
            self.expect_kw("in")?;
            let u = self.host_term()?;
            return Ok(HostTerm::LetBind(Box::new(t), x, Box::new(u)));
        }
        if self.eat_kw("if") {
            let c = self.host_term()?;
            self.expect_kw("then")?;
            let a = self.host_term()?;
            self.expect_kw("else")?;
            let b = self.host_term()?;
            return Ok(HostTerm::If(Box::new(c), Box::new(a), Box::new(b)));
        }
        if self.eat_kw("box") {
            let p = self.pattern()?;
            let ty = if self.eat_sym(":") {
                Some(self.wire_type()?)
            } else {
                None
            };
            self.expect_sym("=>")?;
            let c = self.circuit()?;
            return Ok(HostTerm::Box(p, ty, Box::new(c)));
        }
        if self.eat_kw("run") {
            return Ok(HostTerm::Run(Box::new(self.circuit()?)));
        }
        if self.eat_kw("qrun") {
            return Ok(HostTerm::QRun(Box::new(self.circuit()?)));
        }
        self.host_eq()
    }

    fn host_eq(&mut self) -> PResult<HostTerm> {
        let a = self.host_add()?;
        if self.eat_sym("=") {
            let b = self.host_add()?;
            return Ok(HostTerm::Prim(PrimOp::Eq, Box::new(a), Box::new(b)));
        }
        Ok(a)
    }

    fn host_add(&mut self) -> PResult<HostTerm> {
        let mut acc = if self.eat_sym("-") {
            match self.peek().clone() {
                Tok::Int(n) => {
                    self.bump();
                    HostTerm::Int(-n)
                }
                _ => {
                    let t = self.host_app()?;
                    HostTerm::Prim(PrimOp::Sub, Box::new(HostTerm::Int(0)), Box::new(t))
                }
            }
        } else {
            self.host_app()?
        };
        loop {
            let op = if self.eat_sym("+") {
                PrimOp::Add
            } else if self.eat_sym("-") {
                PrimOp::Sub
            } else {
                return Ok(acc);
            };
            let rhs = self.host_app()?;
            acc = HostTerm::Prim(op, Box::new(acc), Box::new(rhs));
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Int(_) => true,
            Tok::Sym("(") => true,
            Tok::Ident(s) => !is_keyword(s) || s == "true" || s == "false" || s == "Y",
            _ => false,
        }
    }

    fn host_app(&mut self) -> PResult<HostTerm> {
        if self.eat_kw("return") {
            return Ok(HostTerm::Return(Box::new(self.host_app()?)));
        }
        let mut f = if self.eat_kw("fst") {
            HostTerm::Proj1(Box::new(self.host_atom()?))
        } else if self.eat_kw("snd") {
            HostTerm::Proj2(Box::new(self.host_atom()?))
        } else if self.eat_kw("CR") {
            HostTerm::GateFamily("CR".into(), Box::new(self.host_atom()?))
        } else if self.eat_kw("R") {
            HostTerm::GateFamily("R".into(), Box::new(self.host_atom()?))
        } else {
            self.host_atom()?
        };
        while self.starts_atom() {
            let a = self.host_atom()?;
            f = HostTerm::App(Box::new(f), Box::new(a));
        }
        Ok(f)
    }

    fn host_atom(&mut self) -> PResult<HostTerm> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(HostTerm::Int(n))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return Ok(HostTerm::UnitVal);
                }
                let mut parts = vec![self.host_term()?];
                while self.eat_sym(",") {
                    parts.push(self.host_term()?);
                }
                self.expect_sym(")")?;
                let last = parts.pop().expect("nonempty");
                Ok(parts.into_iter().rev().fold(last, |acc, t| HostTerm::pair(t, acc)))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(HostTerm::bit(usize::from(s == "true")))
            }
            Tok::Ident(s) if s == "Y" => {
                self.bump();
                self.expect_sym("[")?;
                let a = self.host_type()?;
                self.expect_sym(",")?;
                let w1 = self.wire_type()?;
                self.expect_sym(",")?;
                let w2 = self.wire_type()?;
                self.expect_sym("]")?;
                Ok(HostTerm::Fix(a, w1, w2))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                let span = self.span();
                self.bump();
                if self.eat_sym("#") {
                    let v = self.int()?;
                    if s == "int" {
                        return Ok(HostTerm::Int(v));
                    }
                    let Some(&card) = self.classical.get(&s) else {
                        return self.fail_msg(span, format!("unknown classical base `{s}`"));
                    };
                    if v < 0 || v as usize >= card {
                        return self.fail_msg(
                            span,
                            format!("literal {s}#{v} out of range for cardinality {card}"),
                        );
                    }
                    return Ok(HostTerm::ClassicalLit { base: s, card, value: v as usize });
                }
                Ok(HostTerm::Var(s))
            }
            _ => self.fail("host term"),
        }
    }

    // ---- programs ----

    fn item(&mut self) -> PResult<Item> {
        let span = self.span();
        if self.eat_kw("classical") {
            let name = self.ident()?;
            let card = self.int()?;
            if card < 1 {
                return self.fail_msg(span, format!("classical base `{name}` needs cardinality >= 1"));
            }
            if name == "bit" && card != 2 {
                return self.fail_msg(span, "`bit` has cardinality 2".into());
            }
            self.classical.insert(name.clone(), card as usize);
            return Ok(Item::Classical { name, card: card as usize });
        }
        if self.eat_kw("gate") {
            let name = self.ident()?;
            self.expect_sym(":")?;
            let input = self.wire_type()?;
            self.expect_sym("->")?;
            let output = self.wire_type()?;
            return Ok(Item::GateDecl { name, input, output });
        }
        if self.eat_kw("circuit") {
            let name = self.ident()?;
            let params = self.pattern()?;
            self.expect_sym("=")?;
            let body = self.circuit()?;
            let abbrev = CircuitAbbrev { name: name.clone(), params, body };
            self.abbrevs.insert(name, abbrev.clone());
            return Ok(Item::Circuit(abbrev));
        }
        let recursive = if self.eat_kw("rec") {
            true
        } else if self.eat_kw("def") {
            false
        } else {
            return self.fail("declaration");
        };
        let name = self.ident()?;
        let ty = if self.eat_sym(":") {
            Some(self.host_type()?)
        } else if recursive {
            return self.fail("`:`");
        } else {
            None
        };
        self.expect_sym("=")?;
        let body = self.host_term()?;
        Ok(Item::Def(Decl { name, ty, body, recursive, span }))
    }

    fn program(&mut self) -> PResult<Program> {
        let mut items = Vec::new();
        let mut names = BTreeSet::new();
        while !self.at_eof() {
            let span = self.span();
            let item = self.item()?;
            let name = match &item {
                Item::Def(d) => Some(&d.name),
                Item::Circuit(c) => Some(&c.name),
                Item::GateDecl { name, .. } => Some(name),
                Item::Classical { .. } => None,
            };
            if let Some(n) = name {
                if !names.insert(n.clone()) {
                    return self.fail_msg(span, format!("duplicate declaration `{n}`"));
                }
            }
            items.push(item);
        }
        Ok(Program { items })
    }

    fn finish<T>(&mut self, v: T) -> PResult<T> {
        if self.at_eof() {
            Ok(v)
        } else {
            self.fail("end of input")
        }
    }
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    p.program()
}

pub fn parse_circuit(text: &str) -> Result<CircuitTerm, ParseError> {
    let mut p = Parser::new(text)?;
    let c = p.circuit()?;
    p.finish(c)
}

pub fn parse_host_term(text: &str) -> Result<HostTerm, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.host_term()?;
    p.finish(t)
}

pub fn parse_wire_type(text: &str) -> Result<WireType, ParseError> {
    let mut p = Parser::new(text)?;
    let w = p.wire_type()?;
    p.finish(w)
}
