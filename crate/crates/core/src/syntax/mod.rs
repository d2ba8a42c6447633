//! Two-level abstract syntax: wire types and circuits on one side, the
//! higher-order monadic host language on the other.
//!
//! The concrete grammar lives in [`parser`]; [`printer`] produces text that
//! re-parses to an alpha-equivalent tree.

mod lexer;
mod parser;
mod printer;
mod subst;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use parser::{
    parse_circuit, parse_host_term, parse_program, parse_wire_type, ParseError, DEFAULT_INT_CARD,
};
pub use printer::{pretty_print, Pretty};
pub use subst::{
    alpha_eq_circuit, alpha_eq_host, fresh_name, subst_host_in_circuit, subst_host_in_term,
    subst_pattern, subst_wires, SubstError,
};

/// Source position, 1-based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("type {0} is not classical")]
pub struct NotClassical(pub WireType);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WireType {
    Unit,
    Tensor(Box<WireType>, Box<WireType>),
    Classical { name: String, card: usize },
    Quantum { name: String, dim: usize },
    /// The recursive qubit-list type. Only meaningful before qlist
    /// monomorphization; the checker and the semantics reject it.
    QList,
}

impl WireType {
    pub fn bit() -> Self {
        WireType::Classical { name: "bit".into(), card: 2 }
    }

    pub fn qubit() -> Self {
        WireType::Quantum { name: "qubit".into(), dim: 2 }
    }

    pub fn int(card: usize) -> Self {
        WireType::Classical { name: "int".into(), card }
    }

    pub fn tensor(a: WireType, b: WireType) -> Self {
        WireType::Tensor(Box::new(a), Box::new(b))
    }

    /// `qubit ⊗ (qubit ⊗ (… ⊗ I))` with `n` qubits.
    pub fn qlist_of(n: usize) -> Self {
        (0..n).fold(WireType::Unit, |acc, _| WireType::tensor(WireType::qubit(), acc))
    }

    pub fn is_classical(&self) -> bool {
        match self {
            WireType::Unit | WireType::Classical { .. } => true,
            WireType::Tensor(a, b) => a.is_classical() && b.is_classical(),
            WireType::Quantum { .. } | WireType::QList => false,
        }
    }

    pub fn mentions_qlist(&self) -> bool {
        match self {
            WireType::QList => true,
            WireType::Tensor(a, b) => a.mentions_qlist() || b.mentions_qlist(),
            _ => false,
        }
    }

    /// Replaces every `qlist` leaf by the given type.
    pub fn instantiate_qlist(&self, with: &WireType) -> WireType {
        match self {
            WireType::QList => with.clone(),
            WireType::Tensor(a, b) => {
                WireType::tensor(a.instantiate_qlist(with), b.instantiate_qlist(with))
            }
            other => other.clone(),
        }
    }

    /// Leaves of the type in left-to-right order, dropping `I`.
    pub fn leaves(&self) -> Vec<&WireType> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a WireType>) {
        match self {
            WireType::Unit => {}
            WireType::Tensor(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
            leaf => out.push(leaf),
        }
    }

    /// Number of classical values of a classical type.
    pub fn classical_size(&self) -> Option<usize> {
        match self {
            WireType::Unit => Some(1),
            WireType::Classical { card, .. } => Some(*card),
            WireType::Tensor(a, b) => Some(a.classical_size()? * b.classical_size()?),
            _ => None,
        }
    }
}

/// The classicalization `Ŵ`: every quantum leaf becomes `bit`.
pub fn classicalize(w: &WireType) -> WireType {
    match w {
        WireType::Unit => WireType::Unit,
        WireType::Tensor(a, b) => WireType::tensor(classicalize(a), classicalize(b)),
        WireType::Classical { .. } => w.clone(),
        WireType::Quantum { .. } | WireType::QList => WireType::bit(),
    }
}

/// The lifting `|V|` of a classical wire type to a host type.
pub fn lift_type(v: &WireType) -> Result<HostType, NotClassical> {
    match v {
        WireType::Unit => Ok(HostType::Unit),
        WireType::Tensor(a, b) => Ok(HostType::product(lift_type(a)?, lift_type(b)?)),
        WireType::Classical { name, .. } if name == "int" => Ok(HostType::Int),
        WireType::Classical { name, card } => Ok(HostType::Classical {
            name: name.clone(),
            card: *card,
        }),
        _ => Err(NotClassical(v.clone())),
    }
}

/// Inverse of [`lift_type`] on first-order host types. Host `int` maps to
/// the wire base `int` with the given cardinality.
pub fn unlift_type(a: &HostType, int_card: usize) -> Option<WireType> {
    match a {
        HostType::Unit => Some(WireType::Unit),
        HostType::Product(x, y) => Some(WireType::tensor(
            unlift_type(x, int_card)?,
            unlift_type(y, int_card)?,
        )),
        HostType::Int => Some(WireType::int(int_card)),
        HostType::Classical { name, card } => Some(WireType::Classical {
            name: name.clone(),
            card: *card,
        }),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum HostType {
    Unit,
    Product(Box<HostType>, Box<HostType>),
    Arrow(Box<HostType>, Box<HostType>),
    Monadic(Box<HostType>),
    Circ(WireType, WireType),
    Classical { name: String, card: usize },
    /// Unbounded host integers.
    Int,
}

impl HostType {
    pub fn product(a: HostType, b: HostType) -> Self {
        HostType::Product(Box::new(a), Box::new(b))
    }

    pub fn arrow(a: HostType, b: HostType) -> Self {
        HostType::Arrow(Box::new(a), Box::new(b))
    }

    pub fn monadic(a: HostType) -> Self {
        HostType::Monadic(Box::new(a))
    }

    pub fn bit() -> Self {
        HostType::Classical { name: "bit".into(), card: 2 }
    }

    pub fn mentions_qlist(&self) -> bool {
        match self {
            HostType::Product(a, b) | HostType::Arrow(a, b) => {
                a.mentions_qlist() || b.mentions_qlist()
            }
            HostType::Monadic(a) => a.mentions_qlist(),
            HostType::Circ(w1, w2) => w1.mentions_qlist() || w2.mentions_qlist(),
            _ => false,
        }
    }

    pub fn instantiate_qlist(&self, with: &WireType) -> HostType {
        match self {
            HostType::Product(a, b) => {
                HostType::product(a.instantiate_qlist(with), b.instantiate_qlist(with))
            }
            HostType::Arrow(a, b) => {
                HostType::arrow(a.instantiate_qlist(with), b.instantiate_qlist(with))
            }
            HostType::Monadic(a) => HostType::monadic(a.instantiate_qlist(with)),
            HostType::Circ(w1, w2) => {
                HostType::Circ(w1.instantiate_qlist(with), w2.instantiate_qlist(with))
            }
            other => other.clone(),
        }
    }

    /// Final `Circ` type after stripping arrows, if any.
    pub fn circ_result(&self) -> Option<(&WireType, &WireType)> {
        match self {
            HostType::Circ(a, b) => Some((a, b)),
            HostType::Arrow(_, r) => r.circ_result(),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Unit,
    Wire(String),
    Pair(Box<Pattern>, Box<Pattern>),
}

impl Pattern {
    pub fn wire(name: impl Into<String>) -> Self {
        Pattern::Wire(name.into())
    }

    pub fn pair(a: Pattern, b: Pattern) -> Self {
        Pattern::Pair(Box::new(a), Box::new(b))
    }

    /// Wire names in left-to-right order.
    pub fn wires(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Pattern::Unit => {}
            Pattern::Wire(w) => out.push(w),
            Pattern::Pair(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    /// First wire name occurring twice, if any.
    pub fn duplicate_wire(&self) -> Option<&str> {
        let mut seen = BTreeSet::new();
        self.wires().into_iter().find(|w| !seen.insert(*w))
    }
}

/// Reference to a gate in the gate library, by canonical name
/// (`H`, `meas`, `bit-control X`, `CR 3`, ...).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GateRef {
    pub name: String,
}

impl GateRef {
    pub fn new(name: impl Into<String>) -> Self {
        GateRef { name: name.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrimOp {
    Add,
    Sub,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CircuitTerm {
    Output(Pattern),
    /// `p <- C1; C2`
    Compose(Pattern, Box<CircuitTerm>, Box<CircuitTerm>),
    /// `() <- p; C`
    UnitElim(Pattern, Box<CircuitTerm>),
    /// `(w1, w2) <- p; C`
    PairElim(String, String, Pattern, Box<CircuitTerm>),
    /// `p2 <- gate g p1; C`
    Gate(Pattern, GateRef, Pattern, Box<CircuitTerm>),
    Unbox(Box<HostTerm>, Pattern),
    /// `x <= lift p; C`
    Lift(String, Pattern, Box<CircuitTerm>),
    Init(Box<HostTerm>),
    /// `x <= qlift p; C`, measuring before lifting. Removed by elaboration.
    QLift(String, Pattern, Box<CircuitTerm>),
}

impl CircuitTerm {
    pub fn output(p: Pattern) -> Self {
        CircuitTerm::Output(p)
    }

    pub fn compose(p: Pattern, first: CircuitTerm, rest: CircuitTerm) -> Self {
        CircuitTerm::Compose(p, Box::new(first), Box::new(rest))
    }

    pub fn gate(out: Pattern, g: &str, inp: Pattern, rest: CircuitTerm) -> Self {
        CircuitTerm::Gate(out, GateRef::new(g), inp, Box::new(rest))
    }

    pub fn unbox(t: HostTerm, p: Pattern) -> Self {
        CircuitTerm::Unbox(Box::new(t), p)
    }

    pub fn lift(x: &str, p: Pattern, rest: CircuitTerm) -> Self {
        CircuitTerm::Lift(x.to_string(), p, Box::new(rest))
    }

    pub fn init(t: HostTerm) -> Self {
        CircuitTerm::Init(Box::new(t))
    }

    /// Free wires in order of first occurrence.
    pub fn free_wires(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        free_wires_into(self, &mut bound, &mut out);
        out
    }

    /// Every wire name mentioned anywhere in the term, bound or free.
    pub fn wire_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        subst::all_wire_names(self, &mut out);
        out
    }

    /// Host variables occurring free in the circuit.
    pub fn host_free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        subst::circuit_host_free_vars(self, &mut Vec::new(), &mut out);
        out
    }

    /// True if the term contains a sugar constructor.
    pub fn has_sugar(&self) -> bool {
        match self {
            CircuitTerm::QLift(..) => true,
            CircuitTerm::Output(_) => false,
            CircuitTerm::Compose(_, a, b) => a.has_sugar() || b.has_sugar(),
            CircuitTerm::UnitElim(_, c)
            | CircuitTerm::PairElim(_, _, _, c)
            | CircuitTerm::Gate(_, _, _, c)
            | CircuitTerm::Lift(_, _, c) => c.has_sugar(),
            CircuitTerm::Unbox(t, _) | CircuitTerm::Init(t) => t.has_sugar(),
        }
    }

    /// Number of statements along every branch of the term.
    pub fn size(&self) -> usize {
        match self {
            CircuitTerm::Output(_) | CircuitTerm::Init(_) => 1,
            CircuitTerm::Unbox(t, _) => 1 + t.size(),
            CircuitTerm::Compose(_, a, b) => 1 + a.size() + b.size(),
            CircuitTerm::UnitElim(_, c)
            | CircuitTerm::PairElim(_, _, _, c)
            | CircuitTerm::Gate(_, _, _, c)
            | CircuitTerm::Lift(_, _, c)
            | CircuitTerm::QLift(_, _, c) => 1 + c.size(),
        }
    }
}

fn free_wires_into(c: &CircuitTerm, bound: &mut Vec<String>, out: &mut Vec<String>) {
    fn uses(p: &Pattern, bound: &[String], out: &mut Vec<String>) {
        for w in p.wires() {
            if !bound.iter().any(|b| b == w) && !out.iter().any(|o| o == w) {
                out.push(w.to_string());
            }
        }
    }
    match c {
        CircuitTerm::Output(p) | CircuitTerm::Unbox(_, p) => uses(p, bound, out),
        CircuitTerm::Init(_) => {}
        CircuitTerm::Compose(p, first, rest) => {
            free_wires_into(first, bound, out);
            let n = bound.len();
            bound.extend(p.wires().into_iter().map(String::from));
            free_wires_into(rest, bound, out);
            bound.truncate(n);
        }
        CircuitTerm::UnitElim(p, rest)
        | CircuitTerm::Lift(_, p, rest)
        | CircuitTerm::QLift(_, p, rest) => {
            uses(p, bound, out);
            free_wires_into(rest, bound, out);
        }
        CircuitTerm::PairElim(w1, w2, p, rest) => {
            uses(p, bound, out);
            let n = bound.len();
            bound.push(w1.clone());
            bound.push(w2.clone());
            free_wires_into(rest, bound, out);
            bound.truncate(n);
        }
        CircuitTerm::Gate(p2, _, p1, rest) => {
            uses(p1, bound, out);
            let n = bound.len();
            bound.extend(p2.wires().into_iter().map(String::from));
            free_wires_into(rest, bound, out);
            bound.truncate(n);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum HostTerm {
    Var(String),
    Lambda(String, HostType, Box<HostTerm>),
    App(Box<HostTerm>, Box<HostTerm>),
    UnitVal,
    Pair(Box<HostTerm>, Box<HostTerm>),
    Proj1(Box<HostTerm>),
    Proj2(Box<HostTerm>),
    Return(Box<HostTerm>),
    /// `let x <- t in u`
    LetBind(Box<HostTerm>, String, Box<HostTerm>),
    /// `box p : W => C`; the type is filled in by elaboration when omitted.
    Box(Pattern, Option<WireType>, Box<CircuitTerm>),
    Run(Box<CircuitTerm>),
    ClassicalLit { base: String, card: usize, value: usize },
    Int(i64),
    If(Box<HostTerm>, Box<HostTerm>, Box<HostTerm>),
    Prim(PrimOp, Box<HostTerm>, Box<HostTerm>),
    /// `Y[A, W1, W2]`
    Fix(HostType, WireType, WireType),
    /// Parameterised gates such as `CR n`.
    GateFamily(String, Box<HostTerm>),
    /// `qrun C`: run with implicit measurement. Removed by elaboration.
    QRun(Box<CircuitTerm>),
}

impl HostTerm {
    pub fn var(x: &str) -> Self {
        HostTerm::Var(x.to_string())
    }

    pub fn app(f: HostTerm, a: HostTerm) -> Self {
        HostTerm::App(Box::new(f), Box::new(a))
    }

    pub fn lambda(x: &str, ty: HostType, body: HostTerm) -> Self {
        HostTerm::Lambda(x.to_string(), ty, Box::new(body))
    }

    pub fn pair(a: HostTerm, b: HostTerm) -> Self {
        HostTerm::Pair(Box::new(a), Box::new(b))
    }

    pub fn boxed(p: Pattern, ty: Option<WireType>, body: CircuitTerm) -> Self {
        HostTerm::Box(p, ty, Box::new(body))
    }

    pub fn bit(value: usize) -> Self {
        HostTerm::ClassicalLit { base: "bit".into(), card: 2, value }
    }

    pub fn has_sugar(&self) -> bool {
        match self {
            HostTerm::QRun(_) => true,
            HostTerm::Box(_, _, c) | HostTerm::Run(c) => c.has_sugar(),
            HostTerm::Lambda(_, _, b)
            | HostTerm::Proj1(b)
            | HostTerm::Proj2(b)
            | HostTerm::Return(b)
            | HostTerm::GateFamily(_, b) => b.has_sugar(),
            HostTerm::App(a, b)
            | HostTerm::Pair(a, b)
            | HostTerm::LetBind(a, _, b)
            | HostTerm::Prim(_, a, b) => a.has_sugar() || b.has_sugar(),
            HostTerm::If(a, b, c) => a.has_sugar() || b.has_sugar() || c.has_sugar(),
            HostTerm::Var(_)
            | HostTerm::UnitVal
            | HostTerm::ClassicalLit { .. }
            | HostTerm::Int(_)
            | HostTerm::Fix(..) => false,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            HostTerm::Box(_, _, c) | HostTerm::Run(c) | HostTerm::QRun(c) => 1 + c.size(),
            HostTerm::Lambda(_, _, b)
            | HostTerm::Proj1(b)
            | HostTerm::Proj2(b)
            | HostTerm::Return(b)
            | HostTerm::GateFamily(_, b) => 1 + b.size(),
            HostTerm::App(a, b)
            | HostTerm::Pair(a, b)
            | HostTerm::LetBind(a, _, b)
            | HostTerm::Prim(_, a, b) => 1 + a.size() + b.size(),
            HostTerm::If(a, b, c) => 1 + a.size() + b.size() + c.size(),
            _ => 1,
        }
    }

    /// Host variables occurring free in the term (including inside circuits).
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        subst::host_free_vars(self, &mut Vec::new(), &mut out);
        out
    }
}

/// A named host-level definition.
#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub name: String,
    pub ty: Option<HostType>,
    pub body: HostTerm,
    /// Declared with `rec`; the name is bound inside its own body.
    pub recursive: bool,
    pub span: Span,
}

impl Decl {
    /// The body with recursion made explicit through the fixed-point
    /// combinator. Non-recursive declarations are returned unchanged.
    ///
    /// Recursive declarations must be annotated with `A -> Circ(W1, W2)` or
    /// `Circ(W1, W2)`; the latter is threaded through a unit argument.
    pub fn desugared_body(&self) -> Option<HostTerm> {
        if !self.recursive {
            return Some(self.body.clone());
        }
        let ty = self.ty.as_ref()?;
        match ty {
            HostType::Arrow(a, r) => match r.as_ref() {
                HostType::Circ(w1, w2) => Some(HostTerm::app(
                    HostTerm::Fix((**a).clone(), w1.clone(), w2.clone()),
                    HostTerm::lambda(&self.name, ty.clone(), self.body.clone()),
                )),
                _ => None,
            },
            HostType::Circ(w1, w2) => {
                let mut used = self.body.free_vars();
                used.insert(self.name.clone());
                let f = fresh_name(&format!("{}_f", self.name), &used);
                let u = fresh_name("u", &used);
                let unit_arrow = HostType::arrow(HostType::Unit, ty.clone());
                let inner = subst_host_in_term(
                    &self.body,
                    &self.name,
                    &HostTerm::app(HostTerm::var(&f), HostTerm::UnitVal),
                );
                Some(HostTerm::app(
                    HostTerm::app(
                        HostTerm::Fix(HostType::Unit, w1.clone(), w2.clone()),
                        HostTerm::lambda(
                            &f,
                            unit_arrow,
                            HostTerm::lambda(&u, HostType::Unit, inner),
                        ),
                    ),
                    HostTerm::UnitVal,
                ))
            }
            _ => None,
        }
    }
}

/// Named circuit abbreviation `circuit name p = C`, expanded at use sites.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitAbbrev {
    pub name: String,
    pub params: Pattern,
    pub body: CircuitTerm,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Classical { name: String, card: usize },
    GateDecl { name: String, input: WireType, output: WireType },
    Def(Decl),
    Circuit(CircuitAbbrev),
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    pub items: Vec<Item>,
}

impl Program {
    pub fn decls(&self) -> impl Iterator<Item = &Decl> {
        self.items.iter().filter_map(|i| match i {
            Item::Def(d) => Some(d),
            _ => None,
        })
    }

    pub fn decls_mut(&mut self) -> impl Iterator<Item = &mut Decl> {
        self.items.iter_mut().filter_map(|i| match i {
            Item::Def(d) => Some(d),
            _ => None,
        })
    }

    pub fn decl(&self, name: &str) -> Option<&Decl> {
        self.decls().find(|d| d.name == name)
    }

    /// Cardinality of the classical wire base `int`.
    pub fn int_card(&self) -> usize {
        self.items
            .iter()
            .find_map(|i| match i {
                Item::Classical { name, card } if name == "int" => Some(*card),
                _ => None,
            })
            .unwrap_or(DEFAULT_INT_CARD)
    }

    pub fn declared_gates(&self) -> impl Iterator<Item = (&str, &WireType, &WireType)> {
        self.items.iter().filter_map(|i| match i {
            Item::GateDecl { name, input, output } => Some((name.as_str(), input, output)),
            _ => None,
        })
    }

    /// The designated entry point: the declaration named `main`.
    pub fn entry(&self) -> Option<&Decl> {
        self.decl("main")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classicalize_examples() {
        assert_eq!(classicalize(&WireType::qubit()), WireType::bit());
        assert_eq!(classicalize(&WireType::Unit), WireType::Unit);
        assert_eq!(
            classicalize(&WireType::tensor(WireType::qubit(), WireType::bit())),
            WireType::tensor(WireType::bit(), WireType::bit())
        );
    }

    #[test]
    fn lift_type_examples() {
        assert_eq!(lift_type(&WireType::Unit), Ok(HostType::Unit));
        assert_eq!(
            lift_type(&WireType::tensor(WireType::bit(), WireType::bit())),
            Ok(HostType::product(HostType::bit(), HostType::bit()))
        );
        assert_eq!(
            lift_type(&WireType::qubit()),
            Err(NotClassical(WireType::qubit()))
        );
    }

    #[test]
    fn qlist_instantiation_is_right_nested() {
        let q2 = WireType::qlist_of(2);
        assert_eq!(
            q2,
            WireType::tensor(
                WireType::qubit(),
                WireType::tensor(WireType::qubit(), WireType::Unit)
            )
        );
        assert_eq!(q2.leaves().len(), 2);
    }

    #[test]
    fn free_wires_respect_binders() {
        let c = CircuitTerm::gate(
            Pattern::wire("b"),
            "H",
            Pattern::wire("a"),
            CircuitTerm::output(Pattern::pair(Pattern::wire("b"), Pattern::wire("c"))),
        );
        assert_eq!(c.free_wires(), vec!["a".to_string(), "c".to_string()]);
    }

    #[test]
    fn duplicate_wires_detected() {
        let p = Pattern::pair(Pattern::wire("a"), Pattern::wire("a"));
        assert_eq!(p.duplicate_wire(), Some("a"));
    }
}
