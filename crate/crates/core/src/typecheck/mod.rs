//! Linear typing of circuits, simple typing of the host language, and
//! elaboration of measurement sugar into core terms.
//!
//! Wire contexts are threaded: each statement consumes wires from the
//! current context and binds new ones. `p <- C1; C2` hands `C1` exactly the
//! live wires free in `C1`, in context order, and the rest to `C2`.

mod sugar;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::algebra::gate_signature;
use crate::syntax::{
    classicalize, lift_type, unlift_type, CircuitTerm, Decl, GateRef, HostTerm, HostType, Item,
    Pattern, PrimOp, Program, Span, WireType,
};

pub use sugar::{meas_box, new_box};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ErrorKind {
    LinearityViolation,
    UnboundWire,
    UnusedWire,
    NotClassical,
    Mismatch,
    EffectfulUnbox,
    GateSignature,
    PatternShape,
    UnboundVariable,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{span}: {kind}: {message}")]
pub struct TypeError {
    pub kind: ErrorKind,
    pub span: Span,
    pub message: String,
}

impl TypeError {
    fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        TypeError { kind, span: Span::default(), message: message.into() }
    }
}

fn err<T>(kind: ErrorKind, message: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError::new(kind, message))
}

/// Ordered wire context `w₁:W₁, …, wₙ:Wₙ`.
pub type WireContext = Vec<(String, WireType)>;
/// Host context; later entries shadow earlier ones.
pub type HostContext = Vec<(String, HostType)>;

/// A declaration after checking: its type and its elaborated core body,
/// with recursion expressed through the fixed-point combinator.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckedDecl {
    pub name: String,
    pub ty: HostType,
    pub body: HostTerm,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckedProgram {
    pub decls: Vec<CheckedDecl>,
    pub int_card: usize,
    /// Declared gates with their signatures.
    pub gates: Vec<(String, WireType, WireType)>,
}

impl CheckedProgram {
    pub fn decl(&self, name: &str) -> Option<&CheckedDecl> {
        self.decls.iter().find(|d| d.name == name)
    }
}

/// What the surrounding term expects of a host term.
#[derive(Clone, Debug)]
enum Expect {
    Nothing,
    Type(HostType),
    /// A circuit whose input type is known but whose output is not.
    CircInput(WireType),
}

impl Expect {
    fn box_input(&self) -> Option<&WireType> {
        match self {
            Expect::Type(HostType::Circ(w, _)) | Expect::CircInput(w) => Some(w),
            _ => None,
        }
    }
}

/// Checker state shared across one program.
#[derive(Clone, Debug)]
pub struct Checker {
    int_card: usize,
    gates: HashMap<String, (WireType, WireType)>,
    globals: Vec<(String, HostType)>,
    /// Wires consumed so far in the current circuit body; distinguishes
    /// reuse from a wire that never existed.
    consumed: BTreeSet<String>,
}

impl Default for Checker {
    fn default() -> Self {
        Checker::new(crate::syntax::DEFAULT_INT_CARD)
    }
}

fn no_qlist_wire(w: &WireType) -> Result<(), TypeError> {
    if w.mentions_qlist() {
        return err(ErrorKind::Mismatch, format!("type {w} mentions qlist; instantiate it with a size first"));
    }
    Ok(())
}

fn no_qlist_host(a: &HostType) -> Result<(), TypeError> {
    if a.mentions_qlist() {
        return err(ErrorKind::Mismatch, format!("type {a} mentions qlist; instantiate it with a size first"));
    }
    Ok(())
}

fn mismatch<T>(what: &str, expected: &impl fmt::Display, found: &impl fmt::Display) -> Result<T, TypeError> {
    err(ErrorKind::Mismatch, format!("{what}: expected {expected}, found {found}"))
}

fn is_first_order(a: &HostType) -> bool {
    match a {
        HostType::Unit | HostType::Int | HostType::Classical { .. } => true,
        HostType::Product(x, y) => is_first_order(x) && is_first_order(y),
        _ => false,
    }
}

impl Checker {
    pub fn new(int_card: usize) -> Self {
        Checker { int_card, gates: HashMap::new(), globals: Vec::new(), consumed: BTreeSet::new() }
    }

    /// A checker with the program's classical bases, gates and no globals.
    pub fn for_program(prog: &Program) -> Self {
        let mut c = Checker::new(prog.int_card());
        for (name, i, o) in prog.declared_gates() {
            c.gates.insert(name.to_string(), (i.clone(), o.clone()));
        }
        c
    }

    pub fn add_global(&mut self, name: &str, ty: HostType) {
        self.globals.push((name.to_string(), ty));
    }

    fn lookup(&self, gamma: &HostContext, x: &str) -> Result<HostType, TypeError> {
        gamma
            .iter()
            .rev()
            .chain(self.globals.iter().rev())
            .find(|(y, _)| y == x)
            .map(|(_, a)| a.clone())
            .ok_or_else(|| TypeError::new(ErrorKind::UnboundVariable, format!("unbound variable `{x}`")))
    }

    // ---- patterns and wire contexts ----

    /// Removes the wires of `p` from `ctx` and returns the pattern's type.
    fn consume(&self, ctx: &mut WireContext, p: &Pattern) -> Result<WireType, TypeError> {
        if let Some(w) = p.duplicate_wire() {
            return err(ErrorKind::LinearityViolation, format!("wire `{w}` appears twice in a pattern"));
        }
        self.consume_inner(ctx, p)
    }

    fn consume_inner(&self, ctx: &mut WireContext, p: &Pattern) -> Result<WireType, TypeError> {
        match p {
            Pattern::Unit => Ok(WireType::Unit),
            Pattern::Wire(w) => match ctx.iter().position(|(n, _)| n == w) {
                Some(i) => Ok(ctx.remove(i).1),
                None if self.consumed.contains(w) => {
                    err(ErrorKind::LinearityViolation, format!("wire `{w}` is used more than once"))
                }
                None => err(ErrorKind::UnboundWire, format!("wire `{w}` is not in scope")),
            },
            Pattern::Pair(a, b) => {
                let ta = self.consume_inner(ctx, a)?;
                let tb = self.consume_inner(ctx, b)?;
                Ok(WireType::tensor(ta, tb))
            }
        }
    }

    fn consume_marking(&mut self, ctx: &mut WireContext, p: &Pattern) -> Result<WireType, TypeError> {
        let w = self.consume(ctx, p)?;
        self.consumed.extend(p.wires().into_iter().map(String::from));
        Ok(w)
    }

    /// Type of `p` in `ctx` without consuming anything.
    fn peek(&self, ctx: &WireContext, p: &Pattern) -> Option<WireType> {
        self.consume(&mut ctx.clone(), p).ok()
    }

    fn bind(&self, ctx: &mut WireContext, p: &Pattern, w: &WireType) -> Result<(), TypeError> {
        if let Some(dup) = p.duplicate_wire() {
            return err(ErrorKind::LinearityViolation, format!("wire `{dup}` bound twice"));
        }
        match (p, w) {
            (Pattern::Unit, WireType::Unit) => Ok(()),
            (Pattern::Wire(name), _) => {
                if ctx.iter().any(|(n, _)| n == name) {
                    return err(
                        ErrorKind::LinearityViolation,
                        format!("wire `{name}` is rebound while still live"),
                    );
                }
                ctx.push((name.clone(), w.clone()));
                Ok(())
            }
            (Pattern::Pair(a, b), WireType::Tensor(x, y)) => {
                self.bind(ctx, a, x)?;
                self.bind(ctx, b, y)
            }
            _ => err(ErrorKind::PatternShape, format!("pattern {p} cannot bind a value of type {w}")),
        }
    }

    fn finish(ctx: &WireContext) -> Result<(), TypeError> {
        match ctx.first() {
            None => Ok(()),
            Some((w, _)) => err(ErrorKind::LinearityViolation, format!("wire `{w}` is never consumed")),
        }
    }

    // ---- circuits ----

    /// `Γ; Ω ⊢ C : W`, returning the elaborated circuit.
    pub fn circuit(
        &mut self,
        gamma: &mut HostContext,
        mut ctx: WireContext,
        c: &CircuitTerm,
    ) -> Result<(CircuitTerm, WireType), TypeError> {
        match c {
            CircuitTerm::Output(p) => {
                let w = self.consume_marking(&mut ctx, p)?;
                Self::finish(&ctx)?;
                Ok((c.clone(), w))
            }
            CircuitTerm::Compose(p, first, rest) => {
                let free = first.free_wires();
                let (ctx1, mut ctx2): (WireContext, WireContext) =
                    ctx.into_iter().partition(|(n, _)| free.contains(n));
                let (first2, w1) = self.circuit(gamma, ctx1, first)?;
                self.bind(&mut ctx2, p, &w1)?;
                let (rest2, w2) = self.circuit(gamma, ctx2, rest)?;
                Ok((CircuitTerm::compose(p.clone(), first2, rest2), w2))
            }
            CircuitTerm::UnitElim(p, rest) => {
                let w = self.consume_marking(&mut ctx, p)?;
                if w != WireType::Unit {
                    return err(ErrorKind::PatternShape, format!("() cannot bind a value of type {w}"));
                }
                let (rest2, w2) = self.circuit(gamma, ctx, rest)?;
                Ok((CircuitTerm::UnitElim(p.clone(), Box::new(rest2)), w2))
            }
            CircuitTerm::PairElim(w1, w2, p, rest) => {
                let w = self.consume_marking(&mut ctx, p)?;
                let pat = Pattern::pair(Pattern::wire(w1.as_str()), Pattern::wire(w2.as_str()));
                self.bind(&mut ctx, &pat, &w)?;
                let (rest2, wr) = self.circuit(gamma, ctx, rest)?;
                Ok((CircuitTerm::PairElim(w1.clone(), w2.clone(), p.clone(), Box::new(rest2)), wr))
            }
            CircuitTerm::Gate(p2, g, p1, rest) => {
                let w1 = self.consume_marking(&mut ctx, p1)?;
                let w2 = self.gate_output(g, &w1)?;
                self.bind(&mut ctx, p2, &w2)?;
                let (rest2, wr) = self.circuit(gamma, ctx, rest)?;
                Ok((CircuitTerm::Gate(p2.clone(), g.clone(), p1.clone(), Box::new(rest2)), wr))
            }
            CircuitTerm::Unbox(t, p) => {
                let hint = match self.peek(&ctx, p) {
                    Some(w) => Expect::CircInput(w),
                    None => Expect::Nothing,
                };
                let (t2, ty) = self.host(gamma, t, hint)?;
                let (win, wout) = match ty {
                    HostType::Circ(a, b) => (a, b),
                    HostType::Monadic(_) => {
                        return err(
                            ErrorKind::EffectfulUnbox,
                            format!("cannot unbox a computation of type {ty}; only pure circuits can be unboxed"),
                        )
                    }
                    other => return mismatch("unbox", &"a circuit", &other),
                };
                let w = self.consume_marking(&mut ctx, p)?;
                if w != win {
                    return mismatch("unbox argument", &win, &w);
                }
                Self::finish(&ctx)?;
                Ok((CircuitTerm::unbox(t2, p.clone()), wout))
            }
            CircuitTerm::Lift(x, p, rest) => {
                let v = self.consume_marking(&mut ctx, p)?;
                let a = lift_type(&v).map_err(|e| TypeError::new(ErrorKind::NotClassical, e.to_string()))?;
                gamma.push((x.clone(), a));
                let r = self.circuit(gamma, ctx, rest);
                gamma.pop();
                let (rest2, w) = r?;
                Ok((CircuitTerm::lift(x, p.clone(), rest2), w))
            }
            CircuitTerm::Init(t) => {
                let (t2, a) = self.host(gamma, t, Expect::Nothing)?;
                let v = unlift_type(&a, self.int_card).ok_or_else(|| {
                    TypeError::new(ErrorKind::NotClassical, format!("cannot initialize a wire from type {a}"))
                })?;
                Self::finish(&ctx)?;
                Ok((CircuitTerm::init(t2), v))
            }
            CircuitTerm::QLift(x, p, rest) => {
                let w = self.consume(&mut ctx.clone(), p)?;
                let mut used = rest.wire_names();
                used.extend(ctx.iter().map(|(n, _)| n.clone()));
                let m = crate::syntax::fresh_name("m", &used);
                let core = CircuitTerm::compose(
                    Pattern::wire(m.as_str()),
                    CircuitTerm::unbox(meas_box(&w), p.clone()),
                    CircuitTerm::lift(x, Pattern::wire(m.as_str()), (**rest).clone()),
                );
                self.circuit(gamma, ctx, &core)
            }
        }
    }

    fn gate_output(&self, g: &GateRef, input: &WireType) -> Result<WireType, TypeError> {
        if let Some((i, o)) = self.gates.get(&g.name) {
            if i == input {
                return Ok(o.clone());
            }
            return err(
                ErrorKind::GateSignature,
                format!("gate `{}` expects {i}, applied at {input}", g.name),
            );
        }
        gate_signature(g, input).map_err(|e| TypeError::new(ErrorKind::GateSignature, e.to_string()))
    }

    /// Checks a box body `Γ; p:W ⊢ C`, with a fresh consumed set.
    fn box_body(
        &mut self,
        gamma: &mut HostContext,
        p: &Pattern,
        w: &WireType,
        body: &CircuitTerm,
    ) -> Result<(CircuitTerm, WireType), TypeError> {
        no_qlist_wire(w)?;
        let mut ctx = Vec::new();
        self.bind(&mut ctx, p, w)?;
        let saved = std::mem::take(&mut self.consumed);
        let r = self.circuit(gamma, ctx, body);
        self.consumed = saved;
        r
    }

    // ---- host terms ----

    fn check(&mut self, gamma: &mut HostContext, t: &HostTerm, a: &HostType) -> Result<HostTerm, TypeError> {
        let (t2, b) = self.host(gamma, t, Expect::Type(a.clone()))?;
        if &b != a {
            return mismatch("term", a, &b);
        }
        Ok(t2)
    }

    fn host(
        &mut self,
        gamma: &mut HostContext,
        t: &HostTerm,
        expect: Expect,
    ) -> Result<(HostTerm, HostType), TypeError> {
        use HostTerm as H;
        match t {
            H::Var(x) => Ok((t.clone(), self.lookup(gamma, x)?)),
            H::Lambda(x, a, body) => {
                no_qlist_host(a)?;
                let inner = match &expect {
                    Expect::Type(HostType::Arrow(_, r)) => Expect::Type((**r).clone()),
                    _ => Expect::Nothing,
                };
                gamma.push((x.clone(), a.clone()));
                let r = self.host(gamma, body, inner);
                gamma.pop();
                let (b2, rt) = r?;
                Ok((H::lambda(x, a.clone(), b2), HostType::arrow(a.clone(), rt)))
            }
            H::App(f, a) => {
                let (f2, ft) = self.host(gamma, f, Expect::Nothing)?;
                let HostType::Arrow(dom, cod) = ft else {
                    return mismatch("application head", &"a function", &ft);
                };
                let a2 = self.check(gamma, a, &dom)?;
                Ok((H::app(f2, a2), *cod))
            }
            H::UnitVal => Ok((H::UnitVal, HostType::Unit)),
            H::Pair(a, b) => {
                let (ea, eb) = match &expect {
                    Expect::Type(HostType::Product(x, y)) => {
                        (Expect::Type((**x).clone()), Expect::Type((**y).clone()))
                    }
                    _ => (Expect::Nothing, Expect::Nothing),
                };
                let (a2, ta) = self.host(gamma, a, ea)?;
                let (b2, tb) = self.host(gamma, b, eb)?;
                Ok((H::pair(a2, b2), HostType::product(ta, tb)))
            }
            H::Proj1(p) | H::Proj2(p) => {
                let (p2, pt) = self.host(gamma, p, Expect::Nothing)?;
                let HostType::Product(x, y) = pt else {
                    return mismatch("projection", &"a pair", &pt);
                };
                if matches!(t, H::Proj1(_)) {
                    Ok((H::Proj1(Box::new(p2)), *x))
                } else {
                    Ok((H::Proj2(Box::new(p2)), *y))
                }
            }
            H::Return(a) => {
                let inner = match &expect {
                    Expect::Type(HostType::Monadic(x)) => Expect::Type((**x).clone()),
                    _ => Expect::Nothing,
                };
                let (a2, ta) = self.host(gamma, a, inner)?;
                Ok((H::Return(Box::new(a2)), HostType::monadic(ta)))
            }
            H::LetBind(m, x, body) => {
                let (m2, mt) = self.host(gamma, m, Expect::Nothing)?;
                let HostType::Monadic(a) = mt else {
                    return mismatch("let-bound term", &"a computation T(A)", &mt);
                };
                gamma.push((x.clone(), *a));
                let r = self.host(gamma, body, expect);
                gamma.pop();
                let (b2, bt) = r?;
                if !matches!(bt, HostType::Monadic(_)) {
                    return mismatch("let body", &"a computation T(B)", &bt);
                }
                Ok((H::LetBind(Box::new(m2), x.clone(), Box::new(b2)), bt))
            }
            H::Box(p, ann, body) => {
                let w = match (ann, expect.box_input()) {
                    (Some(w), _) => w.clone(),
                    (None, Some(w)) => w.clone(),
                    (None, None) => {
                        return err(
                            ErrorKind::Mismatch,
                            format!("cannot infer the input type of `box {p}`; add an annotation"),
                        )
                    }
                };
                let (b2, wout) = self.box_body(gamma, p, &w, body)?;
                Ok((H::boxed(p.clone(), Some(w.clone()), b2), HostType::Circ(w, wout)))
            }
            H::Run(c) => {
                let saved = std::mem::take(&mut self.consumed);
                let r = self.circuit(gamma, Vec::new(), c);
                self.consumed = saved;
                let (c2, v) = r?;
                let a = lift_type(&v).map_err(|_| {
                    TypeError::new(ErrorKind::NotClassical, format!("run needs a classical output, found {v}"))
                })?;
                Ok((H::Run(Box::new(c2)), HostType::monadic(a)))
            }
            H::QRun(c) => {
                let saved = std::mem::take(&mut self.consumed);
                let r = self.circuit(gamma, Vec::new(), c);
                self.consumed = saved;
                let (c2, w) = r?;
                let x = crate::syntax::fresh_name("x", &c2.wire_names());
                let core = CircuitTerm::compose(
                    Pattern::wire(x.as_str()),
                    c2,
                    CircuitTerm::unbox(meas_box(&w), Pattern::wire(x.as_str())),
                );
                let a = lift_type(&classicalize(&w)).expect("classicalized types are classical");
                Ok((H::Run(Box::new(core)), HostType::monadic(a)))
            }
            H::ClassicalLit { base, card, value } => {
                if value >= card {
                    return err(ErrorKind::Mismatch, format!("{base}#{value} is out of range 0..{card}"));
                }
                Ok((t.clone(), HostType::Classical { name: base.clone(), card: *card }))
            }
            H::Int(_) => Ok((t.clone(), HostType::Int)),
            H::If(c, a, b) => {
                let c2 = self.check(gamma, c, &HostType::bit())?;
                let (a2, ta) = self.host(gamma, a, expect.clone())?;
                let eb = match expect {
                    Expect::Nothing | Expect::CircInput(_) => Expect::Type(ta.clone()),
                    e => e,
                };
                let (b2, tb) = self.host(gamma, b, eb)?;
                if ta != tb {
                    return mismatch("else branch", &ta, &tb);
                }
                Ok((H::If(Box::new(c2), Box::new(a2), Box::new(b2)), ta))
            }
            H::Prim(op, a, b) => match op {
                PrimOp::Add | PrimOp::Sub => {
                    let a2 = self.check(gamma, a, &HostType::Int)?;
                    let b2 = self.check(gamma, b, &HostType::Int)?;
                    Ok((H::Prim(*op, Box::new(a2), Box::new(b2)), HostType::Int))
                }
                PrimOp::Eq => {
                    let (a2, ta) = self.host(gamma, a, Expect::Nothing)?;
                    if !is_first_order(&ta) {
                        return mismatch("equality operand", &"a first-order value", &ta);
                    }
                    let b2 = self.check(gamma, b, &ta)?;
                    Ok((H::Prim(*op, Box::new(a2), Box::new(b2)), HostType::bit()))
                }
            },
            H::Fix(a, w1, w2) => {
                no_qlist_host(a)?;
                no_qlist_wire(w1)?;
                no_qlist_wire(w2)?;
                let f = HostType::arrow(a.clone(), HostType::Circ(w1.clone(), w2.clone()));
                Ok((t.clone(), HostType::arrow(HostType::arrow(f.clone(), f.clone()), f)))
            }
            H::GateFamily(name, idx) => {
                let idx2 = self.check(gamma, idx, &HostType::Int)?;
                let q = WireType::qubit();
                let w = match name.as_str() {
                    "CR" => WireType::tensor(q.clone(), q),
                    "R" => q,
                    other => return err(ErrorKind::Mismatch, format!("unknown gate family `{other}`")),
                };
                Ok((H::GateFamily(name.clone(), Box::new(idx2)), HostType::Circ(w.clone(), w)))
            }
        }
    }

    /// Checks one declaration against the globals added so far.
    pub fn decl(&mut self, d: &Decl) -> Result<CheckedDecl, TypeError> {
        let at = |mut e: TypeError| {
            e.span = d.span;
            e.message = format!("in `{}`: {}", d.name, e.message);
            e
        };
        let mut gamma = Vec::new();
        self.consumed.clear();
        let (body, ty) = if d.recursive {
            let Some(ty) = d.ty.clone() else {
                return Err(at(TypeError::new(ErrorKind::Mismatch, "recursive definitions need a type")));
            };
            if ty.circ_result().is_none() || !matches!(ty, HostType::Circ(..) | HostType::Arrow(..)) {
                return Err(at(TypeError::new(
                    ErrorKind::Mismatch,
                    format!("recursive definitions must produce circuits, found {ty}"),
                )));
            }
            no_qlist_host(&ty).map_err(at)?;
            gamma.push((d.name.clone(), ty.clone()));
            let b = self.check(&mut gamma, &d.body, &ty).map_err(at)?;
            let elaborated = Decl { body: b, ..d.clone() };
            let fixed = elaborated.desugared_body().ok_or_else(|| {
                at(TypeError::new(ErrorKind::Mismatch, format!("cannot form a fixed point at type {ty}")))
            })?;
            (fixed, ty)
        } else {
            match &d.ty {
                Some(ty) => {
                    no_qlist_host(ty).map_err(at)?;
                    (self.check(&mut gamma, &d.body, ty).map_err(at)?, ty.clone())
                }
                None => self.host(&mut gamma, &d.body, Expect::Nothing).map_err(at)?,
            }
        };
        Ok(CheckedDecl { name: d.name.clone(), ty, body, span: d.span })
    }
}

/// `Ω ⟹ p : W`, requiring `p` to use every wire of `Ω` exactly once.
pub fn match_pattern(omega: &WireContext, p: &Pattern) -> Result<WireType, TypeError> {
    let checker = Checker::default();
    let mut ctx = omega.clone();
    let w = checker.consume(&mut ctx, p)?;
    match ctx.first() {
        None => Ok(w),
        Some((n, _)) => err(ErrorKind::UnusedWire, format!("wire `{n}` is not covered by the pattern")),
    }
}

/// `Γ; Ω ⊢ C : W` with the default `int` cardinality and no gate
/// declarations. Sugar is accepted and checked through its elaboration.
pub fn check_circuit(gamma: &HostContext, omega: &WireContext, c: &CircuitTerm) -> Result<WireType, TypeError> {
    let mut g = gamma.clone();
    for (_, w) in omega {
        no_qlist_wire(w)?;
    }
    if let Some(dup) = duplicate_name(omega) {
        return err(ErrorKind::LinearityViolation, format!("wire `{dup}` occurs twice in the context"));
    }
    Checker::default().circuit(&mut g, omega.clone(), c).map(|(_, w)| w)
}

/// Elaborates `c` and returns the core circuit with its type.
pub fn elaborate_circuit(
    checker: &mut Checker,
    gamma: &HostContext,
    omega: &WireContext,
    c: &CircuitTerm,
) -> Result<(CircuitTerm, WireType), TypeError> {
    let mut g = gamma.clone();
    checker.consumed.clear();
    checker.circuit(&mut g, omega.clone(), c)
}

fn duplicate_name(omega: &WireContext) -> Option<&str> {
    let mut seen = BTreeSet::new();
    omega.iter().map(|(n, _)| n.as_str()).find(|n| !seen.insert(*n))
}

/// `Γ ⊢ t : A`.
pub fn check_host(gamma: &HostContext, t: &HostTerm) -> Result<HostType, TypeError> {
    let mut g = gamma.clone();
    Checker::default().host(&mut g, t, Expect::Nothing).map(|(_, a)| a)
}

/// Checks every declaration in order. Later declarations see the types of
/// earlier ones, including ones that failed but carried an annotation.
pub fn check_declarations(prog: &Program) -> Vec<Result<CheckedDecl, TypeError>> {
    let mut checker = Checker::for_program(prog);
    let mut out = Vec::new();
    for d in prog.decls() {
        let r = checker.decl(d);
        match &r {
            Ok(cd) => checker.add_global(&cd.name, cd.ty.clone()),
            Err(_) => {
                if let Some(ty) = &d.ty {
                    checker.add_global(&d.name, ty.clone());
                }
            }
        }
        out.push(r);
    }
    out
}

/// Checks the whole program, stopping at the first error.
pub fn check_program(prog: &Program) -> Result<CheckedProgram, TypeError> {
    let mut decls = Vec::new();
    let mut checker = Checker::for_program(prog);
    for d in prog.decls() {
        let cd = checker.decl(d)?;
        checker.add_global(&cd.name, cd.ty.clone());
        decls.push(cd);
    }
    Ok(CheckedProgram {
        decls,
        int_card: prog.int_card(),
        gates: prog.declared_gates().map(|(n, i, o)| (n.to_string(), i.clone(), o.clone())).collect(),
    })
}

/// Replaces every sugar constructor by its core expansion. Recursive
/// declarations keep their `rec` form.
pub fn elaborate_sugar(prog: &Program) -> Result<Program, TypeError> {
    let mut checker = Checker::for_program(prog);
    let mut items = Vec::new();
    for item in &prog.items {
        match item {
            Item::Def(d) => {
                let cd = checker.decl(d)?;
                checker.add_global(&cd.name, cd.ty.clone());
                let body = if d.recursive {
                    let mut gamma = vec![(d.name.clone(), cd.ty.clone())];
                    checker.check(&mut gamma, &d.body, &cd.ty)?
                } else {
                    cd.body
                };
                items.push(Item::Def(Decl { body, ty: Some(cd.ty), ..d.clone() }));
            }
            other => items.push(other.clone()),
        }
    }
    Ok(Program { items })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_circuit, parse_host_term, parse_program};

    fn q() -> WireType {
        WireType::qubit()
    }

    fn kind_of<T: fmt::Debug>(r: Result<T, TypeError>) -> ErrorKind {
        r.unwrap_err().kind
    }

    #[test]
    fn pattern_relation() {
        assert_eq!(match_pattern(&vec![], &Pattern::Unit).unwrap(), WireType::Unit);
        let omega = vec![("a".to_string(), q()), ("b".to_string(), WireType::bit())];
        let p = Pattern::pair(Pattern::wire("b"), Pattern::wire("a"));
        assert_eq!(match_pattern(&omega, &p).unwrap(), WireType::tensor(WireType::bit(), q()));
        assert_eq!(kind_of(match_pattern(&omega, &Pattern::wire("a"))), ErrorKind::UnusedWire);
        assert_eq!(kind_of(match_pattern(&omega, &Pattern::wire("c"))), ErrorKind::UnboundWire);
    }

    #[test]
    fn flip_has_type_bit() {
        let c = parse_circuit("a <- gate init0 (); a' <- gate H a; b <- gate meas a'; output b").unwrap();
        assert_eq!(check_circuit(&vec![], &vec![], &c).unwrap(), WireType::bit());
    }

    #[test]
    fn classical_control() {
        let c = parse_circuit(
            "x <- gate meas a; (x, b) <- gate (bit-control X) (x, b); () <- gate discard x; output b",
        )
        .unwrap();
        let omega = vec![("a".to_string(), q()), ("b".to_string(), q())];
        assert_eq!(check_circuit(&vec![], &omega, &c).unwrap(), q());
    }

    #[test]
    fn duplicated_wire_is_rejected() {
        let c = parse_circuit("b <- output a; output (a, b)").unwrap();
        let omega = vec![("a".to_string(), q())];
        assert_eq!(kind_of(check_circuit(&vec![], &omega, &c)), ErrorKind::LinearityViolation);
    }

    #[test]
    fn dropped_wire_is_rejected() {
        let c = parse_circuit("output a").unwrap();
        let omega = vec![("a".to_string(), q()), ("b".to_string(), q())];
        assert_eq!(kind_of(check_circuit(&vec![], &omega, &c)), ErrorKind::LinearityViolation);
    }

    #[test]
    fn run_needs_classical_output() {
        let t = parse_host_term("run (a <- gate init0 (); output a)").unwrap();
        assert_eq!(kind_of(check_host(&vec![], &t)), ErrorKind::NotClassical);
        let t = parse_host_term("run (a <- gate init0 (); b <- gate meas a; output b)").unwrap();
        assert_eq!(check_host(&vec![], &t).unwrap(), HostType::monadic(HostType::bit()));
    }

    #[test]
    fn effectful_unbox_is_rejected() {
        let t = parse_host_term(
            "lambda m : T(Circ(qubit, qubit)) . box q : qubit => unbox m q",
        )
        .unwrap();
        assert_eq!(kind_of(check_host(&vec![], &t)), ErrorKind::EffectfulUnbox);
    }

    #[test]
    fn comp_type() {
        let t = parse_host_term(
            "lambda c : Circ(qubit, bit) * Circ(bit, qubit) . \
             box w : qubit => x <- unbox (fst c) w; unbox (snd c) x",
        )
        .unwrap();
        let want = HostType::arrow(
            HostType::product(
                HostType::Circ(q(), WireType::bit()),
                HostType::Circ(WireType::bit(), q()),
            ),
            HostType::Circ(q(), q()),
        );
        assert_eq!(check_host(&vec![], &t).unwrap(), want);
    }

    #[test]
    fn unannotated_box_takes_type_from_unbox() {
        let c = parse_circuit("unbox (box x => y <- gate H x; output y) a").unwrap();
        let omega = vec![("a".to_string(), q())];
        assert_eq!(check_circuit(&vec![], &omega, &c).unwrap(), q());
    }

    #[test]
    fn recursive_hadamards() {
        let prog = parse_program(
            "rec Hs : int -> Circ(qubit, qubit) = lambda n : int . \
               if n = 0 then box q => output q \
               else box q => q' <- gate H q; unbox (Hs (n - 1)) q'",
        )
        .unwrap();
        let checked = check_program(&prog).unwrap();
        assert_eq!(checked.decls[0].ty, HostType::arrow(HostType::Int, HostType::Circ(q(), q())));
        assert!(matches!(checked.decls[0].body, HostTerm::App(..)));
    }

    #[test]
    fn qrun_elaborates_to_core() {
        let prog = parse_program("def main = qrun (a <- gate init0 (); b <- gate H a; output b)").unwrap();
        let e = elaborate_sugar(&prog).unwrap();
        let d = e.decls().next().unwrap();
        assert!(!d.body.has_sugar());
        assert_eq!(d.ty, Some(HostType::monadic(HostType::bit())));
    }

    #[test]
    fn qlift_elaborates_to_core() {
        let c = parse_circuit("x <= qlift a; output b").unwrap();
        let omega = vec![("a".to_string(), q()), ("b".to_string(), q())];
        let (core, w) = elaborate_circuit(&mut Checker::default(), &vec![], &omega, &c).unwrap();
        assert_eq!(w, q());
        assert!(!core.has_sugar());
    }

    #[test]
    fn gate_signature_errors() {
        let c = parse_circuit("b <- gate CNOT a; output b").unwrap();
        let omega = vec![("a".to_string(), q())];
        assert_eq!(kind_of(check_circuit(&vec![], &omega, &c)), ErrorKind::GateSignature);
    }

    #[test]
    fn pattern_shape_error() {
        let c = parse_circuit("(x, y) <- gate H a; output (x, y)").unwrap();
        let omega = vec![("a".to_string(), q())];
        assert_eq!(kind_of(check_circuit(&vec![], &omega, &c)), ErrorKind::PatternShape);
    }
}
