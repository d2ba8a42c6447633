//! Exact semantics: circuits as Heisenberg maps, host terms as values in
//! the (sub)distribution monad.
//!
//! A circuit under context `Ω` denotes a map whose target layout has one
//! factor per leaf of `Ω`, in context order, and whose source layout is the
//! leaf layout of its output type. Leaves carry identifiers so that pattern
//! matching and exchange become factor permutations.

mod sample;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{
    gate_denotation, gate_signature, state_to_distribution, wire_layout, AlgebraError,
    Distribution, FdAlgebra, Layout, Mat, SuperOp, ONE,
};
use crate::syntax::{CircuitTerm, HostTerm, Pattern, PrimOp, WireType, GateRef};
use crate::typecheck::{CheckedProgram, WireContext};

pub use sample::{sample, Outcome};

/// Default element-space dimension cap (six qubits).
pub const DEFAULT_MAX_DIM: usize = 4096;
pub const DEFAULT_FUEL: u64 = 10_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// Total maps; recursion is rejected.
    #[default]
    Cpu,
    /// Subunital maps; recursion unfolds with fuel and bottoms out at zero.
    Cpsu,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub mode: Mode,
    pub fuel: u64,
    pub max_dim: usize,
    /// Cardinality of the `int` wire base.
    pub int_card: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            mode: Mode::Cpu,
            fuel: DEFAULT_FUEL,
            max_dim: DEFAULT_MAX_DIM,
            int_card: crate::syntax::DEFAULT_INT_CARD,
        }
    }
}

impl Config {
    pub fn cpsu() -> Self {
        Config { mode: Mode::Cpsu, ..Config::default() }
    }

    /// Reads the dimension cap from `EWIREC_MAX_DIM` when set.
    pub fn with_env_max_dim(mut self) -> Self {
        if let Some(n) = std::env::var("EWIREC_MAX_DIM").ok().and_then(|v| v.parse().ok()) {
            self.max_dim = n;
        }
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DenoteError {
    #[error("element dimension {dim} exceeds the cap of {cap}")]
    ResourceLimit { dim: usize, cap: usize },
    #[error("recursion needs the subunital model; rerun with --mode cpsu")]
    FixInCpu,
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("value {value} does not fit the classical type of size {card}")]
    OutOfRange { value: i64, card: usize },
    #[error("integer overflow")]
    Overflow,
    #[error("runtime type error: {0}")]
    Dynamic(String),
    #[error("no declaration named `{0}`")]
    NoEntry(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A boxed circuit: its signature and its Heisenberg map `⟦out⟧ → ⟦in⟧`.
#[derive(Clone, Debug, PartialEq)]
pub struct CircValue {
    pub input: WireType,
    pub output: WireType,
    pub op: SuperOp,
}

#[derive(Debug)]
pub struct Closure<'a> {
    param: &'a str,
    body: &'a HostTerm,
    env: Env<'a>,
}

#[derive(Clone, Debug)]
pub enum HostValue<'a> {
    Unit,
    Pair(Arc<HostValue<'a>>, Arc<HostValue<'a>>),
    Classical { base: Arc<str>, card: usize, value: usize },
    Int(i64),
    Closure(Arc<Closure<'a>>),
    Circ(Arc<CircValue>),
    Dist(Arc<Distribution<HostValue<'a>>>),
    /// The combinator `Y[A, W1, W2]` itself.
    Fix(&'a WireType, &'a WireType),
    /// `Y f`.
    FixOf(Arc<(HostValue<'a>, &'a WireType, &'a WireType)>),
}

impl PartialEq for HostValue<'_> {
    fn eq(&self, other: &Self) -> bool {
        use HostValue as V;
        match (self, other) {
            (V::Unit, V::Unit) => true,
            (V::Pair(a, b), V::Pair(c, d)) => a == c && b == d,
            (
                V::Classical { base: b1, card: c1, value: v1 },
                V::Classical { base: b2, card: c2, value: v2 },
            ) => b1 == b2 && c1 == c2 && v1 == v2,
            (V::Int(a), V::Int(b)) => a == b,
            (V::Closure(a), V::Closure(b)) => Arc::ptr_eq(a, b),
            (V::Circ(a), V::Circ(b)) => Arc::ptr_eq(a, b),
            (V::Dist(a), V::Dist(b)) => Arc::ptr_eq(a, b),
            (V::Fix(a, b), V::Fix(c, d)) => a == c && b == d,
            (V::FixOf(a), V::FixOf(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Display for HostValue<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HostValue::Unit => write!(f, "()"),
            HostValue::Pair(a, b) => write!(f, "({a}, {b})"),
            HostValue::Classical { value, .. } => write!(f, "{value}"),
            HostValue::Int(n) => write!(f, "{n}"),
            HostValue::Closure(_) | HostValue::Fix(..) | HostValue::FixOf(_) => write!(f, "<function>"),
            HostValue::Circ(c) => write!(f, "<circuit {} -> {}>", c.input, c.output),
            HostValue::Dist(_) => write!(f, "<distribution>"),
        }
    }
}

impl<'a> HostValue<'a> {
    pub fn bit(b: bool) -> Self {
        HostValue::Classical { base: "bit".into(), card: 2, value: b as usize }
    }

    pub fn as_circ(&self) -> Option<&Arc<CircValue>> {
        match self {
            HostValue::Circ(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_dist(&self) -> Option<&Distribution<HostValue<'a>>> {
        match self {
            HostValue::Dist(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug)]
struct EnvNode<'a> {
    name: &'a str,
    value: HostValue<'a>,
    next: Env<'a>,
}

/// Persistent host environment.
#[derive(Clone, Debug, Default)]
pub struct Env<'a>(Option<Arc<EnvNode<'a>>>);

impl<'a> Env<'a> {
    pub fn empty() -> Self {
        Env(None)
    }

    pub fn bind(&self, name: &'a str, value: HostValue<'a>) -> Self {
        Env(Some(Arc::new(EnvNode { name, value, next: self.clone() })))
    }

    pub fn get(&self, name: &str) -> Option<&HostValue<'a>> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if node.name == name {
                return Some(&node.value);
            }
            cur = &node.next.0;
        }
        None
    }
}

/// `⟦W⟧` as a single algebra.
pub fn denote_wire(w: &WireType) -> Result<FdAlgebra, DenoteError> {
    Ok(wire_layout(w)?.algebra())
}

fn classical_value<'a>(leaf: &WireType, i: usize) -> HostValue<'a> {
    match leaf {
        WireType::Classical { name, .. } if name == "int" => HostValue::Int(i as i64),
        WireType::Classical { name, card } => {
            HostValue::Classical { base: name.as_str().into(), card: *card, value: i }
        }
        _ => unreachable!("classical leaves only"),
    }
}

/// All values of a classical type, lexicographically; the order matches the
/// block order of `⟦V⟧`.
pub fn enumerate_classical<'a>(v: &WireType) -> Result<Vec<HostValue<'a>>, DenoteError> {
    match v {
        WireType::Unit => Ok(vec![HostValue::Unit]),
        WireType::Classical { card, .. } => Ok((0..*card).map(|i| classical_value(v, i)).collect()),
        WireType::Tensor(a, b) => {
            let (xs, ys) = (enumerate_classical(a)?, enumerate_classical(b)?);
            let mut out = Vec::with_capacity(xs.len() * ys.len());
            for x in &xs {
                for y in &ys {
                    out.push(HostValue::Pair(Arc::new(x.clone()), Arc::new(y.clone())));
                }
            }
            Ok(out)
        }
        _ => Err(DenoteError::Algebra(AlgebraError::NonClassicalSource)),
    }
}

/// Reads a closed state on a classical type as a distribution on values.
pub fn run_circuit<'a>(op: &SuperOp, v: &WireType) -> Result<Distribution<HostValue<'a>>, DenoteError> {
    let d = state_to_distribution(op)?;
    let values = enumerate_classical(v)?;
    Ok(d.map(|&i| values[i].clone()))
}

#[derive(Clone, Debug)]
struct Leaf {
    id: usize,
    alg: FdAlgebra,
}

#[derive(Clone, Debug)]
struct Entry {
    name: String,
    ty: WireType,
    leaves: Vec<Leaf>,
}

fn ids(ctx: &[Entry]) -> Vec<usize> {
    ctx.iter().flat_map(|e| e.leaves.iter().map(|l| l.id)).collect()
}

fn leaf_ids(leaves: &[Leaf]) -> Vec<usize> {
    leaves.iter().map(|l| l.id).collect()
}

/// Reorders target factors labelled `from` into the order `to`.
fn permute_target(op: SuperOp, from: &[usize], to: &[usize]) -> SuperOp {
    if from == to {
        return op;
    }
    let order: Vec<usize> = to
        .iter()
        .map(|t| from.iter().position(|f| f == t).expect("same leaf set"))
        .collect();
    op.reorder_target(&order)
}

/// Evaluator state for one top-level evaluation.
pub struct Evaluator {
    config: Config,
    fuel: u64,
    next_leaf: usize,
}

impl Evaluator {
    pub fn new(config: Config) -> Self {
        Evaluator { fuel: config.fuel, config, next_leaf: 0 }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    fn guard(&self, dim: usize) -> Result<(), DenoteError> {
        if dim > self.config.max_dim {
            return Err(DenoteError::ResourceLimit { dim, cap: self.config.max_dim });
        }
        Ok(())
    }

    fn guard_op(&self, op: &SuperOp) -> Result<(), DenoteError> {
        self.guard(op.source.element_dim())?;
        self.guard(op.target.element_dim())
    }

    fn fresh_leaves(&mut self, w: &WireType) -> Result<Vec<Leaf>, DenoteError> {
        let layout = wire_layout(w)?;
        Ok(layout
            .factors()
            .iter()
            .map(|alg| {
                self.next_leaf += 1;
                Leaf { id: self.next_leaf, alg: alg.clone() }
            })
            .collect())
    }

    /// Binds `p : w` using the given leaves, in order.
    fn bind(ctx: &mut Vec<Entry>, p: &Pattern, w: &WireType, leaves: &mut std::vec::IntoIter<Leaf>) {
        match (p, w) {
            (Pattern::Unit, _) => {}
            (Pattern::Wire(n), _) => {
                let k = w.leaves().len();
                ctx.push(Entry { name: n.clone(), ty: w.clone(), leaves: leaves.take(k).collect() });
            }
            (Pattern::Pair(a, b), WireType::Tensor(x, y)) => {
                Self::bind(ctx, a, x, leaves);
                Self::bind(ctx, b, y, leaves);
            }
            _ => unreachable!("pattern shape checked by the typechecker"),
        }
    }

    /// Removes the wires of `p` from `ctx`, returning their leaves in
    /// pattern order and the pattern's type.
    fn take(ctx: &mut Vec<Entry>, p: &Pattern) -> Result<(Vec<Leaf>, WireType), DenoteError> {
        match p {
            Pattern::Unit => Ok((Vec::new(), WireType::Unit)),
            Pattern::Wire(n) => {
                let i = ctx
                    .iter()
                    .position(|e| &e.name == n)
                    .ok_or_else(|| DenoteError::Dynamic(format!("wire `{n}` is not in scope")))?;
                let e = ctx.remove(i);
                Ok((e.leaves, e.ty))
            }
            Pattern::Pair(a, b) => {
                let (mut la, ta) = Self::take(ctx, a)?;
                let (lb, tb) = Self::take(ctx, b)?;
                la.extend(lb);
                Ok((la, WireType::tensor(ta, tb)))
            }
        }
    }

    fn entries(&mut self, omega: &WireContext) -> Result<Vec<Entry>, DenoteError> {
        omega
            .iter()
            .map(|(n, w)| Ok(Entry { name: n.clone(), ty: w.clone(), leaves: self.fresh_leaves(w)? }))
            .collect()
    }

    /// `⟦Γ; Ω ⊢ C : W⟧` with target factors in the leaf order of `Ω`.
    pub fn denote_circuit<'a>(
        &mut self,
        env: &Env<'a>,
        omega: &WireContext,
        c: &'a CircuitTerm,
    ) -> Result<(SuperOp, WireType), DenoteError> {
        let ctx = self.entries(omega)?;
        self.den(env, ctx, c)
    }

    fn den<'a>(
        &mut self,
        env: &Env<'a>,
        mut ctx: Vec<Entry>,
        c: &'a CircuitTerm,
    ) -> Result<(SuperOp, WireType), DenoteError> {
        let ctx_ids = ids(&ctx);
        match c {
            CircuitTerm::Output(p) => {
                let (leaves, w) = Self::take(&mut ctx, p)?;
                let layout = Layout::new(leaves.iter().map(|l| l.alg.clone()).collect());
                self.guard(layout.element_dim())?;
                let op = SuperOp::identity(layout);
                Ok((permute_target(op, &leaf_ids(&leaves), &ctx_ids), w))
            }
            CircuitTerm::Gate(p2, g, p1, rest) => {
                let (l1, w1) = Self::take(&mut ctx, p1)?;
                let gate = gate_denotation(g, &w1)?;
                let w2 = gate_signature(g, &w1)?;
                let rest_ids = ids(&ctx);
                let l2 = self.fresh_leaves(&w2)?;
                let mut inner = ctx;
                Self::bind(&mut inner, p2, &w2, &mut l2.clone().into_iter());
                let inner_ids = ids(&inner);
                let (h, w) = self.den(env, inner, rest)?;
                let mut order = leaf_ids(&l2);
                order.extend(&rest_ids);
                let h = permute_target(h, &inner_ids, &order);
                let r = SuperOp::then_local(&h, &gate)?;
                self.guard_op(&r)?;
                let mut have = leaf_ids(&l1);
                have.extend(&rest_ids);
                Ok((permute_target(r, &have, &ctx_ids), w))
            }
            CircuitTerm::Compose(p, first, rest) => {
                let free = first.free_wires();
                let (ctx1, mut ctx2): (Vec<Entry>, Vec<Entry>) =
                    ctx.into_iter().partition(|e| free.contains(&e.name));
                let (ids1, ids2) = (ids(&ctx1), ids(&ctx2));
                let (h1, w1) = self.den(env, ctx1, first)?;
                let l = self.fresh_leaves(&w1)?;
                Self::bind(&mut ctx2, p, &w1, &mut l.clone().into_iter());
                let inner_ids = ids(&ctx2);
                let (h2, w) = self.den(env, ctx2, rest)?;
                let mut order = leaf_ids(&l);
                order.extend(&ids2);
                let h2 = permute_target(h2, &inner_ids, &order);
                let r = SuperOp::then_local(&h2, &h1)?;
                self.guard_op(&r)?;
                let mut have = ids1;
                have.extend(&ids2);
                Ok((permute_target(r, &have, &ctx_ids), w))
            }
            CircuitTerm::UnitElim(p, rest) => {
                Self::take(&mut ctx, p)?;
                self.den(env, ctx, rest)
            }
            CircuitTerm::PairElim(w1, w2, p, rest) => {
                let (leaves, w) = Self::take(&mut ctx, p)?;
                let pat = Pattern::pair(Pattern::wire(w1.as_str()), Pattern::wire(w2.as_str()));
                Self::bind(&mut ctx, &pat, &w, &mut leaves.into_iter());
                let inner_ids = ids(&ctx);
                let (h, wout) = self.den(env, ctx, rest)?;
                Ok((permute_target(h, &inner_ids, &ctx_ids), wout))
            }
            CircuitTerm::Unbox(t, p) => {
                let v = self.eval(env, t)?;
                let circ = v
                    .as_circ()
                    .ok_or_else(|| DenoteError::Dynamic(format!("unbox expects a circuit, got {v}")))?
                    .clone();
                let (leaves, _) = Self::take(&mut ctx, p)?;
                let op = circ.op.clone();
                Ok((permute_target(op, &leaf_ids(&leaves), &ctx_ids), circ.output.clone()))
            }
            CircuitTerm::Lift(x, p, rest) => {
                let (leaves, v) = Self::take(&mut ctx, p)?;
                let values = enumerate_classical(&v)?;
                let rest_ids = ids(&ctx);
                let depends = rest.host_free_vars().contains(x.as_str());
                let mut branches: Vec<(SuperOp, WireType)> = Vec::with_capacity(values.len());
                for val in &values {
                    if !depends && !branches.is_empty() {
                        branches.push(branches[0].clone());
                        continue;
                    }
                    let env2 = env.bind(x, val.clone());
                    branches.push(self.den(&env2, ctx.clone(), rest)?);
                }
                let (first, w) = branches[0].clone();
                let rd = first.target.element_dim();
                let cols = first.matrix.cols;
                let k = values.len();
                self.guard(k * rd)?;
                let mut data = Vec::with_capacity(k * rd * cols);
                for (op, _) in &branches {
                    if op.source != first.source {
                        return Err(DenoteError::Dynamic("lift branches disagree on their output".into()));
                    }
                    data.extend_from_slice(&op.matrix.data);
                }
                let mut factors: Vec<FdAlgebra> = leaves.iter().map(|l| l.alg.clone()).collect();
                factors.extend(first.target.factors().iter().cloned());
                let op = SuperOp::new(first.source.clone(), Layout::new(factors), Mat { rows: k * rd, cols, data })?;
                let mut have = leaf_ids(&leaves);
                have.extend(&rest_ids);
                Ok((permute_target(op, &have, &ctx_ids), w))
            }
            CircuitTerm::Init(t) => {
                let v = self.eval(env, t)?;
                let (w, idx) = self.classical_index(&v)?;
                let layout = wire_layout(&w)?;
                let mut m = Mat::zeros(1, layout.element_dim());
                m.set(0, idx, ONE);
                let op = SuperOp::new(layout, Layout::scalar(), m)?;
                Ok((op, w))
            }
            CircuitTerm::QLift(..) => Err(DenoteError::Dynamic("qlift must be elaborated first".into())),
        }
    }

    /// The wire type of a first-order value and its index in
    /// [`enumerate_classical`] order.
    fn classical_index(&self, v: &HostValue<'_>) -> Result<(WireType, usize), DenoteError> {
        match v {
            HostValue::Unit => Ok((WireType::Unit, 0)),
            HostValue::Classical { base, card, value } => {
                Ok((WireType::Classical { name: base.to_string(), card: *card }, *value))
            }
            HostValue::Int(n) => {
                let card = self.config.int_card;
                if *n < 0 || *n as u64 >= card as u64 {
                    return Err(DenoteError::OutOfRange { value: *n, card });
                }
                Ok((WireType::int(card), *n as usize))
            }
            HostValue::Pair(a, b) => {
                let (wa, ia) = self.classical_index(a)?;
                let (wb, ib) = self.classical_index(b)?;
                let nb = wb.classical_size().expect("classical");
                Ok((WireType::tensor(wa, wb), ia * nb + ib))
            }
            other => Err(DenoteError::Dynamic(format!("cannot initialize a wire from {other}"))),
        }
    }

    fn int(v: &HostValue<'_>) -> Result<i64, DenoteError> {
        match v {
            HostValue::Int(n) => Ok(*n),
            other => Err(DenoteError::Dynamic(format!("expected an integer, got {other}"))),
        }
    }

    pub fn apply<'a>(&mut self, f: HostValue<'a>, a: HostValue<'a>) -> Result<HostValue<'a>, DenoteError> {
        match f {
            HostValue::Closure(c) => {
                let env = c.env.bind(c.param, a);
                self.eval(&env, c.body)
            }
            HostValue::Fix(w1, w2) => Ok(HostValue::FixOf(Arc::new((a, w1, w2)))),
            HostValue::FixOf(fx) => {
                let (_, w1, w2) = *fx;
                if self.fuel == 0 {
                    let op = SuperOp::zero(wire_layout(w2)?, wire_layout(w1)?);
                    return Ok(HostValue::Circ(Arc::new(CircValue {
                        input: w1.clone(),
                        output: w2.clone(),
                        op,
                    })));
                }
                self.fuel -= 1;
                let step = self.apply(fx.0.clone(), HostValue::FixOf(fx.clone()))?;
                self.apply(step, a)
            }
            other => Err(DenoteError::Dynamic(format!("cannot apply {other}"))),
        }
    }

    /// Call-by-value evaluation of a checked host term.
    pub fn eval<'a>(&mut self, env: &Env<'a>, t: &'a HostTerm) -> Result<HostValue<'a>, DenoteError> {
        use HostTerm as H;
        match t {
            H::Var(x) => env.get(x).cloned().ok_or_else(|| DenoteError::Unbound(x.clone())),
            H::Lambda(x, _, body) => Ok(HostValue::Closure(Arc::new(Closure {
                param: x,
                body,
                env: env.clone(),
            }))),
            H::App(f, a) => {
                let fv = self.eval(env, f)?;
                let av = self.eval(env, a)?;
                self.apply(fv, av)
            }
            H::UnitVal => Ok(HostValue::Unit),
            H::Pair(a, b) => {
                let av = self.eval(env, a)?;
                let bv = self.eval(env, b)?;
                Ok(HostValue::Pair(Arc::new(av), Arc::new(bv)))
            }
            H::Proj1(p) | H::Proj2(p) => match self.eval(env, p)? {
                HostValue::Pair(a, b) => {
                    Ok(if matches!(t, H::Proj1(_)) { (*a).clone() } else { (*b).clone() })
                }
                other => Err(DenoteError::Dynamic(format!("cannot project from {other}"))),
            },
            H::Return(a) => Ok(HostValue::Dist(Arc::new(Distribution::point(self.eval(env, a)?)))),
            H::LetBind(m, x, body) => {
                let mv = self.eval(env, m)?;
                let d = mv
                    .as_dist()
                    .ok_or_else(|| DenoteError::Dynamic(format!("let expects a computation, got {mv}")))?
                    .clone();
                let out = d.bind(|v| {
                    let r = self.eval(&env.bind(x, v.clone()), body)?;
                    r.as_dist()
                        .cloned()
                        .ok_or_else(|| DenoteError::Dynamic(format!("let body must be a computation, got {r}")))
                })?;
                Ok(HostValue::Dist(Arc::new(out)))
            }
            H::Box(p, w, body) => {
                let w = w
                    .as_ref()
                    .ok_or_else(|| DenoteError::Dynamic("box without a type; typecheck first".into()))?;
                let l = self.fresh_leaves(w)?;
                let mut ctx = Vec::new();
                Self::bind(&mut ctx, p, w, &mut l.clone().into_iter());
                let inner = ids(&ctx);
                let (op, wout) = self.den(env, ctx, body)?;
                let op = permute_target(op, &inner, &leaf_ids(&l));
                Ok(HostValue::Circ(Arc::new(CircValue { input: w.clone(), output: wout, op })))
            }
            H::Run(c) => {
                let (op, v) = self.den(env, Vec::new(), c)?;
                Ok(HostValue::Dist(Arc::new(run_circuit(&op, &v)?)))
            }
            H::ClassicalLit { base, card, value } => {
                Ok(HostValue::Classical { base: base.as_str().into(), card: *card, value: *value })
            }
            H::Int(n) => Ok(HostValue::Int(*n)),
            H::If(c, a, b) => match self.eval(env, c)? {
                HostValue::Classical { value, .. } => self.eval(env, if value != 0 { a } else { b }),
                other => Err(DenoteError::Dynamic(format!("if expects a bit, got {other}"))),
            },
            H::Prim(op, a, b) => {
                let av = self.eval(env, a)?;
                let bv = self.eval(env, b)?;
                match op {
                    PrimOp::Add => Self::int(&av)?.checked_add(Self::int(&bv)?).map(HostValue::Int).ok_or(DenoteError::Overflow),
                    PrimOp::Sub => Self::int(&av)?.checked_sub(Self::int(&bv)?).map(HostValue::Int).ok_or(DenoteError::Overflow),
                    PrimOp::Eq => Ok(HostValue::bit(av == bv)),
                }
            }
            H::Fix(_, w1, w2) => {
                if self.config.mode == Mode::Cpu {
                    return Err(DenoteError::FixInCpu);
                }
                Ok(HostValue::Fix(w1, w2))
            }
            H::GateFamily(name, idx) => {
                let n = Self::int(&self.eval(env, idx)?)?;
                let q = WireType::qubit();
                let w = if name == "CR" { WireType::tensor(q.clone(), q) } else { q };
                let op = gate_denotation(&GateRef::new(format!("{name} {n}")), &w)?;
                Ok(HostValue::Circ(Arc::new(CircValue { input: w.clone(), output: w, op })))
            }
            H::QRun(_) => Err(DenoteError::Dynamic("qrun must be elaborated first".into())),
        }
    }

    /// Binds the declarations needed by `name`, in program order, and
    /// evaluates `name`.
    pub fn eval_decl<'a>(&mut self, prog: &'a CheckedProgram, name: &str) -> Result<HostValue<'a>, DenoteError> {
        let pos = prog
            .decls
            .iter()
            .position(|d| d.name == name)
            .ok_or_else(|| DenoteError::NoEntry(name.to_string()))?;
        let mut needed = BTreeSet::from([name.to_string()]);
        for d in prog.decls[..=pos].iter().rev() {
            if needed.contains(&d.name) {
                needed.extend(d.body.free_vars());
            }
        }
        let mut env = Env::empty();
        for d in &prog.decls[..=pos] {
            if needed.contains(&d.name) {
                let v = self.eval(&env, &d.body)?;
                env = env.bind(&d.name, v);
            }
        }
        Ok(env.get(name).expect("just bound").clone())
    }
}

/// Runs `f` on a thread with a large stack; deep recursion in circuit
/// definitions recurses in the evaluator too.
pub fn with_large_stack<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(1 << 30)
            .spawn_scoped(s, f)
            .expect("spawn evaluator thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

/// Evaluates a declaration of a checked program with the given settings.
pub fn eval_decl<'a>(prog: &'a CheckedProgram, name: &str, config: &Config) -> Result<HostValue<'a>, DenoteError> {
    let mut cfg = config.clone();
    cfg.int_card = prog.int_card;
    with_large_stack(|| Evaluator::new(cfg).eval_decl(prog, name))
}

/// `⟦Γ; Ω ⊢ C⟧` for a closed-host circuit, with fresh fuel.
pub fn denote_circuit(omega: &WireContext, c: &CircuitTerm, config: &Config) -> Result<SuperOp, DenoteError> {
    with_large_stack(|| {
        Evaluator::new(config.clone()).denote_circuit(&Env::empty(), omega, c).map(|(op, _)| op)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{is_cp, is_subunital, is_unital};
    use crate::syntax::{parse_circuit, parse_program};
    use crate::typecheck::{check_program, elaborate_circuit, Checker};

    fn core(omega: &WireContext, src: &str) -> CircuitTerm {
        let c = parse_circuit(src).unwrap();
        elaborate_circuit(&mut Checker::default(), &vec![], omega, &c).unwrap().0
    }

    #[test]
    fn flip_is_uniform() {
        let c = core(&vec![], "a <- gate init0 (); a' <- gate H a; b <- gate meas a'; output b");
        let op = denote_circuit(&vec![], &c, &Config::default()).unwrap();
        let d = run_circuit(&op, &WireType::bit()).unwrap();
        assert!((d.weight(&HostValue::bit(false)) - 0.5).abs() < 1e-12);
        assert!((d.weight(&HostValue::bit(true)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn enumerate_is_lexicographic() {
        let bb = WireType::tensor(WireType::bit(), WireType::bit());
        let vals: Vec<String> = enumerate_classical(&bb).unwrap().iter().map(|v| v.to_string()).collect();
        assert_eq!(vals, ["(0, 0)", "(0, 1)", "(1, 0)", "(1, 1)"]);
        assert_eq!(enumerate_classical(&WireType::Unit).unwrap(), vec![HostValue::Unit]);
    }

    #[test]
    fn exchange_is_a_permutation() {
        let omega = vec![("a".to_string(), WireType::qubit()), ("b".to_string(), WireType::bit())];
        let c = core(&omega, "output (b, a)");
        let op = denote_circuit(&omega, &c, &Config::default()).unwrap();
        assert_eq!(op.source.factors()[0], FdAlgebra::classical(2));
        assert_eq!(op.target.factors()[0], FdAlgebra::matrix(2));
        assert!(is_cp(&op, 1e-9) && is_unital(&op, 1e-9));
    }

    #[test]
    fn lift_then_init_is_identity() {
        let omega = vec![("a".to_string(), WireType::bit())];
        let c = core(&omega, "x <= lift a; init x");
        let op = denote_circuit(&omega, &c, &Config::default()).unwrap();
        assert_eq!(op.matrix, Mat::identity(2));
    }

    fn hs_program() -> CheckedProgram {
        let prog = parse_program(
            "rec Hs : int -> Circ(qubit, qubit) = lambda n : int . \
               if n = 0 then box q => output q \
               else box q => q' <- gate H q; unbox (Hs (n - 1)) q'\n\
             def h3 = Hs 3\n\
             def hneg = Hs (-1)",
        )
        .unwrap();
        check_program(&prog).unwrap()
    }

    #[test]
    fn hadamard_family() {
        let p = hs_program();
        let cfg = Config::cpsu();
        let h3 = eval_decl(&p, "h3", &cfg).unwrap();
        let op = &h3.as_circ().unwrap().op;
        let h = gate_denotation(&GateRef::new("H"), &WireType::qubit()).unwrap();
        assert!(op.distance(&h).unwrap() < 1e-12);
        let neg = eval_decl(&p, "hneg", &Config { fuel: 50, ..cfg }).unwrap();
        let z = &neg.as_circ().unwrap().op;
        assert_eq!(z.matrix.max_abs(), 0.0);
        assert!(is_subunital(z, 1e-9));
        assert_eq!(eval_decl(&p, "h3", &Config::default()), Err(DenoteError::FixInCpu));
    }

    #[test]
    fn int_range_is_checked() {
        let prog = parse_program("classical int 4\ndef main = run (init 7)").unwrap();
        let p = check_program(&prog).unwrap();
        assert_eq!(
            eval_decl(&p, "main", &Config::default()),
            Err(DenoteError::OutOfRange { value: 7, card: 4 })
        );
    }

    #[test]
    fn resource_cap() {
        let omega: WireContext = (0..3).map(|i| (format!("q{i}"), WireType::qubit())).collect();
        let c = core(&omega, "output (q0, (q1, q2))");
        let cfg = Config { max_dim: 16, ..Config::default() };
        assert!(matches!(denote_circuit(&omega, &c, &cfg), Err(DenoteError::ResourceLimit { .. })));
    }

    #[test]
    fn let_bind_pushes_forward() {
        let prog = parse_program(
            "def flip = run (a <- gate init0 (); a' <- gate H a; b <- gate meas a'; output b)\n\
             def main = let x <- flip in let y <- flip in return (x, y)",
        )
        .unwrap();
        let p = check_program(&prog).unwrap();
        let v = eval_decl(&p, "main", &Config::default()).unwrap();
        let d = v.as_dist().unwrap();
        assert_eq!(d.entries.len(), 4);
        for (_, w) in &d.entries {
            assert!((w - 0.25).abs() < 1e-12);
        }
    }
}
