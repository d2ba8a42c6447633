//! Size-indexed instantiation of `qlist` programs.
//!
//! A declaration whose type mentions `qlist` is specialised at each list
//! length it is used with: `fourier` at length 3 becomes `fourier@3`, with
//! `qlist` read as `qubit ⊗ (qubit ⊗ (qubit ⊗ I))`. The list gates become
//! rewirings, `isempty` becomes a constant `init`, and lifts of wires whose
//! value is statically known are folded, so that `if` on an emptiness test
//! selects a single branch.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::algebra::gate_signature;
use crate::syntax::{
    fresh_name, lift_type, subst_host_in_circuit, unlift_type, CircuitTerm, Decl, GateRef,
    HostTerm, HostType, Item, Pattern, PrimOp, Program, WireType,
};
use crate::typecheck::check_declarations;

/// Gates on `qlist` that are replaced by structural circuits.
pub const LIST_GATES: [&str; 4] = ["isempty", "headtail", "cons", "nil"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonoError {
    #[error("in `{decl}`: headtail of an empty list")]
    EmptyHead { decl: String },
    #[error("in `{decl}`: cannot determine a list length for {what}")]
    UnknownLength { decl: String, what: String },
    #[error("in `{decl}`: {message}")]
    Unsupported { decl: String, message: String },
    #[error("`{0}` has no type annotation")]
    Unannotated(String),
}

/// What is statically known about the value on a wire.
#[derive(Clone, Debug, PartialEq)]
enum Abs {
    Unit,
    Pair(Box<Abs>, Box<Abs>),
    /// A leaf wire, with its value index when known.
    Leaf(WireType, Option<usize>),
    List(usize),
}

impl Abs {
    fn of_type(w: &WireType, k: usize) -> Abs {
        match w {
            WireType::Unit => Abs::Unit,
            WireType::QList => Abs::List(k),
            WireType::Tensor(a, b) => Abs::Pair(Box::new(Abs::of_type(a, k)), Box::new(Abs::of_type(b, k))),
            leaf => Abs::Leaf(leaf.clone(), None),
        }
    }

    fn ty(&self) -> WireType {
        match self {
            Abs::Unit => WireType::Unit,
            Abs::Pair(a, b) => WireType::tensor(a.ty(), b.ty()),
            Abs::Leaf(w, _) => w.clone(),
            Abs::List(k) => WireType::qlist_of(*k),
        }
    }

    fn split(self) -> Option<(Abs, Abs)> {
        match self {
            Abs::Pair(a, b) => Some((*a, *b)),
            Abs::List(k) if k > 0 => Some((Abs::Leaf(WireType::qubit(), None), Abs::List(k - 1))),
            _ => None,
        }
    }

    fn list_len(&self) -> Option<usize> {
        match self {
            Abs::List(k) => Some(*k),
            Abs::Unit => Some(0),
            Abs::Pair(h, t) if h.ty() == WireType::qubit() => Some(1 + t.list_len()?),
            _ => None,
        }
    }

    /// The host literal for a fully known classical value.
    fn literal(&self) -> Option<HostTerm> {
        match self {
            Abs::Unit => Some(HostTerm::UnitVal),
            Abs::Pair(a, b) => Some(HostTerm::pair(a.literal()?, b.literal()?)),
            Abs::Leaf(WireType::Classical { name, card }, Some(v)) => Some(if name == "int" {
                HostTerm::Int(*v as i64)
            } else {
                HostTerm::ClassicalLit { base: name.clone(), card: *card, value: *v }
            }),
            _ => None,
        }
    }
}

/// Finds the length given to the `qlist` positions of `w` by `a`.
fn find_length(w: &WireType, a: &Abs) -> Option<usize> {
    match w {
        WireType::QList => a.list_len(),
        WireType::Tensor(x, y) => {
            let (ax, ay) = a.clone().split()?;
            find_length(x, &ax).or_else(|| find_length(y, &ay))
        }
        _ => None,
    }
}

fn circ_of(ty: &HostType) -> Option<(&WireType, &WireType)> {
    match ty {
        HostType::Circ(a, b) => Some((a, b)),
        HostType::Arrow(_, r) => circ_of(r),
        _ => None,
    }
}

fn instantiate(ty: &HostType, k: usize) -> HostType {
    ty.instantiate_qlist(&WireType::qlist_of(k))
}

/// Folds arithmetic, equality and `if` on literals.
pub fn fold(t: &HostTerm) -> HostTerm {
    use HostTerm as H;
    match t {
        H::Prim(op, a, b) => {
            let (a, b) = (fold(a), fold(b));
            let folded = match (op, &a, &b) {
                (PrimOp::Add, H::Int(x), H::Int(y)) => x.checked_add(*y).map(H::Int),
                (PrimOp::Sub, H::Int(x), H::Int(y)) => x.checked_sub(*y).map(H::Int),
                (PrimOp::Eq, H::Int(x), H::Int(y)) => Some(H::bit(usize::from(x == y))),
                (PrimOp::Eq, H::ClassicalLit { value: x, .. }, H::ClassicalLit { value: y, .. }) => {
                    Some(H::bit(usize::from(x == y)))
                }
                _ => None,
            };
            folded.unwrap_or_else(|| H::Prim(*op, Box::new(a), Box::new(b)))
        }
        H::If(c, a, b) => match fold(c) {
            H::ClassicalLit { value, .. } => fold(if value == 1 { a } else { b }),
            c => H::If(Box::new(c), Box::new(fold(a)), Box::new(fold(b))),
        },
        H::App(f, a) => H::app(fold(f), fold(a)),
        H::Pair(a, b) => H::pair(fold(a), fold(b)),
        H::GateFamily(g, a) => H::GateFamily(g.clone(), Box::new(fold(a))),
        other => other.clone(),
    }
}

type WireEnv = BTreeMap<String, Abs>;
type HostEnv = Vec<(String, HostType)>;

struct Mono<'p> {
    int_card: usize,
    list_decls: HashMap<&'p str, &'p Decl>,
    globals: HashMap<String, HostType>,
    gates: HashMap<String, (WireType, WireType)>,
    done: HashMap<(String, usize), Abs>,
    in_progress: BTreeSet<(String, usize)>,
    self_recursive: BTreeSet<String>,
    out: Vec<Decl>,
    decl: String,
}

impl<'p> Mono<'p> {
    fn unsupported<T>(&self, message: impl Into<String>) -> Result<T, MonoError> {
        Err(MonoError::Unsupported { decl: self.decl.clone(), message: message.into() })
    }

    fn take(&self, env: &mut WireEnv, p: &Pattern) -> Result<Abs, MonoError> {
        match p {
            Pattern::Unit => Ok(Abs::Unit),
            Pattern::Wire(w) => match env.remove(w) {
                Some(a) => Ok(a),
                None => self.unsupported(format!("unbound wire `{w}`")),
            },
            Pattern::Pair(a, b) => Ok(Abs::Pair(Box::new(self.take(env, a)?), Box::new(self.take(env, b)?))),
        }
    }

    fn bind(&self, env: &mut WireEnv, p: &Pattern, a: Abs) -> Result<(), MonoError> {
        match p {
            Pattern::Unit => Ok(()),
            Pattern::Wire(w) => {
                env.insert(w.clone(), a);
                Ok(())
            }
            Pattern::Pair(x, y) => match a.split() {
                Some((ax, ay)) => {
                    self.bind(env, x, ax)?;
                    self.bind(env, y, ay)
                }
                None => self.unsupported(format!("pattern {p} does not match the list shape")),
            },
        }
    }

    fn host_type(&self, henv: &HostEnv, t: &HostTerm) -> Option<HostType> {
        use HostTerm as H;
        Some(match t {
            H::Int(_) => HostType::Int,
            H::ClassicalLit { base, .. } if base == "int" => HostType::Int,
            H::ClassicalLit { base, card, .. } => HostType::Classical { name: base.clone(), card: *card },
            H::UnitVal => HostType::Unit,
            H::Var(x) => match henv.iter().rev().find(|(n, _)| n == x) {
                Some((_, ty)) => ty.clone(),
                None => self.globals.get(x)?.clone(),
            },
            H::Prim(PrimOp::Eq, _, _) => HostType::bit(),
            H::Prim(_, _, _) => HostType::Int,
            H::If(_, a, _) => self.host_type(henv, a)?,
            H::Pair(a, b) => HostType::product(self.host_type(henv, a)?, self.host_type(henv, b)?),
            H::Proj1(p) => match self.host_type(henv, p)? {
                HostType::Product(a, _) => *a,
                _ => return None,
            },
            H::Proj2(p) => match self.host_type(henv, p)? {
                HostType::Product(_, b) => *b,
                _ => return None,
            },
            H::App(f, _) => match self.host_type(henv, f)? {
                HostType::Arrow(_, r) => *r,
                _ => return None,
            },
            H::GateFamily(g, _) if g == "CR" => {
                let qq = WireType::tensor(WireType::qubit(), WireType::qubit());
                HostType::Circ(qq.clone(), qq)
            }
            H::GateFamily(_, _) => HostType::Circ(WireType::qubit(), WireType::qubit()),
            H::Box(_, Some(w), _) => HostType::Circ(w.clone(), WireType::Unit),
            _ => return None,
        })
    }

    /// The specialised head of an unbox, when it names a list declaration.
    fn list_head(&self, henv: &HostEnv, t: &HostTerm) -> Option<&'p Decl> {
        match t {
            HostTerm::Var(x) if !henv.iter().any(|(n, _)| n == x) => self.list_decls.get(x.as_str()).copied(),
            HostTerm::App(f, _) => self.list_head(henv, f),
            _ => None,
        }
    }

    fn rename_head(t: &HostTerm, to: &str) -> HostTerm {
        match t {
            HostTerm::Var(_) => HostTerm::var(to),
            HostTerm::App(f, a) => HostTerm::app(Self::rename_head(f, to), (**a).clone()),
            other => other.clone(),
        }
    }

    fn circuit(&mut self, env: &mut WireEnv, henv: &HostEnv, c: &CircuitTerm) -> Result<(CircuitTerm, Abs), MonoError> {
        use CircuitTerm as C;
        match c {
            C::Output(p) => Ok((c.clone(), self.take(env, p)?)),
            C::Compose(p, first, rest) => {
                let mut inner: WireEnv = BTreeMap::new();
                for w in first.free_wires() {
                    if let Some(a) = env.remove(&w) {
                        inner.insert(w, a);
                    }
                }
                let (first2, a) = self.circuit(&mut inner, henv, first)?;
                self.bind(env, p, a)?;
                let (rest2, b) = self.circuit(env, henv, rest)?;
                Ok((C::compose(p.clone(), first2, rest2), b))
            }
            C::UnitElim(p, rest) => {
                self.take(env, p)?;
                let (rest2, b) = self.circuit(env, henv, rest)?;
                Ok((C::UnitElim(p.clone(), Box::new(rest2)), b))
            }
            C::PairElim(w1, w2, p, rest) => {
                let a = self.take(env, p)?;
                let pat = Pattern::pair(Pattern::wire(w1.as_str()), Pattern::wire(w2.as_str()));
                self.bind(env, &pat, a)?;
                let (rest2, b) = self.circuit(env, henv, rest)?;
                Ok((C::PairElim(w1.clone(), w2.clone(), p.clone(), Box::new(rest2)), b))
            }
            C::Gate(p2, g, p1, rest) if LIST_GATES.contains(&g.name.as_str()) => {
                let a = self.take(env, p1)?;
                let (first, out) = match g.name.as_str() {
                    "isempty" => {
                        let Some(k) = a.list_len() else {
                            return Err(MonoError::UnknownLength { decl: self.decl.clone(), what: format!("isempty {p1}") });
                        };
                        let mut used = c.wire_names();
                        used.extend(env.keys().cloned());
                        let b = fresh_name("b", &used);
                        let empty = usize::from(k == 0);
                        let first = C::compose(
                            Pattern::wire(b.as_str()),
                            C::init(HostTerm::bit(empty)),
                            C::output(Pattern::pair(Pattern::wire(b.as_str()), p1.clone())),
                        );
                        (first, Abs::Pair(Box::new(Abs::Leaf(WireType::bit(), Some(empty))), Box::new(a)))
                    }
                    "headtail" => match a.clone().split() {
                        Some(_) => (C::output(p1.clone()), a),
                        None => return Err(MonoError::EmptyHead { decl: self.decl.clone() }),
                    },
                    "cons" => (C::output(p1.clone()), a),
                    _ => (C::output(Pattern::Unit), Abs::List(0)),
                };
                self.bind(env, p2, out)?;
                let (rest2, b) = self.circuit(env, henv, rest)?;
                Ok((C::compose(p2.clone(), first, rest2), b))
            }
            C::Gate(p2, g, p1, rest) => {
                let a = self.take(env, p1)?;
                let input = a.ty();
                let out = match self.gates.get(&g.name) {
                    Some((i, o)) if *i == input => o.clone(),
                    _ => match gate_signature(g, &input) {
                        Ok(o) => o,
                        Err(e) => return self.unsupported(e.to_string()),
                    },
                };
                self.bind(env, p2, Abs::of_type(&out, 0))?;
                let (rest2, b) = self.circuit(env, henv, rest)?;
                Ok((C::Gate(p2.clone(), g.clone(), p1.clone(), Box::new(rest2)), b))
            }
            C::Lift(x, p, rest) => {
                let a = self.take(env, p)?;
                if let Some(lit) = a.literal() {
                    let rest = subst_host_in_circuit(rest, x, &lit);
                    let (rest2, b) = self.circuit(env, henv, &rest)?;
                    return Ok((C::Gate(Pattern::Unit, GateRef::new("discard"), p.clone(), Box::new(rest2)), b));
                }
                let ty = match lift_type(&a.ty()) {
                    Ok(ty) => ty,
                    Err(e) => return self.unsupported(e.to_string()),
                };
                let mut henv2 = henv.clone();
                henv2.push((x.clone(), ty));
                let (rest2, b) = self.circuit(env, &henv2, rest)?;
                Ok((C::lift(x, p.clone(), rest2), b))
            }
            C::Init(t) => {
                let t = fold(t);
                let Some(w) = self.host_type(henv, &t).and_then(|a| unlift_type(&a, self.int_card)) else {
                    return self.unsupported(format!("cannot type `init {t}`"));
                };
                let known = match (&t, &w) {
                    (HostTerm::Int(v), WireType::Classical { card, .. }) if *v >= 0 && (*v as usize) < *card => Some(*v as usize),
                    (HostTerm::ClassicalLit { value, .. }, _) => Some(*value),
                    _ => None,
                };
                let abs = match w {
                    WireType::Classical { .. } => Abs::Leaf(w, known),
                    other => Abs::of_type(&other, 0),
                };
                Ok((C::init(t), abs))
            }
            C::Unbox(t, p) => {
                let a = self.take(env, p)?;
                let t = fold(t);
                if let HostTerm::Box(bp, _, body) = &t {
                    let mut inner = WireEnv::new();
                    self.bind(&mut inner, bp, a.clone())?;
                    let (body2, out) = self.circuit(&mut inner, henv, body)?;
                    return Ok((C::unbox(HostTerm::boxed(bp.clone(), Some(a.ty()), body2), p.clone()), out));
                }
                if let Some(d) = self.list_head(henv, &t) {
                    let ty = d.ty.as_ref().ok_or_else(|| MonoError::Unannotated(d.name.clone()))?;
                    let (w1, _) = circ_of(ty).expect("list declarations have circuit type");
                    let Some(k) = find_length(w1, &a) else {
                        return Err(MonoError::UnknownLength { decl: self.decl.clone(), what: format!("unbox {} {p}", d.name) });
                    };
                    let (name, out) = self.specialize(d, k)?;
                    return Ok((C::unbox(Self::rename_head(&t, &name), p.clone()), out));
                }
                match self.host_type(henv, &t) {
                    Some(HostType::Circ(_, w2)) if !w2.mentions_qlist() => Ok((C::unbox(t, p.clone()), Abs::of_type(&w2, 0))),
                    _ => self.unsupported(format!("cannot determine the output of `unbox {t}`")),
                }
            }
            C::QLift(..) => self.unsupported("qlift inside a qlist declaration"),
        }
    }

    fn host_body(&mut self, henv: &HostEnv, t: &HostTerm, w1: &WireType, k: usize) -> Result<(HostTerm, Abs), MonoError> {
        match t {
            HostTerm::Lambda(x, a, body) => {
                let a = a.instantiate_qlist(&WireType::qlist_of(k));
                let mut henv2 = henv.clone();
                henv2.push((x.clone(), a.clone()));
                let (body2, out) = self.host_body(&henv2, body, w1, k)?;
                Ok((HostTerm::lambda(x, a, body2), out))
            }
            HostTerm::Box(bp, _, c) => {
                let mut env = WireEnv::new();
                let input = Abs::of_type(w1, k);
                let ty = input.ty();
                self.bind(&mut env, bp, input)?;
                let (c2, out) = self.circuit(&mut env, henv, c)?;
                Ok((HostTerm::boxed(bp.clone(), Some(ty), c2), out))
            }
            _ => self.unsupported("the body must be a box under lambdas"),
        }
    }

    fn specialize(&mut self, d: &'p Decl, k: usize) -> Result<(String, Abs), MonoError> {
        let name = format!("{}@{k}", d.name);
        let key = (d.name.clone(), k);
        let ty = d.ty.as_ref().ok_or_else(|| MonoError::Unannotated(d.name.clone()))?;
        let (w1, w2) = circ_of(ty).expect("list declarations have circuit type");
        if let Some(out) = self.done.get(&key) {
            return Ok((name, out.clone()));
        }
        if self.in_progress.contains(&key) {
            self.self_recursive.insert(name.clone());
            return Ok((name, Abs::of_type(w2, k)));
        }
        self.in_progress.insert(key.clone());
        let outer = std::mem::replace(&mut self.decl, d.name.clone());
        let result = self.host_body(&Vec::new(), &d.body, w1, k);
        self.decl = outer;
        self.in_progress.remove(&key);
        let (body, out) = result?;
        self.out.push(Decl {
            name: name.clone(),
            ty: Some(instantiate(ty, k)),
            body,
            recursive: self.self_recursive.contains(&name),
            span: d.span,
        });
        self.done.insert(key, out.clone());
        Ok((name, out))
    }
}

fn mentions_list(d: &Decl) -> bool {
    d.ty.as_ref().is_some_and(HostType::mentions_qlist)
}

/// Name of the instance of `decl` at list length `n`.
pub fn instance_name(decl: &str, n: usize) -> String {
    format!("{decl}@{n}")
}

/// Specialises every declaration whose type mentions `qlist` at length `n`
/// (and at whatever lengths those use). Other items are kept as they are;
/// the generic declarations and the list gate declarations are dropped.
pub fn monomorphize(prog: &Program, n: usize) -> Result<Program, MonoError> {
    let list: Vec<&Decl> = prog.decls().filter(|d| mentions_list(d)).collect();
    if list.is_empty() {
        return Ok(prog.clone());
    }
    let mut globals = HashMap::new();
    for (d, r) in prog.decls().zip(check_declarations(prog)) {
        if let Ok(cd) = r {
            globals.insert(d.name.clone(), cd.ty);
        }
    }
    let mut m = Mono {
        int_card: prog.int_card(),
        list_decls: list.iter().map(|d| (d.name.as_str(), *d)).collect(),
        globals,
        gates: prog.declared_gates().map(|(n, i, o)| (n.to_string(), (i.clone(), o.clone()))).collect(),
        done: HashMap::new(),
        in_progress: BTreeSet::new(),
        self_recursive: BTreeSet::new(),
        out: Vec::new(),
        decl: String::new(),
    };
    for d in &list {
        m.specialize(d, n)?;
    }
    let mut items: Vec<Item> = prog
        .items
        .iter()
        .filter(|i| match i {
            Item::Def(d) => !mentions_list(d),
            Item::GateDecl { name, input, output } => {
                !(LIST_GATES.contains(&name.as_str()) || input.mentions_qlist() || output.mentions_qlist())
            }
            _ => true,
        })
        .cloned()
        .collect();
    items.extend(m.out.into_iter().map(Item::Def));
    Ok(Program { items })
}
