//! Random well-typed circuits, for soundness testing of the rewrite rules.
//!
//! Generated circuits mix gates, measurement and preparation, nested
//! sequencing, literal boxes, pattern eliminations and dynamic lifting, so
//! that every rewrite rule has redexes to act on.

use crate::rng::SplitMix64;
use crate::syntax::{CircuitTerm, HostTerm, Pattern, WireType};
use crate::typecheck::WireContext;

#[derive(Clone, Copy, Debug)]
pub struct FuzzConfig {
    pub max_qubits: usize,
    /// Upper bound on binding statements, counted across nested blocks.
    pub max_statements: usize,
    /// Include one classical input wire.
    pub bit_input: bool,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig { max_qubits: 4, max_statements: 12, bit_input: true }
    }
}

#[derive(Clone, Debug)]
pub struct FuzzCase {
    pub omega: WireContext,
    pub term: CircuitTerm,
    pub statements: usize,
}

struct Gen<'r> {
    rng: &'r mut SplitMix64,
    counter: usize,
    budget: usize,
    statements: usize,
    /// Bound on the element dimension of all live wires.
    max_dim: usize,
    /// Element dimension of the wires outside the current nested block.
    outside: usize,
}

type Live = Vec<(String, WireType)>;

const ONE_QUBIT: [&str; 6] = ["H", "X", "Y", "Z", "S", "T"];
const TWO_QUBIT: [&str; 3] = ["CNOT", "CZ", "SWAP"];

fn is_qubit(w: &WireType) -> bool {
    *w == WireType::qubit()
}

fn element_dim(live: &Live) -> usize {
    live.iter().map(|(_, w)| if is_qubit(w) { 4 } else { 2 }).product()
}

fn tuple(names: &[(String, WireType)]) -> (Pattern, WireType) {
    match names {
        [] => (Pattern::Unit, WireType::Unit),
        [(n, w)] => (Pattern::wire(n.as_str()), w.clone()),
        [(n, w), rest @ ..] => {
            let (p, t) = tuple(rest);
            (Pattern::pair(Pattern::wire(n.as_str()), p), WireType::tensor(w.clone(), t))
        }
    }
}

impl Gen<'_> {
    fn fresh(&mut self) -> String {
        self.counter += 1;
        format!("w{}", self.counter)
    }

    fn pick(&mut self, live: &Live, pred: impl Fn(&WireType) -> bool) -> Option<usize> {
        let idx: Vec<usize> = (0..live.len()).filter(|&i| pred(&live[i].1)).collect();
        (!idx.is_empty()).then(|| idx[self.rng.below(idx.len())])
    }

    /// A random nonempty subset of `live`, removed from it, in order.
    fn take_subset(&mut self, live: &mut Live) -> Live {
        let mut taken = Vec::new();
        let mut kept = Vec::new();
        for item in live.drain(..) {
            if self.rng.below(2) == 0 {
                taken.push(item);
            } else {
                kept.push(item);
            }
        }
        if taken.is_empty() && !kept.is_empty() {
            let i = self.rng.below(kept.len());
            taken.push(kept.remove(i));
        }
        *live = kept;
        taken
    }

    /// Fresh names with the same types, bound by a tuple pattern.
    fn rename(&mut self, wires: &Live) -> Live {
        wires.iter().map(|(_, w)| (self.fresh(), w.clone())).collect()
    }

    /// Whether one more two-level wire fits under the dimension bound.
    fn room(&self, live: &Live) -> bool {
        element_dim(live) * self.outside * 2 <= self.max_dim
    }

    fn spend(&mut self) -> bool {
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        self.statements += 1;
        true
    }

    /// A block over `live` that ends by outputting everything still live.
    /// Returns the block and the wires of its output tuple.
    fn block(&mut self, mut live: Live, depth: usize) -> (CircuitTerm, Live) {
        if !self.spend() || self.rng.below(8) == 0 {
            return (CircuitTerm::output(tuple(&live).0), live);
        }
        let choice = self.rng.below(13);
        match choice {
            0 | 1 => {
                if let Some(i) = self.pick(&live, is_qubit) {
                    let g = ONE_QUBIT[self.rng.below(ONE_QUBIT.len())];
                    let (old, _) = live.remove(i);
                    let new = self.fresh();
                    live.insert(i, (new.clone(), WireType::qubit()));
                    let (rest, out) = self.block(live, depth);
                    return (CircuitTerm::gate(Pattern::wire(new.as_str()), g, Pattern::wire(old.as_str()), rest), out);
                }
            }
            2 => {
                let qs: Vec<usize> = (0..live.len()).filter(|&i| is_qubit(&live[i].1)).collect();
                if qs.len() >= 2 {
                    let a = qs[self.rng.below(qs.len())];
                    let mut b = qs[self.rng.below(qs.len())];
                    while b == a {
                        b = qs[self.rng.below(qs.len())];
                    }
                    let g = TWO_QUBIT[self.rng.below(TWO_QUBIT.len())];
                    let (x, y) = (live[a].0.clone(), live[b].0.clone());
                    let (x2, y2) = (self.fresh(), self.fresh());
                    live[a].0 = x2.clone();
                    live[b].0 = y2.clone();
                    let (rest, out) = self.block(live, depth);
                    return (CircuitTerm::gate(
                        Pattern::pair(Pattern::wire(x2.as_str()), Pattern::wire(y2.as_str())),
                        g,
                        Pattern::pair(Pattern::wire(x.as_str()), Pattern::wire(y.as_str())),
                        rest,
                    ), out);
                }
            }
            3 => {
                let measure = self.rng.below(2) == 0;
                let want = if measure { WireType::qubit() } else { WireType::bit() };
                let picked = if measure || self.room(&live) { self.pick(&live, |w| *w == want) } else { None };
                if let Some(i) = picked {
                    let (g, ty) = if measure { ("meas", WireType::bit()) } else { ("new", WireType::qubit()) };
                    let (old, _) = live.remove(i);
                    let new = self.fresh();
                    live.insert(i, (new.clone(), ty));
                    let (rest, out) = self.block(live, depth);
                    return (CircuitTerm::gate(Pattern::wire(new.as_str()), g, Pattern::wire(old.as_str()), rest), out);
                }
            }
            4 | 5 if depth < 3 && !live.is_empty() => {
                // Nested sequencing, or an unboxed literal box.
                let mut outer = live;
                let inner = self.take_subset(&mut outer);
                let boxed = choice == 5;
                let params = if boxed { self.rename(&inner) } else { inner.clone() };
                let saved = self.outside;
                self.outside *= element_dim(&outer);
                let (body, out_wires) = self.block(params.clone(), depth + 1);
                self.outside = saved;
                let bound = self.rename(&out_wires);
                let (pat, _) = tuple(&bound);
                outer.extend(bound);
                let (rest, out) = self.block(outer, depth);
                let first = if boxed {
                    let (ppat, pty) = tuple(&params);
                    CircuitTerm::unbox(HostTerm::boxed(ppat, Some(pty), body), tuple(&inner).0)
                } else {
                    body
                };
                return (CircuitTerm::compose(pat, first, rest), out);
            }
            6 => {
                let (rest, out) = self.block(live, depth);
                return (CircuitTerm::UnitElim(Pattern::Unit, Box::new(rest)), out);
            }
            7 if live.len() >= 2 => {
                let a = self.rng.below(live.len());
                let (x, wx) = live.remove(a);
                let b = self.rng.below(live.len());
                let (y, wy) = live.remove(b);
                let (x2, y2) = (self.fresh(), self.fresh());
                live.push((x2.clone(), wx));
                live.push((y2.clone(), wy));
                let (rest, out) = self.block(live, depth);
                return (CircuitTerm::PairElim(
                    x2,
                    y2,
                    Pattern::pair(Pattern::wire(x.as_str()), Pattern::wire(y.as_str())),
                    Box::new(rest),
                ), out);
            }
            8 if !live.is_empty() => {
                let mut outer = live;
                let moved = self.take_subset(&mut outer);
                let bound = self.rename(&moved);
                let (pat, _) = tuple(&bound);
                outer.extend(bound);
                let (rest, out) = self.block(outer, depth);
                return (CircuitTerm::compose(pat, CircuitTerm::output(tuple(&moved).0), rest), out);
            }
            9 | 10 => {
                if let Some(i) = self.pick(&live, |w| *w == WireType::bit()) {
                    let (b, _) = live.remove(i);
                    let x = format!("x{}", self.counter + 1);
                    self.counter += 1;
                    let (rest, out) = self.after_lift(&x, live, depth);
                    return (CircuitTerm::lift(&x, Pattern::wire(b.as_str()), rest), out);
                }
            }
            11 if self.room(&live) => {
                let c = self.fresh();
                let v = self.rng.below(2);
                live.push((c.clone(), WireType::bit()));
                let (rest, out) = self.block(live, depth);
                return (CircuitTerm::compose(Pattern::wire(c.as_str()), CircuitTerm::init(HostTerm::bit(v)), rest), out);
            }
            _ => {
                if let Some(i) = self.pick(&live, |w| *w == WireType::bit()) {
                    let (b, _) = live.remove(i);
                    let (rest, out) = self.block(live, depth);
                    return (CircuitTerm::gate(Pattern::Unit, "discard", Pattern::wire(b.as_str()), rest), out);
                }
            }
        }
        self.budget += 1;
        self.statements -= 1;
        self.block(live, depth)
    }

    /// Uses the lifted host bit: re-initialise it, or control a qubit by it.
    fn after_lift(&mut self, x: &str, mut live: Live, depth: usize) -> (CircuitTerm, Live) {
        let xv = HostTerm::var(x);
        if self.rng.below(2) == 0 {
            if let Some(i) = self.pick(&live, is_qubit) {
                if self.spend() {
                    let (q, _) = live.remove(i);
                    let q2 = self.fresh();
                    live.insert(i, (q2.clone(), WireType::qubit()));
                    let g = ONE_QUBIT[self.rng.below(ONE_QUBIT.len())];
                    let qt = WireType::qubit();
                    let apply = HostTerm::boxed(
                        Pattern::wire("a"),
                        Some(qt.clone()),
                        CircuitTerm::gate(Pattern::wire("b"), g, Pattern::wire("a"), CircuitTerm::output(Pattern::wire("b"))),
                    );
                    let skip = HostTerm::boxed(Pattern::wire("a"), Some(qt), CircuitTerm::output(Pattern::wire("a")));
                    let head = HostTerm::If(Box::new(xv), Box::new(apply), Box::new(skip));
                    let (rest, out) = self.block(live, depth);
                    let c = CircuitTerm::compose(
                        Pattern::wire(q2.as_str()),
                        CircuitTerm::unbox(head, Pattern::wire(q.as_str())),
                        rest,
                    );
                    return (c, out);
                }
            }
        }
        let c = self.fresh();
        live.push((c.clone(), WireType::bit()));
        let (rest, out) = self.block(live, depth);
        (CircuitTerm::compose(Pattern::wire(c.as_str()), CircuitTerm::init(xv), rest), out)
    }
}

/// Generates one random well-typed circuit.
pub fn gen_circuit(rng: &mut SplitMix64, config: &FuzzConfig) -> FuzzCase {
    let qubits = 1 + rng.below(config.max_qubits.max(1));
    let mut omega: WireContext = (0..qubits).map(|i| (format!("q{i}"), WireType::qubit())).collect();
    if config.bit_input {
        omega.push(("c0".to_string(), WireType::bit()));
    }
    let max_dim = 4usize.pow(config.max_qubits as u32) * if config.bit_input { 2 } else { 1 };
    let mut g = Gen { rng, counter: 0, budget: config.max_statements, statements: 0, max_dim, outside: 1 };
    let (term, _) = g.block(omega.clone(), 0);
    FuzzCase { omega, term, statements: g.statements }
}

/// `n` cases from a fixed seed.
pub fn corpus(seed: u64, n: usize, config: &FuzzConfig) -> Vec<FuzzCase> {
    let mut rng = SplitMix64::new(seed);
    (0..n).map(|_| gen_circuit(&mut rng, config)).collect()
}
