//! An independent Schrödinger-picture simulator on density matrices, used
//! as an oracle for the Heisenberg-picture semantics.
#![allow(dead_code)]

use std::collections::HashMap;

use ewire_core::algebra::{FdAlgebra, Layout, SuperOp, C64};
use ewire_core::syntax::{CircuitTerm, HostTerm, Pattern, WireType};
use nalgebra::DMatrix;

pub type M = DMatrix<C64>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn unitary(name: &str) -> M {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    match name {
        "H" => M::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
        "X" => M::from_row_slice(2, 2, &[o, l, l, o]),
        "Y" => M::from_row_slice(2, 2, &[o, c(0.0, -1.0), c(0.0, 1.0), o]),
        "Z" => M::from_diagonal(&nalgebra::DVector::from_vec(vec![l, -l])),
        "S" => M::from_diagonal(&nalgebra::DVector::from_vec(vec![l, c(0.0, 1.0)])),
        "T" => M::from_diagonal(&nalgebra::DVector::from_vec(vec![l, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)])),
        "CNOT" => {
            let mut m = M::zeros(4, 4);
            for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                m[(i, j)] = l;
            }
            m
        }
        "CZ" => M::from_diagonal(&nalgebra::DVector::from_vec(vec![l, l, l, -l])),
        "SWAP" => {
            let mut m = M::zeros(4, 4);
            for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
                m[(i, j)] = l;
            }
            m
        }
        other => panic!("oracle has no unitary {other}"),
    }
}

/// A density matrix over an ordered list of two-level slots. Slot `k` in
/// the list is bit `n - 1 - k` of a basis index.
#[derive(Clone)]
pub struct Dm {
    pub slots: Vec<usize>,
    pub rho: M,
}

impl Dm {
    pub fn new(slots: Vec<usize>, rho: M) -> Self {
        assert_eq!(rho.nrows(), 1 << slots.len());
        Dm { slots, rho }
    }

    fn n(&self) -> usize {
        self.slots.len()
    }

    fn bit(&self, slot: usize) -> usize {
        let p = self.slots.iter().position(|&s| s == slot).expect("live slot");
        self.n() - 1 - p
    }

    /// `U ρ U†` with `U` acting on `on`, first slot most significant.
    pub fn apply(&mut self, on: &[usize], u: &M) {
        let bits: Vec<usize> = on.iter().map(|&s| self.bit(s)).collect();
        let k = bits.len();
        let dim = self.rho.nrows();
        let sub = |i: usize| bits.iter().fold(0, |acc, &b| acc << 1 | (i >> b & 1));
        let with = |i: usize, a: usize| {
            bits.iter().enumerate().fold(i, |acc, (t, &b)| {
                let v = a >> (k - 1 - t) & 1;
                (acc & !(1 << b)) | v << b
            })
        };
        let mut left = M::zeros(dim, dim);
        for i in 0..dim {
            let si = sub(i);
            for a in 0..1 << k {
                let coeff = u[(si, a)];
                if coeff == c(0.0, 0.0) {
                    continue;
                }
                let ia = with(i, a);
                for j in 0..dim {
                    left[(i, j)] += coeff * self.rho[(ia, j)];
                }
            }
        }
        let mut out = M::zeros(dim, dim);
        for j in 0..dim {
            let sj = sub(j);
            for b in 0..1 << k {
                let coeff = u[(sj, b)].conj();
                if coeff == c(0.0, 0.0) {
                    continue;
                }
                let jb = with(j, b);
                for i in 0..dim {
                    out[(i, j)] += left[(i, jb)] * coeff;
                }
            }
        }
        self.rho = out;
    }

    pub fn dephase(&mut self, slot: usize) {
        let b = self.bit(slot);
        let dim = self.rho.nrows();
        for i in 0..dim {
            for j in 0..dim {
                if (i >> b & 1) != (j >> b & 1) {
                    self.rho[(i, j)] = c(0.0, 0.0);
                }
            }
        }
    }

    fn remove_with(&mut self, slot: usize, values: &[usize]) {
        let b = self.bit(slot);
        let dim = self.rho.nrows() / 2;
        let ins = |i: usize, v: usize| (i >> b) << (b + 1) | v << b | (i & ((1 << b) - 1));
        let mut out = M::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                for &v in values {
                    out[(i, j)] += self.rho[(ins(i, v), ins(j, v))];
                }
            }
        }
        self.slots.retain(|&s| s != slot);
        self.rho = out;
    }

    pub fn trace_out(&mut self, slot: usize) {
        self.remove_with(slot, &[0, 1]);
    }

    /// The unnormalized branch where `slot` reads `v`, with the slot removed.
    pub fn project_out(&mut self, slot: usize, v: usize) {
        self.remove_with(slot, &[v]);
    }

    pub fn push(&mut self, slot: usize, v: usize) {
        let mut ket = M::zeros(2, 2);
        ket[(v, v)] = c(1.0, 0.0);
        self.rho = self.rho.kronecker(&ket);
        self.slots.push(slot);
    }

    /// The matrix with slots listed in `order`; `order` must cover all slots.
    pub fn ordered(&self, order: &[usize]) -> M {
        assert_eq!(order.len(), self.n(), "every live slot is output");
        let n = self.n();
        let dim = self.rho.nrows();
        let src_bits: Vec<usize> = order.iter().map(|&s| self.bit(s)).collect();
        let map = |i: usize| (0..n).fold(0, |acc, t| acc | (i >> (n - 1 - t) & 1) << src_bits[t]);
        M::from_fn(dim, dim, |i, j| self.rho[(map(i), map(j))])
    }
}

struct Sim {
    next: usize,
}

type Wires = HashMap<String, usize>;
type Host = HashMap<String, usize>;

fn slots_of(p: &Pattern, wires: &Wires) -> Vec<usize> {
    p.wires().iter().map(|w| wires[*w]).collect()
}

fn bind(p: &Pattern, slots: &[usize], wires: &mut Wires) {
    let names = p.wires();
    assert_eq!(names.len(), slots.len(), "oracle needs one slot per wire name");
    for (n, s) in names.into_iter().zip(slots) {
        wires.insert(n.to_string(), *s);
    }
}

fn host_bit(t: &HostTerm, host: &Host) -> usize {
    match t {
        HostTerm::Var(x) => host[x],
        HostTerm::ClassicalLit { value, .. } => *value,
        other => panic!("oracle cannot evaluate {other}"),
    }
}

impl Sim {
    fn fresh(&mut self) -> usize {
        self.next += 1;
        self.next
    }

    fn run(&mut self, dm: Dm, mut wires: Wires, host: &Host, c: &CircuitTerm, k: &mut dyn FnMut(&mut Sim, Dm, Vec<usize>) -> M) -> M {
        match c {
            CircuitTerm::Output(p) => k(self, dm, slots_of(p, &wires)),
            CircuitTerm::Compose(p, first, rest) => {
                let host2 = host.clone();
                let p = p.clone();
                let rest = rest.as_ref().clone();
                let outer = wires.clone();
                self.run(dm, wires, host, first, &mut |sim, dm, out| {
                    let mut w = outer.clone();
                    bind(&p, &out, &mut w);
                    sim.run(dm, w, &host2, &rest, k)
                })
            }
            CircuitTerm::UnitElim(_, rest) => self.run(dm, wires, host, rest, k),
            CircuitTerm::PairElim(a, b, p, rest) => {
                let s = slots_of(p, &wires);
                assert_eq!(s.len(), 2);
                wires.insert(a.clone(), s[0]);
                wires.insert(b.clone(), s[1]);
                self.run(dm, wires, host, rest, k)
            }
            CircuitTerm::Gate(p2, g, p1, rest) => {
                let mut dm = dm;
                let ins = slots_of(p1, &wires);
                let outs = match g.name.as_str() {
                    "meas" => {
                        dm.dephase(ins[0]);
                        ins
                    }
                    "new" => ins,
                    "discard" => {
                        dm.trace_out(ins[0]);
                        vec![]
                    }
                    "init0" | "init1" => {
                        let s = self.fresh();
                        dm.push(s, usize::from(g.name == "init1"));
                        vec![s]
                    }
                    name => {
                        dm.apply(&ins, &unitary(name));
                        ins
                    }
                };
                bind(p2, &outs, &mut wires);
                self.run(dm, wires, host, rest, k)
            }
            CircuitTerm::Lift(x, p, rest) => {
                let s = slots_of(p, &wires);
                assert_eq!(s.len(), 1, "oracle lifts single bits");
                let mut total: Option<M> = None;
                for v in 0..2 {
                    let mut branch = dm.clone();
                    branch.project_out(s[0], v);
                    let mut h = host.clone();
                    h.insert(x.clone(), v);
                    let r = self.run(branch, wires.clone(), &h, rest, k);
                    total = Some(match total {
                        None => r,
                        Some(t) => t + r,
                    });
                }
                total.unwrap()
            }
            CircuitTerm::Init(t) => {
                let mut dm = dm;
                let s = self.fresh();
                dm.push(s, host_bit(t, host));
                k(self, dm, vec![s])
            }
            CircuitTerm::Unbox(t, p) => {
                let chosen = match t.as_ref() {
                    HostTerm::If(cnd, a, b) => if host_bit(cnd, host) == 1 { a.as_ref() } else { b.as_ref() },
                    other => other,
                };
                let HostTerm::Box(bp, _, body) = chosen else { panic!("oracle unboxes literal boxes") };
                let s = slots_of(p, &wires);
                let mut inner = Wires::new();
                bind(bp, &s, &mut inner);
                self.run(dm, inner, host, body, k)
            }
            CircuitTerm::QLift(..) => panic!("sugar"),
        }
    }
}

/// Runs `c` on an input state over `omega`, returning the output state in
/// output-pattern order.
pub fn simulate(omega: &[(String, WireType)], c: &CircuitTerm, rho: &M) -> M {
    let slots: Vec<usize> = (1..=omega.len()).collect();
    let wires: Wires = omega.iter().zip(&slots).map(|((n, _), s)| (n.clone(), *s)).collect();
    let mut sim = Sim { next: omega.len() };
    sim.run(Dm::new(slots, rho.clone()), wires, &Host::new(), c, &mut |_, dm, out| dm.ordered(&out))
}

/// Two-level leaves of a wire type: `true` for bits.
pub fn leaves(w: &WireType) -> Vec<bool> {
    w.leaves()
        .into_iter()
        .map(|l| match l {
            WireType::Classical { card: 2, .. } => true,
            WireType::Quantum { dim: 2, .. } => false,
            other => panic!("oracle handles two-level leaves, not {other}"),
        })
        .collect()
}

fn layout(kinds: &[bool]) -> Layout {
    Layout::new(kinds.iter().map(|&b| if b { FdAlgebra::classical(2) } else { FdAlgebra::matrix(2) }).collect())
}

/// Frobenius distance between the Heisenberg map `op` and the dual of the
/// Schrödinger channel `chan`, over all matrix units compatible with the
/// classical leaves.
pub fn dual_distance(op: &SuperOp, ins: &[bool], outs: &[bool], chan: &dyn Fn(&M) -> M) -> f64 {
    let op = SuperOp::from_canonical(layout(outs), layout(ins), &op.to_canonical().matrix).expect("matching algebras");
    let coords = |kinds: &[bool], a: usize, b: usize| -> Option<usize> {
        let n = kinds.len();
        let mut idx = 0;
        for (t, &bit) in kinds.iter().enumerate() {
            let (x, y) = (a >> (n - 1 - t) & 1, b >> (n - 1 - t) & 1);
            if bit {
                if x != y {
                    return None;
                }
                idx = idx * 2 + x;
            } else {
                idx = idx * 4 + 2 * x + y;
            }
        }
        Some(idx)
    };
    let (din, dout) = (1usize << ins.len(), 1usize << outs.len());
    let mut sq = 0.0;
    for x in 0..din {
        for y in 0..din {
            let Some(row) = coords(ins, x, y) else { continue };
            // Classical inputs only ever carry diagonal units.
            let mut unit = M::zeros(din, din);
            unit[(y, x)] = c(1.0, 0.0);
            let out = chan(&unit);
            for a in 0..dout {
                for b in 0..dout {
                    let Some(col) = coords(outs, a, b) else { continue };
                    // tr(E_yx f(E_ab)) = tr(chan(E_yx) E_ab)
                    sq += (op.matrix.get(row, col) - out[(b, a)]).norm_sqr();
                }
            }
        }
    }
    sq.sqrt()
}
