//! Canonical concrete syntax.

use std::fmt::Write;

use super::{
    CircuitAbbrev, CircuitTerm, Decl, GateRef, HostTerm, HostType, Item, Pattern, PrimOp, Program,
    WireType,
};

pub trait Pretty {
    fn pretty(&self, out: &mut String);
}

pub fn pretty_print<T: Pretty + ?Sized>(x: &T) -> String {
    let mut s = String::new();
    x.pretty(&mut s);
    s
}

macro_rules! display_via_pretty {
    ($($t:ty),*) => {$(
        impl std::fmt::Display for $t {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(&pretty_print(self))
            }
        }
    )*};
}

display_via_pretty!(WireType, HostType, Pattern, GateRef, CircuitTerm, HostTerm, Program);

impl Pretty for WireType {
    fn pretty(&self, out: &mut String) {
        match self {
            WireType::Unit => out.push('I'),
            WireType::Tensor(a, b) => {
                if matches!(**a, WireType::Tensor(..)) {
                    out.push('(');
                    a.pretty(out);
                    out.push(')');
                } else {
                    a.pretty(out);
                }
                out.push_str(" * ");
                b.pretty(out);
            }
            WireType::Classical { name, .. } | WireType::Quantum { name, .. } => out.push_str(name),
            WireType::QList => out.push_str("qlist"),
        }
    }
}

fn host_type_at(t: &HostType, prec: u8, out: &mut String) {
    // 0: arrow, 1: product, 2: atom
    let level = match t {
        HostType::Arrow(..) => 0,
        HostType::Product(..) => 1,
        _ => 2,
    };
    let paren = level < prec;
    if paren {
        out.push('(');
    }
    match t {
        HostType::Unit => out.push('1'),
        HostType::Int => out.push_str("int"),
        HostType::Classical { name, .. } => out.push_str(name),
        HostType::Arrow(a, b) => {
            host_type_at(a, 1, out);
            out.push_str(" -> ");
            host_type_at(b, 0, out);
        }
        HostType::Product(a, b) => {
            host_type_at(a, 2, out);
            out.push_str(" * ");
            host_type_at(b, 1, out);
        }
        HostType::Monadic(a) => {
            out.push_str("T(");
            host_type_at(a, 0, out);
            out.push(')');
        }
        HostType::Circ(a, b) => {
            out.push_str("Circ(");
            a.pretty(out);
            out.push_str(", ");
            b.pretty(out);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

impl Pretty for HostType {
    fn pretty(&self, out: &mut String) {
        host_type_at(self, 0, out);
    }
}

impl Pretty for Pattern {
    fn pretty(&self, out: &mut String) {
        match self {
            Pattern::Unit => out.push_str("()"),
            Pattern::Wire(w) => out.push_str(w),
            Pattern::Pair(a, b) => {
                out.push('(');
                a.pretty(out);
                out.push_str(", ");
                b.pretty(out);
                out.push(')');
            }
        }
    }
}

impl Pretty for GateRef {
    fn pretty(&self, out: &mut String) {
        out.push_str(&self.name);
    }
}

impl Pretty for CircuitTerm {
    fn pretty(&self, out: &mut String) {
        match self {
            CircuitTerm::Output(p) => {
                out.push_str("output ");
                p.pretty(out);
            }
            CircuitTerm::Unbox(t, p) => {
                out.push_str("unbox ");
                host_at(t, 4, out);
                out.push(' ');
                p.pretty(out);
            }
            CircuitTerm::Init(t) => {
                out.push_str("init ");
                host_at(t, 4, out);
            }
            CircuitTerm::Compose(p, first, rest) => {
                p.pretty(out);
                out.push_str(" <- ");
                match first.as_ref() {
                    CircuitTerm::Output(_) | CircuitTerm::Unbox(..) | CircuitTerm::Init(_) => {
                        first.pretty(out)
                    }
                    other => {
                        out.push('(');
                        other.pretty(out);
                        out.push(')');
                    }
                }
                out.push_str("; ");
                rest.pretty(out);
            }
            CircuitTerm::UnitElim(p, rest) => {
                out.push_str("() <- ");
                p.pretty(out);
                out.push_str("; ");
                rest.pretty(out);
            }
            CircuitTerm::PairElim(w1, w2, p, rest) => {
                let _ = write!(out, "({w1}, {w2}) <- ");
                p.pretty(out);
                out.push_str("; ");
                rest.pretty(out);
            }
            CircuitTerm::Gate(p2, g, p1, rest) => {
                p2.pretty(out);
                out.push_str(" <- gate ");
                g.pretty(out);
                out.push(' ');
                p1.pretty(out);
                out.push_str("; ");
                rest.pretty(out);
            }
            CircuitTerm::Lift(x, p, rest) | CircuitTerm::QLift(x, p, rest) => {
                let kw = if matches!(self, CircuitTerm::Lift(..)) { "lift" } else { "qlift" };
                let _ = write!(out, "{x} <= {kw} ");
                p.pretty(out);
                out.push_str("; ");
                rest.pretty(out);
            }
        }
    }
}

// Precedence: 0 binders, 1 `=`, 2 `+`/`-`, 3 application, 4 atom.
fn host_level(t: &HostTerm) -> u8 {
    match t {
        HostTerm::Lambda(..)
        | HostTerm::LetBind(..)
        | HostTerm::If(..)
        | HostTerm::Box(..)
        | HostTerm::Run(_)
        | HostTerm::QRun(_) => 0,
        HostTerm::Prim(PrimOp::Eq, ..) => 1,
        HostTerm::Prim(..) => 2,
        HostTerm::Int(n) if *n < 0 => 2,
        HostTerm::Return(_) => 2,
        HostTerm::App(..)
        | HostTerm::Proj1(_)
        | HostTerm::Proj2(_)
        | HostTerm::GateFamily(..) => 3,
        _ => 4,
    }
}

fn host_at(t: &HostTerm, prec: u8, out: &mut String) {
    let paren = host_level(t) < prec;
    if paren {
        out.push('(');
    }
    match t {
        HostTerm::Var(x) => out.push_str(x),
        HostTerm::Int(n) => {
            let _ = write!(out, "{n}");
        }
        HostTerm::UnitVal => out.push_str("()"),
        HostTerm::ClassicalLit { base, value, .. } => {
            let _ = write!(out, "{base}#{value}");
        }
        HostTerm::Pair(a, b) => {
            out.push('(');
            host_at(a, 0, out);
            out.push_str(", ");
            host_at(b, 0, out);
            out.push(')');
        }
        HostTerm::Fix(a, w1, w2) => {
            out.push_str("Y[");
            a.pretty(out);
            out.push_str(", ");
            w1.pretty(out);
            out.push_str(", ");
            w2.pretty(out);
            out.push(']');
        }
        HostTerm::Lambda(x, ty, body) => {
            let _ = write!(out, "lambda {x} : ");
            ty.pretty(out);
            out.push_str(". ");
            host_at(body, 0, out);
        }
        HostTerm::LetBind(a, x, b) => {
            let _ = write!(out, "let {x} <- ");
            host_at(a, 0, out);
            out.push_str(" in ");
            host_at(b, 0, out);
        }
        HostTerm::If(c, a, b) => {
            out.push_str("if ");
            host_at(c, 0, out);
            out.push_str(" then ");
            host_at(a, 0, out);
            out.push_str(" else ");
            host_at(b, 0, out);
        }
        HostTerm::Box(p, ty, c) => {
            out.push_str("box ");
            p.pretty(out);
            if let Some(w) = ty {
                out.push_str(" : ");
                w.pretty(out);
            }
            out.push_str(" => ");
            c.pretty(out);
        }
        HostTerm::Run(c) => {
            out.push_str("run ");
            c.pretty(out);
        }
        HostTerm::QRun(c) => {
            out.push_str("qrun ");
            c.pretty(out);
        }
        HostTerm::Prim(op, a, b) => {
            let (sym, lp, rp) = match op {
                PrimOp::Eq => ("=", 2, 2),
                PrimOp::Add => ("+", 2, 3),
                PrimOp::Sub => ("-", 2, 3),
            };
            host_at(a, lp, out);
            let _ = write!(out, " {sym} ");
            host_at(b, rp, out);
        }
        HostTerm::App(f, a) => {
            host_at(f, 3, out);
            out.push(' ');
            host_at(a, 4, out);
        }
        HostTerm::Return(a) => {
            out.push_str("return ");
            host_at(a, 3, out);
        }
        HostTerm::Proj1(a) => {
            out.push_str("fst ");
            host_at(a, 4, out);
        }
        HostTerm::Proj2(a) => {
            out.push_str("snd ");
            host_at(a, 4, out);
        }
        HostTerm::GateFamily(name, a) => {
            let _ = write!(out, "{name} ");
            host_at(a, 4, out);
        }
    }
    if paren {
        out.push(')');
    }
}

impl Pretty for HostTerm {
    fn pretty(&self, out: &mut String) {
        host_at(self, 0, out);
    }
}

impl Pretty for Decl {
    fn pretty(&self, out: &mut String) {
        out.push_str(if self.recursive { "rec " } else { "def " });
        out.push_str(&self.name);
        if let Some(ty) = &self.ty {
            out.push_str(" : ");
            ty.pretty(out);
        }
        out.push_str(" =\n  ");
        self.body.pretty(out);
    }
}

impl Pretty for CircuitAbbrev {
    fn pretty(&self, out: &mut String) {
        let _ = write!(out, "circuit {} ", self.name);
        self.params.pretty(out);
        out.push_str(" = ");
        self.body.pretty(out);
    }
}

impl Pretty for Item {
    fn pretty(&self, out: &mut String) {
        match self {
            Item::Classical { name, card } => {
                let _ = write!(out, "classical {name} {card}");
            }
            Item::GateDecl { name, input, output } => {
                let _ = write!(out, "gate {name} : ");
                input.pretty(out);
                out.push_str(" -> ");
                output.pretty(out);
            }
            Item::Def(d) => d.pretty(out),
            Item::Circuit(c) => c.pretty(out),
        }
    }
}

impl Pretty for Program {
    fn pretty(&self, out: &mut String) {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                out.push_str("\n\n");
            }
            item.pretty(out);
        }
        out.push('\n');
    }
}
