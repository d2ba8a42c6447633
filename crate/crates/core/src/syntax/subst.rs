//! Capture-avoiding substitution and alpha-equivalence.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{CircuitTerm, HostTerm, Pattern};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubstError {
    #[error("pattern shape mismatch: cannot substitute {to} for {from}")]
    ShapeMismatch { from: String, to: String },
}

/// `base` if unused, else the first `base_N` not in `used`.
pub fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|n| format!("{base}_{n}"))
        .find(|c| !used.contains(c))
        .expect("unbounded name supply")
}

fn pattern_str(p: &Pattern) -> String {
    super::pretty_print(p)
}

/// Builds the wire-to-pattern binding for `C[from ↦ to]`.
pub(crate) fn pattern_binding(
    from: &Pattern,
    to: &Pattern,
    out: &mut Vec<(String, Pattern)>,
) -> Result<(), SubstError> {
    match (from, to) {
        (Pattern::Wire(w), _) => {
            out.push((w.clone(), to.clone()));
            Ok(())
        }
        (Pattern::Unit, Pattern::Unit) => Ok(()),
        (Pattern::Pair(f1, f2), Pattern::Pair(t1, t2)) => {
            pattern_binding(f1, t1, out)?;
            pattern_binding(f2, t2, out)
        }
        _ => Err(SubstError::ShapeMismatch {
            from: pattern_str(from),
            to: pattern_str(to),
        }),
    }
}

/// `C[from ↦ to]`, decomposing the two patterns componentwise.
pub fn subst_pattern(
    c: &CircuitTerm,
    from: &Pattern,
    to: &Pattern,
) -> Result<CircuitTerm, SubstError> {
    let mut binding = Vec::new();
    pattern_binding(from, to, &mut binding)?;
    Ok(subst_wires(c, &binding))
}

fn apply_to_pattern(p: &Pattern, map: &[(String, Pattern)]) -> Pattern {
    match p {
        Pattern::Unit => Pattern::Unit,
        Pattern::Wire(w) => map
            .iter()
            .rev()
            .find(|(k, _)| k == w)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| p.clone()),
        Pattern::Pair(a, b) => Pattern::pair(apply_to_pattern(a, map), apply_to_pattern(b, map)),
    }
}

pub(crate) fn all_wire_names(c: &CircuitTerm, out: &mut BTreeSet<String>) {
    let add = |p: &Pattern, out: &mut BTreeSet<String>| {
        out.extend(p.wires().into_iter().map(String::from));
    };
    match c {
        CircuitTerm::Output(p) | CircuitTerm::Unbox(_, p) => add(p, out),
        CircuitTerm::Init(_) => {}
        CircuitTerm::Compose(p, a, b) => {
            add(p, out);
            all_wire_names(a, out);
            all_wire_names(b, out);
        }
        CircuitTerm::UnitElim(p, r) | CircuitTerm::Lift(_, p, r) | CircuitTerm::QLift(_, p, r) => {
            add(p, out);
            all_wire_names(r, out);
        }
        CircuitTerm::PairElim(w1, w2, p, r) => {
            out.insert(w1.clone());
            out.insert(w2.clone());
            add(p, out);
            all_wire_names(r, out);
        }
        CircuitTerm::Gate(p2, _, p1, r) => {
            add(p1, out);
            add(p2, out);
            all_wire_names(r, out);
        }
    }
}

/// Renames binders in `binder` that clash with `avoid`, returning the new
/// binder and the renaming to apply to its scope.
fn freshen_binder(
    binder: &Pattern,
    avoid: &BTreeSet<String>,
    scope: &CircuitTerm,
) -> (Pattern, Vec<(String, Pattern)>) {
    let mut used = avoid.clone();
    all_wire_names(scope, &mut used);
    used.extend(binder.wires().into_iter().map(String::from));
    let mut renaming = Vec::new();
    let fresh = rename_pattern(binder, avoid, &mut used, &mut renaming);
    (fresh, renaming)
}

fn rename_pattern(
    p: &Pattern,
    avoid: &BTreeSet<String>,
    used: &mut BTreeSet<String>,
    renaming: &mut Vec<(String, Pattern)>,
) -> Pattern {
    match p {
        Pattern::Unit => Pattern::Unit,
        Pattern::Wire(w) if avoid.contains(w) => {
            let n = fresh_name(w, used);
            used.insert(n.clone());
            renaming.push((w.clone(), Pattern::Wire(n.clone())));
            Pattern::Wire(n)
        }
        Pattern::Wire(_) => p.clone(),
        Pattern::Pair(a, b) => Pattern::pair(
            rename_pattern(a, avoid, used, renaming),
            rename_pattern(b, avoid, used, renaming),
        ),
    }
}

/// Simultaneous capture-avoiding substitution of patterns for wires.
pub fn subst_wires(c: &CircuitTerm, map: &[(String, Pattern)]) -> CircuitTerm {
    if map.is_empty() {
        return c.clone();
    }
    match c {
        CircuitTerm::Output(p) => CircuitTerm::Output(apply_to_pattern(p, map)),
        CircuitTerm::Unbox(t, p) => CircuitTerm::Unbox(t.clone(), apply_to_pattern(p, map)),
        CircuitTerm::Init(t) => CircuitTerm::Init(t.clone()),
        CircuitTerm::Compose(p, first, rest) => {
            let first = subst_wires(first, map);
            let (p, rest) = under_binder(p, rest, map);
            CircuitTerm::Compose(p, Box::new(first), Box::new(rest))
        }
        CircuitTerm::Gate(p2, g, p1, rest) => {
            let p1 = apply_to_pattern(p1, map);
            let (p2, rest) = under_binder(p2, rest, map);
            CircuitTerm::Gate(p2, g.clone(), p1, Box::new(rest))
        }
        CircuitTerm::UnitElim(p, rest) => {
            CircuitTerm::UnitElim(apply_to_pattern(p, map), Box::new(subst_wires(rest, map)))
        }
        CircuitTerm::Lift(x, p, rest) => CircuitTerm::Lift(
            x.clone(),
            apply_to_pattern(p, map),
            Box::new(subst_wires(rest, map)),
        ),
        CircuitTerm::QLift(x, p, rest) => CircuitTerm::QLift(
            x.clone(),
            apply_to_pattern(p, map),
            Box::new(subst_wires(rest, map)),
        ),
        CircuitTerm::PairElim(w1, w2, p, rest) => {
            let p = apply_to_pattern(p, map);
            let binder = Pattern::pair(Pattern::Wire(w1.clone()), Pattern::Wire(w2.clone()));
            let (binder, rest) = under_binder(&binder, rest, map);
            match binder {
                Pattern::Pair(a, b) => match (*a, *b) {
                    (Pattern::Wire(a), Pattern::Wire(b)) => {
                        CircuitTerm::PairElim(a, b, p, Box::new(rest))
                    }
                    _ => unreachable!("renaming preserves pattern shape"),
                },
                _ => unreachable!("renaming preserves pattern shape"),
            }
        }
    }
}

fn under_binder(
    binder: &Pattern,
    scope: &CircuitTerm,
    map: &[(String, Pattern)],
) -> (Pattern, CircuitTerm) {
    let bound: Vec<&str> = binder.wires();
    let free = scope.free_wires();
    let inner: Vec<(String, Pattern)> = map
        .iter()
        .filter(|(k, _)| !bound.contains(&k.as_str()) && free.contains(k))
        .cloned()
        .collect();
    if inner.is_empty() {
        return (binder.clone(), scope.clone());
    }
    let mut avoid = BTreeSet::new();
    for (_, v) in &inner {
        avoid.extend(v.wires().into_iter().map(String::from));
    }
    if bound.iter().any(|w| avoid.contains(*w)) {
        let (fresh, renaming) = freshen_binder(binder, &avoid, scope);
        let renamed = subst_wires(scope, &renaming);
        (fresh, subst_wires(&renamed, &inner))
    } else {
        (binder.clone(), subst_wires(scope, &inner))
    }
}

pub(crate) fn host_free_vars(t: &HostTerm, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t {
        HostTerm::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        HostTerm::Lambda(x, _, b) => {
            bound.push(x.clone());
            host_free_vars(b, bound, out);
            bound.pop();
        }
        HostTerm::LetBind(a, x, b) => {
            host_free_vars(a, bound, out);
            bound.push(x.clone());
            host_free_vars(b, bound, out);
            bound.pop();
        }
        HostTerm::App(a, b) | HostTerm::Pair(a, b) | HostTerm::Prim(_, a, b) => {
            host_free_vars(a, bound, out);
            host_free_vars(b, bound, out);
        }
        HostTerm::If(a, b, c) => {
            host_free_vars(a, bound, out);
            host_free_vars(b, bound, out);
            host_free_vars(c, bound, out);
        }
        HostTerm::Proj1(a)
        | HostTerm::Proj2(a)
        | HostTerm::Return(a)
        | HostTerm::GateFamily(_, a) => host_free_vars(a, bound, out),
        HostTerm::Box(_, _, c) | HostTerm::Run(c) | HostTerm::QRun(c) => {
            circuit_host_free_vars(c, bound, out)
        }
        HostTerm::UnitVal | HostTerm::ClassicalLit { .. } | HostTerm::Int(_) | HostTerm::Fix(..) => {}
    }
}

pub(crate) fn circuit_host_free_vars(
    c: &CircuitTerm,
    bound: &mut Vec<String>,
    out: &mut BTreeSet<String>,
) {
    match c {
        CircuitTerm::Output(_) => {}
        CircuitTerm::Unbox(t, _) | CircuitTerm::Init(t) => host_free_vars(t, bound, out),
        CircuitTerm::Compose(_, a, b) => {
            circuit_host_free_vars(a, bound, out);
            circuit_host_free_vars(b, bound, out);
        }
        CircuitTerm::UnitElim(_, r) | CircuitTerm::PairElim(_, _, _, r) | CircuitTerm::Gate(_, _, _, r) => {
            circuit_host_free_vars(r, bound, out)
        }
        CircuitTerm::Lift(x, _, r) | CircuitTerm::QLift(x, _, r) => {
            bound.push(x.clone());
            circuit_host_free_vars(r, bound, out);
            bound.pop();
        }
    }
}

fn all_host_names(t: &HostTerm, out: &mut BTreeSet<String>) {
    let mut fv = BTreeSet::new();
    host_free_vars(t, &mut Vec::new(), &mut fv);
    out.extend(fv);
    collect_host_binders(t, out);
}

fn collect_host_binders(t: &HostTerm, out: &mut BTreeSet<String>) {
    match t {
        HostTerm::Lambda(x, _, b) => {
            out.insert(x.clone());
            collect_host_binders(b, out);
        }
        HostTerm::LetBind(a, x, b) => {
            out.insert(x.clone());
            collect_host_binders(a, out);
            collect_host_binders(b, out);
        }
        HostTerm::App(a, b) | HostTerm::Pair(a, b) | HostTerm::Prim(_, a, b) => {
            collect_host_binders(a, out);
            collect_host_binders(b, out);
        }
        HostTerm::If(a, b, c) => {
            collect_host_binders(a, out);
            collect_host_binders(b, out);
            collect_host_binders(c, out);
        }
        HostTerm::Proj1(a)
        | HostTerm::Proj2(a)
        | HostTerm::Return(a)
        | HostTerm::GateFamily(_, a) => collect_host_binders(a, out),
        HostTerm::Box(_, _, c) | HostTerm::Run(c) | HostTerm::QRun(c) => {
            collect_circuit_host_binders(c, out)
        }
        _ => {}
    }
}

fn collect_circuit_host_binders(c: &CircuitTerm, out: &mut BTreeSet<String>) {
    match c {
        CircuitTerm::Output(_) => {}
        CircuitTerm::Unbox(t, _) | CircuitTerm::Init(t) => collect_host_binders(t, out),
        CircuitTerm::Compose(_, a, b) => {
            collect_circuit_host_binders(a, out);
            collect_circuit_host_binders(b, out);
        }
        CircuitTerm::UnitElim(_, r) | CircuitTerm::PairElim(_, _, _, r) | CircuitTerm::Gate(_, _, _, r) => {
            collect_circuit_host_binders(r, out)
        }
        CircuitTerm::Lift(x, _, r) | CircuitTerm::QLift(x, _, r) => {
            out.insert(x.clone());
            collect_circuit_host_binders(r, out);
        }
    }
}

/// `t[x ↦ s]`, renaming host binders that would capture free variables of `s`.
pub fn subst_host_in_term(t: &HostTerm, x: &str, s: &HostTerm) -> HostTerm {
    let fv_s = s.free_vars();
    subst_term(t, x, s, &fv_s)
}

/// `C[x ↦ s]` for a host variable `x` occurring in host subterms of `C`.
pub fn subst_host_in_circuit(c: &CircuitTerm, x: &str, s: &HostTerm) -> CircuitTerm {
    let fv_s = s.free_vars();
    subst_circ(c, x, s, &fv_s)
}

fn rename_host_binder(
    y: &str,
    x: &str,
    fv_s: &BTreeSet<String>,
    extra: impl FnOnce(&mut BTreeSet<String>),
) -> String {
    let mut used = fv_s.clone();
    used.insert(x.to_string());
    used.insert(y.to_string());
    extra(&mut used);
    fresh_name(y, &used)
}

fn subst_term(t: &HostTerm, x: &str, s: &HostTerm, fv_s: &BTreeSet<String>) -> HostTerm {
    let go = |u: &HostTerm| Box::new(subst_term(u, x, s, fv_s));
    match t {
        HostTerm::Var(y) if y == x => s.clone(),
        HostTerm::Var(_)
        | HostTerm::UnitVal
        | HostTerm::ClassicalLit { .. }
        | HostTerm::Int(_)
        | HostTerm::Fix(..) => t.clone(),
        HostTerm::Lambda(y, ty, body) => {
            if y == x {
                return t.clone();
            }
            if fv_s.contains(y) && body.free_vars().contains(x) {
                let y2 = rename_host_binder(y, x, fv_s, |u| all_host_names(body, u));
                let body = subst_term(body, y, &HostTerm::Var(y2.clone()), &[y2.clone()].into());
                HostTerm::Lambda(y2, ty.clone(), Box::new(subst_term(&body, x, s, fv_s)))
            } else {
                HostTerm::Lambda(y.clone(), ty.clone(), go(body))
            }
        }
        HostTerm::LetBind(a, y, body) => {
            let a = go(a);
            if y == x {
                return HostTerm::LetBind(a, y.clone(), body.clone());
            }
            if fv_s.contains(y) && body.free_vars().contains(x) {
                let y2 = rename_host_binder(y, x, fv_s, |u| all_host_names(body, u));
                let body = subst_term(body, y, &HostTerm::Var(y2.clone()), &[y2.clone()].into());
                HostTerm::LetBind(a, y2, Box::new(subst_term(&body, x, s, fv_s)))
            } else {
                HostTerm::LetBind(a, y.clone(), go(body))
            }
        }
        HostTerm::App(a, b) => HostTerm::App(go(a), go(b)),
        HostTerm::Pair(a, b) => HostTerm::Pair(go(a), go(b)),
        HostTerm::Prim(op, a, b) => HostTerm::Prim(*op, go(a), go(b)),
        HostTerm::If(a, b, c) => HostTerm::If(go(a), go(b), go(c)),
        HostTerm::Proj1(a) => HostTerm::Proj1(go(a)),
        HostTerm::Proj2(a) => HostTerm::Proj2(go(a)),
        HostTerm::Return(a) => HostTerm::Return(go(a)),
        HostTerm::GateFamily(n, a) => HostTerm::GateFamily(n.clone(), go(a)),
        HostTerm::Box(p, w, c) => {
            HostTerm::Box(p.clone(), w.clone(), Box::new(subst_circ(c, x, s, fv_s)))
        }
        HostTerm::Run(c) => HostTerm::Run(Box::new(subst_circ(c, x, s, fv_s))),
        HostTerm::QRun(c) => HostTerm::QRun(Box::new(subst_circ(c, x, s, fv_s))),
    }
}

fn circuit_mentions_host(c: &CircuitTerm, x: &str) -> bool {
    let mut out = BTreeSet::new();
    circuit_host_free_vars(c, &mut Vec::new(), &mut out);
    out.contains(x)
}

fn subst_circ(c: &CircuitTerm, x: &str, s: &HostTerm, fv_s: &BTreeSet<String>) -> CircuitTerm {
    let go = |r: &CircuitTerm| Box::new(subst_circ(r, x, s, fv_s));
    match c {
        CircuitTerm::Output(_) => c.clone(),
        CircuitTerm::Unbox(t, p) => CircuitTerm::Unbox(Box::new(subst_term(t, x, s, fv_s)), p.clone()),
        CircuitTerm::Init(t) => CircuitTerm::Init(Box::new(subst_term(t, x, s, fv_s))),
        CircuitTerm::Compose(p, a, b) => CircuitTerm::Compose(p.clone(), go(a), go(b)),
        CircuitTerm::UnitElim(p, r) => CircuitTerm::UnitElim(p.clone(), go(r)),
        CircuitTerm::PairElim(w1, w2, p, r) => {
            CircuitTerm::PairElim(w1.clone(), w2.clone(), p.clone(), go(r))
        }
        CircuitTerm::Gate(p2, g, p1, r) => CircuitTerm::Gate(p2.clone(), g.clone(), p1.clone(), go(r)),
        CircuitTerm::Lift(y, p, r) | CircuitTerm::QLift(y, p, r) => {
            let rebuild = |y: String, r: Box<CircuitTerm>| match c {
                CircuitTerm::Lift(..) => CircuitTerm::Lift(y, p.clone(), r),
                _ => CircuitTerm::QLift(y, p.clone(), r),
            };
            if y == x {
                return c.clone();
            }
            if fv_s.contains(y) && circuit_mentions_host(r, x) {
                let y2 = rename_host_binder(y, x, fv_s, |u| {
                    let mut fv = BTreeSet::new();
                    circuit_host_free_vars(r, &mut Vec::new(), &mut fv);
                    u.extend(fv);
                    collect_circuit_host_binders(r, u);
                });
                let r = subst_circ(r, y, &HostTerm::Var(y2.clone()), &[y2.clone()].into());
                rebuild(y2, Box::new(subst_circ(&r, x, s, fv_s)))
            } else {
                rebuild(y.clone(), go(r))
            }
        }
    }
}

/// Bound-name correspondence used by the alpha-equivalence check.
#[derive(Default)]
struct AlphaEnv {
    wires: Vec<(String, String)>,
    vars: Vec<(String, String)>,
}

fn lookup_eq(env: &[(String, String)], a: &str, b: &str) -> bool {
    for (l, r) in env.iter().rev() {
        if l == a || r == b {
            return l == a && r == b;
        }
    }
    a == b
}

fn bind_patterns(env: &mut AlphaEnv, a: &Pattern, b: &Pattern) -> Option<usize> {
    let n = env.wires.len();
    fn go(env: &mut AlphaEnv, a: &Pattern, b: &Pattern) -> bool {
        match (a, b) {
            (Pattern::Unit, Pattern::Unit) => true,
            (Pattern::Wire(x), Pattern::Wire(y)) => {
                env.wires.push((x.clone(), y.clone()));
                true
            }
            (Pattern::Pair(a1, a2), Pattern::Pair(b1, b2)) => go(env, a1, b1) && go(env, a2, b2),
            _ => false,
        }
    }
    if go(env, a, b) {
        Some(n)
    } else {
        env.wires.truncate(n);
        None
    }
}

fn pattern_eq(env: &AlphaEnv, a: &Pattern, b: &Pattern) -> bool {
    match (a, b) {
        (Pattern::Unit, Pattern::Unit) => true,
        (Pattern::Wire(x), Pattern::Wire(y)) => lookup_eq(&env.wires, x, y),
        (Pattern::Pair(a1, a2), Pattern::Pair(b1, b2)) => {
            pattern_eq(env, a1, b1) && pattern_eq(env, a2, b2)
        }
        _ => false,
    }
}

fn circ_eq(env: &mut AlphaEnv, a: &CircuitTerm, b: &CircuitTerm) -> bool {
    use CircuitTerm as C;
    match (a, b) {
        (C::Output(p), C::Output(q)) => pattern_eq(env, p, q),
        (C::Unbox(t, p), C::Unbox(u, q)) => pattern_eq(env, p, q) && term_eq(env, t, u),
        (C::Init(t), C::Init(u)) => term_eq(env, t, u),
        (C::Compose(p, a1, a2), C::Compose(q, b1, b2)) => {
            if !circ_eq(env, a1, b1) {
                return false;
            }
            let Some(n) = bind_patterns(env, p, q) else { return false };
            let r = circ_eq(env, a2, b2);
            env.wires.truncate(n);
            r
        }
        (C::Gate(p2, g, p1, r1), C::Gate(q2, h, q1, r2)) => {
            if g != h || !pattern_eq(env, p1, q1) {
                return false;
            }
            let Some(n) = bind_patterns(env, p2, q2) else { return false };
            let r = circ_eq(env, r1, r2);
            env.wires.truncate(n);
            r
        }
        (C::UnitElim(p, r1), C::UnitElim(q, r2)) => pattern_eq(env, p, q) && circ_eq(env, r1, r2),
        (C::PairElim(a1, a2, p, r1), C::PairElim(b1, b2, q, r2)) => {
            if !pattern_eq(env, p, q) {
                return false;
            }
            let n = env.wires.len();
            env.wires.push((a1.clone(), b1.clone()));
            env.wires.push((a2.clone(), b2.clone()));
            let r = circ_eq(env, r1, r2);
            env.wires.truncate(n);
            r
        }
        (C::Lift(x, p, r1), C::Lift(y, q, r2)) | (C::QLift(x, p, r1), C::QLift(y, q, r2)) => {
            if !pattern_eq(env, p, q) {
                return false;
            }
            env.vars.push((x.clone(), y.clone()));
            let r = circ_eq(env, r1, r2);
            env.vars.pop();
            r
        }
        _ => false,
    }
}

fn term_eq(env: &mut AlphaEnv, a: &HostTerm, b: &HostTerm) -> bool {
    use HostTerm as H;
    match (a, b) {
        (H::Var(x), H::Var(y)) => lookup_eq(&env.vars, x, y),
        (H::Lambda(x, s, t), H::Lambda(y, s2, u)) => {
            if s != s2 {
                return false;
            }
            env.vars.push((x.clone(), y.clone()));
            let r = term_eq(env, t, u);
            env.vars.pop();
            r
        }
        (H::LetBind(a1, x, t), H::LetBind(b1, y, u)) => {
            if !term_eq(env, a1, b1) {
                return false;
            }
            env.vars.push((x.clone(), y.clone()));
            let r = term_eq(env, t, u);
            env.vars.pop();
            r
        }
        (H::App(a1, a2), H::App(b1, b2)) | (H::Pair(a1, a2), H::Pair(b1, b2)) => {
            term_eq(env, a1, b1) && term_eq(env, a2, b2)
        }
        (H::Prim(o1, a1, a2), H::Prim(o2, b1, b2)) => {
            o1 == o2 && term_eq(env, a1, b1) && term_eq(env, a2, b2)
        }
        (H::If(a1, a2, a3), H::If(b1, b2, b3)) => {
            term_eq(env, a1, b1) && term_eq(env, a2, b2) && term_eq(env, a3, b3)
        }
        (H::Proj1(t), H::Proj1(u))
        | (H::Proj2(t), H::Proj2(u))
        | (H::Return(t), H::Return(u)) => term_eq(env, t, u),
        (H::GateFamily(n, t), H::GateFamily(m, u)) => n == m && term_eq(env, t, u),
        (H::Box(p, w, c), H::Box(q, v, d)) => {
            if w != v {
                return false;
            }
            let saved = std::mem::take(&mut env.wires);
            let r = match bind_patterns(env, p, q) {
                Some(_) => circ_eq(env, c, d),
                None => false,
            };
            env.wires = saved;
            r
        }
        (H::Run(c), H::Run(d)) | (H::QRun(c), H::QRun(d)) => {
            let saved = std::mem::take(&mut env.wires);
            let r = circ_eq(env, c, d);
            env.wires = saved;
            r
        }
        (H::UnitVal, H::UnitVal) => true,
        (H::ClassicalLit { .. }, H::ClassicalLit { .. })
        | (H::Int(_), H::Int(_))
        | (H::Fix(..), H::Fix(..)) => a == b,
        _ => false,
    }
}

pub fn alpha_eq_circuit(a: &CircuitTerm, b: &CircuitTerm) -> bool {
    circ_eq(&mut AlphaEnv::default(), a, b)
}

pub fn alpha_eq_host(a: &HostTerm, b: &HostTerm) -> bool {
    term_eq(&mut AlphaEnv::default(), a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_circuit, parse_host_term};

    fn c(s: &str) -> CircuitTerm {
        parse_circuit(s).unwrap()
    }

    #[test]
    fn output_renaming() {
        let out = subst_pattern(&c("output w"), &Pattern::wire("w"), &Pattern::wire("v")).unwrap();
        assert_eq!(out, c("output v"));
    }

    #[test]
    fn pair_substitution_is_componentwise() {
        let body = c("(x, y) <- gate CNOT (w1, w2); output (y, x)");
        let from = Pattern::pair(Pattern::wire("w1"), Pattern::wire("w2"));
        let to = Pattern::pair(Pattern::wire("p1"), Pattern::wire("p2"));
        let out = subst_pattern(&body, &from, &to).unwrap();
        assert_eq!(out, c("(x, y) <- gate CNOT (p1, p2); output (y, x)"));
    }

    #[test]
    fn shape_mismatch_reported() {
        let from = Pattern::pair(Pattern::wire("a"), Pattern::wire("b"));
        let err = subst_pattern(&c("output (a, b)"), &from, &Pattern::wire("v")).unwrap_err();
        assert!(matches!(err, SubstError::ShapeMismatch { .. }));
    }

    #[test]
    fn wire_substitution_renames_clashing_binders() {
        // b is bound by the gate and also occurs in the replacement.
        let body = c("b <- gate H a; output (b, w)");
        let out = subst_wires(&body, &[("w".into(), Pattern::wire("b"))]);
        match &out {
            CircuitTerm::Gate(Pattern::Wire(nb), _, _, rest) => {
                assert_ne!(nb, "b");
                assert_eq!(
                    **rest,
                    CircuitTerm::Output(Pattern::pair(Pattern::wire(nb), Pattern::wire("b")))
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn host_substitution_avoids_lift_capture() {
        // Substituting y ↦ x under a binder for x must rename the binder.
        let body = c("x <= lift a; unbox (f y x) b");
        let out = subst_host_in_circuit(&body, "y", &HostTerm::var("x"));
        match &out {
            CircuitTerm::Lift(x2, _, rest) => {
                assert_ne!(x2, "x");
                let expected = CircuitTerm::unbox(
                    HostTerm::app(
                        HostTerm::app(HostTerm::var("f"), HostTerm::var("x")),
                        HostTerm::var(x2),
                    ),
                    Pattern::wire("b"),
                );
                assert_eq!(**rest, expected);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn host_substitution_stops_at_shadowing() {
        let t = parse_host_term("lambda x : int. x + y").unwrap();
        assert_eq!(subst_host_in_term(&t, "x", &HostTerm::Int(3)), t);
        let t2 = subst_host_in_term(&t, "y", &HostTerm::Int(3));
        assert_eq!(t2, parse_host_term("lambda x : int. x + 3").unwrap());
    }

    #[test]
    fn alpha_equivalence() {
        assert!(alpha_eq_circuit(
            &c("b <- gate H a; output b"),
            &c("z <- gate H a; output z")
        ));
        assert!(!alpha_eq_circuit(
            &c("b <- gate H a; output b"),
            &c("b <- gate H a2; output b")
        ));
        assert!(alpha_eq_host(
            &parse_host_term("box q : qubit => output q").unwrap(),
            &parse_host_term("box r : qubit => output r").unwrap()
        ));
    }
}
