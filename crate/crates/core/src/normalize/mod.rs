//! Oriented circuit equations and a leftmost-outermost rewriting engine.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::denote::{Config, DenoteError, Env, Evaluator};
use crate::syntax::{
    fresh_name, subst_host_in_circuit, subst_host_in_term, subst_pattern, subst_wires, CircuitTerm,
    HostTerm, Pattern,
};
use crate::typecheck::WireContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    UnboxBox,
    OutputSubst,
    GateCommute,
    LiftCommute,
    UnitEta,
    PairEta,
    UnitCommute,
    PairCommute,
    LiftInit,
    InitLift,
}

impl Rule {
    /// All rules in priority order.
    pub const ALL: [Rule; 10] = [
        Rule::UnboxBox,
        Rule::OutputSubst,
        Rule::GateCommute,
        Rule::LiftCommute,
        Rule::UnitEta,
        Rule::PairEta,
        Rule::UnitCommute,
        Rule::PairCommute,
        Rule::LiftInit,
        Rule::InitLift,
    ];

    /// The rules enabled by default.
    pub const STRUCTURAL: [Rule; 8] = [
        Rule::UnboxBox,
        Rule::OutputSubst,
        Rule::GateCommute,
        Rule::LiftCommute,
        Rule::UnitEta,
        Rule::PairEta,
        Rule::UnitCommute,
        Rule::PairCommute,
    ];

    pub fn rules(copower: bool) -> &'static [Rule] {
        if copower {
            &Rule::ALL
        } else {
            &Rule::STRUCTURAL
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One rewrite: the rule and the position of the redex, as a dotted path
/// of child indices from the root (`root` for the root itself).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub step: usize,
    pub rule: Rule,
    pub span: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub term: CircuitTerm,
    pub trace: Vec<TraceEntry>,
    /// False when the step limit stopped rewriting early.
    pub complete: bool,
}

fn rename_wires(p: &Pattern, clash: &BTreeSet<String>, used: &mut BTreeSet<String>) -> Vec<(String, Pattern)> {
    let mut map = Vec::new();
    for w in p.wires() {
        if clash.contains(w) {
            let f = fresh_name(w, used);
            used.insert(f.clone());
            map.push((w.to_string(), Pattern::wire(f.as_str())));
        }
    }
    map
}

fn rename_in_pattern(p: &Pattern, map: &[(String, Pattern)]) -> Pattern {
    match p {
        Pattern::Unit => Pattern::Unit,
        Pattern::Wire(w) => map.iter().find(|(k, _)| k == w).map_or_else(|| p.clone(), |(_, v)| v.clone()),
        Pattern::Pair(a, b) => Pattern::pair(rename_in_pattern(a, map), rename_in_pattern(b, map)),
    }
}

fn all_names(parts: &[&CircuitTerm], pats: &[&Pattern]) -> BTreeSet<String> {
    let mut used = BTreeSet::new();
    for c in parts {
        used.extend(c.wire_names());
    }
    for p in pats {
        used.extend(p.wires().into_iter().map(String::from));
    }
    used
}

/// Applies `rule` at the root of `c`, if it matches.
pub fn rewrite_at_root(rule: Rule, c: &CircuitTerm) -> Option<CircuitTerm> {
    use CircuitTerm as C;
    match (rule, c) {
        (Rule::UnboxBox, C::Unbox(t, p)) => match t.as_ref() {
            HostTerm::Box(w, _, body) => subst_pattern(body, w, p).ok(),
            _ => None,
        },
        (Rule::OutputSubst, C::Compose(p, first, rest)) => match first.as_ref() {
            C::Output(p2) => subst_pattern(rest, p, p2).ok(),
            _ => None,
        },
        (Rule::GateCommute, C::Compose(w, first, rest)) => match first.as_ref() {
            C::Gate(p2, g, p1, n) => {
                let clash: BTreeSet<String> = rest.free_wires().into_iter().collect();
                let mut used = all_names(&[n, rest], &[w, p2, p1]);
                let map = rename_wires(p2, &clash, &mut used);
                let (p2, n) = (rename_in_pattern(p2, &map), subst_wires(n, &map));
                Some(C::Gate(
                    p2,
                    g.clone(),
                    p1.clone(),
                    Box::new(C::compose(w.clone(), n, (**rest).clone())),
                ))
            }
            _ => None,
        },
        (Rule::LiftCommute, C::Compose(w, first, rest)) => match first.as_ref() {
            C::Lift(x, p, n) => {
                let (x, n) = if rest.host_free_vars().contains(x) {
                    let mut used = rest.host_free_vars();
                    used.extend(n.host_free_vars());
                    used.insert(x.clone());
                    let x2 = fresh_name(x, &used);
                    let n2 = subst_host_in_circuit(n, x, &HostTerm::var(&x2));
                    (x2, n2)
                } else {
                    (x.clone(), (**n).clone())
                };
                Some(C::lift(&x, p.clone(), C::compose(w.clone(), n, (**rest).clone())))
            }
            _ => None,
        },
        (Rule::UnitEta, C::UnitElim(Pattern::Unit, rest)) => Some((**rest).clone()),
        (Rule::PairEta, C::PairElim(w1, w2, Pattern::Pair(p1, p2), rest)) => {
            // Simultaneous substitution; the right-hand patterns are free in
            // the outer context, so they cannot mention w1 or w2 as bound.
            Some(subst_wires(rest, &[(w1.clone(), (**p1).clone()), (w2.clone(), (**p2).clone())]))
        }
        (Rule::UnitCommute, C::Compose(w, first, rest)) => match first.as_ref() {
            C::UnitElim(p, n) => Some(C::UnitElim(
                p.clone(),
                Box::new(C::compose(w.clone(), (**n).clone(), (**rest).clone())),
            )),
            _ => None,
        },
        (Rule::PairCommute, C::Compose(w, first, rest)) => match first.as_ref() {
            C::PairElim(w1, w2, p, n) => {
                let clash: BTreeSet<String> = rest.free_wires().into_iter().collect();
                let both = Pattern::pair(Pattern::wire(w1.as_str()), Pattern::wire(w2.as_str()));
                let mut used = all_names(&[n, rest], &[w, &both, p]);
                let map = rename_wires(&both, &clash, &mut used);
                let Pattern::Pair(a, b) = rename_in_pattern(&both, &map) else { unreachable!() };
                let (Pattern::Wire(a), Pattern::Wire(b)) = (*a, *b) else { unreachable!() };
                let n = subst_wires(n, &map);
                Some(C::PairElim(a, b, p.clone(), Box::new(C::compose(w.clone(), n, (**rest).clone()))))
            }
            _ => None,
        },
        (Rule::LiftInit, C::Lift(x, p, rest)) => match rest.as_ref() {
            C::Init(t) if matches!(t.as_ref(), HostTerm::Var(y) if y == x) => Some(C::Output(p.clone())),
            _ => None,
        },
        (Rule::InitLift, C::Compose(p, first, rest)) => match (first.as_ref(), rest.as_ref()) {
            (C::Init(t), C::Lift(x, q, body)) if q == p => {
                let bound: BTreeSet<String> = p.wires().into_iter().map(String::from).collect();
                if body.free_wires().iter().any(|w| bound.contains(w)) {
                    return None;
                }
                Some(subst_host_in_circuit(body, x, t))
            }
            _ => None,
        },
        _ => None,
    }
}

fn children(c: &CircuitTerm) -> Vec<&CircuitTerm> {
    match c {
        CircuitTerm::Compose(_, a, b) => vec![a, b],
        CircuitTerm::UnitElim(_, r)
        | CircuitTerm::PairElim(_, _, _, r)
        | CircuitTerm::Gate(_, _, _, r)
        | CircuitTerm::Lift(_, _, r)
        | CircuitTerm::QLift(_, _, r) => vec![r],
        CircuitTerm::Output(_) | CircuitTerm::Unbox(..) | CircuitTerm::Init(_) => vec![],
    }
}

fn replace_child(c: &CircuitTerm, i: usize, new: CircuitTerm) -> CircuitTerm {
    let mut out = c.clone();
    match (&mut out, i) {
        (CircuitTerm::Compose(_, a, _), 0) => **a = new,
        (CircuitTerm::Compose(_, _, b), 1) => **b = new,
        (
            CircuitTerm::UnitElim(_, r)
            | CircuitTerm::PairElim(_, _, _, r)
            | CircuitTerm::Gate(_, _, _, r)
            | CircuitTerm::Lift(_, _, r)
            | CircuitTerm::QLift(_, _, r),
            0,
        ) => **r = new,
        _ => unreachable!("child index out of range"),
    }
    out
}

fn path_string(path: &[usize]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        path.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
    }
}

/// Finds the leftmost-outermost position where one of `rules` applies,
/// trying rules in order at each position.
fn step(c: &CircuitTerm, rules: &[Rule], path: &mut Vec<usize>) -> Option<(CircuitTerm, Rule, String)> {
    for &r in rules {
        if let Some(new) = rewrite_at_root(r, c) {
            return Some((new, r, path_string(path)));
        }
    }
    for (i, child) in children(c).into_iter().enumerate() {
        path.push(i);
        let found = step(child, rules, path);
        path.pop();
        if let Some((new, r, at)) = found {
            return Some((replace_child(c, i, new), r, at));
        }
    }
    None
}

/// One leftmost-outermost application of `rule`, or `None` if no redex.
pub fn apply_rule(rule: Rule, c: &CircuitTerm) -> Option<CircuitTerm> {
    step(c, &[rule], &mut Vec::new()).map(|(t, _, _)| t)
}

/// Rewrites until no rule applies or `max_steps` rewrites have been made.
pub fn normalize(c: &CircuitTerm, max_steps: usize, rules: &[Rule]) -> Normalized {
    let mut term = c.clone();
    let mut trace = Vec::new();
    while trace.len() < max_steps {
        match step(&term, rules, &mut Vec::new()) {
            Some((next, rule, span)) => {
                trace.push(TraceEntry { step: trace.len() + 1, rule, span });
                term = next;
            }
            None => return Normalized { term, trace, complete: true },
        }
    }
    let complete = step(&term, rules, &mut Vec::new()).is_none();
    Normalized { term, trace, complete }
}

/// Replays a trace from `c`; `None` if some step does not match.
pub fn replay(c: &CircuitTerm, trace: &[TraceEntry]) -> Option<CircuitTerm> {
    let mut term = c.clone();
    for e in trace {
        let (next, rule, span) = step(&term, &[e.rule], &mut Vec::new())?;
        if rule != e.rule || span != e.span {
            return None;
        }
        term = next;
    }
    Some(term)
}

/// Inlines non-recursive global definitions and reduces host beta and
/// projection redexes everywhere, so that circuit combinators applied to
/// literal boxes become literal boxes. No effects are evaluated.
pub fn inline_host(t: &HostTerm, globals: &[(String, HostTerm)], fuel: &mut usize) -> HostTerm {
    use HostTerm as H;
    if *fuel == 0 {
        return t.clone();
    }
    match t {
        H::Var(x) => match globals.iter().rev().find(|(n, _)| n == x) {
            Some((_, body)) => {
                *fuel -= 1;
                inline_host(body, globals, fuel)
            }
            None => t.clone(),
        },
        H::App(f, a) => {
            let f2 = inline_host(f, globals, fuel);
            let a2 = inline_host(a, globals, fuel);
            match f2 {
                H::Lambda(x, _, body) if *fuel > 0 => {
                    *fuel -= 1;
                    let reduced = subst_host_in_term(&body, &x, &a2);
                    inline_host(&reduced, globals, fuel)
                }
                f2 => H::app(f2, a2),
            }
        }
        H::Proj1(p) | H::Proj2(p) => match inline_host(p, globals, fuel) {
            H::Pair(a, b) => {
                if matches!(t, H::Proj1(_)) {
                    *a
                } else {
                    *b
                }
            }
            p2 => {
                if matches!(t, H::Proj1(_)) {
                    H::Proj1(Box::new(p2))
                } else {
                    H::Proj2(Box::new(p2))
                }
            }
        },
        H::Lambda(x, a, body) => {
            let g = without(globals, x);
            H::lambda(x, a.clone(), inline_host(body, &g, fuel))
        }
        H::Pair(a, b) => H::pair(inline_host(a, globals, fuel), inline_host(b, globals, fuel)),
        H::Box(p, w, c) => H::Box(p.clone(), w.clone(), Box::new(inline_circuit(c, globals, fuel))),
        _ => t.clone(),
    }
}

fn without(globals: &[(String, HostTerm)], x: &str) -> Vec<(String, HostTerm)> {
    globals.iter().filter(|(n, _)| n != x).cloned().collect()
}

fn inline_circuit(c: &CircuitTerm, globals: &[(String, HostTerm)], fuel: &mut usize) -> CircuitTerm {
    use CircuitTerm as C;
    match c {
        C::Unbox(t, p) => C::Unbox(Box::new(inline_host(t, globals, fuel)), p.clone()),
        C::Compose(p, a, b) => C::compose(p.clone(), inline_circuit(a, globals, fuel), inline_circuit(b, globals, fuel)),
        C::UnitElim(p, r) => C::UnitElim(p.clone(), Box::new(inline_circuit(r, globals, fuel))),
        C::PairElim(a, b, p, r) => C::PairElim(a.clone(), b.clone(), p.clone(), Box::new(inline_circuit(r, globals, fuel))),
        C::Gate(p2, g, p1, r) => C::Gate(p2.clone(), g.clone(), p1.clone(), Box::new(inline_circuit(r, globals, fuel))),
        C::Lift(x, p, r) => C::lift(x, p.clone(), inline_circuit(r, &without(globals, x), fuel)),
        other => other.clone(),
    }
}

/// Compares two circuits at the same judgment by their denotations.
pub fn check_equiv(
    c1: &CircuitTerm,
    c2: &CircuitTerm,
    omega: &WireContext,
    config: &Config,
    tol: f64,
) -> Result<bool, DenoteError> {
    Ok(equiv_distance(c1, c2, omega, config)? <= tol)
}

/// Frobenius distance between the denotations of two circuits.
pub fn equiv_distance(
    c1: &CircuitTerm,
    c2: &CircuitTerm,
    omega: &WireContext,
    config: &Config,
) -> Result<f64, DenoteError> {
    crate::denote::with_large_stack(|| {
        let mut ev = Evaluator::new(config.clone());
        let (a, _) = ev.denote_circuit(&Env::empty(), omega, c1)?;
        let mut ev = Evaluator::new(config.clone());
        let (b, _) = ev.denote_circuit(&Env::empty(), omega, c2)?;
        Ok(a.distance(&b)?)
    })
}
