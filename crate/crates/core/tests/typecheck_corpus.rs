use std::path::Path;

use ewire_core::algebra::gate_signature;
use ewire_core::fuzz::{corpus, FuzzConfig};
use ewire_core::syntax::{parse_program, CircuitTerm, HostTerm, Pattern, WireType};
use ewire_core::typecheck::{check_circuit, check_program, ErrorKind};

fn corpus_files(kind: &str) -> Vec<(String, String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus").join(kind);
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "ew"))
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            let expect = text.lines().next().unwrap().strip_prefix("-- expect: ").unwrap().trim().to_string();
            (p.file_name().unwrap().to_string_lossy().into_owned(), expect, text)
        })
        .collect();
    out.sort();
    out
}

#[test]
fn well_typed_corpus_is_accepted() {
    let files = corpus_files("good");
    assert!(files.len() >= 20);
    for (name, expect, text) in files {
        assert_eq!(expect, "ok");
        let prog = parse_program(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        if let Err(e) = check_program(&prog) {
            panic!("{name}: {e}");
        }
    }
}

#[test]
fn ill_typed_corpus_is_rejected_with_the_designated_kind() {
    let files = corpus_files("bad");
    assert!(files.len() >= 20);
    for (name, expect, text) in files {
        let prog = parse_program(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let err = check_program(&prog).expect_err(&name);
        assert_eq!(format!("{:?}", err.kind), expect, "{name}: {err}");
    }
}

// ---- brute-force derivation search ----

type Ctx = Vec<(String, WireType)>;

/// Every way of splitting `ctx` in two, ignoring order.
fn splits(ctx: &Ctx) -> Vec<(Ctx, Ctx)> {
    (0..1u32 << ctx.len())
        .map(|mask| {
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for (i, e) in ctx.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    a.push(e.clone());
                } else {
                    b.push(e.clone());
                }
            }
            (a, b)
        })
        .collect()
}

fn pattern_types(ctx: &Ctx, p: &Pattern) -> Vec<WireType> {
    match p {
        Pattern::Unit => if ctx.is_empty() { vec![WireType::Unit] } else { vec![] },
        Pattern::Wire(w) => match ctx.as_slice() {
            [(n, t)] if n == w => vec![t.clone()],
            _ => vec![],
        },
        Pattern::Pair(a, b) => {
            let mut out = Vec::new();
            for (c1, c2) in splits(ctx) {
                for ta in pattern_types(&c1, a) {
                    for tb in pattern_types(&c2, b) {
                        out.push(WireType::tensor(ta.clone(), tb));
                    }
                }
            }
            out
        }
    }
}

fn bind(p: &Pattern, w: &WireType) -> Option<Ctx> {
    match (p, w) {
        (Pattern::Unit, WireType::Unit) => Some(vec![]),
        (Pattern::Wire(n), _) => Some(vec![(n.clone(), w.clone())]),
        (Pattern::Pair(a, b), WireType::Tensor(x, y)) => {
            let mut c = bind(a, x)?;
            c.extend(bind(b, y)?);
            Some(c)
        }
        _ => None,
    }
}

fn extend(ctx: &Ctx, more: Ctx) -> Option<Ctx> {
    let mut out = ctx.clone();
    for (n, t) in more {
        if out.iter().any(|(m, _)| *m == n) {
            return None;
        }
        out.push((n, t));
    }
    Some(out)
}

fn host_wire_type(t: &HostTerm, lifted: &[(String, WireType)]) -> Option<WireType> {
    match t {
        HostTerm::Var(x) => lifted.iter().rev().find(|(n, _)| n == x).map(|(_, w)| w.clone()),
        HostTerm::ClassicalLit { base, card, .. } => Some(WireType::Classical { name: base.clone(), card: *card }),
        _ => None,
    }
}

/// All output types derivable for `ctx ⊢ c`, trying every split.
fn derive(ctx: &Ctx, lifted: &[(String, WireType)], c: &CircuitTerm) -> Vec<WireType> {
    let mut out: Vec<WireType> = Vec::new();
    let mut add = |w: WireType| {
        if !out.contains(&w) {
            out.push(w);
        }
    };
    match c {
        CircuitTerm::Output(p) => pattern_types(ctx, p).into_iter().for_each(&mut add),
        CircuitTerm::Compose(p, first, rest) => {
            for (c1, c2) in splits(ctx) {
                for w in derive(&c1, lifted, first) {
                    if let Some(c3) = bind(p, &w).and_then(|b| extend(&c2, b)) {
                        derive(&c3, lifted, rest).into_iter().for_each(&mut add);
                    }
                }
            }
        }
        CircuitTerm::UnitElim(p, rest) => {
            for (c1, c2) in splits(ctx) {
                if pattern_types(&c1, p).contains(&WireType::Unit) {
                    derive(&c2, lifted, rest).into_iter().for_each(&mut add);
                }
            }
        }
        CircuitTerm::PairElim(a, b, p, rest) => {
            for (c1, c2) in splits(ctx) {
                for w in pattern_types(&c1, p) {
                    if let WireType::Tensor(x, y) = w {
                        let more = vec![(a.clone(), *x), (b.clone(), *y)];
                        if let Some(c3) = extend(&c2, more) {
                            derive(&c3, lifted, rest).into_iter().for_each(&mut add);
                        }
                    }
                }
            }
        }
        CircuitTerm::Gate(p2, g, p1, rest) => {
            for (c1, c2) in splits(ctx) {
                for w in pattern_types(&c1, p1) {
                    let Ok(o) = gate_signature(g, &w) else { continue };
                    if let Some(c3) = bind(p2, &o).and_then(|b| extend(&c2, b)) {
                        derive(&c3, lifted, rest).into_iter().for_each(&mut add);
                    }
                }
            }
        }
        CircuitTerm::Lift(x, p, rest) => {
            for (c1, c2) in splits(ctx) {
                for w in pattern_types(&c1, p) {
                    if w.is_classical() {
                        let mut l = lifted.to_vec();
                        l.push((x.clone(), w));
                        derive(&c2, &l, rest).into_iter().for_each(&mut add);
                    }
                }
            }
        }
        CircuitTerm::Init(t) => {
            if ctx.is_empty() {
                if let Some(w) = host_wire_type(t, lifted) {
                    add(w);
                }
            }
        }
        CircuitTerm::Unbox(t, p) => {
            let boxes: Vec<&HostTerm> = match t.as_ref() {
                HostTerm::If(_, a, b) => vec![a, b],
                other => vec![other],
            };
            let mut outs: Option<Vec<WireType>> = None;
            for b in boxes {
                let HostTerm::Box(bp, Some(w1), body) = b else { return out };
                if !pattern_types(ctx, p).contains(w1) {
                    return out;
                }
                let inner = bind(bp, w1).expect("annotated box pattern");
                let o = derive(&inner, lifted, body);
                outs = Some(match outs {
                    None => o,
                    Some(prev) => prev.into_iter().filter(|w| o.contains(w)).collect(),
                });
            }
            outs.unwrap_or_default().into_iter().for_each(&mut add);
        }
        CircuitTerm::QLift(..) => {}
    }
    out
}

fn spine_output(c: &mut CircuitTerm) -> &mut Pattern {
    match c {
        CircuitTerm::Compose(_, _, r)
        | CircuitTerm::UnitElim(_, r)
        | CircuitTerm::PairElim(_, _, _, r)
        | CircuitTerm::Gate(_, _, _, r)
        | CircuitTerm::Lift(_, _, r)
        | CircuitTerm::QLift(_, _, r) => spine_output(r),
        CircuitTerm::Output(p) => p,
        _ => panic!("generated spines end in output"),
    }
}

#[test]
fn checker_agrees_with_brute_force_search() {
    let cfg = FuzzConfig { max_qubits: 4, max_statements: 8, bit_input: true };
    let mut rejected = 0;
    for (i, case) in corpus(31, 150, &cfg).into_iter().enumerate() {
        assert!(case.omega.len() <= 5);
        let mut variants = vec![case.term.clone()];
        // Duplicate a wire, and drop a wire, at the end of the spine.
        let mut dup = case.term.clone();
        let out = spine_output(&mut dup);
        if let Some(w) = out.wires().first().map(|w| w.to_string()) {
            *out = Pattern::pair(out.clone(), Pattern::wire(w));
            variants.push(dup);
        }
        let mut drop = case.term.clone();
        let out = spine_output(&mut drop);
        if let Pattern::Pair(a, _) = out.clone() {
            *out = *a;
            variants.push(drop);
        }
        for v in variants {
            let found = derive(&case.omega, &[], &v);
            match check_circuit(&vec![], &case.omega, &v) {
                Ok(w) => assert!(found.contains(&w), "case {i}: checker found {w}, search found {found:?}\n{v}"),
                Err(e) if e.kind == ErrorKind::LinearityViolation => {
                    rejected += 1;
                    assert!(found.is_empty(), "case {i}: search found {found:?} for\n{v}");
                }
                Err(e) => panic!("case {i}: unexpected {e}\n{v}"),
            }
        }
    }
    assert!(rejected >= 100);
}
