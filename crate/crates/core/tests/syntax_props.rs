use std::path::{Path, PathBuf};

use ewire_core::fuzz::{gen_circuit, FuzzConfig};
use ewire_core::rng::SplitMix64;
use ewire_core::syntax::*;
use ewire_core::typecheck::{check_circuit, check_program, elaborate_sugar};
use proptest::prelude::*;

fn wire_type() -> impl Strategy<Value = WireType> {
    let leaf = prop_oneof![
        Just(WireType::Unit),
        Just(WireType::bit()),
        Just(WireType::qubit()),
        (2usize..9).prop_map(|k| WireType::Classical { name: "trit".into(), card: k }),
    ];
    leaf.prop_recursive(4, 16, 2, |inner| (inner.clone(), inner).prop_map(|(a, b)| WireType::tensor(a, b)))
}

fn ew_files() -> Vec<PathBuf> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let dirs = [root.join("../../programs"), root.join("tests/corpus/good"), root.join("tests/corpus/bad")];
    let mut out: Vec<PathBuf> = dirs
        .iter()
        .flat_map(|d| std::fs::read_dir(d).unwrap().map(|e| e.unwrap().path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ew"))
        .collect();
    out.sort();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printed_circuits_reparse(seed in any::<u64>()) {
        let case = gen_circuit(&mut SplitMix64::new(seed), &FuzzConfig::default());
        let text = pretty_print(&case.term);
        let back = parse_circuit(&text).unwrap();
        prop_assert!(alpha_eq_circuit(&back, &case.term), "{}", text);
    }

    #[test]
    fn classicalize_is_idempotent(w in wire_type()) {
        let c = classicalize(&w);
        prop_assert!(c.is_classical());
        prop_assert_eq!(classicalize(&c), c.clone());
        if w.is_classical() {
            prop_assert_eq!(&c, &w);
        }
        prop_assert!(lift_type(&c).is_ok());
        prop_assert_eq!(lift_type(&w).is_ok(), w.is_classical());
    }

    #[test]
    fn wire_types_reparse(w in wire_type()) {
        prop_assume!(w.leaves().iter().all(|l| !matches!(l, WireType::Classical { name, .. } if name == "trit")));
        prop_assert_eq!(parse_wire_type(&pretty_print(&w)).unwrap(), w);
    }

    #[test]
    fn renaming_inputs_preserves_the_type(seed in any::<u64>()) {
        let case = gen_circuit(&mut SplitMix64::new(seed), &FuzzConfig::default());
        let ty = check_circuit(&vec![], &case.omega, &case.term).unwrap();
        let from = case.omega.iter().rev().fold(Pattern::Unit, |acc, (n, _)| Pattern::pair(Pattern::wire(n.as_str()), acc));
        let renamed: Vec<(String, WireType)> = case.omega.iter().map(|(n, w)| (format!("in_{n}"), w.clone())).collect();
        let to = renamed.iter().rev().fold(Pattern::Unit, |acc, (n, _)| Pattern::pair(Pattern::wire(n.as_str()), acc));
        let c2 = subst_pattern(&case.term, &from, &to).unwrap();
        prop_assert_eq!(check_circuit(&vec![], &renamed, &c2).unwrap(), ty);
    }
}

#[test]
fn source_files_reparse_after_printing() {
    let files = ew_files();
    assert!(files.len() >= 50);
    for path in files {
        let prog = parse_program(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let text = pretty_print(&prog);
        let back = parse_program(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", path.display()));
        let (a, b): (Vec<_>, Vec<_>) = (prog.decls().collect(), back.decls().collect());
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((&x.name, &x.ty, x.recursive), (&y.name, &y.ty, y.recursive));
            assert!(alpha_eq_host(&x.body, &y.body), "{}: {}", path.display(), x.name);
        }
    }
}

#[test]
fn elaboration_removes_sugar_and_keeps_types() {
    let mut sugared = 0;
    for path in ew_files().into_iter().filter(|p| !p.to_string_lossy().contains("/bad/")) {
        let prog = parse_program(&std::fs::read_to_string(&path).unwrap()).unwrap();
        if prog.decls().any(|d| d.body.has_sugar()) {
            sugared += 1;
        }
        let Ok(before) = check_program(&prog) else { continue };
        let core = elaborate_sugar(&prog).unwrap();
        assert!(core.decls().all(|d| !d.body.has_sugar()), "{}", path.display());
        let after = check_program(&core).unwrap();
        let types = |p: &ewire_core::typecheck::CheckedProgram| p.decls.iter().map(|d| (d.name.clone(), d.ty.clone())).collect::<Vec<_>>();
        assert_eq!(types(&before), types(&after));
    }
    assert!(sugared >= 2);
}
