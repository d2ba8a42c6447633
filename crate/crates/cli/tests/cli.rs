use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn programs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../programs")
}

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/corpus").join(name)
}

fn ewirec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ewirec")).args(args).output().unwrap()
}

fn prog(name: &str) -> String {
    programs().join(name).to_string_lossy().into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(stdout(o).lines().next().unwrap()).unwrap()
}

fn scratch(name: &str, text: &str) -> String {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn check_prints_declaration_types() {
    let o = ewirec(&["check", &prog("flip.ew")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("flip : Circ(I, bit)"), "{}", stdout(&o));
}

#[test]
fn check_reports_type_errors_as_json() {
    let dup = scratch("dup.ew", "def dup = box q : qubit => output (q, q)\n");
    let o = ewirec(&["check", &dup]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["kind"], "LinearityViolation");

    let o = ewirec(&["check", &corpus("bad/12_unbox_monadic.ew").to_string_lossy()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("EffectfulUnbox"));

    let o = ewirec(&["check", "--json", &dup]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["errors"][0]["kind"], "LinearityViolation");
}

#[test]
fn parse_errors_exit_one() {
    let bad = scratch("syntax.ew", "def f = box q : qubit => output\n");
    let o = ewirec(&["check", &bad]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["kind"], "ParseError");
}

#[test]
fn run_gives_the_exact_distribution() {
    for entry in ["coin", "flip"] {
        let o = ewirec(&["run", "--json", &prog("flip.ew"), entry]);
        assert_eq!(code(&o), 0);
        let v = json(&o);
        assert_eq!(v["outcomes"]["0"], 0.5);
        assert_eq!(v["outcomes"]["1"], 0.5);
        assert_eq!(v["diverge_mass"], 0.0);
    }
    let o = ewirec(&["run", "--json", &prog("copower.ew"), "deterministic"]);
    assert_eq!(json(&o)["outcomes"].as_object().unwrap().len(), 1);
    assert_eq!(json(&o)["outcomes"]["1"], 1.0);
}

#[test]
fn sampling_is_seeded_and_within_three_sigma() {
    let args = ["run", "--json", "--shots", "10000", "--seed", "42", &prog("flip.ew"), "coin"];
    let (a, b) = (ewirec(&args), ewirec(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    let zeros = v["counts"]["0"].as_f64().unwrap();
    let ones = v["counts"]["1"].as_f64().unwrap();
    assert_eq!(zeros + ones, 10000.0);
    assert!((zeros - 5000.0).abs() <= 150.0);
    let other = ewirec(&["run", "--json", "--shots", "10000", "--seed", "43", &prog("flip.ew"), "coin"]);
    assert_ne!(other.stdout, a.stdout);
}

#[test]
fn divergence_has_full_mass_in_the_subunital_mode() {
    let o = ewirec(&["run", "--json", "--mode", "cpsu", &prog("hs.ew"), "run_neg"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["diverge_mass"], 1.0);
    assert!(json(&o)["outcomes"].as_object().unwrap().is_empty());
    let o = ewirec(&["run", "--json", "--mode", "cpsu", &prog("hs.ew"), "run_three"]);
    assert_eq!(json(&o)["outcomes"]["0"], 0.5);
    // Recursion is only available in the subunital model.
    assert_eq!(code(&ewirec(&["run", &prog("hs.ew"), "run_neg"])), 1);
}

fn matrix(v: &Value) -> Vec<Vec<(f64, f64)>> {
    v["matrix"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|z| (z[0].as_f64().unwrap(), z[1].as_f64().unwrap())).collect())
        .collect()
}

#[test]
fn denote_hadamard_is_conjugation() {
    let o = ewirec(&["denote", "--json", &prog("comp.ew"), "h"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["cp"], true);
    assert_eq!(v["unital"], true);
    let h = [[1.0, 1.0], [1.0, -1.0]];
    let m = matrix(&v);
    for (r, row) in m.iter().enumerate() {
        for (c, z) in row.iter().enumerate() {
            let (a, b, x, y) = (r / 2, r % 2, c / 2, c % 2);
            let want = h[x][a] * h[y][b] / 2.0;
            assert!((z.0 - want).abs() < 1e-11 && z.1.abs() < 1e-11);
        }
    }
    let id = json(&ewirec(&["denote", "--json", &prog("comp.ew"), "id"]));
    let m = matrix(&id);
    assert!((0..4).all(|i| (0..4).all(|j| m[i][j] == (if i == j { 1.0 } else { 0.0 }, 0.0))));
}

#[test]
fn denote_fourier_matches_the_reversed_dft() {
    let n = 3;
    let o = ewirec(&["denote", "--json", "--qlist-size", "3", &prog("qft.ew"), "fourier"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let m = matrix(&v);
    assert_eq!((m.len(), m[0].len()), (64, 64));
    assert_eq!(v["cp"], true);
    // U = DFT · reversal; canonical entry ((a,b),(x,y)) is conj(U_xa) U_yb.
    let d = 1usize << n;
    let rev = |k: usize| (0..n).fold(0, |acc, i| acc | (k >> i & 1) << (n - 1 - i));
    let u = |r: usize, c: usize| {
        let k = rev(c);
        let ang = 2.0 * std::f64::consts::PI * (r * k) as f64 / d as f64;
        (ang.cos() / (d as f64).sqrt(), ang.sin() / (d as f64).sqrt())
    };
    let mut err: f64 = 0.0;
    for r in 0..d * d {
        for c in 0..d * d {
            let (a, b, x, y) = (r / d, r % d, c / d, c % d);
            let (p, q) = (u(x, a), u(y, b));
            let want = (p.0 * q.0 + p.1 * q.1, p.0 * q.1 - p.1 * q.0);
            err += (m[r][c].0 - want.0).powi(2) + (m[r][c].1 - want.1).powi(2);
        }
    }
    assert!(err.sqrt() < 1e-8, "{err}");
}

#[test]
fn dimension_cap_is_a_resource_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_ewirec"))
        .args(["denote", "--qlist-size", "3", &prog("qft.ew"), "fourier"])
        .env("EWIREC_MAX_DIM", "16")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["kind"], "ResourceLimit");
}

#[test]
fn normalize_flattens_composition() {
    let o = ewirec(&["normalize", "--trace", &prog("comp.ew"), "hx"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "box w1 : qubit => q' <- gate H w1; q' <- gate X q'; output q'");
    let trace: Vec<Value> = String::from_utf8(o.stderr)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!trace.is_empty());
    for (i, e) in trace.iter().enumerate() {
        assert_eq!(e["step"], i as u64 + 1);
        assert!(e["rule"].is_string() && e["span"].is_string());
    }
}

#[test]
fn equiv_compares_denotations() {
    let o = ewirec(&["equiv", &prog("comp.ew"), "hh", "id"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("true"));
    let o = ewirec(&["equiv", &prog("comp.ew"), "h", "x"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("false"));
    let o = ewirec(&["equiv", &prog("classical_control.ew"), "measure_x", "lifted"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn usage_errors_exit_three() {
    let flip = prog("flip.ew");
    assert_eq!(code(&ewirec(&["check", "--shots", "5", &flip])), 3);
    assert_eq!(code(&ewirec(&["run", "--trace", &flip, "coin"])), 3);
    assert_eq!(code(&ewirec(&["check", &flip, "coin"])), 3);
    assert_eq!(code(&ewirec(&["equiv", &flip, "coin"])), 3);
    assert_eq!(code(&ewirec(&["frobnicate", &flip])), 3);
    assert_eq!(code(&ewirec(&["run", "--mode", "quantum", &flip, "coin"])), 3);
    assert_eq!(code(&ewirec(&["--help"])), 0);
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        vec!["denote", "--json", "--qlist-size", "2", "qft.ew", "fourier"],
        vec!["run", "--json", "--mode", "cpsu", "hs.ew", "run_three"],
        vec!["normalize", "--json", "comp.ew", "hh"],
    ] {
        let args: Vec<String> = args.iter().map(|a| if a.ends_with(".ew") { prog(a) } else { a.to_string() }).collect();
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (a, b) = (ewirec(&args), ewirec(&args));
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout);
    }
}
