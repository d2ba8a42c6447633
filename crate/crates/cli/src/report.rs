//! Numeric formatting and JSON shapes for command output.

use ewire_core::algebra::{Distribution, SuperOp, C64};
use ewire_core::denote::{HostValue, Outcome};
use serde_json::{json, Map, Value};

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn num(x: f64) -> Value {
    json!(round12(x))
}

pub fn fmt_num(x: f64) -> String {
    format!("{}", round12(x))
}

pub fn fmt_complex(z: C64) -> String {
    let (re, im) = (round12(z.re), round12(z.im));
    match (re == 0.0, im == 0.0) {
        (_, true) => fmt_num(re),
        (true, false) => format!("{}i", fmt_num(im)),
        (false, false) if im < 0.0 => format!("{}-{}i", fmt_num(re), fmt_num(-im)),
        _ => format!("{}+{}i", fmt_num(re), fmt_num(im)),
    }
}

pub fn distribution_json(d: &Distribution<HostValue<'_>>) -> Value {
    let mut outcomes = Map::new();
    for (v, w) in &d.entries {
        outcomes.insert(v.to_string(), num(*w));
    }
    json!({ "outcomes": outcomes, "diverge_mass": num(d.diverge_mass()) })
}

pub fn distribution_text(d: &Distribution<HostValue<'_>>) -> String {
    let mut s = String::new();
    for (v, w) in &d.entries {
        s.push_str(&format!("{v}: {}\n", fmt_num(*w)));
    }
    s.push_str(&format!("diverge: {}\n", fmt_num(d.diverge_mass())));
    s
}

pub fn counts_json(counts: &[(Outcome<HostValue<'_>>, u64)]) -> Value {
    let mut m = Map::new();
    let mut diverged = 0;
    for (o, c) in counts {
        match o {
            Outcome::Value(v) => {
                m.insert(v.to_string(), json!(c));
            }
            Outcome::Diverge => diverged = *c,
        }
    }
    json!({ "counts": m, "diverged": diverged })
}

pub fn counts_text(counts: &[(Outcome<HostValue<'_>>, u64)]) -> String {
    let parts: Vec<String> = counts
        .iter()
        .map(|(o, c)| match o {
            Outcome::Value(v) => format!("{v}={c}"),
            Outcome::Diverge => format!("diverge={c}"),
        })
        .collect();
    format!("counts: {}\n", parts.join(" "))
}

pub struct OpReport {
    pub cp: bool,
    pub unital: bool,
    pub subunital: bool,
}

/// The map in canonical coordinates, as JSON.
pub fn superop_json(op: &SuperOp, input: &str, output: &str, r: &OpReport) -> Value {
    let c = op.to_canonical();
    let matrix: Vec<Value> = (0..c.matrix.rows)
        .map(|i| Value::Array(c.matrix.row(i).iter().map(|z| json!([num(z.re), num(z.im)])).collect()))
        .collect();
    json!({
        "input": input,
        "output": output,
        "source_blocks": c.source.algebra().blocks(),
        "target_blocks": c.target.algebra().blocks(),
        "cp": r.cp,
        "unital": r.unital,
        "subunital": r.subunital,
        "matrix": matrix,
    })
}

pub fn superop_text(op: &SuperOp, input: &str, output: &str, r: &OpReport) -> String {
    let c = op.to_canonical();
    let mut s = format!(
        "Circ({input}, {output})\nsource blocks: {:?}\ntarget blocks: {:?}\ncp: {}\nunital: {}\nsubunital: {}\nmatrix {}x{}:\n",
        c.source.algebra().blocks(),
        c.target.algebra().blocks(),
        r.cp,
        r.unital,
        r.subunital,
        c.matrix.rows,
        c.matrix.cols
    );
    for i in 0..c.matrix.rows {
        let row: Vec<String> = c.matrix.row(i).iter().map(|z| fmt_complex(*z)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}
