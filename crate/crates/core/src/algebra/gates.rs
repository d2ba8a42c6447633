//! The built-in gate library and the algebras of wire types.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use super::kernels::{kron, Mat, C64, ONE, ZERO};
use super::{AlgebraError, FdAlgebra, Layout, SuperOp};
use crate::syntax::{GateRef, WireType};

/// A parsed gate name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GateSpec {
    Meas,
    New,
    Init(u8),
    /// Discards a wire of any type.
    Discard,
    H,
    X,
    Y,
    Z,
    S,
    T,
    Cnot,
    Cz,
    Swap,
    /// `diag(1, exp(2πi / 2ⁿ))`.
    R(i64),
    /// Controlled `R(n)`.
    Cr(i64),
    /// Quantum control on a leading qubit.
    Control(Box<GateSpec>),
    /// Classical control on a leading bit.
    BitControl(Box<GateSpec>),
}

fn strip_parens(s: &str) -> &str {
    let s = s.trim();
    match s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        Some(inner) => inner.trim(),
        None => s,
    }
}

impl GateSpec {
    pub fn parse(name: &str) -> Result<GateSpec, AlgebraError> {
        let name = strip_parens(name);
        let unknown = || AlgebraError::UnknownGate(name.to_string());
        if let Some(rest) = name.strip_prefix("bit-control ") {
            let inner = GateSpec::parse(rest)?;
            return if inner.is_unitary() {
                Ok(GateSpec::BitControl(Box::new(inner)))
            } else {
                Err(unknown())
            };
        }
        if let Some(rest) = name.strip_prefix("control ") {
            let inner = GateSpec::parse(rest)?;
            return if inner.is_unitary() {
                Ok(GateSpec::Control(Box::new(inner)))
            } else {
                Err(unknown())
            };
        }
        for (prefix, build) in [("CR ", GateSpec::Cr as fn(i64) -> GateSpec), ("R ", GateSpec::R)] {
            if let Some(rest) = name.strip_prefix(prefix) {
                let n: i64 = strip_parens(rest).parse().map_err(|_| unknown())?;
                if n < 0 {
                    return Err(AlgebraError::NegativeRotation(n));
                }
                return Ok(build(n));
            }
        }
        Ok(match name {
            "meas" => GateSpec::Meas,
            "new" => GateSpec::New,
            "init0" => GateSpec::Init(0),
            "init1" => GateSpec::Init(1),
            "discard" => GateSpec::Discard,
            "H" => GateSpec::H,
            "X" => GateSpec::X,
            "Y" => GateSpec::Y,
            "Z" => GateSpec::Z,
            "S" => GateSpec::S,
            "T" => GateSpec::T,
            "CNOT" => GateSpec::Cnot,
            "CZ" => GateSpec::Cz,
            "SWAP" => GateSpec::Swap,
            _ => return Err(unknown()),
        })
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(
            self,
            GateSpec::Meas | GateSpec::New | GateSpec::Init(_) | GateSpec::Discard | GateSpec::BitControl(_)
        )
    }

    /// The unitary matrix of a unitary gate, leftmost qubit most
    /// significant.
    pub fn unitary(&self) -> Option<Mat> {
        let c = |re: f64, im: f64| C64::new(re, im);
        let h = FRAC_1_SQRT_2;
        let diag = |d: &[C64]| Mat::from_fn(d.len(), d.len(), |r, k| if r == k { d[r] } else { ZERO });
        Some(match self {
            GateSpec::H => Mat::from_rows(&[vec![c(h, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(-h, 0.0)]]),
            GateSpec::X => Mat::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]),
            GateSpec::Y => Mat::from_rows(&[vec![ZERO, c(0.0, -1.0)], vec![c(0.0, 1.0), ZERO]]),
            GateSpec::Z => diag(&[ONE, -ONE]),
            GateSpec::S => diag(&[ONE, c(0.0, 1.0)]),
            GateSpec::T => diag(&[ONE, C64::from_polar(1.0, PI / 4.0)]),
            GateSpec::Cnot => controlled(&GateSpec::X.unitary()?),
            GateSpec::Cz => diag(&[ONE, ONE, ONE, -ONE]),
            GateSpec::Swap => Mat::from_fn(4, 4, |r, k| {
                let swapped = (r % 2) * 2 + r / 2;
                if k == swapped { ONE } else { ZERO }
            }),
            GateSpec::R(n) => diag(&[ONE, rotation_phase(*n)]),
            GateSpec::Cr(n) => controlled(&GateSpec::R(*n).unitary()?),
            GateSpec::Control(u) => controlled(&u.unitary()?),
            _ => return None,
        })
    }

    /// Input type, for gates with a fixed signature.
    fn input_type(&self) -> Option<WireType> {
        Some(match self {
            GateSpec::Meas => WireType::qubit(),
            GateSpec::New => WireType::bit(),
            GateSpec::Init(_) => WireType::Unit,
            GateSpec::Discard => return None,
            GateSpec::BitControl(u) => WireType::tensor(WireType::bit(), u.input_type()?),
            GateSpec::Control(u) => WireType::tensor(WireType::qubit(), u.input_type()?),
            GateSpec::Cnot | GateSpec::Cz | GateSpec::Swap | GateSpec::Cr(_) => {
                WireType::tensor(WireType::qubit(), WireType::qubit())
            }
            _ => WireType::qubit(),
        })
    }

    fn output_type(&self, input: &WireType) -> WireType {
        match self {
            GateSpec::Meas => WireType::bit(),
            GateSpec::New | GateSpec::Init(_) => WireType::qubit(),
            GateSpec::Discard => WireType::Unit,
            _ => input.clone(),
        }
    }

    /// Output type when applied at `input`.
    pub fn signature(&self, input: &WireType) -> Option<WireType> {
        match self.input_type() {
            None if !input.mentions_qlist() => Some(self.output_type(input)),
            Some(expected) if &expected == input => Some(self.output_type(input)),
            _ => None,
        }
    }

    /// The Heisenberg map in canonical coordinates: source is the output
    /// algebra, target the input algebra.
    fn canonical_matrix(&self, input: &WireType) -> Result<Mat, AlgebraError> {
        Ok(match self {
            GateSpec::Meas => {
                let mut m = Mat::zeros(4, 2);
                m.set(0, 0, ONE);
                m.set(3, 1, ONE);
                m
            }
            GateSpec::New => {
                let mut m = Mat::zeros(2, 4);
                m.set(0, 0, ONE);
                m.set(1, 3, ONE);
                m
            }
            GateSpec::Init(b) => {
                let mut m = Mat::zeros(1, 4);
                m.set(0, if *b == 0 { 0 } else { 3 }, ONE);
                m
            }
            GateSpec::Discard => {
                let l = wire_layout(input)?;
                let unit = l
                    .factors()
                    .iter()
                    .map(identity_vec)
                    .fold(Mat::identity(1), |acc, v| kron(&acc, &v));
                // The unit column is already in layout coordinates; move it
                // to canonical ones.
                let map = l.canonical_index_map();
                let mut col = Mat::zeros(l.element_dim(), 1);
                for (i, &ci) in map.iter().enumerate() {
                    col.set(ci, 0, unit.get(i, 0));
                }
                col
            }
            GateSpec::BitControl(u) => {
                let w = u.unitary().expect("bit-control wraps a unitary");
                let inner = unitary_channel(&w);
                let d = inner.rows;
                let mut m = Mat::zeros(2 * d, 2 * d);
                for i in 0..d {
                    m.set(i, i, ONE);
                }
                for r in 0..d {
                    for k in 0..d {
                        m.set(d + r, d + k, inner.get(r, k));
                    }
                }
                m
            }
            other => unitary_channel(&other.unitary().expect("remaining gates are unitary")),
        })
    }
}

/// `exp(2πi / 2ⁿ)`, exactly 1 for `n = 0`.
fn rotation_phase(n: i64) -> C64 {
    if n == 0 {
        return ONE;
    }
    let angle = if n < 1024 { TAU / 2f64.powi(n as i32) } else { 0.0 };
    C64::from_polar(1.0, angle)
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ u`.
fn controlled(u: &Mat) -> Mat {
    let d = u.rows;
    Mat::from_fn(2 * d, 2 * d, |r, k| match (r < d, k < d) {
        (true, true) => if r == k { ONE } else { ZERO },
        (false, false) => u.get(r - d, k - d),
        _ => ZERO,
    })
}

/// Heisenberg action `x ↦ u† x u` on the row-major vectorization.
fn unitary_channel(u: &Mat) -> Mat {
    kron(&u.adjoint(), &u.transpose())
}

fn identity_vec(a: &FdAlgebra) -> Mat {
    let mut v = Mat::zeros(a.element_dim(), 1);
    for (&n, o) in a.blocks().iter().zip(a.offsets()) {
        for i in 0..n {
            v.set(o + i * n + i, 0, ONE);
        }
    }
    v
}

/// Algebra of a single leaf type; `None` for `I`, tensors and `qlist`.
pub fn leaf_algebra(w: &WireType) -> Option<FdAlgebra> {
    match w {
        WireType::Quantum { dim, .. } => Some(FdAlgebra::matrix(*dim)),
        WireType::Classical { card, .. } => Some(FdAlgebra::classical(*card)),
        _ => None,
    }
}

/// One factor per non-unit leaf.
pub fn wire_layout(w: &WireType) -> Result<Layout, AlgebraError> {
    w.leaves()
        .into_iter()
        .map(|l| {
            leaf_algebra(l).ok_or_else(|| {
                AlgebraError::DimensionMismatch("qlist has no finite algebra".into())
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Layout::new)
}

fn parse_ref(g: &GateRef) -> Result<GateSpec, AlgebraError> {
    GateSpec::parse(&g.name)
}

pub fn gate_signature(g: &GateRef, input: &WireType) -> Result<WireType, AlgebraError> {
    parse_ref(g)?.signature(input).ok_or_else(|| AlgebraError::GateSignature {
        gate: g.name.clone(),
        input: input.to_string(),
    })
}

/// `⟦g⟧ : ⟦out⟧ → ⟦in⟧` with layouts from [`wire_layout`].
pub fn gate_denotation(g: &GateRef, input: &WireType) -> Result<SuperOp, AlgebraError> {
    let spec = parse_ref(g)?;
    let output = gate_signature(g, input)?;
    let m = spec.canonical_matrix(input)?;
    SuperOp::from_canonical(wire_layout(&output)?, wire_layout(input)?, &m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{is_cp, is_unital, op_compose};

    fn g(name: &str) -> GateRef {
        GateRef::new(name)
    }

    #[test]
    fn parse_composites() {
        assert_eq!(
            GateSpec::parse("bit-control (control X)").unwrap(),
            GateSpec::BitControl(Box::new(GateSpec::Control(Box::new(GateSpec::X))))
        );
        assert_eq!(GateSpec::parse("CR 3").unwrap(), GateSpec::Cr(3));
        assert_eq!(GateSpec::parse("R -1"), Err(AlgebraError::NegativeRotation(-1)));
        assert!(GateSpec::parse("bit-control meas").is_err());
        assert!(GateSpec::parse("frob").is_err());
    }

    #[test]
    fn rotation_zero_is_identity() {
        assert_eq!(GateSpec::R(0).unitary().unwrap(), Mat::identity(2));
        assert_eq!(GateSpec::Cr(0).unitary().unwrap(), Mat::identity(4));
        let r2 = GateSpec::R(2).unitary().unwrap();
        assert!((r2.get(1, 1) - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn signatures() {
        let qq = WireType::tensor(WireType::qubit(), WireType::qubit());
        assert_eq!(gate_signature(&g("meas"), &WireType::qubit()).unwrap(), WireType::bit());
        assert_eq!(gate_signature(&g("CNOT"), &qq).unwrap(), qq);
        assert!(gate_signature(&g("CNOT"), &WireType::qubit()).is_err());
        assert_eq!(gate_signature(&g("discard"), &qq).unwrap(), WireType::Unit);
        let bq = WireType::tensor(WireType::bit(), WireType::qubit());
        assert_eq!(gate_signature(&g("bit-control X"), &bq).unwrap(), bq);
    }

    #[test]
    fn h_twice_is_identity() {
        let h = gate_denotation(&g("H"), &WireType::qubit()).unwrap();
        let hh = op_compose(&h, &h).unwrap();
        assert!(hh.distance(&SuperOp::identity(hh.source.clone())).unwrap() < 1e-12);
    }

    #[test]
    fn new_then_meas_is_identity_on_bits() {
        let meas = gate_denotation(&g("meas"), &WireType::qubit()).unwrap();
        let new = gate_denotation(&g("new"), &WireType::bit()).unwrap();
        // Heisenberg: run new then meas, so the map is ⟦new⟧ ∘ ⟦meas⟧.
        let both = op_compose(&meas, &new).unwrap();
        assert_eq!(both.matrix, Mat::identity(2));
    }

    #[test]
    fn library_is_cp_unital() {
        let q = WireType::qubit();
        let qq = WireType::tensor(q.clone(), q.clone());
        let cases = [
            ("meas", q.clone()),
            ("new", WireType::bit()),
            ("init0", WireType::Unit),
            ("init1", WireType::Unit),
            ("discard", WireType::tensor(WireType::bit(), q.clone())),
            ("H", q.clone()),
            ("Y", q.clone()),
            ("T", q.clone()),
            ("CNOT", qq.clone()),
            ("SWAP", qq.clone()),
            ("CR 2", qq.clone()),
            ("bit-control X", WireType::tensor(WireType::bit(), q.clone())),
            ("control (control X)", WireType::tensor(q.clone(), qq.clone())),
        ];
        for (name, input) in cases {
            let f = gate_denotation(&g(name), &input).unwrap();
            assert!(is_cp(&f, 1e-9), "{name} not CP");
            assert!(is_unital(&f, 1e-9), "{name} not unital");
        }
    }
}
