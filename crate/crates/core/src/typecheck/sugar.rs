//! Measurement and preparation circuits at every wire type, built by
//! induction on the type, left to right on tensors.

use crate::syntax::{classicalize, CircuitTerm, HostTerm, Pattern, WireType};

/// `meas_W : Circ(W, Ŵ)`.
pub fn meas_box(w: &WireType) -> HostTerm {
    leafwise_box(w, "meas")
}

/// `new_W : Circ(Ŵ, W)`.
pub fn new_box(w: &WireType) -> HostTerm {
    leafwise_box(w, "new")
}

fn leafwise_box(w: &WireType, gate: &str) -> HostTerm {
    let input = if gate == "new" { classicalize(w) } else { w.clone() };
    let body = match w {
        WireType::Unit => CircuitTerm::output(Pattern::Unit),
        WireType::Tensor(a, b) => {
            let (left, right) = (leafwise_box(a, gate), leafwise_box(b, gate));
            CircuitTerm::compose(
                Pattern::wire("v"),
                CircuitTerm::unbox(left, Pattern::wire("w")),
                CircuitTerm::compose(
                    Pattern::wire("v'"),
                    CircuitTerm::unbox(right, Pattern::wire("w'")),
                    CircuitTerm::output(Pattern::pair(Pattern::wire("v"), Pattern::wire("v'"))),
                ),
            )
        }
        WireType::Quantum { .. } => CircuitTerm::gate(
            Pattern::wire("v"),
            gate,
            Pattern::wire("w"),
            CircuitTerm::output(Pattern::wire("v")),
        ),
        _ => CircuitTerm::output(Pattern::wire("w")),
    };
    let pattern = match w {
        WireType::Unit => Pattern::Unit,
        WireType::Tensor(..) => Pattern::pair(Pattern::wire("w"), Pattern::wire("w'")),
        _ => Pattern::wire("w"),
    };
    HostTerm::boxed(pattern, Some(input), body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_host_term;

    #[test]
    fn meas_unit_is_identity() {
        let t = meas_box(&WireType::Unit);
        assert_eq!(t, parse_host_term("box () : I => output ()").unwrap());
    }

    #[test]
    fn meas_qubit_measures() {
        let t = meas_box(&WireType::qubit());
        assert_eq!(t, parse_host_term("box w : qubit => v <- gate meas w; output v").unwrap());
    }

    #[test]
    fn new_tensor_recurses_left_to_right() {
        let w = WireType::tensor(WireType::qubit(), WireType::bit());
        let want = parse_host_term(
            "box (w, w') : bit * bit => \
               v <- unbox (box w : bit => v <- gate new w; output v) w; \
               v' <- unbox (box w : bit => output w) w'; output (v, v')",
        )
        .unwrap();
        assert_eq!(new_box(&w), want);
    }
}
