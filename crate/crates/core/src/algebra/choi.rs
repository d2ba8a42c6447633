//! Choi matrices and the positivity predicates built on them.

use nalgebra::DMatrix;

use super::kernels::{Mat, C64};
use super::{AlgElement, AlgebraError, SuperOp};
use crate::rng::SplitMix64;

/// Which cone defines `f ≤ g`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Order {
    /// `g − f` completely positive.
    #[default]
    CompletelyPositive,
    /// `g − f` positive. Exact when either algebra is commutative,
    /// otherwise checked on sampled pure states.
    Positive,
}

/// Smallest eigenvalue of the Hermitian part of a square matrix.
#[cfg(test)]
pub(crate) fn min_eigenvalue(m: &Mat) -> f64 {
    if m.rows == 0 {
        return 0.0;
    }
    let a: DMatrix<C64> = m.to_nalgebra();
    let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// One Choi matrix per (target block, source block) pair, as
/// `(i, j, Σ_ab E_ab ⊗ f(E_ab)_i)` with `E_ab` ranging over block `j` of the
/// source.
pub fn choi_blocks(f: &SuperOp) -> Vec<(usize, usize, Mat)> {
    let c = f.to_canonical();
    let (src, tgt) = (c.source_algebra(), c.target_algebra());
    let (so, to) = (src.offsets(), tgt.offsets());
    let mut out = Vec::new();
    for (i, &t) in tgt.blocks().iter().enumerate() {
        for (j, &s) in src.blocks().iter().enumerate() {
            let n = s * t;
            let mut m = Mat::zeros(n, n);
            for a in 0..s {
                for b in 0..s {
                    let col = so[j] + a * s + b;
                    for p in 0..t {
                        for q in 0..t {
                            let v = c.matrix.get(to[i] + p * t + q, col);
                            m.set(a * t + p, b * t + q, v);
                        }
                    }
                }
            }
            out.push((i, j, m));
        }
    }
    out
}

/// The block-diagonal sum of [`choi_blocks`].
pub fn choi_matrix(f: &SuperOp) -> Mat {
    let blocks = choi_blocks(f);
    let n: usize = blocks.iter().map(|(_, _, m)| m.rows).sum();
    let mut out = Mat::zeros(n, n);
    let mut off = 0;
    for (_, _, m) in &blocks {
        for r in 0..m.rows {
            for c in 0..m.cols {
                out.set(off + r, off + c, m.get(r, c));
            }
        }
        off += m.rows;
    }
    out
}

/// Smallest eigenvalue of the Hermitian part at least `-tol`, decided by a
/// Cholesky factorization of the shifted matrix. The iterative eigensolvers
/// are unreliable on large sparse Choi blocks.
pub(crate) fn hermitian_part_psd(m: &Mat, tol: f64) -> bool {
    if m.rows == 0 {
        return true;
    }
    // H = A + iB is PSD iff the real symmetric [[A, -B], [B, A]] is.
    let n = m.rows;
    let shift = tol.max(1e-13);
    let real = DMatrix::<f64>::from_fn(2 * n, 2 * n, |r, c| {
        let (i, j) = (r % n, c % n);
        let h = (m.get(i, j) + m.get(j, i).conj()) * 0.5;
        let v = match (r < n, c < n) {
            (true, true) | (false, false) => h.re,
            (true, false) => -h.im,
            (false, true) => h.im,
        };
        if r == c { v + shift } else { v }
    });
    nalgebra::Cholesky::new(real).is_some()
}

fn is_psd(m: &Mat, tol: f64) -> bool {
    m.sub(&m.adjoint()).max_abs() <= tol.max(1e-12) && hermitian_part_psd(m, tol)
}

pub fn is_cp(f: &SuperOp, tol: f64) -> bool {
    choi_blocks(f).iter().all(|(_, _, m)| is_psd(m, tol))
}

fn unit_image(f: &SuperOp) -> Result<AlgElement, AlgebraError> {
    f.apply(&AlgElement::identity(&f.source_algebra()))
}

/// `‖f(1) − 1‖ ≤ tol` in max norm.
pub fn is_unital(f: &SuperOp, tol: f64) -> bool {
    let Ok(y) = unit_image(f) else { return false };
    let one = AlgElement::identity(&y.algebra);
    y.vec.iter().zip(&one.vec).all(|(a, b)| (a - b).norm() <= tol)
}

/// `1 − f(1)` positive up to `tol`.
pub fn is_subunital(f: &SuperOp, tol: f64) -> bool {
    let Ok(y) = unit_image(f) else { return false };
    let one = AlgElement::identity(&y.algebra);
    let diff = AlgElement {
        algebra: y.algebra.clone(),
        vec: one.vec.iter().zip(&y.vec).map(|(a, b)| a - b).collect(),
    };
    diff.is_positive(tol)
}

/// `f ≤ g` in the completely-positive order.
pub fn loewner_leq(f: &SuperOp, g: &SuperOp, tol: f64) -> Result<bool, AlgebraError> {
    loewner_leq_with(f, g, tol, Order::CompletelyPositive)
}

pub fn loewner_leq_with(
    f: &SuperOp,
    g: &SuperOp,
    tol: f64,
    order: Order,
) -> Result<bool, AlgebraError> {
    let d = g.sub(f)?;
    match order {
        Order::CompletelyPositive => Ok(is_cp(&d, tol)),
        Order::Positive => {
            // Positive and CP coincide when either side is commutative.
            if d.source_algebra().is_commutative() || d.target_algebra().is_commutative() {
                Ok(is_cp(&d, tol))
            } else {
                Ok(is_positive_sampled(&d, tol, 256))
            }
        }
    }
}

/// Checks `d(|φ⟩⟨φ|) ≥ 0` on random pure states of each source block.
fn is_positive_sampled(d: &SuperOp, tol: f64, samples: usize) -> bool {
    let c = d.to_canonical();
    let src = c.source_algebra();
    let mut rng = SplitMix64::new(0x5eed);
    for (j, &s) in src.blocks().iter().enumerate() {
        for _ in 0..samples {
            let phi: Vec<C64> = (0..s).map(|_| C64::new(rng.normal(), rng.normal())).collect();
            let blocks: Vec<Mat> = src
                .blocks()
                .iter()
                .enumerate()
                .map(|(k, &n)| {
                    if k == j {
                        Mat::from_fn(n, n, |a, b| phi[a] * phi[b].conj())
                    } else {
                        Mat::zeros(n, n)
                    }
                })
                .collect();
            let x = AlgElement::from_blocks(&src, &blocks).expect("blocks fit");
            match c.apply(&x) {
                Ok(y) if y.is_positive(tol * (1.0 + phi.iter().map(|z| z.norm_sqr()).sum::<f64>())) => {}
                _ => return false,
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{FdAlgebra, Layout, ONE};

    fn m2() -> Layout {
        Layout::single(FdAlgebra::matrix(2))
    }

    fn transpose_map() -> SuperOp {
        let mut m = Mat::zeros(4, 4);
        for r in 0..2 {
            for c in 0..2 {
                m.set(c * 2 + r, r * 2 + c, ONE);
            }
        }
        SuperOp::new(m2(), m2(), m).unwrap()
    }

    #[test]
    fn identity_choi_spectrum() {
        let ch = choi_matrix(&SuperOp::identity(m2()));
        let mut ev: Vec<f64> = ch.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (e, want) in ev.iter().zip([0.0, 0.0, 0.0, 2.0]) {
            assert!((e - want).abs() < 1e-12);
        }
    }

    #[test]
    fn transpose_is_positive_not_cp() {
        let t = transpose_map();
        assert!(!is_cp(&t, 1e-9));
        assert!((min_eigenvalue(&choi_matrix(&t)) + 1.0).abs() < 1e-12);
        let zero = SuperOp::zero(m2(), m2());
        assert!(loewner_leq_with(&zero, &t, 1e-9, Order::Positive).unwrap());
        assert!(!loewner_leq(&zero, &t, 1e-9).unwrap());
    }

    #[test]
    fn zero_map_predicates() {
        let z = SuperOp::zero(m2(), m2());
        assert!(is_cp(&z, 1e-9));
        assert!(is_subunital(&z, 1e-9));
        assert!(!is_unital(&z, 1e-9));
        assert_eq!(choi_matrix(&z).max_abs(), 0.0);
    }

    #[test]
    fn half_identity_below_identity() {
        let id = SuperOp::identity(m2());
        assert!(loewner_leq(&id.scale(0.5), &id, 1e-9).unwrap());
        assert!(!loewner_leq(&id, &id.scale(0.5), 1e-9).unwrap());
        assert!(loewner_leq(&id, &id, 1e-9).unwrap());
    }
}
