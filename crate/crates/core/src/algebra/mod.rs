//! Finite-dimensional C*-algebras `⊕ᵢ M_{nᵢ}` and linear maps between them
//! in the Heisenberg direction.
//!
//! Two element layouts are used. The *canonical* layout of an algebra
//! concatenates the row-major vectorizations of its blocks. A [`Layout`] is
//! a list of factor algebras whose element space is the Kronecker product of
//! the factors' canonical element spaces; tensoring maps is then a plain
//! Kronecker product and reassociation is free. [`SuperOp::to_canonical`]
//! converts to the single-algebra canonical form used for Choi matrices and
//! serialization.

mod choi;
mod gates;
pub mod kernels;

use serde::Serialize;
use thiserror::Error;

pub use choi::{choi_blocks, choi_matrix, is_cp, is_subunital, is_unital, loewner_leq, loewner_leq_with, Order};
pub use gates::{gate_denotation, gate_signature, leaf_algebra, wire_layout, GateSpec};
pub use kernels::{Mat, C64, ONE, ZERO};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("an algebra needs at least one block, and every block has size >= 1")]
    Empty,
    #[error("copower by 0 would produce the zero algebra")]
    ZeroCopower,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("state source is not a classical algebra")]
    NonClassicalSource,
    #[error("rotation index {0} is negative")]
    NegativeRotation(i64),
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate `{gate}` cannot be applied at type {input}")]
    GateSignature { gate: String, input: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FdAlgebra {
    blocks: Vec<usize>,
}

impl FdAlgebra {
    pub fn new(blocks: Vec<usize>) -> Result<Self, AlgebraError> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(AlgebraError::Empty);
        }
        Ok(FdAlgebra { blocks })
    }

    /// `ℂ`, the tensor unit.
    pub fn unit() -> Self {
        FdAlgebra { blocks: vec![1] }
    }

    /// `M_n`.
    pub fn matrix(n: usize) -> Self {
        FdAlgebra { blocks: vec![n.max(1)] }
    }

    /// `ℂᵏ`.
    pub fn classical(k: usize) -> Self {
        FdAlgebra { blocks: vec![1; k.max(1)] }
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn element_dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    /// Start of each block in the canonical element vector.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.blocks
            .iter()
            .map(|n| {
                let o = acc;
                acc += n * n;
                o
            })
            .collect()
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|&n| n == 1)
    }
}

/// Blocks `[nᵢ·mⱼ]` in lexicographic `(i, j)` order.
pub fn alg_tensor(a: &FdAlgebra, b: &FdAlgebra) -> FdAlgebra {
    let blocks = a
        .blocks
        .iter()
        .flat_map(|&n| b.blocks.iter().map(move |&m| n * m))
        .collect();
    FdAlgebra { blocks }
}

pub fn alg_direct_sum(a: &FdAlgebra, b: &FdAlgebra) -> FdAlgebra {
    FdAlgebra { blocks: a.blocks.iter().chain(&b.blocks).copied().collect() }
}

pub fn alg_copower(n: usize, a: &FdAlgebra) -> Result<FdAlgebra, AlgebraError> {
    if n == 0 {
        return Err(AlgebraError::ZeroCopower);
    }
    Ok(FdAlgebra { blocks: a.blocks.repeat(n) })
}

/// An ordered list of tensor factors. The empty list is `ℂ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Layout {
    factors: Vec<FdAlgebra>,
}

impl Layout {
    pub fn new(factors: Vec<FdAlgebra>) -> Self {
        Layout { factors }
    }

    pub fn scalar() -> Self {
        Layout::default()
    }

    pub fn single(a: FdAlgebra) -> Self {
        Layout { factors: vec![a] }
    }

    pub fn factors(&self) -> &[FdAlgebra] {
        &self.factors
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        self.factors.iter().map(FdAlgebra::element_dim).collect()
    }

    pub fn element_dim(&self) -> usize {
        self.factors.iter().map(FdAlgebra::element_dim).product()
    }

    pub fn concat(&self, other: &Layout) -> Layout {
        Layout { factors: self.factors.iter().chain(&other.factors).cloned().collect() }
    }

    pub fn reordered(&self, order: &[usize]) -> Layout {
        Layout { factors: order.iter().map(|&i| self.factors[i].clone()).collect() }
    }

    /// The canonical algebra: the iterated [`alg_tensor`] of the factors.
    pub fn algebra(&self) -> FdAlgebra {
        self.factors.iter().fold(FdAlgebra::unit(), |acc, f| alg_tensor(&acc, f))
    }

    pub fn is_canonical(&self) -> bool {
        self.factors.len() == 1
    }

    /// For each index of this layout's element space, the matching index in
    /// the canonical element vector of [`Layout::algebra`].
    pub fn canonical_index_map(&self) -> Vec<usize> {
        // (block, row, col) of every element of the prefix product.
        let mut info: Vec<(usize, usize, usize)> = vec![(0, 0, 0)];
        let mut prefix = FdAlgebra::unit();
        for f in &self.factors {
            let fb = f.blocks();
            let foffs = f.offsets();
            let mut felems = Vec::with_capacity(f.element_dim());
            for (j, &m) in fb.iter().enumerate() {
                for r in 0..m {
                    for c in 0..m {
                        felems.push((j, r, c));
                    }
                }
            }
            debug_assert_eq!(felems.len(), foffs.last().map_or(0, |o| o + fb[fb.len() - 1].pow(2)));
            let mut next = Vec::with_capacity(info.len() * felems.len());
            for &(i, ra, ca) in &info {
                for &(j, rb, cb) in &felems {
                    let m = fb[j];
                    next.push((i * fb.len() + j, ra * m + rb, ca * m + cb));
                }
            }
            info = next;
            prefix = alg_tensor(&prefix, f);
        }
        let offs = prefix.offsets();
        let blocks = prefix.blocks();
        info.into_iter()
            .map(|(b, r, c)| offs[b] + r * blocks[b] + c)
            .collect()
    }
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Linear map from the element space of `source` to that of `target`,
/// stored as a `dim(target) × dim(source)` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOp {
    pub source: Layout,
    pub target: Layout,
    pub matrix: Mat,
}

impl SuperOp {
    pub fn new(source: Layout, target: Layout, matrix: Mat) -> Result<Self, AlgebraError> {
        if matrix.rows != target.element_dim() || matrix.cols != source.element_dim() {
            return Err(AlgebraError::DimensionMismatch(format!(
                "matrix is {}x{}, layouts need {}x{}",
                matrix.rows,
                matrix.cols,
                target.element_dim(),
                source.element_dim()
            )));
        }
        Ok(SuperOp { source, target, matrix })
    }

    pub fn identity(layout: Layout) -> Self {
        let n = layout.element_dim();
        SuperOp { source: layout.clone(), target: layout, matrix: Mat::identity(n) }
    }

    pub fn zero(source: Layout, target: Layout) -> Self {
        let m = Mat::zeros(target.element_dim(), source.element_dim());
        SuperOp { source, target, matrix: m }
    }

    /// Builds a map from its matrix in canonical coordinates.
    pub fn from_canonical(source: Layout, target: Layout, m: &Mat) -> Result<Self, AlgebraError> {
        let ts = target.canonical_index_map();
        let ss = source.canonical_index_map();
        if m.rows != ts.len() || m.cols != ss.len() {
            return Err(AlgebraError::DimensionMismatch(format!(
                "canonical matrix is {}x{}, expected {}x{}",
                m.rows,
                m.cols,
                ts.len(),
                ss.len()
            )));
        }
        let rows = if target.is_canonical() || target.factors.is_empty() {
            m.clone()
        } else {
            kernels::gather_rows(m, &ts)
        };
        let matrix = if source.is_canonical() || source.factors.is_empty() {
            rows
        } else {
            kernels::gather_cols(&rows, &ss)
        };
        Ok(SuperOp { source, target, matrix })
    }

    /// The same map with single-algebra layouts.
    pub fn to_canonical(&self) -> SuperOp {
        let mut m = self.matrix.clone();
        if !self.target.is_canonical() && !self.target.factors.is_empty() {
            m = kernels::gather_rows(&m, &invert(&self.target.canonical_index_map()));
        }
        if !self.source.is_canonical() && !self.source.factors.is_empty() {
            m = kernels::gather_cols(&m, &invert(&self.source.canonical_index_map()));
        }
        SuperOp {
            source: Layout::single(self.source.algebra()),
            target: Layout::single(self.target.algebra()),
            matrix: m,
        }
    }

    pub fn source_algebra(&self) -> FdAlgebra {
        self.source.algebra()
    }

    pub fn target_algebra(&self) -> FdAlgebra {
        self.target.algebra()
    }

    pub fn scale(&self, s: f64) -> SuperOp {
        SuperOp { matrix: self.matrix.scale(C64::new(s, 0.0)), ..self.clone() }
    }

    fn aligned(&self, other: &SuperOp) -> Result<(SuperOp, SuperOp), AlgebraError> {
        if self.source == other.source && self.target == other.target {
            return Ok((self.clone(), other.clone()));
        }
        let (a, b) = (self.to_canonical(), other.to_canonical());
        if a.source != b.source || a.target != b.target {
            return Err(AlgebraError::DimensionMismatch(
                "maps have different signatures".into(),
            ));
        }
        Ok((a, b))
    }

    pub fn add(&self, other: &SuperOp) -> Result<SuperOp, AlgebraError> {
        let (a, b) = self.aligned(other)?;
        Ok(SuperOp { matrix: a.matrix.add(&b.matrix), ..a })
    }

    pub fn sub(&self, other: &SuperOp) -> Result<SuperOp, AlgebraError> {
        let (a, b) = self.aligned(other)?;
        Ok(SuperOp { matrix: a.matrix.sub(&b.matrix), ..a })
    }

    /// Frobenius norm of the difference, compared in canonical coordinates
    /// when the layouts differ.
    pub fn distance(&self, other: &SuperOp) -> Result<f64, AlgebraError> {
        Ok(self.sub(other)?.matrix.frobenius_norm())
    }

    /// Permutes the target factors: factor `i` of the result is factor
    /// `order[i]` of `self`.
    pub fn reorder_target(&self, order: &[usize]) -> SuperOp {
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return self.clone();
        }
        let perm = kernels::factor_permutation(&self.target.factor_dims(), order);
        SuperOp {
            source: self.source.clone(),
            target: self.target.reordered(order),
            matrix: kernels::gather_rows(&self.matrix, &perm),
        }
    }

    /// Permutes the source factors, as [`SuperOp::reorder_target`].
    pub fn reorder_source(&self, order: &[usize]) -> SuperOp {
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return self.clone();
        }
        let perm = kernels::factor_permutation(&self.source.factor_dims(), order);
        SuperOp {
            source: self.source.reordered(order),
            target: self.target.clone(),
            matrix: kernels::gather_cols(&self.matrix, &perm),
        }
    }

    /// `(local ⊗ id_R) ∘ rest` where `rest.target = local.source ⊗ R`,
    /// computed without materializing the identity factor.
    pub fn then_local(rest: &SuperOp, local: &SuperOp) -> Result<SuperOp, AlgebraError> {
        let k = local.source.factors.len();
        if rest.target.factors.len() < k || rest.target.factors[..k] != local.source.factors[..] {
            return Err(AlgebraError::DimensionMismatch(
                "local map does not match the leading target factors".into(),
            ));
        }
        let r = Layout::new(rest.target.factors[k..].to_vec());
        let (ls, lt, rd, cols) = (
            local.source.element_dim(),
            local.target.element_dim(),
            r.element_dim(),
            rest.matrix.cols,
        );
        let reshaped = rest.matrix.clone().reshape(ls, rd * cols);
        let out = kernels::matmul(&local.matrix, &reshaped).reshape(lt * rd, cols);
        Ok(SuperOp { source: rest.source.clone(), target: local.target.concat(&r), matrix: out })
    }

    /// Applies the map to an element given in canonical coordinates.
    pub fn apply(&self, x: &AlgElement) -> Result<AlgElement, AlgebraError> {
        let c = self.to_canonical();
        if c.source.algebra() != x.algebra {
            return Err(AlgebraError::DimensionMismatch("element algebra differs from source".into()));
        }
        let v = Mat { rows: x.vec.len(), cols: 1, data: x.vec.clone() };
        let out = kernels::matmul(&c.matrix, &v);
        Ok(AlgElement { algebra: c.target.algebra(), vec: out.data })
    }
}

/// `g ∘ f`: first `f`, then `g`, as linear maps. Requires `f.target` to
/// match `g.source`.
pub fn op_compose(f: &SuperOp, g: &SuperOp) -> Result<SuperOp, AlgebraError> {
    if f.target == g.source {
        return Ok(SuperOp {
            source: f.source.clone(),
            target: g.target.clone(),
            matrix: kernels::matmul(&g.matrix, &f.matrix),
        });
    }
    if f.target.algebra() != g.source.algebra() {
        return Err(AlgebraError::DimensionMismatch(format!(
            "cannot compose: {:?} vs {:?}",
            f.target.algebra().blocks(),
            g.source.algebra().blocks()
        )));
    }
    let (fc, gc) = (f.to_canonical(), g.to_canonical());
    Ok(SuperOp {
        source: fc.source,
        target: gc.target,
        matrix: kernels::matmul(&gc.matrix, &fc.matrix),
    })
}

pub fn op_tensor(f: &SuperOp, g: &SuperOp) -> SuperOp {
    SuperOp {
        source: f.source.concat(&g.source),
        target: f.target.concat(&g.target),
        matrix: kernels::kron(&f.matrix, &g.matrix),
    }
}

pub fn op_direct_sum(f: &SuperOp, g: &SuperOp) -> SuperOp {
    let (fc, gc) = (f.to_canonical(), g.to_canonical());
    let (fr, fcol) = (fc.matrix.rows, fc.matrix.cols);
    let mut m = Mat::zeros(fr + gc.matrix.rows, fcol + gc.matrix.cols);
    for r in 0..fr {
        for c in 0..fcol {
            m.set(r, c, fc.matrix.get(r, c));
        }
    }
    for r in 0..gc.matrix.rows {
        for c in 0..gc.matrix.cols {
            m.set(fr + r, fcol + c, gc.matrix.get(r, c));
        }
    }
    SuperOp {
        source: Layout::single(alg_direct_sum(&fc.source.algebra(), &gc.source.algebra())),
        target: Layout::single(alg_direct_sum(&fc.target.algebra(), &gc.target.algebra())),
        matrix: m,
    }
}

/// `n ⊙ f = id_{ℂⁿ} ⊗ f`.
pub fn op_copower(n: usize, f: &SuperOp) -> Result<SuperOp, AlgebraError> {
    if n == 0 {
        return Err(AlgebraError::ZeroCopower);
    }
    let cn = Layout::single(FdAlgebra::classical(n));
    Ok(op_tensor(&SuperOp::identity(cn), f))
}

/// The *-isomorphism `from → to` that sends block `i` of `from` onto block
/// `block_map[i]` of `to`, as a permutation matrix on canonical elements.
pub fn block_permutation(
    from: &FdAlgebra,
    to: &FdAlgebra,
    block_map: &[usize],
) -> Result<SuperOp, AlgebraError> {
    if from.blocks.len() != block_map.len()
        || to.blocks.len() != block_map.len()
        || block_map.iter().enumerate().any(|(i, &j)| to.blocks.get(j) != Some(&from.blocks[i]))
    {
        return Err(AlgebraError::DimensionMismatch("block map is not a bijection of equal sizes".into()));
    }
    let (fo, to_off) = (from.offsets(), to.offsets());
    let mut m = Mat::zeros(to.element_dim(), from.element_dim());
    for (i, &n) in from.blocks.iter().enumerate() {
        for k in 0..n * n {
            m.set(to_off[block_map[i]] + k, fo[i] + k, ONE);
        }
    }
    // As a Heisenberg map the iso `from → to` acts on elements of `from`.
    SuperOp::new(Layout::single(from.clone()), Layout::single(to.clone()), m)
}

/// Block map for `n⊙(A⊕B) ≅ (n⊙A)⊕(n⊙B)`.
pub fn copower_sum_block_map(n: usize, a: &FdAlgebra, b: &FdAlgebra) -> Vec<usize> {
    let (ka, kb) = (a.blocks.len(), b.blocks.len());
    let mut map = Vec::new();
    for x in 0..n {
        for i in 0..ka {
            map.push(x * ka + i);
        }
        for j in 0..kb {
            map.push(n * ka + x * kb + j);
        }
    }
    map
}

/// Block map for `A⊗(n⊙B) ≅ n⊙(A⊗B)`.
pub fn tensor_copower_block_map(a: &FdAlgebra, n: usize, b: &FdAlgebra) -> Vec<usize> {
    let (ka, kb) = (a.blocks.len(), b.blocks.len());
    let mut map = Vec::new();
    // Left side blocks (i, (x, j)) lexicographic.
    for i in 0..ka {
        for x in 0..n {
            for j in 0..kb {
                map.push(x * ka * kb + i * kb + j);
            }
        }
    }
    map
}

/// Element of an algebra in canonical coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgElement {
    pub algebra: FdAlgebra,
    pub vec: Vec<C64>,
}

impl AlgElement {
    pub fn identity(algebra: &FdAlgebra) -> Self {
        let blocks = algebra.blocks.iter().map(|&n| Mat::identity(n)).collect::<Vec<_>>();
        Self::from_blocks(algebra, &blocks).expect("identity blocks fit")
    }

    pub fn from_blocks(algebra: &FdAlgebra, blocks: &[Mat]) -> Result<Self, AlgebraError> {
        if blocks.len() != algebra.blocks.len()
            || blocks.iter().zip(&algebra.blocks).any(|(b, &n)| b.rows != n || b.cols != n)
        {
            return Err(AlgebraError::DimensionMismatch("blocks do not fit algebra".into()));
        }
        Ok(AlgElement {
            algebra: algebra.clone(),
            vec: blocks.iter().flat_map(|b| b.data.iter().copied()).collect(),
        })
    }

    pub fn block(&self, i: usize) -> Mat {
        let n = self.algebra.blocks[i];
        let o = self.algebra.offsets()[i];
        Mat { rows: n, cols: n, data: self.vec[o..o + n * n].to_vec() }
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        (0..self.algebra.blocks.len()).all(|i| {
            let b = self.block(i);
            b.sub(&b.adjoint()).max_abs() <= tol
        })
    }

    /// Positive semidefinite in every block, up to `tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.is_self_adjoint(tol)
            && (0..self.algebra.blocks.len()).all(|i| choi::hermitian_part_psd(&self.block(i), tol))
    }
}

/// Finitely supported (sub)probability distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<K> {
    pub entries: Vec<(K, f64)>,
}

impl<K: PartialEq + Clone> Distribution<K> {
    pub fn empty() -> Self {
        Distribution { entries: Vec::new() }
    }

    pub fn point(k: K) -> Self {
        Distribution { entries: vec![(k, 1.0)] }
    }

    /// Adds weight to `k`, merging with an existing entry.
    pub fn push(&mut self, k: K, w: f64) {
        if w == 0.0 {
            return;
        }
        match self.entries.iter_mut().find(|(x, _)| *x == k) {
            Some((_, acc)) => *acc += w,
            None => self.entries.push((k, w)),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    /// Probability of not producing any outcome.
    pub fn diverge_mass(&self) -> f64 {
        (1.0 - self.total_mass()).max(0.0)
    }

    pub fn weight(&self, k: &K) -> f64 {
        self.entries.iter().filter(|(x, _)| x == k).map(|(_, w)| w).sum()
    }

    pub fn map<L: PartialEq + Clone>(&self, f: impl Fn(&K) -> L) -> Distribution<L> {
        let mut out = Distribution::empty();
        for (k, w) in &self.entries {
            out.push(f(k), *w);
        }
        out
    }

    /// Monadic bind: push forward through `f` and take the convex
    /// combination.
    pub fn bind<L: PartialEq + Clone, E>(
        &self,
        mut f: impl FnMut(&K) -> Result<Distribution<L>, E>,
    ) -> Result<Distribution<L>, E> {
        let mut out = Distribution::empty();
        for (k, w) in &self.entries {
            for (l, v) in f(k)?.entries {
                out.push(l, w * v);
            }
        }
        Ok(out)
    }
}

/// Reads off the subprobability vector of a state on `ℂⁿ`.
pub fn state_to_distribution(f: &SuperOp) -> Result<Distribution<usize>, AlgebraError> {
    let c = f.to_canonical();
    if !c.source.algebra().is_commutative() || c.target.element_dim() != 1 {
        return Err(AlgebraError::NonClassicalSource);
    }
    let mut d = Distribution::empty();
    for i in 0..c.matrix.cols {
        let w = c.matrix.get(0, i).re;
        if w > 1e-15 {
            d.entries.push((i, w));
        }
    }
    Ok(d)
}
