//! Dense row-major complex matrices and the hot loops over them.
//!
//! Every kernel has a sequential form and, with the `parallel` feature, a
//! rayon form that splits work by output row. Each output entry is summed in
//! the same order in both forms, so results are bit-identical.

use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

// Below this many multiply-adds the rayon split costs more than it saves.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 1 << 15;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Mat { rows: r, cols: c, data: rows.iter().flatten().copied().collect() }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn scale(&self, s: C64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.add(&other.scale(-ONE))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    /// Reinterprets the storage with a new shape of the same size.
    pub fn reshape(mut self, rows: usize, cols: usize) -> Mat {
        assert_eq!(rows * cols, self.data.len());
        self.rows = rows;
        self.cols = cols;
        self
    }
}

fn matmul_row(a_row: &[C64], b: &Mat, out: &mut [C64]) {
    for (k, &aik) in a_row.iter().enumerate() {
        if aik == ZERO {
            continue;
        }
        for (o, &bkj) in out.iter_mut().zip(b.row(k)) {
            *o += aik * bkj;
        }
    }
}

pub fn matmul_seq(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.cols, b.rows, "inner dimensions differ");
    let mut out = Mat::zeros(a.rows, b.cols);
    if b.cols == 0 {
        return out;
    }
    for (i, row) in out.data.chunks_mut(b.cols).enumerate() {
        matmul_row(a.row(i), b, row);
    }
    out
}

#[cfg(feature = "parallel")]
pub fn matmul_par(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.cols, b.rows, "inner dimensions differ");
    let mut out = Mat::zeros(a.rows, b.cols);
    if b.cols == 0 {
        return out;
    }
    out.data
        .par_chunks_mut(b.cols)
        .enumerate()
        .for_each(|(i, row)| matmul_row(a.row(i), b, row));
    out
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    #[cfg(feature = "parallel")]
    if a.rows * a.cols * b.cols >= PAR_THRESHOLD {
        return matmul_par(a, b);
    }
    matmul_seq(a, b)
}

fn kron_row(a: &Mat, b: &Mat, r: usize, out: &mut [C64]) {
    let (ra, rb) = (r / b.rows, r % b.rows);
    for ca in 0..a.cols {
        let x = a.get(ra, ca);
        let dst = &mut out[ca * b.cols..(ca + 1) * b.cols];
        if x == ZERO {
            continue;
        }
        for (o, &y) in dst.iter_mut().zip(b.row(rb)) {
            *o = x * y;
        }
    }
}

pub fn kron_seq(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.rows * b.rows, a.cols * b.cols);
    let cols = out.cols;
    if cols == 0 {
        return out;
    }
    for (r, row) in out.data.chunks_mut(cols).enumerate() {
        kron_row(a, b, r, row);
    }
    out
}

#[cfg(feature = "parallel")]
pub fn kron_par(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.rows * b.rows, a.cols * b.cols);
    let cols = out.cols;
    if cols == 0 {
        return out;
    }
    out.data
        .par_chunks_mut(cols)
        .enumerate()
        .for_each(|(r, row)| kron_row(a, b, r, row));
    out
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    #[cfg(feature = "parallel")]
    if a.rows * b.rows * a.cols * b.cols >= PAR_THRESHOLD {
        return kron_par(a, b);
    }
    kron_seq(a, b)
}

/// `out.row(i) = m.row(perm[i])`.
pub fn gather_rows(m: &Mat, perm: &[usize]) -> Mat {
    let cols = m.cols;
    let mut out = Mat::zeros(perm.len(), cols);
    if cols == 0 {
        return out;
    }
    let fill = |(i, row): (usize, &mut [C64])| row.copy_from_slice(m.row(perm[i]));
    #[cfg(feature = "parallel")]
    if perm.len() * cols >= PAR_THRESHOLD {
        out.data.par_chunks_mut(cols).enumerate().for_each(fill);
        return out;
    }
    out.data.chunks_mut(cols).enumerate().for_each(fill);
    out
}

/// `out[:, j] = m[:, perm[j]]`.
pub fn gather_cols(m: &Mat, perm: &[usize]) -> Mat {
    let cols = perm.len();
    let mut out = Mat::zeros(m.rows, cols);
    if cols == 0 {
        return out;
    }
    let fill = |(i, row): (usize, &mut [C64])| {
        let src = m.row(i);
        for (o, &p) in row.iter_mut().zip(perm) {
            *o = src[p];
        }
    };
    #[cfg(feature = "parallel")]
    if m.rows * cols >= PAR_THRESHOLD {
        out.data.par_chunks_mut(cols).enumerate().for_each(fill);
        return out;
    }
    out.data.chunks_mut(cols).enumerate().for_each(fill);
    out
}

/// Index map for reordering the factors of a Kronecker-structured index
/// space. `dims[i]` is the size of factor `i`; the result lists, for each
/// index of the space with factors in `order`, the matching index of the
/// original space.
pub fn factor_permutation(dims: &[usize], order: &[usize]) -> Vec<usize> {
    assert_eq!(dims.len(), order.len());
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let new_strides: Vec<usize> = order.iter().map(|&o| strides[o]).collect();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    let mut idx = 0usize;
    for _ in 0..total {
        out.push(idx);
        // Increment the mixed-radix counter in the new order.
        for k in (0..n).rev() {
            digits[k] += 1;
            idx += new_strides[k];
            if digits[k] < new_dims[k] {
                break;
            }
            idx -= new_strides[k] * digits[k];
            digits[k] = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn matmul_matches_hand_product() {
        let a = Mat::from_rows(&[vec![c(1.0), c(2.0)], vec![c(0.0), c(1.0)]]);
        let b = Mat::from_rows(&[vec![c(3.0)], vec![c(4.0)]]);
        assert_eq!(matmul(&a, &b), Mat::from_rows(&[vec![c(11.0)], vec![c(4.0)]]));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_kernels_are_bit_identical() {
        let a = Mat::from_fn(40, 37, |r, k| C64::new((r * 7 + k) as f64 * 0.013, (k as f64).sin()));
        let b = Mat::from_fn(37, 45, |k, j| C64::new((k as f64).cos(), (j * k) as f64 * 1e-3));
        assert_eq!(matmul_seq(&a, &b).data, matmul_par(&a, &b).data);
        assert_eq!(kron_seq(&a, &b).data, kron_par(&a, &b).data);
    }

    #[test]
    fn kron_of_identities() {
        assert_eq!(kron(&Mat::identity(2), &Mat::identity(3)), Mat::identity(6));
    }

    #[test]
    fn factor_swap_permutation() {
        // Two factors of sizes 2 and 3; swapping gives index (b, a) -> a*3+b.
        let p = factor_permutation(&[2, 3], &[1, 0]);
        assert_eq!(p, vec![0, 3, 1, 4, 2, 5]);
        assert_eq!(factor_permutation(&[2, 3], &[0, 1]), (0..6).collect::<Vec<_>>());
    }
}
