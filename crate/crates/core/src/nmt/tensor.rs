//! Dense row-major matrices and the handful of kernels the networks need.

use rand::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn uniform<R: Rng>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| rng.gen_range(-scale..=scale)).collect();
        Matrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec_block_add(x, 0, &mut y);
        y
    }

    /// `y += A[:, off..off + x.len()] x`
    pub fn matvec_block_add(&self, x: &[f64], off: usize, y: &mut [f64]) {
        debug_assert!(off + x.len() <= self.cols && y.len() == self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            let row = &self.data[r * self.cols + off..r * self.cols + off + x.len()];
            *yr += dot(row, x);
        }
    }

    /// `out += A[:, off..off + out.len()]^T v`
    pub fn matvec_t_block_add(&self, v: &[f64], off: usize, out: &mut [f64]) {
        debug_assert!(off + out.len() <= self.cols && v.len() == self.rows);
        for (r, &vr) in v.iter().enumerate() {
            if vr == 0.0 {
                continue;
            }
            let row = &self.data[r * self.cols + off..r * self.cols + off + out.len()];
            axpy(vr, row, out);
        }
    }

    /// `out += A^T v`
    pub fn matvec_t_add(&self, v: &[f64], out: &mut [f64]) {
        self.matvec_t_block_add(v, 0, out);
    }

    /// `A[:, off..off + b.len()] += a b^T`
    pub fn add_outer_block(&mut self, a: &[f64], b: &[f64], off: usize) {
        debug_assert!(off + b.len() <= self.cols && a.len() == self.rows);
        for (r, &ar) in a.iter().enumerate() {
            if ar == 0.0 {
                continue;
            }
            let row = &mut self.data[r * self.cols + off..r * self.cols + off + b.len()];
            axpy(ar, b, row);
        }
    }

    pub fn add_outer(&mut self, a: &[f64], b: &[f64]) {
        self.add_outer_block(a, b, 0);
    }

    /// Adds `v` to column 0; used for bias vectors stored as `n x 1`.
    pub fn add_vec(&mut self, v: &[f64]) {
        debug_assert_eq!(v.len(), self.data.len());
        axpy(1.0, v, &mut self.data);
    }

    pub fn add_scaled(&mut self, other: &Matrix, k: f64) {
        debug_assert_eq!(self.shape(), other.shape());
        axpy(k, &other.data, &mut self.data);
    }

    pub fn scale(&mut self, k: f64) {
        self.data.iter_mut().for_each(|x| *x *= k);
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += k x`
pub fn axpy(k: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += k * xi;
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= z);
    out
}

/// Index of the largest element; the first one wins on ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_transpose_agree() {
        let a = Matrix::from_vec(2, 3, vec![1., 2., 3., 4., 5., 6.]);
        assert_eq!(a.matvec(&[1., 0., -1.]), vec![-2., -2.]);
        let mut out = vec![0.0; 3];
        a.matvec_t_add(&[1., 1.], &mut out);
        assert_eq!(out, vec![5., 7., 9.]);
    }

    #[test]
    fn block_kernels_address_columns() {
        let a = Matrix::from_vec(2, 4, vec![1., 2., 3., 4., 5., 6., 7., 8.]);
        let mut y = vec![0.0; 2];
        a.matvec_block_add(&[1., 1.], 2, &mut y);
        assert_eq!(y, vec![7., 15.]);
        let mut m = Matrix::zeros(2, 4);
        m.add_outer_block(&[1., 2.], &[3., 4.], 1);
        assert_eq!(m.data(), &[0., 3., 4., 0., 0., 6., 8., 0.]);
    }

    #[test]
    fn softmax_is_normalized_and_shift_invariant() {
        let p = softmax(&[1.0, 2.0, 3.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let q = softmax(&[101.0, 102.0, 103.0]);
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(softmax(&[0.0; 4]), vec![0.25; 4]);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(800.0) <= 1.0);
    }
}
