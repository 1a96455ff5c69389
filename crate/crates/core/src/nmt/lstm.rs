use rand::Rng;

use super::tensor::{sigmoid, Matrix};
use crate::error::{Error, Result};

/// Gate blocks are stacked in the order input, forget, cell, output.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub w: Matrix,
    pub u: Matrix,
    pub b: Matrix,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState { h: vec![0.0; hidden], c: vec![0.0; hidden] }
    }
}

/// Everything the backward pass needs from one step.
#[derive(Clone, Debug)]
pub struct LstmCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    tanh_c: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmParams { w: Matrix::zeros(4 * hidden, input), u: Matrix::zeros(4 * hidden, hidden), b: Matrix::zeros(4 * hidden, 1) }
    }

    /// Uniform weights in `[-scale, scale]`, forget-gate bias 1.
    pub fn init<R: Rng>(input: usize, hidden: usize, scale: f64, rng: &mut R) -> Self {
        let mut b = Matrix::zeros(4 * hidden, 1);
        b.data_mut()[hidden..2 * hidden].fill(1.0);
        LstmParams { w: Matrix::uniform(4 * hidden, input, scale, rng), u: Matrix::uniform(4 * hidden, hidden, scale, rng), b }
    }

    pub fn hidden(&self) -> usize {
        self.u.cols()
    }

    pub fn input(&self) -> usize {
        self.w.cols()
    }

    pub fn step(&self, x: &[f64], state: &LstmState) -> Result<LstmState> {
        if x.len() != self.input() {
            return Err(Error::DimMismatch { expected: self.input(), got: x.len() });
        }
        if state.h.len() != self.hidden() || state.c.len() != self.hidden() {
            return Err(Error::DimMismatch { expected: self.hidden(), got: state.h.len() });
        }
        Ok(self.forward(x, state).0)
    }

    pub(crate) fn forward(&self, x: &[f64], state: &LstmState) -> (LstmState, LstmCache) {
        let n = self.hidden();
        let mut z = self.b.data().to_vec();
        self.w.matvec_block_add(x, 0, &mut z);
        self.u.matvec_block_add(&state.h, 0, &mut z);
        let i: Vec<f64> = z[..n].iter().map(|&v| sigmoid(v)).collect();
        let f: Vec<f64> = z[n..2 * n].iter().map(|&v| sigmoid(v)).collect();
        let g: Vec<f64> = z[2 * n..3 * n].iter().map(|v| v.tanh()).collect();
        let o: Vec<f64> = z[3 * n..].iter().map(|&v| sigmoid(v)).collect();
        let c: Vec<f64> = (0..n).map(|k| f[k] * state.c[k] + i[k] * g[k]).collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h: Vec<f64> = (0..n).map(|k| o[k] * tanh_c[k]).collect();
        let cache = LstmCache { x: x.to_vec(), h_prev: state.h.clone(), c_prev: state.c.clone(), i, f, g, o, tanh_c };
        (LstmState { h, c }, cache)
    }

    /// Accumulates parameter gradients into `grad` and returns the
    /// gradients for the input and the previous state.
    pub(crate) fn backward(&self, cache: &LstmCache, dh: &[f64], dc_next: &[f64], grad: &mut LstmParams) -> (Vec<f64>, LstmState) {
        let n = self.hidden();
        let mut dz = vec![0.0; 4 * n];
        let mut dc_prev = vec![0.0; n];
        for k in 0..n {
            let (i, f, g, o, tc) = (cache.i[k], cache.f[k], cache.g[k], cache.o[k], cache.tanh_c[k]);
            let dc = dc_next[k] + dh[k] * o * (1.0 - tc * tc);
            dz[k] = dc * g * i * (1.0 - i);
            dz[n + k] = dc * cache.c_prev[k] * f * (1.0 - f);
            dz[2 * n + k] = dc * i * (1.0 - g * g);
            dz[3 * n + k] = dh[k] * tc * o * (1.0 - o);
            dc_prev[k] = dc * f;
        }
        grad.w.add_outer(&dz, &cache.x);
        grad.u.add_outer(&dz, &cache.h_prev);
        grad.b.add_vec(&dz);
        let mut dx = vec![0.0; self.input()];
        self.w.matvec_t_add(&dz, &mut dx);
        let mut dh_prev = vec![0.0; n];
        self.u.matvec_t_add(&dz, &mut dh_prev);
        (dx, LstmState { h: dh_prev, c: dc_prev })
    }
}
