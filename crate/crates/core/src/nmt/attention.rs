use rand::Rng;

use super::tensor::{axpy, dot, softmax, Matrix};

/// Single-hidden-layer score net over `[E_y(y_prev); s_prev; h_k]`:
/// `score_k = v · tanh(W [e; s; h_k] + b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionParams {
    pub w: Matrix,
    pub b: Matrix,
    pub v: Matrix,
    pub(crate) embed: usize,
    pub(crate) hidden: usize,
}

impl AttentionParams {
    pub fn zeros(embed: usize, hidden: usize, size: usize) -> Self {
        AttentionParams {
            w: Matrix::zeros(size, embed + 2 * hidden),
            b: Matrix::zeros(size, 1),
            v: Matrix::zeros(1, size),
            embed,
            hidden,
        }
    }

    pub fn init<R: Rng>(embed: usize, hidden: usize, size: usize, scale: f64, rng: &mut R) -> Self {
        AttentionParams {
            w: Matrix::uniform(size, embed + 2 * hidden, scale, rng),
            b: Matrix::zeros(size, 1),
            v: Matrix::uniform(1, size, scale, rng),
            embed,
            hidden,
        }
    }

    pub fn size(&self) -> usize {
        self.w.rows()
    }

    /// `W_h h_k + b` for every encoder state; constant across decoder steps.
    pub(crate) fn precompute(&self, enc: &[Vec<f64>]) -> Vec<Vec<f64>> {
        enc.iter()
            .map(|h| {
                let mut p = self.b.data().to_vec();
                self.w.matvec_block_add(h, self.embed + self.hidden, &mut p);
                p
            })
            .collect()
    }

    pub(crate) fn forward(&self, e: &[f64], s: &[f64], enc: &[Vec<f64>], pre: &[Vec<f64>]) -> AttentionCache {
        let mut q = vec![0.0; self.size()];
        self.w.matvec_block_add(e, 0, &mut q);
        self.w.matvec_block_add(s, self.embed, &mut q);
        let u: Vec<Vec<f64>> = pre.iter().map(|p| p.iter().zip(&q).map(|(a, b)| (a + b).tanh()).collect()).collect();
        let scores: Vec<f64> = u.iter().map(|uk| dot(self.v.data(), uk)).collect();
        let alpha = softmax(&scores);
        let mut context = vec![0.0; self.hidden];
        for (a, h) in alpha.iter().zip(enc) {
            axpy(*a, h, &mut context);
        }
        AttentionCache { e: e.to_vec(), s: s.to_vec(), u, alpha, context }
    }

    /// Backpropagates `d_context`. Gradients for `e` and `s` are added to
    /// `de`/`ds`; those for the precomputed terms go to `d_pre` and those
    /// reaching the encoder states directly to `d_enc`.
    pub(crate) fn backward(
        &self,
        cache: &AttentionCache,
        d_context: &[f64],
        enc: &[Vec<f64>],
        grad: &mut AttentionParams,
        de: &mut [f64],
        ds: &mut [f64],
        d_pre: &mut [Vec<f64>],
        d_enc: &mut [Vec<f64>],
    ) {
        let d_alpha: Vec<f64> = enc.iter().map(|h| dot(h, d_context)).collect();
        let mean = dot(&cache.alpha, &d_alpha);
        let mut dq = vec![0.0; self.size()];
        for k in 0..enc.len() {
            axpy(cache.alpha[k], d_context, &mut d_enc[k]);
            let d_score = cache.alpha[k] * (d_alpha[k] - mean);
            if d_score == 0.0 {
                continue;
            }
            axpy(d_score, &cache.u[k], grad.v.data_mut());
            for (j, uj) in cache.u[k].iter().enumerate() {
                let d = d_score * self.v.data()[j] * (1.0 - uj * uj);
                dq[j] += d;
                d_pre[k][j] += d;
            }
        }
        grad.w.add_outer_block(&dq, &cache.e, 0);
        grad.w.add_outer_block(&dq, &cache.s, self.embed);
        self.w.matvec_t_block_add(&dq, 0, de);
        self.w.matvec_t_block_add(&dq, self.embed, ds);
    }

    /// Finishes the precomputed-term gradients once per sentence.
    pub(crate) fn backward_pre(&self, enc: &[Vec<f64>], d_pre: &[Vec<f64>], grad: &mut AttentionParams, d_enc: &mut [Vec<f64>]) {
        let off = self.embed + self.hidden;
        for (k, dp) in d_pre.iter().enumerate() {
            grad.w.add_outer_block(dp, &enc[k], off);
            grad.b.add_vec(dp);
            self.w.matvec_t_block_add(dp, off, &mut d_enc[k]);
        }
    }
}

#[derive(Clone, Debug)]
pub struct AttentionCache {
    e: Vec<f64>,
    s: Vec<f64>,
    u: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub context: Vec<f64>,
}

/// Context vector and weights for one query against encoder states `enc`.
pub fn attend(att: &AttentionParams, e: &[f64], s: &[f64], enc: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let pre = att.precompute(enc);
    let c = att.forward(e, s, enc, &pre);
    (c.context, c.alpha)
}
