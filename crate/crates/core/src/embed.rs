//! Joint embeddings: stack every period's PPMI matrix and factorize once.
//!
//! Row `t * W + w` of the stack is word `w` in period `t`. One truncated SVD
//! of the stack gives embeddings `U sqrt(S)` that share a column basis, so the
//! same word can be compared across periods without any alignment step.

use alloc::vec;
use alloc::vec::Vec;

use crate::cooc::PpmiMatrix;
use crate::linalg::{randomized_svd, LinearOperator, Mat, RsvdParams};
use crate::{Error, Result};

/// Default embedding dimension.
pub const DEFAULT_DIM: usize = 100;

/// `T` PPMI blocks sharing one `W x C` shape, viewed as a `(T W) x C` matrix.
#[derive(Debug, Clone)]
pub struct StackedPpmi {
    blocks: Vec<PpmiMatrix>,
    words: usize,
    contexts: usize,
}

/// Stack per-period PPMI matrices in period order.
pub fn stack_ppmi(matrices: Vec<PpmiMatrix>) -> Result<StackedPpmi> {
    if matrices.len() < 2 {
        return Err(Error::TooFewPeriods { found: matrices.len() });
    }
    let (words, contexts) = (matrices[0].num_targets(), matrices[0].num_contexts());
    for (t, m) in matrices.iter().enumerate() {
        if m.num_targets() != words || m.num_contexts() != contexts {
            return Err(Error::VocabularyMismatch(alloc::format!(
                "block {t} is {}x{}, expected {words}x{contexts}",
                m.num_targets(),
                m.num_contexts()
            )));
        }
    }
    Ok(StackedPpmi {
        blocks: matrices,
        words,
        contexts,
    })
}

impl StackedPpmi {
    pub fn num_periods(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_words(&self) -> usize {
        self.words
    }

    pub fn num_contexts(&self) -> usize {
        self.contexts
    }

    pub fn blocks(&self) -> &[PpmiMatrix] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<PpmiMatrix> {
        self.blocks
    }

    /// Stored value at stacked row `row`, column `c`.
    pub fn get(&self, row: usize, c: usize) -> f64 {
        self.blocks[row / self.words].values.get(row % self.words, c).unwrap_or(0.0)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.blocks.iter().map(|b| b.values.frobenius_sq()).sum()
    }

    /// Dense copy (tests and small inputs only).
    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.nrows(), self.contexts);
        for (t, b) in self.blocks.iter().enumerate() {
            for (r, c, v) in b.values.iter() {
                m.set(t * self.words + r, c, v);
            }
        }
        m
    }
}

impl LinearOperator for StackedPpmi {
    fn nrows(&self) -> usize {
        self.blocks.len() * self.words
    }

    fn ncols(&self) -> usize {
        self.contexts
    }

    fn apply(&self, x: &[f64], k: usize, out: &mut [f64]) {
        let stride = self.words * k;
        let outs: Vec<&mut [f64]> = out.chunks_mut(stride).collect();
        for (block, dst) in self.blocks.iter().zip(outs) {
            dst.fill(0.0);
            block.values.mul_dense_into(x, k, dst);
        }
    }

    fn apply_transpose(&self, y: &[f64], k: usize, out: &mut [f64]) {
        // Blocks are accumulated in period order so the sum order is fixed.
        out.fill(0.0);
        let stride = self.words * k;
        for (t, block) in self.blocks.iter().enumerate() {
            block.values.tmul_dense_into(&y[t * stride..(t + 1) * stride], k, out);
        }
    }
}

/// Truncated SVD factors of the stacked matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    /// `(T W) x D`, orthonormal columns.
    pub u: Mat,
    /// Non-increasing, non-negative.
    pub sigma: Vec<f64>,
    /// `C x D`, orthonormal columns.
    pub v: Mat,
}

/// Rank-`dim` randomized SVD of the stack, deterministic under `seed`.
///
/// Each singular triplet is sign-canonicalized so that the largest-magnitude
/// entry of its `U` column is positive.
pub fn truncated_svd(stacked: &StackedPpmi, dim: usize, params: &RsvdParams, seed: u64) -> Result<SvdFactors> {
    let max = stacked.nrows().min(stacked.ncols());
    if dim == 0 || dim > max {
        return Err(Error::param("dim", alloc::format!("{dim} outside 1..={max}")));
    }
    let svd = randomized_svd(stacked, dim, params, seed)?;
    let mut factors = SvdFactors {
        u: svd.u,
        sigma: svd.sigma,
        v: svd.v,
    };
    canonicalize_signs(&mut factors);
    Ok(factors)
}

/// Flip each `(u_j, v_j)` pair so the entry of `u_j` with the largest
/// magnitude (first one on ties) is positive.
pub fn canonicalize_signs(f: &mut SvdFactors) {
    for j in 0..f.sigma.len() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for r in 0..f.u.rows() {
            let x = f.u.get(r, j);
            if x.abs() > best {
                best = x.abs();
                sign = x.signum();
            }
        }
        if sign < 0.0 {
            for r in 0..f.u.rows() {
                f.u.set(r, j, -f.u.get(r, j));
            }
            for r in 0..f.v.rows() {
                f.v.set(r, j, -f.v.get(r, j));
            }
        }
    }
}

/// Dense `T x W x D` embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTensor {
    periods: usize,
    words: usize,
    dim: usize,
    values: Vec<f64>,
}

impl EmbeddingTensor {
    pub fn new(periods: usize, words: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != periods * words * dim {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} values for {periods}x{words}x{dim}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invariant("embedding contains non-finite values".into()));
        }
        Ok(Self {
            periods,
            words,
            dim,
            values,
        })
    }

    pub fn num_periods(&self) -> usize {
        self.periods
    }

    pub fn num_words(&self) -> usize {
        self.words
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Embedding of word `w` in period `t`.
    pub fn vector(&self, t: usize, w: usize) -> &[f64] {
        let start = (t * self.words + w) * self.dim;
        &self.values[start..start + self.dim]
    }
}

/// Slice `U diag(sqrt(sigma))` into `T` consecutive blocks of `W` rows.
pub fn embeddings_from_svd(factors: &SvdFactors, periods: usize, words: usize) -> Result<EmbeddingTensor> {
    if factors.u.rows() != periods * words {
        return Err(Error::ShapeMismatch(alloc::format!(
            "U has {} rows, expected {periods} x {words}",
            factors.u.rows()
        )));
    }
    let dim = factors.sigma.len();
    let scale: Vec<f64> = factors.sigma.iter().map(|&s| libm::sqrt(s.max(0.0))).collect();
    let mut values = vec![0.0; periods * words * dim];
    for (r, dst) in values.chunks_mut(dim.max(1)).enumerate().take(periods * words) {
        for (j, d) in dst.iter_mut().enumerate() {
            *d = factors.u.get(r, j) * scale[j];
        }
    }
    EmbeddingTensor::new(periods, words, dim, values)
}

/// Squared Frobenius error `|A - U S V^T|^2` of a factorization of the stack.
pub fn reconstruction_error_sq(stacked: &StackedPpmi, f: &SvdFactors) -> f64 {
    // |A|^2 - 2 <A, USV^T> + |USV^T|^2, with the middle term from stored entries.
    let d = f.sigma.len();
    let mut cross = 0.0;
    for (t, block) in stacked.blocks().iter().enumerate() {
        for (r, c, a) in block.values.iter() {
            let row = t * stacked.num_words() + r;
            let mut approx = 0.0;
            for j in 0..d {
                approx += f.u.get(row, j) * f.sigma[j] * f.v.get(c, j);
            }
            cross += a * approx;
        }
    }
    // |U S V^T|^2 = tr(S U^T U S V^T V) computed exactly via Gram matrices.
    let gram = |m: &Mat| {
        let mut g = vec![0.0; d * d];
        for r in 0..m.rows() {
            let row = m.row(r);
            for i in 0..d {
                for j in 0..d {
                    g[i * d + j] += row[i] * row[j];
                }
            }
        }
        g
    };
    let (gu, gv) = (gram(&f.u), gram(&f.v));
    let mut approx_sq = 0.0;
    for i in 0..d {
        for j in 0..d {
            approx_sq += f.sigma[i] * f.sigma[j] * gu[i * d + j] * gv[i * d + j];
        }
    }
    (stacked.frobenius_sq() - 2.0 * cross + approx_sq).max(0.0)
}
