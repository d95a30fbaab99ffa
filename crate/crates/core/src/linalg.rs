//! Dense helpers and the randomized truncated SVD.
//!
//! Dense matrices are row-major `f64`. Orthonormalization runs modified
//! Gram-Schmidt with a second pass on contiguous columns; the small SVD is one-sided
//! (Hestenes) Jacobi, which computes singular values to high relative accuracy.

use alloc::vec;
use alloc::vec::Vec;

use crate::rng;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// Column-major copy: one `Vec` per column.
    pub fn to_columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (c, col) in columns.iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                m.data[r * cols + c] = v;
            }
        }
        m
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(alloc::format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a != 0.0 {
                    for (d, &b) in dst.iter_mut().zip(other.row(k)) {
                        *d += a * b;
                    }
                }
            }
        }
        Ok(out)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Something that can multiply a row-major dense block from either side.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `out = A x` with `x` row-major `ncols x k`, `out` row-major `nrows x k` (overwritten).
    fn apply(&self, x: &[f64], k: usize, out: &mut [f64]);
    /// `out = A^T y` with `y` row-major `nrows x k`, `out` row-major `ncols x k` (overwritten).
    fn apply_transpose(&self, y: &[f64], k: usize, out: &mut [f64]);
}

impl LinearOperator for CsrMatrix<f64> {
    fn nrows(&self) -> usize {
        CsrMatrix::nrows(self)
    }
    fn ncols(&self) -> usize {
        CsrMatrix::ncols(self)
    }
    fn apply(&self, x: &[f64], k: usize, out: &mut [f64]) {
        out.fill(0.0);
        self.mul_dense_into(x, k, out);
    }
    fn apply_transpose(&self, y: &[f64], k: usize, out: &mut [f64]) {
        out.fill(0.0);
        self.tmul_dense_into(y, k, out);
    }
}

impl LinearOperator for Mat {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &[f64], k: usize, out: &mut [f64]) {
        out.fill(0.0);
        for r in 0..self.rows {
            let dst = &mut out[r * k..(r + 1) * k];
            for (c, &a) in self.row(r).iter().enumerate() {
                for (d, &s) in dst.iter_mut().zip(&x[c * k..(c + 1) * k]) {
                    *d += a * s;
                }
            }
        }
    }
    fn apply_transpose(&self, y: &[f64], k: usize, out: &mut [f64]) {
        out.fill(0.0);
        for r in 0..self.rows {
            let src = &y[r * k..(r + 1) * k];
            for (c, &a) in self.row(r).iter().enumerate() {
                for (d, &s) in out[c * k..(c + 1) * k].iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
    }
}

/// Orthonormalize columns in place (two-pass Gram-Schmidt). A column that collapses
/// numerically is replaced by the first standard basis vector that is not
/// already spanned, so the result always has orthonormal columns.
pub fn orthonormalize(columns: &mut [Vec<f64>]) {
    let m = columns.first().map_or(0, Vec::len);
    let mut next_basis = 0usize;
    for j in 0..columns.len() {
        let (done, rest) = columns.split_at_mut(j);
        let col = &mut rest[0];
        let original = norm(col);
        project_out(done, col);
        let n = norm(col);
        if n > 0.0 && n > 1e-10 * original {
            col.iter_mut().for_each(|v| *v /= n);
            continue;
        }
        loop {
            col.fill(0.0);
            if next_basis >= m {
                // More columns than the ambient dimension; leave as zero.
                break;
            }
            col[next_basis] = 1.0;
            next_basis += 1;
            project_out(done, col);
            let n = norm(col);
            if n > 1e-8 {
                col.iter_mut().for_each(|v| *v /= n);
                break;
            }
        }
    }
}

fn project_out(basis: &[Vec<f64>], col: &mut [f64]) {
    for _ in 0..2 {
        for q in basis {
            let d = dot(q, col);
            if d != 0.0 {
                for (c, &qv) in col.iter_mut().zip(q) {
                    *c -= d * qv;
                }
            }
        }
    }
}

fn orthonormalize_rowmajor(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let m = Mat::from_vec(rows, cols, data.to_vec()).expect("shape");
    let mut columns = m.to_columns();
    orthonormalize(&mut columns);
    Mat::from_columns(rows, &columns).into_vec()
}

/// Thin SVD result; `u` is `m x k`, `v` is `n x k`, both with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: Mat,
    pub sigma: Vec<f64>,
    pub v: Mat,
}

/// One-sided Jacobi SVD of a dense matrix with `rows >= cols`.
///
/// Returns all `cols` singular triplets sorted by decreasing singular value.
pub fn jacobi_svd(a: &Mat) -> Result<Svd> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        let t = jacobi_svd(&a.transpose())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let mut g = a.to_columns();
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let tol = f64::EPSILON * (m as f64).max(4.0);
    // Columns below this squared norm are numerically zero; rotating them
    // against each other can stall without ever meeting `tol`.
    let total: f64 = g.iter().map(|c| dot(c, c)).sum();
    let floor = total * (f64::EPSILON * f64::EPSILON);
    let mut converged = false;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&g[p], &g[p]);
                let beta = dot(&g[q], &g[q]);
                let gamma = dot(&g[p], &g[q]);
                if gamma == 0.0 || alpha <= floor || beta <= floor || gamma.abs() <= tol * libm::sqrt(alpha * beta) {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                if t == 0.0 || !t.is_finite() {
                    continue;
                }
                rotated = true;
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut g, p, q, c, s);
                rotate(&mut vcols, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Invariant("Jacobi SVD did not converge".into()));
    }
    let mut sigma: Vec<f64> = g.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));
    let scale = sigma.iter().copied().fold(0.0, f64::max);
    let mut ucols = Vec::with_capacity(n);
    let mut rcols = Vec::with_capacity(n);
    let mut sorted = Vec::with_capacity(n);
    for &j in &order {
        let s = sigma[j];
        let mut u = core::mem::take(&mut g[j]);
        if s > scale * 1e-300 && s > 0.0 {
            u.iter_mut().for_each(|x| *x /= s);
        } else {
            u.fill(0.0);
        }
        ucols.push(u);
        rcols.push(core::mem::take(&mut vcols[j]));
        sorted.push(s);
    }
    // Null directions get an orthonormal completion.
    orthonormalize(&mut ucols);
    sigma = sorted;
    Ok(Svd {
        u: Mat::from_columns(m, &ucols),
        sigma,
        v: Mat::from_columns(n, &rcols),
    })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Randomized range-finder parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsvdParams {
    /// Extra sketch columns beyond the requested rank.
    pub oversample: usize,
    /// Subspace (power) iterations always performed.
    pub power_iters: usize,
    /// When set, keep iterating past `power_iters` until the requested
    /// singular values change by less than this relative amount.
    pub tol: Option<f64>,
    /// Upper bound on iterations when `tol` is set.
    pub max_iters: usize,
}

impl Default for RsvdParams {
    fn default() -> Self {
        Self {
            oversample: 10,
            power_iters: 7,
            tol: Some(1e-12),
            max_iters: 200,
        }
    }
}

/// Rank-`rank` randomized SVD of `op` with a Gaussian test matrix drawn from `seed`.
pub fn randomized_svd<A: LinearOperator + ?Sized>(op: &A, rank: usize, params: &RsvdParams, seed: u64) -> Result<Svd> {
    let (m, n) = (op.nrows(), op.ncols());
    if rank == 0 || rank > m.min(n) {
        return Err(Error::param(
            "dim",
            alloc::format!("rank {rank} outside 1..={}", m.min(n)),
        ));
    }
    let l = (rank + params.oversample).min(m.min(n));
    let mut rng = rng::stream(seed, &[0x5fd]);
    let omega: Vec<f64> = (0..n * l).map(|_| rng::standard_normal(&mut rng)).collect();

    let mut y = vec![0.0; m * l];
    let mut z = vec![0.0; n * l];
    op.apply(&omega, l, &mut y);
    let mut q = orthonormalize_rowmajor(&y, m, l);
    for _ in 0..params.power_iters {
        op.apply_transpose(&q, l, &mut z);
        let zq = orthonormalize_rowmajor(&z, n, l);
        op.apply(&zq, l, &mut y);
        q = orthonormalize_rowmajor(&y, m, l);
    }

    // B^T = A^T Q is n x l; its SVD gives B = R S L^T, so A ~ (Q R) S L^T.
    let mut iters = params.power_iters;
    let mut previous: Option<Vec<f64>> = None;
    let small = loop {
        op.apply_transpose(&q, l, &mut z);
        let bt = Mat::from_vec(n, l, z.clone())?;
        let svd = jacobi_svd(&bt)?;
        let done = match (params.tol, &previous) {
            (None, _) => true,
            (Some(tol), Some(prev)) => {
                let top = svd.sigma[0];
                svd.sigma[..rank]
                    .iter()
                    .zip(&prev[..rank])
                    .all(|(s, p)| (s - p).abs() <= tol * top)
            }
            (Some(_), None) => false,
        };
        if done || iters >= params.max_iters {
            break svd;
        }
        previous = Some(svd.sigma);
        iters += 1;
        let zq = orthonormalize_rowmajor(&z, n, l);
        op.apply(&zq, l, &mut y);
        q = orthonormalize_rowmajor(&y, m, l);
    };

    let qm = Mat::from_vec(m, l, q)?;
    let u_full = qm.matmul(&small.v)?;
    let mut u = Mat::zeros(m, rank);
    let mut v = Mat::zeros(n, rank);
    for r in 0..m {
        for c in 0..rank {
            u.set(r, c, u_full.get(r, c));
        }
    }
    for r in 0..n {
        for c in 0..rank {
            v.set(r, c, small.u.get(r, c));
        }
    }
    Ok(Svd {
        u,
        sigma: small.sigma[..rank].to_vec(),
        v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_mat(rows: usize, cols: usize, seed: u64) -> Mat {
        let mut r = rng::stream(seed, &[]);
        Mat::from_vec(rows, cols, (0..rows * cols).map(|_| r.random::<f64>() - 0.5).collect()).unwrap()
    }

    fn assert_orthonormal(m: &Mat, tol: f64) {
        let cols = m.to_columns();
        for i in 0..cols.len() {
            for j in 0..cols.len() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&cols[i], &cols[j]) - expect).abs() < tol, "({i},{j})");
            }
        }
    }

    fn reconstruct(svd: &Svd) -> Mat {
        let mut us = svd.u.clone();
        for r in 0..us.rows() {
            for c in 0..us.cols() {
                us.set(r, c, us.get(r, c) * svd.sigma[c]);
            }
        }
        us.matmul(&svd.v.transpose()).unwrap()
    }

    #[test]
    fn jacobi_matches_nalgebra() {
        for (rows, cols) in [(7, 4), (4, 7), (12, 12)] {
            let a = random_mat(rows, cols, rows as u64 * 31 + cols as u64);
            let svd = jacobi_svd(&a).unwrap();
            let oracle = nalgebra::DMatrix::from_row_slice(rows, cols, a.data()).singular_values();
            let mut expected: Vec<f64> = oracle.iter().copied().collect();
            expected.sort_by(|x, y| y.total_cmp(x));
            for (s, e) in svd.sigma.iter().zip(&expected) {
                assert!((s - e).abs() < 1e-12 * expected[0], "{s} vs {e}");
            }
            assert_orthonormal(&svd.u, 1e-12);
            assert_orthonormal(&svd.v, 1e-12);
            let back = reconstruct(&svd);
            for (x, y) in back.data().iter().zip(a.data()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn orthonormalize_handles_dependent_columns() {
        let mut cols = vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0], vec![0.0, 0.0, 0.0]];
        orthonormalize(&mut cols);
        assert_orthonormal(&Mat::from_columns(3, &cols), 1e-12);
    }

    #[test]
    fn negligible_column_does_not_stall() {
        let mut a = random_mat(12, 4, 8);
        for r in 0..12 {
            let x = a.get(r, 0);
            a.set(r, 3, 1e-300 * (x + a.get(r, 1)));
        }
        let svd = jacobi_svd(&a).unwrap();
        assert!(svd.sigma[3] < 1e-250);
        let r = reconstruct(&svd);
        for (x, y) in r.data().iter().zip(a.data()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_matrix() {
        let u = [0.6, 0.8, 0.0];
        let v = [0.0, 1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt(), 0.0];
        let mut a = Mat::zeros(3, 4);
        for r in 0..3 {
            for c in 0..4 {
                a.set(r, c, u[r] * v[c]);
            }
        }
        let svd = randomized_svd(&a, 2, &RsvdParams::default(), 9).unwrap();
        assert!((svd.sigma[0] - 1.0).abs() < 1e-12);
        assert!(svd.sigma[1].abs() < 1e-12);
        assert_orthonormal(&svd.u, 1e-9);
        assert_orthonormal(&svd.v, 1e-9);
    }

    #[test]
    fn rank_out_of_range() {
        let a = Mat::zeros(3, 4);
        assert!(randomized_svd(&a, 0, &RsvdParams::default(), 1).is_err());
        assert!(randomized_svd(&a, 4, &RsvdParams::default(), 1).is_err());
    }

    #[test]
    fn operator_products_agree_with_matmul() {
        let a = random_mat(5, 3, 2);
        let x = random_mat(3, 2, 3);
        let mut out = vec![0.0; 10];
        a.apply(x.data(), 2, &mut out);
        assert_eq!(out, a.matmul(&x).unwrap().into_vec());
        let y = random_mat(5, 2, 4);
        let mut back = vec![0.0; 6];
        a.apply_transpose(y.data(), 2, &mut back);
        let expect = a.transpose().matmul(&y).unwrap();
        for (p, q) in back.iter().zip(expect.data()) {
            assert!((p - q).abs() < 1e-14);
        }
    }
}
