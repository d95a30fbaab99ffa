//! Compressed sparse row storage.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// CSR matrix with strictly increasing column indices within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<T>,
}

impl<T: Copy> CsrMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Build from raw CSR arrays, checking structure.
    pub fn from_raw(nrows: usize, ncols: usize, indptr: Vec<usize>, indices: Vec<u32>, values: Vec<T>) -> Result<Self> {
        let bad = |m: &str| Err(Error::ShapeMismatch(m.into()));
        if indptr.len() != nrows + 1 || indptr[0] != 0 || *indptr.last().unwrap() != indices.len() {
            return bad("malformed indptr");
        }
        if indices.len() != values.len() {
            return bad("indices and values differ in length");
        }
        for r in 0..nrows {
            if indptr[r] > indptr[r + 1] {
                return bad("indptr not monotone");
            }
            let row = &indices[indptr[r]..indptr[r + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&c| c as usize >= ncols) {
                return bad("column indices must be sorted, unique and in range");
            }
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    /// Build from `(row, col, value)` triplets; duplicates are rejected.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(u32, u32, T)>) -> Result<Self> {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        for &(r, c, _) in &triplets {
            if r as usize >= nrows || c as usize >= ncols {
                return Err(Error::IndexOutOfRange {
                    index: r.max(c) as usize,
                    size: nrows.max(ncols),
                });
            }
            indptr[r as usize + 1] += 1;
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        let indices = triplets.iter().map(|t| t.1).collect();
        let values = triplets.iter().map(|t| t.2).collect();
        Self::from_raw(nrows, ncols, indptr, indices, values)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[u32], &[T]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> Option<T> {
        let (idx, vals) = self.row(r);
        idx.binary_search(&(c as u32)).ok().map(|k| vals[k])
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// All stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (idx, vals) = self.row(r);
            idx.iter().zip(vals).map(move |(&c, &v)| (r, c as usize, v))
        })
    }

    /// Keep entries for which `f` returns `Some`, mapping their values.
    pub fn filter_map<U: Copy, F: FnMut(usize, usize, T) -> Option<U>>(&self, mut f: F) -> CsrMatrix<U> {
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for r in 0..self.nrows {
            let (idx, vals) = self.row(r);
            for (&c, &v) in idx.iter().zip(vals) {
                if let Some(u) = f(r, c as usize, v) {
                    indices.push(c);
                    values.push(u);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            values,
        }
    }
}

impl CsrMatrix<f64> {
    /// Dense row with zeros where nothing is stored.
    pub fn dense_row(&self, r: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        let (idx, vals) = self.row(r);
        for (&c, &v) in idx.iter().zip(vals) {
            out[c as usize] = v;
        }
        out
    }

    /// `out[rows] += self * x` for row-major `x` of shape `ncols x k`.
    /// `out` is row-major `nrows x k`.
    pub fn mul_dense_into(&self, x: &[f64], k: usize, out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols * k);
        debug_assert_eq!(out.len(), self.nrows * k);
        for r in 0..self.nrows {
            let (idx, vals) = self.row(r);
            let dst = &mut out[r * k..(r + 1) * k];
            for (&c, &a) in idx.iter().zip(vals) {
                let src = &x[c as usize * k..(c as usize + 1) * k];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
    }

    /// `out += self^T * y` for row-major `y` of shape `nrows x k`; `out` is `ncols x k`.
    pub fn tmul_dense_into(&self, y: &[f64], k: usize, out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.nrows * k);
        debug_assert_eq!(out.len(), self.ncols * k);
        for r in 0..self.nrows {
            let (idx, vals) = self.row(r);
            let src = &y[r * k..(r + 1) * k];
            for (&c, &a) in idx.iter().zip(vals) {
                let dst = &mut out[c as usize * k..(c as usize + 1) * k];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_roundtrip_and_products() {
        let m = CsrMatrix::from_triplets(2, 3, vec![(1, 2, 3.0), (0, 0, 1.0), (0, 2, 2.0)]).unwrap();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 2), Some(2.0));
        assert_eq!(m.get(1, 0), None);
        assert_eq!(m.dense_row(1), vec![0.0, 0.0, 3.0]);
        // x = identity-ish 3x1 column [1, 1, 1]
        let mut out = vec![0.0; 2];
        m.mul_dense_into(&[1.0, 1.0, 1.0], 1, &mut out);
        assert_eq!(out, vec![3.0, 3.0]);
        let mut back = vec![0.0; 3];
        m.tmul_dense_into(&[1.0, 2.0], 1, &mut back);
        assert_eq!(back, vec![1.0, 0.0, 8.0]);
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(CsrMatrix::<f64>::from_triplets(1, 1, vec![(0, 0, 1.0), (0, 0, 2.0)]).is_err());
        assert!(CsrMatrix::<f64>::from_triplets(1, 1, vec![(0, 3, 1.0)]).is_err());
        assert!(CsrMatrix::<f64>::from_raw(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
    }
}
