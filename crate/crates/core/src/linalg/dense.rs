use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::par;

/// Row-major dense matrix.
///
/// Used both for the tall factor matrices (n x r) and for the small r x r
/// coefficient matrices of the low-rank representation.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} values for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    /// Build an n x k matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::invalid(format!(
                    "column {} has length {}, expected {}",
                    j,
                    c.len(),
                    rows
                )));
            }
            for (i, &v) in c.iter().enumerate() {
                m.data[i * m.cols + j] = v;
            }
        }
        Ok(m)
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::with_capacity(self.rows); self.cols];
        for i in 0..self.rows {
            for (j, c) in out.iter_mut().enumerate() {
                c.push(self.data[i * self.cols + j]);
            }
        }
        out
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        for (i, &v) in values.iter().enumerate() {
            self.data[i * self.cols + j] = v;
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Keep the leading `k` columns.
    pub fn leading_columns(&self, k: usize) -> DenseMatrix {
        let k = k.min(self.cols);
        DenseMatrix::from_fn(self.rows, k, |i, j| self[(i, j)])
    }

    /// Keep the leading `k` rows.
    pub fn leading_rows(&self, k: usize) -> DenseMatrix {
        let k = k.min(self.rows);
        DenseMatrix {
            rows: k,
            cols: self.cols,
            data: self.data[..k * self.cols].to_vec(),
        }
    }

    /// Horizontal concatenation `[self, other]`.
    pub fn hstack(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::invalid(format!(
                "hstack row mismatch: {} vs {}",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut out = DenseMatrix::zeros(self.rows, cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * cols..(i + 1) * cols];
            dst[..self.cols].copy_from_slice(self.row(i));
            dst[self.cols..].copy_from_slice(other.row(i));
        }
        Ok(out)
    }

    pub fn scale(&self, alpha: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn scale_mut(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &DenseMatrix) {
        debug_assert_eq!(self.shape(), other.shape());
        self.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += alpha * b);
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// `alpha * self + beta * other` elementwise.
    pub fn lincomb(alpha: f64, a: &DenseMatrix, beta: f64, b: &DenseMatrix) -> DenseMatrix {
        debug_assert_eq!(a.shape(), b.shape());
        DenseMatrix {
            rows: a.rows,
            cols: a.cols,
            data: a
                .data
                .iter()
                .zip(&b.data)
                .map(|(x, y)| alpha * x + beta * y)
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Dense product `self * other`, parallel over row blocks.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        let oc = other.cols;
        if oc == 0 {
            return Ok(out);
        }
        let rows_per_chunk = 64;
        par::for_each_chunk_mut(&mut out.data, rows_per_chunk * oc, |ci, chunk| {
            let r0 = ci * rows_per_chunk;
            for (li, dst) in chunk.chunks_mut(oc).enumerate() {
                let a = self.row(r0 + li);
                for (k, &aik) in a.iter().enumerate() {
                    if aik == 0.0 {
                        continue;
                    }
                    let b = other.row(k);
                    for (d, &bv) in dst.iter_mut().zip(b) {
                        *d += aik * bv;
                    }
                }
            }
        });
        Ok(out)
    }

    /// `self * other^T`.
    pub fn matmul_t(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.matmul(&other.transpose())
    }

    /// `self^T * other` for two tall matrices with the same row count.
    ///
    /// Computed as a chunked sum of row outer products; the chunking is fixed
    /// so the result is bitwise independent of the thread count.
    pub fn t_matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::invalid(format!(
                "t_matmul row mismatch: {} vs {}",
                self.rows, other.rows
            )));
        }
        let (p, q) = (self.cols, other.cols);
        let n_chunks = self.rows.div_ceil(par::REDUCE_CHUNK);
        let partials = par::map_range(n_chunks, |c| {
            let mut acc = vec![0.0; p * q];
            let lo = c * par::REDUCE_CHUNK;
            let hi = (lo + par::REDUCE_CHUNK).min(self.rows);
            for i in lo..hi {
                let a = self.row(i);
                let b = other.row(i);
                for (ai, &av) in a.iter().enumerate() {
                    if av == 0.0 {
                        continue;
                    }
                    let dst = &mut acc[ai * q..(ai + 1) * q];
                    for (d, &bv) in dst.iter_mut().zip(b) {
                        *d += av * bv;
                    }
                }
            }
            acc
        });
        let mut out = vec![0.0; p * q];
        for part in partials {
            for (o, v) in out.iter_mut().zip(part) {
                *o += v;
            }
        }
        Ok(DenseMatrix {
            rows: p,
            cols: q,
            data: out,
        })
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &DenseMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// `self^T v` for a vector of length `nrows`.
    pub fn t_matvec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_matmul_matches_transpose_product() {
        let a = DenseMatrix::from_fn(1100, 3, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let b = DenseMatrix::from_fn(1100, 2, |i, j| ((i * 5 + j) % 13) as f64 * 0.25);
        let g = a.t_matmul(&b).unwrap();
        let h = a.transpose().matmul(&b).unwrap();
        assert!(g.sub(&h).max_abs() < 1e-9);
    }

    #[test]
    fn hstack_and_columns() {
        let a = DenseMatrix::identity(2);
        let b = DenseMatrix::from_fn(2, 1, |i, _| i as f64 + 5.0);
        let c = a.hstack(&b).unwrap();
        assert_eq!(c.shape(), (2, 3));
        assert_eq!(c.column(2), vec![5.0, 6.0]);
        assert!(DenseMatrix::identity(2).hstack(&DenseMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn matmul_dimension_mismatch() {
        assert!(DenseMatrix::zeros(2, 3).matmul(&DenseMatrix::zeros(2, 3)).is_err());
    }
}
