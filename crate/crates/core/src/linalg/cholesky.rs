//! Envelope (skyline) Cholesky factorization with reverse Cuthill-McKee
//! ordering.
//!
//! Mass and stiffness matrices of P1 meshes have a narrow envelope after RCM
//! reordering, so a row-oriented envelope factor is compact and its solves
//! reduce to contiguous dot products and axpys.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseMatrix};
use crate::par;

/// Factor `M = P L L^T P^T` with `L` stored row-wise over its envelope.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// first stored column of each row of `L`
    first: Vec<usize>,
    /// offset of `L[i][first[i]]` in `values`
    offsets: Vec<usize>,
    values: Vec<f64>,
}

/// Reverse Cuthill-McKee ordering of the symmetric sparsity graph.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_ordering(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let (cols, _) = a.row(i);
            cols.iter().copied().filter(|&j| j != i).collect()
        })
        .collect();
    let degree: Vec<usize> = adj.iter().map(|v| v.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, mask: &[bool]| -> (Vec<usize>, usize) {
        // returns last level and depth
        let mut seen = vec![false; n];
        let mut level = vec![start];
        seen[start] = true;
        let mut depth = 0;
        loop {
            let mut next = Vec::new();
            for &u in &level {
                for &w in &adj[u] {
                    if !seen[w] && !mask[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                return (level, depth);
            }
            level = next;
            depth += 1;
        }
    };

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let mut start = seed;
        // pseudo-peripheral node search (George-Liu)
        let mut depth = 0;
        for _ in 0..8 {
            let (last, d) = bfs_levels(start, &visited);
            if d <= depth && depth > 0 {
                break;
            }
            depth = d;
            let cand = *last
                .iter()
                .min_by_key(|&&u| (degree[u], u))
                .unwrap_or(&start);
            if cand == start {
                break;
            }
            start = cand;
        }
        let comp_start = order.len();
        let mut queue = VecDeque::new();
        queue.push_back(start);
        visited[start] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nbrs: Vec<usize> = adj[u].iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
        order[comp_start..].reverse();
    }
    order
}

impl CholeskyFactor {
    /// Factor a symmetric positive definite sparse matrix.
    ///
    /// With `spd_check` the matrix is first tested for symmetry.
    pub fn new(m: &SparseMatrix, spd_check: bool) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::invalid("cholesky needs a square matrix"));
        }
        if spd_check {
            let asym = m.asymmetry();
            if asym > 1e-12 * m.max_abs().max(f64::MIN_POSITIVE) {
                return Err(Error::invalid(format!(
                    "cholesky: matrix not symmetric (max |A - A^T| = {asym:e})"
                )));
            }
        }
        let perm = rcm_ordering(m);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        // envelope: first nonzero column per permuted row (lower part)
        let mut first: Vec<usize> = (0..n).collect();
        for (new_i, &old_i) in perm.iter().enumerate() {
            let (cols, _) = m.row(old_i);
            for &old_j in cols {
                let new_j = inv[old_j];
                if new_j < first[new_i] {
                    first[new_i] = new_j;
                }
            }
        }
        // structurally unsymmetric input: cover the transposed pattern too
        for (new_i, &old_i) in perm.iter().enumerate() {
            let (cols, _) = m.row(old_i);
            for &old_j in cols {
                let new_j = inv[old_j];
                if new_j > new_i && new_i < first[new_j] {
                    first[new_j] = new_i;
                }
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for i in 0..n {
            offsets.push(total);
            total += i - first[i] + 1;
        }
        offsets.push(total);
        let mut values = vec![0.0; total];
        let mut max_diag: f64 = 0.0;
        for (new_i, &old_i) in perm.iter().enumerate() {
            let (cols, vals) = m.row(old_i);
            for (&old_j, &v) in cols.iter().zip(vals) {
                let new_j = inv[old_j];
                if new_j <= new_i {
                    values[offsets[new_i] + new_j - first[new_i]] += v;
                }
                if new_j == new_i {
                    max_diag = max_diag.max(v.abs());
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let oi = offsets[i];
            for j in fi..i {
                let fj = first[j];
                let oj = offsets[j];
                let k0 = fi.max(fj);
                let li = &values[oi + k0 - fi..oi + j - fi];
                let lj = &values[oj + k0 - fj..oj + j - fj];
                let s: f64 = li.iter().zip(lj).map(|(a, b)| a * b).sum();
                let djj = values[oj + j - fj];
                values[oi + j - fi] = (values[oi + j - fi] - s) / djj;
            }
            let row = &values[oi..oi + i - fi];
            let s: f64 = row.iter().map(|a| a * a).sum();
            let pivot = values[oi + i - fi] - s;
            if !(pivot > 1e-14 * max_diag) || !pivot.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    row: perm[i],
                    pivot,
                });
            }
            values[oi + i - fi] = pivot.sqrt();
        }
        Ok(CholeskyFactor {
            n,
            perm,
            first,
            offsets,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored entries of `L`.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    #[inline]
    fn lrow(&self, i: usize) -> &[f64] {
        &self.values[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Dense copy of `L` in permuted ordering.
    pub fn lower_dense(&self) -> DenseMatrix {
        let mut l = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (k, &v) in self.lrow(i).iter().enumerate() {
                l[(i, self.first[i] + k)] = v;
            }
        }
        l
    }

    /// `L z = c` in place.
    fn forward(&self, z: &mut [f64]) {
        for i in 0..self.n {
            let fi = self.first[i];
            let row = self.lrow(i);
            let (off, diag) = row.split_at(row.len() - 1);
            let s: f64 = off.iter().zip(&z[fi..i]).map(|(a, b)| a * b).sum();
            z[i] = (z[i] - s) / diag[0];
        }
    }

    /// `L^T z = c` in place.
    fn backward(&self, z: &mut [f64]) {
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = self.lrow(i);
            let (off, diag) = row.split_at(row.len() - 1);
            z[i] /= diag[0];
            let zi = z[i];
            for (zz, &a) in z[fi..i].iter_mut().zip(off) {
                *zz -= a * zi;
            }
        }
    }

    /// Solve `M y = b` for a single right-hand side.
    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::invalid("cholesky solve: dimension mismatch"));
        }
        let mut z: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        self.forward(&mut z);
        self.backward(&mut z);
        let mut y = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            y[old] = z[new];
        }
        Ok(y)
    }

    /// Apply `columnwise` to each column of `b` (in permuted ordering),
    /// columns processed in parallel.
    fn map_columns(
        &self,
        b: &DenseMatrix,
        columnwise: impl Fn(&mut [f64]) + Sync + Send,
    ) -> Result<DenseMatrix> {
        if b.nrows() != self.n {
            return Err(Error::invalid(format!(
                "cholesky: {} rows for a factor of dimension {}",
                b.nrows(),
                self.n
            )));
        }
        let r = b.ncols();
        let cols = par::map_range(r, |j| {
            let mut z: Vec<f64> = self.perm.iter().map(|&old| b[(old, j)]).collect();
            columnwise(&mut z);
            z
        });
        let mut out = DenseMatrix::zeros(self.n, r);
        for (j, z) in cols.iter().enumerate() {
            for (new, &old) in self.perm.iter().enumerate() {
                out[(old, j)] = z[new];
            }
        }
        Ok(out)
    }

    /// Solve `M Y = B` for all columns of `B`.
    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        self.map_columns(b, |z| {
            self.forward(z);
            self.backward(z);
        })
    }

    /// `L^T P^T A` (result rows in permuted ordering).
    pub fn apply_lt_pt(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.nrows() != self.n {
            return Err(Error::invalid("apply_lt_pt: dimension mismatch"));
        }
        let r = a.ncols();
        let cols = par::map_range(r, |j| {
            let z: Vec<f64> = self.perm.iter().map(|&old| a[(old, j)]).collect();
            let mut out = vec![0.0; self.n];
            for i in 0..self.n {
                let fi = self.first[i];
                let zi = z[i];
                if zi == 0.0 {
                    continue;
                }
                for (o, &l) in out[fi..=i].iter_mut().zip(self.lrow(i)) {
                    *o += l * zi;
                }
            }
            out
        });
        let mut out = DenseMatrix::zeros(self.n, r);
        for (j, c) in cols.iter().enumerate() {
            out.set_column(j, c);
        }
        Ok(out)
    }

    /// `P L^{-T} B` for `B` in permuted ordering (inverse of [`apply_lt_pt`]).
    ///
    /// [`apply_lt_pt`]: CholeskyFactor::apply_lt_pt
    pub fn solve_lt_p(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if b.nrows() != self.n {
            return Err(Error::invalid("solve_lt_p: dimension mismatch"));
        }
        let r = b.ncols();
        let cols = par::map_range(r, |j| {
            let mut z = b.column(j);
            self.backward(&mut z);
            z
        });
        let mut out = DenseMatrix::zeros(self.n, r);
        for (j, z) in cols.iter().enumerate() {
            for (new, &old) in self.perm.iter().enumerate() {
                out[(old, j)] = z[new];
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + 1e-3));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn diagonal_factor() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 4.0), (1, 1, 9.0)]).unwrap();
        let c = CholeskyFactor::new(&m, true).unwrap();
        let l = c.lower_dense();
        let mut diag: Vec<f64> = (0..2).map(|i| l[(i, i)]).collect();
        diag.sort_by(f64::total_cmp);
        assert_eq!(diag, vec![2.0, 3.0]);
    }

    #[test]
    fn zero_row_is_not_pd() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0)]).unwrap();
        assert!(matches!(
            CholeskyFactor::new(&m, true),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn asymmetric_rejected() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 1, 2.0)])
            .unwrap();
        assert!(CholeskyFactor::new(&m, true).is_err());
    }

    #[test]
    fn reconstruction_and_solve() {
        let m = laplace_1d(40);
        let c = CholeskyFactor::new(&m, true).unwrap();
        let l = c.lower_dense();
        let llt = l.matmul_t(&l).unwrap();
        let md = m.to_dense();
        let p = c.permutation();
        let mut worst: f64 = 0.0;
        for a in 0..40 {
            for b in 0..40 {
                worst = worst.max((llt[(a, b)] - md[(p[a], p[b])]).abs());
            }
        }
        assert!(worst <= 1e-10 * md.max_abs());

        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let y = c.solve_vec(&b).unwrap();
        let r = m.matvec(&y).unwrap();
        let res: f64 = r.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(res <= 1e-10 * nb);
    }

    #[test]
    fn lt_roundtrip() {
        let m = laplace_1d(17);
        let c = CholeskyFactor::new(&m, false).unwrap();
        let a = DenseMatrix::from_fn(17, 3, |i, j| ((i + 2 * j) as f64).cos());
        let b = c.apply_lt_pt(&a).unwrap();
        let back = c.solve_lt_p(&b).unwrap();
        assert!(back.sub(&a).max_abs() < 1e-12);
    }

    #[test]
    fn rcm_is_permutation() {
        let m = laplace_1d(25);
        let mut p = rcm_ordering(&m);
        p.sort();
        assert_eq!(p, (0..25).collect::<Vec<_>>());
    }
}
