//! Small dense SVD by one-sided Jacobi and tail-based rank truncation.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// `A = U diag(sigma) V^T` with `sigma` sorted in descending order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

/// Thin SVD with descending singular values. Signs are fixed so that the
/// first nonzero entry of every left singular vector is nonnegative.
pub fn svd_sorted(a: &DenseMatrix) -> Result<Svd> {
    if !a.is_finite() {
        return Err(Error::invalid("svd of a non-finite matrix"));
    }
    let (m, n) = a.shape();
    if m.min(n) == 0 {
        return Ok(Svd {
            u: DenseMatrix::zeros(m, 0),
            sigma: Vec::new(),
            v: DenseMatrix::zeros(n, 0),
        });
    }
    if m < n {
        let t = tall_svd(&a.transpose());
        return Ok(fix_signs(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        }));
    }
    Ok(fix_signs(tall_svd(a)))
}

const MAX_SWEEPS: usize = 80;

/// One-sided Jacobi on the columns of a matrix with `m >= n`.
fn tall_svd(a: &DenseMatrix) -> Svd {
    let (m, n) = a.shape();
    let mut cols = a.columns();
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let scale = a.frobenius_norm();
    let tiny = (f64::MIN_POSITIVE / f64::EPSILON).sqrt() * scale.max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if alpha.sqrt() <= tiny || beta.sqrt() <= tiny {
                    continue;
                }
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
                let (lo, hi) = vcols.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let top = sigma[order[0]];
    let mut ucols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut sorted = Vec::with_capacity(n);
    for &j in &order {
        let sj = sigma[j];
        if sj > tiny && sj > f64::EPSILON * top * 1e-3 {
            ucols.push(cols[j].iter().map(|x| x / sj).collect());
            sorted.push(sj);
        } else {
            ucols.push(Vec::new());
            sorted.push(0.0);
        }
        vs.push(vcols[j].clone());
    }
    complete_basis(&mut ucols, m);
    sigma = sorted;
    Svd {
        u: DenseMatrix::from_columns(m, &ucols).expect("column lengths"),
        sigma,
        v: DenseMatrix::from_columns(n, &vs).expect("column lengths"),
    }
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Fill empty columns with unit vectors orthogonal to the others.
fn complete_basis(cols: &mut [Vec<f64>], m: usize) {
    let mut next = 0;
    for j in 0..cols.len() {
        if !cols[j].is_empty() {
            continue;
        }
        while next < m {
            let mut w = vec![0.0; m];
            w[next] = 1.0;
            next += 1;
            for _ in 0..2 {
                for c in cols.iter().filter(|c| !c.is_empty()) {
                    let d: f64 = c.iter().zip(&w).map(|(a, b)| a * b).sum();
                    w.iter_mut().zip(c).for_each(|(x, y)| *x -= d * y);
                }
            }
            let nrm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm > 0.5 {
                cols[j] = w.into_iter().map(|x| x / nrm).collect();
                break;
            }
        }
    }
}

fn fix_signs(mut s: Svd) -> Svd {
    for j in 0..s.sigma.len() {
        let first = (0..s.u.nrows()).map(|i| s.u[(i, j)]).find(|x| x.abs() > 0.0);
        if first.is_some_and(|x| x < 0.0) {
            for i in 0..s.u.nrows() {
                s.u[(i, j)] = -s.u[(i, j)];
            }
            for i in 0..s.v.nrows() {
                s.v[(i, j)] = -s.v[(i, j)];
            }
        }
    }
    s
}

/// Smallest `r` with `sum_{i >= r} sigma_i^2 < eps^2`; `eps = 0` keeps all.
pub fn truncation_rank(sigma: &[f64], eps: f64) -> usize {
    if eps <= 0.0 {
        return sigma.len();
    }
    let eps2 = eps * eps;
    let mut tail = 0.0;
    // walk from the smallest value, growing the discarded tail
    let mut r = sigma.len();
    while r > 0 {
        let next = tail + sigma[r - 1] * sigma[r - 1];
        if next < eps2 {
            tail = next;
            r -= 1;
        } else {
            break;
        }
    }
    r
}

/// Truncated SVD with rank clamped to `[1, r_max]`.
pub fn svd_truncate(a: &DenseMatrix, eps: f64, r_max: usize) -> Result<Svd> {
    let full = svd_sorted(a)?;
    let r = truncation_rank(&full.sigma, eps).clamp(1, r_max.max(1)).min(full.sigma.len());
    Ok(Svd {
        u: full.u.leading_columns(r),
        sigma: full.sigma[..r].to_vec(),
        v: full.v.leading_columns(r),
    })
}
