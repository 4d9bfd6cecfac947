//! Orthonormalization with respect to a mass-matrix inner product.

use crate::error::{Error, Result};
use crate::linalg::{CholeskyFactor, DenseMatrix};

/// Relative threshold below which a Gram-Schmidt residual counts as zero.
pub const DEPENDENCE_TOL: f64 = 1e-12;

/// What to do with a column that is (numerically) in the span of its
/// predecessors.
#[derive(Clone, Copy, Debug)]
pub enum OrthPolicy<'a> {
    /// Fail with [`Error::RankDeficient`].
    Error,
    /// Leave the column out of `Q`; `R` loses the corresponding row.
    Drop,
    /// Replace the column by the next independent column of the pool so that
    /// `Q` keeps full width; the diagonal entry of `R` is zero.
    Complete(&'a DenseMatrix),
}

#[derive(Clone, Debug)]
pub struct MOrth {
    /// `M`-orthonormal columns.
    pub q: DenseMatrix,
    /// `A = Q R`; upper triangular with nonnegative diagonal when nothing is
    /// dropped.
    pub r: DenseMatrix,
    /// Input columns left out (Drop) or replaced (Complete).
    pub deficient: Vec<usize>,
}

/// One CGS2 sweep of `v` against the leading `k` columns of `qb`, adding the
/// coefficients into `coef`.
fn cgs2(qb: &[Vec<f64>], v: &mut [f64], coef: &mut [f64]) {
    for _ in 0..2 {
        let c: Vec<f64> = qb
            .iter()
            .map(|q| q.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
            .collect();
        for (q, &ci) in qb.iter().zip(&c) {
            for (vv, &qq) in v.iter_mut().zip(q) {
                *vv -= ci * qq;
            }
        }
        for (o, ci) in coef.iter_mut().zip(c) {
            *o += ci;
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Thin QR of `a` in the inner product `<x, y> = x^T M y`, with `M` given by
/// its Cholesky factor.
///
/// The columns are mapped through `B = L^T P^T A`, orthonormalized by
/// classical Gram-Schmidt with reorthogonalization, and mapped back.
pub fn m_orthonormalize(a: &DenseMatrix, m: &CholeskyFactor, policy: OrthPolicy) -> Result<MOrth> {
    let n = a.nrows();
    let k = a.ncols();
    if m.dim() != n {
        return Err(Error::invalid(format!(
            "m_orthonormalize: {n} rows for mass matrix of dimension {}",
            m.dim()
        )));
    }
    let b = m.apply_lt_pt(a)?;
    let scale = b.frobenius_norm();
    let tol = DEPENDENCE_TOL * scale;
    let pool = match policy {
        OrthPolicy::Complete(p) => {
            if p.nrows() != n {
                return Err(Error::invalid("completion pool has wrong row count"));
            }
            Some(m.apply_lt_pt(p)?.columns())
        }
        _ => None,
    };
    let mut next_pool = 0usize;

    let mut qb: Vec<Vec<f64>> = Vec::with_capacity(k);
    // rows of R, one per column of Q
    let mut r_rows: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut deficient = Vec::new();
    let cols = b.columns();

    for (j, col) in cols.into_iter().enumerate() {
        let mut v = col;
        let mut coef = vec![0.0; qb.len()];
        cgs2(&qb, &mut v, &mut coef);
        let nv = norm(&v);
        for (row, &c) in r_rows.iter_mut().zip(&coef) {
            row[j] = c;
        }
        if nv > tol && nv.is_finite() {
            v.iter_mut().for_each(|x| *x /= nv);
            let mut row = vec![0.0; k];
            row[j] = nv;
            r_rows.push(row);
            qb.push(v);
            continue;
        }
        match policy {
            OrthPolicy::Error => {
                return Err(Error::RankDeficient {
                    context: "m_orthonormalize".into(),
                    column: j,
                    residual: nv,
                });
            }
            OrthPolicy::Drop => deficient.push(j),
            OrthPolicy::Complete(_) => {
                let pool = pool.as_ref().expect("pool present");
                let mut filled = false;
                while next_pool < pool.len() {
                    let mut w = pool[next_pool].clone();
                    next_pool += 1;
                    let w0 = norm(&w);
                    let mut dummy = vec![0.0; qb.len()];
                    cgs2(&qb, &mut w, &mut dummy);
                    let nw = norm(&w);
                    if nw > 1e-8 * w0 && nw > 0.0 {
                        w.iter_mut().for_each(|x| *x /= nw);
                        r_rows.push(vec![0.0; k]);
                        qb.push(w);
                        filled = true;
                        break;
                    }
                }
                if !filled {
                    return Err(Error::RankDeficient {
                        context: "m_orthonormalize: completion pool exhausted".into(),
                        column: j,
                        residual: nv,
                    });
                }
                deficient.push(j);
            }
        }
    }

    let qb_mat = DenseMatrix::from_columns(n, &qb)?;
    let q = m.solve_lt_p(&qb_mat)?;
    let mut r = DenseMatrix::zeros(r_rows.len(), k);
    for (i, row) in r_rows.iter().enumerate() {
        r.row_mut(i).copy_from_slice(row);
    }
    Ok(MOrth { q, r, deficient })
}

/// `max |Q^T M Q - I|`, computed through the factor.
pub fn orthonormality_defect(q: &DenseMatrix, m: &CholeskyFactor) -> Result<f64> {
    let b = m.apply_lt_pt(q)?;
    let g = b.t_matmul(&b)?;
    Ok(g.sub(&DenseMatrix::identity(g.nrows())).max_abs())
}
