use crate::error::{Error, Result};
use crate::fem::OperatorSet;
use crate::linalg::{m_orthonormalize, orthonormality_defect, DenseMatrix, OrthPolicy};

/// Drift of `X^T M X` from the identity that triggers re-orthonormalization.
pub const ORTHO_TOL: f64 = 1e-9;

/// `f = X S V^T` at time `t`, with mass-orthonormal `X` and `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankState {
    pub x: DenseMatrix,
    pub s: DenseMatrix,
    pub v: DenseMatrix,
    pub t: f64,
}

impl LowRankState {
    pub fn new(x: DenseMatrix, s: DenseMatrix, v: DenseMatrix, t: f64) -> Result<Self> {
        let r = s.nrows();
        if r == 0 || s.ncols() != r || x.ncols() != r || v.ncols() != r {
            return Err(Error::invalid(format!(
                "inconsistent factor shapes: X {:?}, S {:?}, V {:?}",
                x.shape(),
                s.shape(),
                v.shape()
            )));
        }
        Ok(LowRankState { x, s, v, t })
    }

    pub fn rank(&self) -> usize {
        self.s.nrows()
    }

    /// Dense coefficient matrix `X S V^T`.
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        self.x.matmul(&self.s)?.matmul_t(&self.v)
    }

    /// `(defect of X, defect of V)`.
    pub fn orthonormality(&self, ops: &OperatorSet) -> Result<(f64, f64)> {
        Ok((
            orthonormality_defect(&self.x, &ops.mx_chol)?,
            orthonormality_defect(&self.v, &ops.mv_chol)?,
        ))
    }

    /// Re-orthonormalize a basis whose drift exceeds [`ORTHO_TOL`], moving the
    /// triangular factor into `S`. Returns whether anything changed.
    pub fn reorthonormalize(
        &mut self,
        ops: &OperatorSet,
        x_pool: &DenseMatrix,
        v_pool: &DenseMatrix,
    ) -> Result<bool> {
        let (dx, dv) = self.orthonormality(ops)?;
        let mut changed = false;
        if dx > ORTHO_TOL {
            let o = m_orthonormalize(&self.x, &ops.mx_chol, OrthPolicy::Complete(x_pool))?;
            self.x = o.q;
            self.s = o.r.matmul(&self.s)?;
            changed = true;
        }
        if dv > ORTHO_TOL {
            let o = m_orthonormalize(&self.v, &ops.mv_chol, OrthPolicy::Complete(v_pool))?;
            self.v = o.q;
            self.s = self.s.matmul_t(&o.r)?;
            changed = true;
        }
        Ok(changed)
    }
}
