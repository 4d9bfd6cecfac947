//! Right-hand sides of the K, S and L equations.

use crate::error::{Error, Result};
use crate::fem::OperatorSet;
use crate::inflow::InflowAssembly;
use crate::linalg::DenseMatrix;

/// Velocity operators projected onto a basis `V`: `<A>_V = V^T A V`.
#[derive(Clone, Debug)]
pub struct ProjectedV {
    pub mv_k: Vec<DenseMatrix>,
    pub tv: Vec<DenseMatrix>,
    pub half: Vec<DenseMatrix>,
}

/// Spatial operators projected onto a basis `X`.
#[derive(Clone, Debug)]
pub struct ProjectedX {
    pub tx: Vec<DenseMatrix>,
    pub mx_e: Vec<DenseMatrix>,
    pub bnd: Vec<DenseMatrix>,
}

impl ProjectedV {
    pub fn new(ops: &OperatorSet, v: &DenseMatrix) -> Result<Self> {
        let p = |a: &crate::linalg::SparseMatrix| a.project(v, v);
        Ok(ProjectedV {
            mv_k: ops.mv_k.iter().map(p).collect::<Result<_>>()?,
            tv: ops.tv.iter().map(p).collect::<Result<_>>()?,
            half: ops.mv_half.iter().map(p).collect::<Result<_>>()?,
        })
    }
}

impl ProjectedX {
    pub fn new(ops: &OperatorSet, x: &DenseMatrix) -> Result<Self> {
        let p = |a: &crate::linalg::SparseMatrix| a.project(x, x);
        Ok(ProjectedX {
            tx: ops.tx.iter().map(p).collect::<Result<_>>()?,
            mx_e: ops.mx_e.iter().map(p).collect::<Result<_>>()?,
            bnd: ops.mx_bnd.iter().map(p).collect::<Result<_>>()?,
        })
    }
}

/// Sign convention of the S equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SDirection {
    /// the projector-splitting S-step, integrated forward in time
    Backward,
    /// its negation, used by the unconventional integrator
    Forward,
}

fn check_cols(a: &DenseMatrix, rows: usize, what: &str) -> Result<()> {
    if a.nrows() != rows {
        return Err(Error::invalid(format!(
            "{what}: {} rows, expected {rows}",
            a.nrows()
        )));
    }
    Ok(())
}

/// `K' = M_x^{-1} ( -sum_k (T_xk K <M_vk>^T - M_xEk K <T_vk>^T) - delta C_x K
///  + sum_nu M_bnd K <M_half>^T - G_x )`.
pub fn k_rhs(
    k: &DenseMatrix,
    v: &DenseMatrix,
    pv: &ProjectedV,
    ops: &OperatorSet,
    inflow: &InflowAssembly,
    delta: f64,
) -> Result<DenseMatrix> {
    check_cols(k, ops.nx(), "k_rhs K")?;
    check_cols(v, ops.nv(), "k_rhs V")?;
    if k.ncols() != v.ncols() {
        return Err(Error::invalid("k_rhs: K and V have different rank"));
    }
    let mut w = DenseMatrix::zeros(k.nrows(), k.ncols());
    for d in 0..ops.dim {
        w.axpy(-1.0, &ops.tx[d].spmm(&k.matmul_t(&pv.mv_k[d])?)?);
        w.axpy(1.0, &ops.mx_e[d].spmm(&k.matmul_t(&pv.tv[d])?)?);
    }
    if delta != 0.0 {
        w.axpy(-delta, &ops.cx.spmm(k)?);
    }
    for (mb, h) in ops.mx_bnd.iter().zip(&pv.half) {
        w.axpy(1.0, &mb.spmm(&k.matmul_t(h)?)?);
    }
    if inflow.n_pairs() > 0 {
        w.axpy(-1.0, &inflow.gx_matrix(v)?);
    }
    ops.mx_chol.solve(&w)
}

/// `S' = +-( sum_k (<T_xk> S <M_vk>^T - <M_xEk> S <T_vk>^T)
///  - sum_nu <M_bnd> S <M_half>^T + G_S )`, `+` for [`SDirection::Backward`].
pub fn s_rhs(
    s: &DenseMatrix,
    x: &DenseMatrix,
    v: &DenseMatrix,
    px: &ProjectedX,
    pv: &ProjectedV,
    inflow: &InflowAssembly,
    direction: SDirection,
) -> Result<DenseMatrix> {
    if s.nrows() != x.ncols() || s.ncols() != v.ncols() {
        return Err(Error::invalid("s_rhs: S does not match the bases"));
    }
    let mut b = DenseMatrix::zeros(s.nrows(), s.ncols());
    for d in 0..px.tx.len() {
        b.axpy(1.0, &px.tx[d].matmul(s)?.matmul_t(&pv.mv_k[d])?);
        b.axpy(-1.0, &px.mx_e[d].matmul(s)?.matmul_t(&pv.tv[d])?);
    }
    for (xb, h) in px.bnd.iter().zip(&pv.half) {
        b.axpy(-1.0, &xb.matmul(s)?.matmul_t(h)?);
    }
    if inflow.n_pairs() > 0 {
        b.axpy(1.0, &inflow.gs_matrix(x, v)?);
    }
    if direction == SDirection::Forward {
        b.scale_mut(-1.0);
    }
    Ok(b)
}

/// `L' = M_v^{-1} ( -sum_k (M_vk L <T_xk>^T - T_vk L <M_xEk>^T) - delta C_v L
///  + sum_nu M_half L <M_bnd>^T - G_v )`.
pub fn l_rhs(
    l: &DenseMatrix,
    x: &DenseMatrix,
    px: &ProjectedX,
    ops: &OperatorSet,
    inflow: &InflowAssembly,
    delta: f64,
) -> Result<DenseMatrix> {
    check_cols(l, ops.nv(), "l_rhs L")?;
    check_cols(x, ops.nx(), "l_rhs X")?;
    if l.ncols() != x.ncols() {
        return Err(Error::invalid("l_rhs: L and X have different rank"));
    }
    let mut w = DenseMatrix::zeros(l.nrows(), l.ncols());
    for d in 0..ops.dim {
        w.axpy(-1.0, &ops.mv_k[d].spmm(&l.matmul_t(&px.tx[d])?)?);
        w.axpy(1.0, &ops.tv[d].spmm(&l.matmul_t(&px.mx_e[d])?)?);
    }
    if delta != 0.0 {
        w.axpy(-delta, &ops.cv.spmm(l)?);
    }
    for (mh, xb) in ops.mv_half.iter().zip(&px.bnd) {
        w.axpy(1.0, &mh.spmm(&l.matmul_t(xb)?)?);
    }
    if inflow.n_pairs() > 0 {
        w.axpy(-1.0, &inflow.gv_matrix(x)?);
    }
    ops.mv_chol.solve(&w)
}
