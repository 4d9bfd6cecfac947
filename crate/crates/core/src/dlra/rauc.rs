use super::{in_substep, k_rhs, l_rhs, s_rhs, LowRankState, ProjectedV, ProjectedX, SDirection, StepConfig, StepReport};
use crate::error::{Error, Result};
use crate::fem::OperatorSet;
use crate::inflow::Inflow;
use crate::linalg::{m_orthonormalize, rk3_integrate, svd_sorted, truncation_rank, DenseMatrix, OrthPolicy};
use crate::par;

/// One step of the rank-adaptive unconventional integrator: independent K
/// and L steps, basis augmentation, forward S-step and SVD truncation.
pub fn rauc_step(
    state: &LowRankState,
    ops: &OperatorSet,
    inflow: &Inflow,
    cfg: &StepConfig,
) -> Result<(LowRankState, StepReport)> {
    let (t0, dt, n) = (state.t, cfg.dt, cfg.substeps);
    let r0 = state.rank();
    inflow.begin_step(t0);
    let (x0, v0) = (&state.x, &state.v);

    let k_step = || -> Result<DenseMatrix> {
        let pv = ProjectedV::new(ops, v0)?;
        let k0 = x0.matmul(&state.s)?;
        in_substep(
            rk3_integrate(t0, &k0, dt, n, |t, k| {
                let g = inflow.assembly_at(t, ops)?;
                k_rhs(k, v0, &pv, ops, &g, cfg.delta)
            }),
            "K-step",
        )
    };
    let l_step = || -> Result<DenseMatrix> {
        let px = ProjectedX::new(ops, x0)?;
        let l0 = v0.matmul_t(&state.s)?;
        in_substep(
            rk3_integrate(t0, &l0, dt, n, |t, l| {
                let g = inflow.assembly_at(t, ops)?;
                l_rhs(l, x0, &px, ops, &g, cfg.delta)
            }),
            "L-step",
        )
    };
    let (k1, l1) = par::join(k_step, l_step);
    let (k1, l1) = (k1?, l1?);

    let ox = m_orthonormalize(&x0.hstack(&k1)?, &ops.mx_chol, OrthPolicy::Drop)?;
    let ov = m_orthonormalize(&v0.hstack(&l1)?, &ops.mv_chol, OrthPolicy::Drop)?;
    if ox.deficient.iter().any(|&j| j < r0) || ov.deficient.iter().any(|&j| j < r0) {
        return Err(Error::RankDeficient {
            context: "augmentation: the old basis is not independent".into(),
            column: 0,
            residual: 0.0,
        });
    }
    let (xh, vh) = (ox.q, ov.q);
    let rx = DenseMatrix::from_fn(xh.ncols(), r0, |i, j| ox.r[(i, j)]);
    let rv = DenseMatrix::from_fn(vh.ncols(), r0, |i, j| ov.r[(i, j)]);
    let s_hat = rx.matmul(&state.s)?.matmul_t(&rv)?;

    let pxh = ProjectedX::new(ops, &xh)?;
    let pvh = ProjectedV::new(ops, &vh)?;
    let s1 = in_substep(
        rk3_integrate(t0, &s_hat, dt, n, |t, s| {
            let g = inflow.assembly_at(t, ops)?;
            s_rhs(s, &xh, &vh, &pxh, &pvh, &g, SDirection::Forward)
        }),
        "S-step",
    )?;

    let cap = cfg.r_max.min(ops.nx()).min(ops.nv());
    let full = svd_sorted(&s1)?;
    let r1 = truncation_rank(&full.sigma, cfg.eps).clamp(1, cap).min(full.sigma.len());
    let next = LowRankState::new(
        xh.matmul(&full.u.leading_columns(r1))?,
        DenseMatrix::diag(&full.sigma[..r1]),
        vh.matmul(&full.v.leading_columns(r1))?,
        t0 + dt,
    )?;
    let report = StepReport {
        rank_before: r0,
        rank_after: r1,
        dropped_x: ox.deficient,
        dropped_v: ov.deficient,
        sigma: full.sigma,
        ..Default::default()
    };
    Ok((next, report))
}
