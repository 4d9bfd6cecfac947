use super::{in_substep, k_rhs, l_rhs, s_rhs, LowRankState, Pools, ProjectedV, ProjectedX, SDirection, StepConfig, StepReport};
use crate::error::Result;
use crate::fem::OperatorSet;
use crate::inflow::Inflow;
use crate::linalg::{m_orthonormalize, rk3_integrate, OrthPolicy};

/// One step of the projector-splitting integrator (K, then S, then L) at
/// fixed rank.
pub fn psi_step(
    state: &LowRankState,
    ops: &OperatorSet,
    inflow: &Inflow,
    cfg: &StepConfig,
    pools: &Pools,
) -> Result<(LowRankState, StepReport)> {
    let (t0, dt, n) = (state.t, cfg.dt, cfg.substeps);
    inflow.begin_step(t0);
    let v0 = &state.v;
    let pv = ProjectedV::new(ops, v0)?;

    let k0 = state.x.matmul(&state.s)?;
    let k1 = in_substep(
        rk3_integrate(t0, &k0, dt, n, |t, k| {
            let g = inflow.assembly_at(t, ops)?;
            k_rhs(k, v0, &pv, ops, &g, cfg.delta)
        }),
        "K-step",
    )?;
    let ox = in_substep(
        m_orthonormalize(&k1, &ops.mx_chol, OrthPolicy::Complete(&pools.x)),
        "K-step",
    )?;
    let x1 = ox.q;
    let px = ProjectedX::new(ops, &x1)?;

    let s_tilde = in_substep(
        rk3_integrate(t0, &ox.r, dt, n, |t, s| {
            let g = inflow.assembly_at(t, ops)?;
            s_rhs(s, &x1, v0, &px, &pv, &g, SDirection::Backward)
        }),
        "S-step",
    )?;

    let l0 = v0.matmul_t(&s_tilde)?;
    let l1 = in_substep(
        rk3_integrate(t0, &l0, dt, n, |t, l| {
            let g = inflow.assembly_at(t, ops)?;
            l_rhs(l, &x1, &px, ops, &g, cfg.delta)
        }),
        "L-step",
    )?;
    let ov = in_substep(
        m_orthonormalize(&l1, &ops.mv_chol, OrthPolicy::Complete(&pools.v)),
        "L-step",
    )?;

    let r = state.rank();
    let report = StepReport {
        rank_before: r,
        rank_after: r,
        completed: ox.deficient.len() + ov.deficient.len(),
        ..Default::default()
    };
    let next = LowRankState::new(x1, ov.r.transpose(), ov.q, t0 + dt)?;
    Ok((next, report))
}
