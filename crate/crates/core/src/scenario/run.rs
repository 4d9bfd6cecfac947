use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use super::config::{FieldMode, InflowKind, InitKind, Scenario, XMeshSpec};
use super::diagnostics::{diagnostics, DiagnosticsRecord, ErrorReference};
use super::output::{snapshot_dir, write_outputs, write_snapshot};
use crate::dlra::{self, compress_initial, pad_state, Integrator, LowRankState, Pools, StepReport};
use crate::error::{Error, Result};
use crate::fem::OperatorSet;
use crate::field::{ElectricField, FieldSolver};
use crate::inflow::{sample_separable, Inflow, InflowData, SeparableFunction};
use crate::mesh::{build_interval_mesh, build_rect_tri_mesh, build_triangle_domain_mesh, load_polygon_mesh, refine_uniform, Mesh};
use crate::oracle::{landau_f0, CharacteristicsSolution};

/// Meshes and operators of a resolved scenario.
pub struct Discretization {
    pub x_mesh: Arc<Mesh>,
    pub v_mesh: Arc<Mesh>,
    pub ops: OperatorSet,
}

pub struct RunOutput {
    pub state: LowRankState,
    pub records: Vec<DiagnosticsRecord>,
    pub reports: Vec<StepReport>,
    /// largest orthonormality defect seen after any step
    pub max_ortho_defect: f64,
}

pub fn build_x_mesh(spec: &XMeshSpec, level: usize) -> Result<Mesh> {
    let mut m = match spec {
        XMeshSpec::Interval { a, b, n, periodic } => build_interval_mesh(*a, *b, *n, *periodic)?,
        XMeshSpec::Box { lo, hi, n, periodic } => {
            build_rect_tri_mesh((lo[0], hi[0]), (lo[1], hi[1]), n[0], n[1], (*periodic, *periodic))?
        }
        XMeshSpec::Triangle { n } => build_triangle_domain_mesh(*n)?,
        XMeshSpec::File(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            load_polygon_mesh(&text)?
        }
    };
    for _ in 0..level {
        m = refine_uniform(&m)?;
    }
    Ok(m)
}

pub fn build_v_mesh(dim: usize, v_max: f64, n: usize, level: usize) -> Result<Mesh> {
    let n = n << level;
    if dim == 1 {
        build_interval_mesh(-v_max, v_max, n, true)
    } else {
        build_rect_tri_mesh((-v_max, v_max), (-v_max, v_max), n, n, (true, true))
    }
}

impl Discretization {
    pub fn new(sc: &Scenario) -> Result<Self> {
        let x_mesh = build_x_mesh(&sc.x_mesh, sc.level)?;
        let v_mesh = build_v_mesh(x_mesh.dim(), sc.v_max, sc.v_n, sc.level)?;
        let ops = OperatorSet::assemble(&x_mesh, &v_mesh)?;
        Ok(Discretization {
            x_mesh: Arc::new(x_mesh),
            v_mesh: Arc::new(v_mesh),
            ops,
        })
    }
}

fn characteristics(sc: &Scenario) -> CharacteristicsSolution {
    let e = match sc.field {
        FieldMode::Constant(e) => e,
        FieldMode::SelfConsistent => [0.0; 2],
    };
    CharacteristicsSolution {
        e,
        sigma_x: sc.sigma_x,
        sigma_v: sc.sigma_v,
        x_center: sc.x_center,
        v_center: sc.v_center,
    }
}

/// Initial datum as a sum of separable terms on the mesh nodes.
pub fn initial_datum(sc: &Scenario, d: &Discretization) -> Result<SeparableFunction> {
    let xc = d.x_mesh.dof_coords();
    let vc = d.v_mesh.dof_coords();
    let dim = d.x_mesh.dim();
    match sc.init {
        InitKind::Zero => Ok(SeparableFunction::zero(0.0)),
        InitKind::Landau { alpha, k } => {
            let maxwellian: Vec<f64> = vc.iter().map(|v| landau_f0(dim, [0.0; 2], *v, 0.0, k)).collect();
            let mut terms = vec![(vec![1.0; xc.len()], maxwellian.clone())];
            for axis in 0..dim {
                let gx = xc.iter().map(|p| alpha * (k * p[axis]).cos()).collect();
                terms.push((gx, maxwellian.clone()));
            }
            Ok(SeparableFunction { terms, t: 0.0 })
        }
        InitKind::Characteristics => {
            let sol = characteristics(sc);
            sample_separable(&move |k, t, x, v| sol.factor(k, t, x, v), 0.0, &d.x_mesh, &d.v_mesh, sc.max_terms)
        }
    }
}

fn pool_size(sc: &Scenario, d: &Discretization) -> usize {
    let r = sc.rank.max(sc.step.r_max.min(d.ops.nx()).min(d.ops.nv()));
    2 * r + 4
}

/// Run a scenario at its level and return the final state and the records.
/// Nothing is written to disk.
pub fn simulate(sc: &Scenario) -> Result<RunOutput> {
    simulate_with(sc, |_, _| Ok(()))
}

/// As [`simulate`], calling `on_step(state, step_index)` after every step.
pub fn simulate_with(
    sc: &Scenario,
    mut on_step: impl FnMut(&LowRankState, usize) -> Result<()>,
) -> Result<RunOutput> {
    sc.validate()?;
    let sc = sc.resolved();
    let mut d = Discretization::new(&sc)?;
    let pools = Pools::new(&d.x_mesh, &d.v_mesh, pool_size(&sc, &d), sc.seed);
    let field = match sc.field {
        FieldMode::SelfConsistent => FieldSolver::self_consistent(&d.x_mesh, &d.ops, sc.rho_b)?,
        FieldMode::Constant(e) => FieldSolver::Constant(ElectricField::constant(&d.x_mesh, e)),
    };
    let inflow_data = match sc.inflow {
        InflowKind::None => InflowData::None,
        InflowKind::Characteristics => InflowData::Characteristics {
            solution: characteristics(&sc),
            max_terms: sc.max_terms,
        },
    };
    let inflow = Inflow::new(inflow_data, d.x_mesh.clone(), d.v_mesh.clone(), sc.freeze_inflow);
    let reference = match (sc.init, sc.inflow) {
        (InitKind::Characteristics, _) | (_, InflowKind::Characteristics) => Some(ErrorReference::new(
            characteristics(&sc),
            &d.x_mesh,
            &d.v_mesh,
            sc.error_terms,
        )?),
        _ => None,
    };

    let f0 = initial_datum(&sc, &d)?;
    let mut state = compress_initial(&f0, sc.rank, &d.ops, &pools)?;
    if sc.step.integrator == Integrator::Psi {
        state = pad_state(&state, sc.rank, &d.ops, &pools)?;
    }

    let n_steps = sc.n_steps();
    let dt = sc.t_end / n_steps as f64;
    let cfg = dlra::StepConfig { dt, ..sc.step };
    let start = Instant::now();
    let mut records = Vec::new();
    let mut reports = Vec::with_capacity(n_steps);
    let mut max_defect: f64 = 0.0;
    let record = |state: &LowRankState, e: &ElectricField, ops: &OperatorSet| -> Result<DiagnosticsRecord> {
        let mut r = diagnostics(state, ops, &d.x_mesh, e)?;
        if let Some(reference) = &reference {
            r.l2_error = Some(reference.error(state)?);
        }
        r.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        Ok(r)
    };

    for i in 0..n_steps {
        let e = field.update(&d.x_mesh, &mut d.ops, &state.x, &state.s, &state.v)?;
        if i % sc.output_every == 0 {
            records.push(record(&state, &e, &d.ops)?);
        }
        let t_good = state.t;
        let (mut next, report) = dlra::step(&state, &d.ops, &inflow, &cfg, &pools).map_err(|err| match err {
            Error::NumericalBlowup { t, context } => Error::NumericalBlowup {
                t,
                context: format!("{context}; last good time {t_good}"),
            },
            other => other,
        })?;
        // pin the clock to the grid so record times do not drift
        next.t = (i + 1) as f64 * dt;
        let (dx, dv) = next.orthonormality(&d.ops)?;
        max_defect = max_defect.max(dx).max(dv);
        log::debug!("step {} t = {:.6} rank {} -> {}", i + 1, next.t, report.rank_before, report.rank_after);
        reports.push(report);
        state = next;
        on_step(&state, i + 1)?;
    }
    let e = field.update(&d.x_mesh, &mut d.ops, &state.x, &state.s, &state.v)?;
    records.push(record(&state, &e, &d.ops)?);
    Ok(RunOutput {
        state,
        records,
        reports,
        max_ortho_defect: max_defect,
    })
}

/// Run a scenario and write its artifacts below `sc.out_dir`.
pub fn run_scenario(sc: &Scenario) -> Result<RunOutput> {
    let resolved = sc.resolved();
    let out_dir = resolved.out_dir.clone();
    let x_mesh = build_x_mesh(&resolved.x_mesh, resolved.level)?;
    let v_mesh = build_v_mesh(x_mesh.dim(), resolved.v_max, resolved.v_n, resolved.level)?;
    let dt = resolved.t_end / resolved.n_steps() as f64;
    let mut pending: Vec<f64> = resolved.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    let out = simulate_with(sc, |state, _| {
        while let Some(&ts) = pending.first() {
            if state.t + 0.5 * dt < ts {
                break;
            }
            write_snapshot(&snapshot_dir(&out_dir, ts), state, &x_mesh, &v_mesh)?;
            pending.remove(0);
        }
        Ok(())
    })?;
    write_outputs(Path::new(&out_dir), &out.records, &resolved.to_text())?;
    Ok(out)
}

/// Least-squares slope of `ln y` against `t` over the local maxima of `y`
/// inside `[t0, t1]`.
pub fn fit_decay_rate(t: &[f64], y: &[f64], t0: f64, t1: f64) -> Option<f64> {
    let peaks: Vec<(f64, f64)> = (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > 0.0)
        .filter(|&i| t[i] >= t0 && t[i] <= t1)
        .map(|i| (t[i], y[i].ln()))
        .collect();
    if peaks.len() < 2 {
        return None;
    }
    let n = peaks.len() as f64;
    let mt = peaks.iter().map(|p| p.0).sum::<f64>() / n;
    let my = peaks.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = peaks.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = peaks.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Some(sxy / sxx)
}

/// Linear Landau damping rate for k = 0.5.
pub const LANDAU_GAMMA: f64 = 0.153;

/// Expected slope of the electric energy, which decays at twice the field rate.
pub fn landau_energy_slope() -> f64 {
    -2.0 * LANDAU_GAMMA
}
