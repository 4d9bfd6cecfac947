use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LowRankState;
use crate::error::{Error, Result};
use crate::fem::OperatorSet;
use crate::inflow::SeparableFunction;
use crate::linalg::{m_orthonormalize, svd_sorted, DenseMatrix, OrthPolicy};
use crate::mesh::Mesh;

/// Singular values below this fraction of the largest are treated as zero.
pub const COMPRESS_TOL: f64 = 1e-14;

/// Candidate columns used to complete or pad a basis.
#[derive(Clone, Debug)]
pub struct Pools {
    pub x: DenseMatrix,
    pub v: DenseMatrix,
}

impl Pools {
    pub fn new(x_mesh: &Mesh, v_mesh: &Mesh, count: usize, seed: u64) -> Self {
        Pools {
            x: candidate_pool(x_mesh, count, seed),
            v: candidate_pool(v_mesh, count, seed ^ 0x9e37_79b9_7f4a_7c15),
        }
    }
}

fn axis_mode(m: usize, u: f64) -> f64 {
    let a = m.div_ceil(2) as f64;
    match m {
        0 => 1.0,
        _ if m % 2 == 1 => (2.0 * PI * a * u).cos(),
        _ => (2.0 * PI * a * u).sin(),
    }
}

/// Smooth Fourier-type modes on the bounding box of the mesh, each mixed with
/// a small seeded random combination of the others.
pub fn candidate_pool(mesh: &Mesh, count: usize, seed: u64) -> DenseMatrix {
    let coords = mesh.dof_coords();
    let dim = mesh.dim();
    let mut lo = [0.0; 2];
    let mut len = [1.0; 2];
    for k in 0..dim {
        let (a, b) = match mesh.periodic()[k] {
            Some(p) => p,
            None => coords.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                (a.min(p[k]), b.max(p[k]))
            }),
        };
        lo[k] = a;
        len[k] = (b - a).max(f64::MIN_POSITIVE);
    }
    let mut modes: Vec<[usize; 2]> = Vec::new();
    let mut top = 0;
    while modes.len() < count {
        for m0 in 0..=top {
            if dim == 1 {
                if m0 == top {
                    modes.push([m0, 0]);
                }
                continue;
            }
            for m1 in 0..=top {
                if m0.max(m1) == top {
                    modes.push([m0, m1]);
                }
            }
        }
        top += 1;
    }
    modes.truncate(count);
    let eval = |md: [usize; 2], p: [f64; 2]| {
        (0..dim)
            .map(|k| axis_mode(md[k], (p[k] - lo[k]) / len[k]))
            .product::<f64>()
    };
    let base = DenseMatrix::from_fn(coords.len(), count, |i, j| eval(modes[j], coords[i]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mix = DenseMatrix::from_fn(count, count, |i, j| {
        let c: f64 = rng.random_range(-1.0..1.0);
        if i == j {
            1.0
        } else {
            0.05 * c
        }
    });
    base.matmul(&mix).expect("pool shapes")
}

/// Best approximation of `f0` of rank at most `r` in the mass-weighted norm.
/// The returned rank is the numerical rank of `f0` when that is smaller.
pub fn compress_initial(
    f0: &SeparableFunction,
    r: usize,
    ops: &OperatorSet,
    pools: &Pools,
) -> Result<LowRankState> {
    if r == 0 {
        return Err(Error::invalid("rank must be at least 1"));
    }
    let (gx, gv) = f0.factors(ops.nx(), ops.nv())?;
    let ox = m_orthonormalize(&gx, &ops.mx_chol, OrthPolicy::Drop)?;
    let ov = m_orthonormalize(&gv, &ops.mv_chol, OrthPolicy::Drop)?;
    if ox.q.ncols() == 0 || ov.q.ncols() == 0 {
        return zero_state(ops, pools, f0.t);
    }
    let core = ox.r.matmul_t(&ov.r)?;
    let svd = svd_sorted(&core)?;
    let top = svd.sigma[0];
    let avail = svd.sigma.iter().filter(|&&s| s > COMPRESS_TOL * top).count();
    if avail == 0 {
        return zero_state(ops, pools, f0.t);
    }
    let k = avail.min(r);
    let x = ox.q.matmul(&svd.u.leading_columns(k))?;
    let v = ov.q.matmul(&svd.v.leading_columns(k))?;
    LowRankState::new(x, DenseMatrix::diag(&svd.sigma[..k]), v, f0.t)
}

fn zero_state(ops: &OperatorSet, pools: &Pools, t: f64) -> Result<LowRankState> {
    let x = m_orthonormalize(&pools.x.leading_columns(1), &ops.mx_chol, OrthPolicy::Complete(&pools.x))?;
    let v = m_orthonormalize(&pools.v.leading_columns(1), &ops.mv_chol, OrthPolicy::Complete(&pools.v))?;
    LowRankState::new(x.q, DenseMatrix::zeros(1, 1), v.q, t)
}

/// Extend both bases with pool columns to rank `r`; the added directions
/// carry zero weight so the represented function is unchanged.
pub fn pad_state(state: &LowRankState, r: usize, ops: &OperatorSet, pools: &Pools) -> Result<LowRankState> {
    let r0 = state.rank();
    if r <= r0 {
        return Ok(state.clone());
    }
    if r > ops.nx().min(ops.nv()) {
        return Err(Error::invalid(format!(
            "rank {r} exceeds the discrete dimensions {} x {}",
            ops.nx(),
            ops.nv()
        )));
    }
    let extra = r - r0;
    let ax = state.x.hstack(&pools.x.leading_columns(extra.min(pools.x.ncols())))?;
    let av = state.v.hstack(&pools.v.leading_columns(extra.min(pools.v.ncols())))?;
    let ox = m_orthonormalize(&ax, &ops.mx_chol, OrthPolicy::Complete(&pools.x))?;
    let ov = m_orthonormalize(&av, &ops.mv_chol, OrthPolicy::Complete(&pools.v))?;
    if ox.q.ncols() != r || ov.q.ncols() != r {
        return Err(Error::invalid("candidate pool too small to pad the state"));
    }
    let rx = DenseMatrix::from_fn(r, r0, |i, j| ox.r[(i, j)]);
    let rv = DenseMatrix::from_fn(r, r0, |i, j| ov.r[(i, j)]);
    let s = rx.matmul(&state.s)?.matmul_t(&rv)?;
    LowRankState::new(ox.q, s, ov.q, state.t)
}
