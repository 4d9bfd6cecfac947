//! Analytic reference data and a dense Galerkin integrator for tiny meshes.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem::OperatorSet;
use crate::inflow::InflowAssembly;
use crate::linalg::{rk3_step, DenseMatrix};

/// Largest `n_x * n_v` accepted by [`full_galerkin_step`].
pub const FULL_GALERKIN_MAX: usize = 5000;

/// C^1 bump `z^2 (2|z| - 3) + 1` supported in `[-1, 1]`.
pub fn phi(z: f64) -> f64 {
    let a = z.abs();
    if a <= 1.0 {
        z * z * (2.0 * a - 3.0) + 1.0
    } else {
        0.0
    }
}

/// Free streaming of a product of bumps under a constant field, solved by
/// characteristics: `f(t, x, v) = f0(x - v t - E t^2 / 2, v + E t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharacteristicsSolution {
    pub e: [f64; 2],
    pub sigma_x: f64,
    pub sigma_v: f64,
    pub x_center: [f64; 2],
    pub v_center: [f64; 2],
}

impl Default for CharacteristicsSolution {
    /// Bump entering the triangle domain through its left edge.
    fn default() -> Self {
        let sigma_x = 0.2;
        CharacteristicsSolution {
            e: [0.0, 4.0],
            sigma_x,
            sigma_v: 0.5,
            x_center: [-0.5 - sigma_x, 0.1],
            v_center: [2.0, 0.0],
        }
    }
}

impl CharacteristicsSolution {
    pub fn with_centers(x_center: [f64; 2], v_center: [f64; 2]) -> Self {
        CharacteristicsSolution {
            x_center,
            v_center,
            ..Default::default()
        }
    }

    /// One-dimensional factor `g_k(t, x_k, v_k)`; `fbar` is the product over k.
    pub fn factor(&self, k: usize, t: f64, xk: f64, vk: f64) -> f64 {
        let e = self.e[k];
        let xs = (xk - vk * t - 0.5 * e * t * t - self.x_center[k]) / self.sigma_x;
        let vs = (vk + e * t - self.v_center[k]) / self.sigma_v;
        phi(xs) * phi(vs)
    }

    pub fn fbar(&self, t: f64, x: [f64; 2], v: [f64; 2]) -> f64 {
        self.factor(0, t, x[0], v[0]) * self.factor(1, t, x[1], v[1])
    }

    /// Position and velocity of the bump center at time `t`.
    pub fn center(&self, t: f64) -> ([f64; 2], [f64; 2]) {
        let mut x = [0.0; 2];
        let mut v = [0.0; 2];
        for k in 0..2 {
            v[k] = self.v_center[k] - self.e[k] * t;
            x[k] = self.x_center[k] + self.v_center[k] * t - 0.5 * self.e[k] * t * t;
        }
        (x, v)
    }
}

/// Landau initial datum; `dim = 1` uses one cosine and the 1D Maxwellian.
pub fn landau_f0(dim: usize, x: [f64; 2], v: [f64; 2], alpha: f64, k: f64) -> f64 {
    if dim == 1 {
        (-0.5 * v[0] * v[0]).exp() / (2.0 * PI).sqrt() * (1.0 + alpha * (k * x[0]).cos())
    } else {
        let v2 = v[0] * v[0] + v[1] * v[1];
        (-0.5 * v2).exp() / (2.0 * PI) * (1.0 + alpha * (k * x[0]).cos() + alpha * (k * x[1]).cos())
    }
}

/// Right-hand side `F'` of the unprojected Galerkin system
/// `M_x F' M_v = -sum_k (T_xk F M_vk^T - M_xEk F T_vk^T) - delta (C_x F M_v + M_x F C_v^T)
///  + sum_nu M_bnd F M_half^T - G`.
pub fn full_galerkin_rhs(
    f: &DenseMatrix,
    ops: &OperatorSet,
    load: Option<&DenseMatrix>,
    delta: f64,
) -> Result<DenseMatrix> {
    // A F B^T computed as A (B F^T)^T
    let sandwich = |a: &crate::linalg::SparseMatrix, b: &crate::linalg::SparseMatrix| -> Result<DenseMatrix> {
        let bft = b.spmm(&f.transpose())?;
        a.spmm(&bft.transpose())
    };
    let mut w = DenseMatrix::zeros(f.nrows(), f.ncols());
    for k in 0..ops.dim {
        w.axpy(-1.0, &sandwich(&ops.tx[k], &ops.mv_k[k])?);
        w.axpy(1.0, &sandwich(&ops.mx_e[k], &ops.tv[k])?);
    }
    if delta != 0.0 {
        w.axpy(-delta, &sandwich(&ops.cx, &ops.mv)?);
        w.axpy(-delta, &sandwich(&ops.mx, &ops.cv)?);
    }
    for (mb, mh) in ops.mx_bnd.iter().zip(&ops.mv_half) {
        w.axpy(1.0, &sandwich(mb, mh)?);
    }
    if let Some(g) = load {
        w.axpy(-1.0, g);
    }
    // F' = M_x^{-1} W M_v^{-1}
    let y = ops.mx_chol.solve(&w)?;
    let z = ops.mv_chol.solve(&y.transpose())?;
    Ok(z.transpose())
}

/// One SSP-RK3 step of the dense Galerkin dynamics. `inflow(t)` returns the
/// inflow assembly valid at `t`.
pub fn full_galerkin_step(
    f: &DenseMatrix,
    ops: &OperatorSet,
    inflow: Option<&dyn Fn(f64) -> Result<InflowAssembly>>,
    t: f64,
    dt: f64,
    delta: f64,
) -> Result<DenseMatrix> {
    let size = ops.nx() * ops.nv();
    if size > FULL_GALERKIN_MAX {
        return Err(Error::SizeGuard(format!(
            "dense Galerkin oracle refuses n_x * n_v = {size} > {FULL_GALERKIN_MAX}"
        )));
    }
    if f.shape() != (ops.nx(), ops.nv()) {
        return Err(Error::invalid("coefficient matrix does not match the operators"));
    }
    rk3_step(t, f, dt, &mut |ts, y| {
        let load = match inflow {
            Some(g) => Some(g(ts)?.dense_load()?),
            None => None,
        };
        full_galerkin_rhs(y, ops, load.as_ref(), delta)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        assert_eq!(phi(0.0), 1.0);
        assert_eq!(phi(1.0), 0.0);
        assert_eq!(phi(-1.0), 0.0);
        assert_eq!(phi(0.5), 0.5);
        assert_eq!(phi(1.5), 0.0);
    }

    #[test]
    fn center_tracking() {
        let s = CharacteristicsSolution::with_centers([0.5 + 0.2, 0.1], [2.0, 0.0]);
        assert_eq!(s.fbar(0.0, [0.7, 0.1], [2.0, 0.0]), 1.0);
        assert_eq!(s.fbar(0.0, [0.7, 0.1], [2.6, 0.0]), 0.0);
        let (x, v) = s.center(0.25);
        assert!((s.fbar(0.25, x, v) - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn landau_values() {
        let v = landau_f0(2, [0.0, 0.0], [0.0, 0.0], 1e-2, 0.5);
        assert!((v - 1.02 / (2.0 * PI)).abs() < 1e-15);
    }
}
