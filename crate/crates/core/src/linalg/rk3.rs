//! Strong-stability-preserving third-order Runge-Kutta (Shu-Osher form).

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

fn check(y: &DenseMatrix, t: f64, context: &str) -> Result<()> {
    if y.is_finite() {
        Ok(())
    } else {
        Err(Error::NumericalBlowup {
            t,
            context: context.to_string(),
        })
    }
}

/// One SSP-RK3 step of `y' = f(t, y)`.
pub fn rk3_step<F>(t: f64, y: &DenseMatrix, dt: f64, f: &mut F) -> Result<DenseMatrix>
where
    F: FnMut(f64, &DenseMatrix) -> Result<DenseMatrix>,
{
    let mut y1 = f(t, y)?;
    y1.scale_mut(dt);
    y1.axpy(1.0, y);
    check(&y1, t, "rk3 stage 1")?;

    let mut f1 = f(t + dt, &y1)?;
    f1.scale_mut(dt);
    f1.axpy(1.0, &y1);
    let y2 = DenseMatrix::lincomb(0.75, y, 0.25, &f1);
    check(&y2, t + dt, "rk3 stage 2")?;

    let mut f2 = f(t + 0.5 * dt, &y2)?;
    f2.scale_mut(dt);
    f2.axpy(1.0, &y2);
    let out = DenseMatrix::lincomb(1.0 / 3.0, y, 2.0 / 3.0, &f2);
    check(&out, t + dt, "rk3 stage 3")?;
    Ok(out)
}

/// Advance from `t0` over `dt` using `substeps` equal RK3 steps.
pub fn rk3_integrate<F>(
    t0: f64,
    y: &DenseMatrix,
    dt: f64,
    substeps: usize,
    mut f: F,
) -> Result<DenseMatrix>
where
    F: FnMut(f64, &DenseMatrix) -> Result<DenseMatrix>,
{
    let n = substeps.max(1);
    let h = dt / n as f64;
    let mut cur = y.clone();
    for i in 0..n {
        cur = rk3_step(t0 + i as f64 * h, &cur, h, &mut f)?;
    }
    Ok(cur)
}
