//! Charge density, periodic Poisson solve and the elementwise electric field.

use crate::error::{Error, Result};
use crate::fem::{assemble_stiffness, OperatorSet};
use crate::linalg::{CholeskyFactor, DenseMatrix, SparseMatrix};
use crate::mesh::Mesh;

/// Elementwise-constant electric field on the x-mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct ElectricField {
    pub values: Vec<[f64; 2]>,
}

impl ElectricField {
    pub fn zero(mesh: &Mesh) -> Self {
        ElectricField {
            values: vec![[0.0; 2]; mesh.n_elements()],
        }
    }

    pub fn constant(mesh: &Mesh, e: [f64; 2]) -> Self {
        let mut v = e;
        if mesh.dim() == 1 {
            v[1] = 0.0;
        }
        ElectricField {
            values: vec![v; mesh.n_elements()],
        }
    }
}

/// Density coefficients `rho_b - X S V^T M_v 1` and their mean over the domain.
pub fn compute_density(
    x: &DenseMatrix,
    s: &DenseMatrix,
    v: &DenseMatrix,
    mv: &SparseMatrix,
    mx: &SparseMatrix,
    rho_b: f64,
) -> Result<(Vec<f64>, f64)> {
    let mv1 = mv.matvec(&vec![1.0; mv.nrows()])?;
    let w = v.t_matvec(&mv1);
    let sw = s.matvec(&w);
    let f_int = x.matvec(&sw);
    let rho: Vec<f64> = f_int.iter().map(|f| rho_b - f).collect();
    let mx1 = mx.matvec(&vec![1.0; mx.nrows()])?;
    let area: f64 = mx1.iter().sum();
    let mean = mx1.iter().zip(&rho).map(|(a, b)| a * b).sum::<f64>() / area;
    Ok((rho, mean))
}

/// P1 Poisson solver `-Laplace phi = rho` on a fully periodic mesh with
/// zero-mean gauge.
#[derive(Clone, Debug)]
pub struct PoissonSolver {
    mx: SparseMatrix,
    mx1: Vec<f64>,
    area: f64,
    /// stiffness with dof 0 removed
    reduced: CholeskyFactor,
}

impl PoissonSolver {
    pub fn new(mesh: &Mesh, mx: &SparseMatrix) -> Result<Self> {
        if !mesh.fully_periodic() {
            return Err(Error::Gauge(
                "Poisson solve is only available on fully periodic meshes".into(),
            ));
        }
        let n = mesh.n_dof();
        if n < 2 {
            return Err(Error::invalid("Poisson solve needs at least two dofs"));
        }
        let a = assemble_stiffness(mesh)?;
        let mut t = Vec::with_capacity(a.nnz());
        for i in 1..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j > 0 {
                    t.push((i - 1, j - 1, v));
                }
            }
        }
        let reduced = CholeskyFactor::new(&SparseMatrix::from_triplets(n - 1, n - 1, &t)?, true)?;
        let mx1 = mx.matvec(&vec![1.0; n])?;
        let area = mx1.iter().sum();
        Ok(PoissonSolver {
            mx: mx.clone(),
            mx1,
            area,
            reduced,
        })
    }

    fn mean(&self, u: &[f64]) -> f64 {
        self.mx1.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / self.area
    }

    /// Solve after removing the mean of `rho`; the result has zero mean.
    pub fn solve(&self, rho: &[f64]) -> Result<Vec<f64>> {
        let m = self.mean(rho);
        let centered: Vec<f64> = rho.iter().map(|r| r - m).collect();
        let b = self.mx.matvec(&centered)?;
        let y = self.reduced.solve_vec(&b[1..])?;
        let mut phi = Vec::with_capacity(rho.len());
        phi.push(0.0);
        phi.extend(y);
        let pm = self.mean(&phi);
        phi.iter_mut().for_each(|p| *p -= pm);
        Ok(phi)
    }
}

/// `E|_K = -grad phi|_K`.
pub fn compute_e_field(mesh: &Mesh, phi: &[f64]) -> ElectricField {
    let nloc = mesh.dim() + 1;
    let values = (0..mesh.n_elements())
        .map(|e| {
            let g = mesh.geometry(e);
            let d = mesh.element_dofs(e);
            let mut out = [0.0; 2];
            for i in 0..nloc {
                out[0] -= phi[d[i]] * g.grads[i][0];
                out[1] -= phi[d[i]] * g.grads[i][1];
            }
            out
        })
        .collect();
    ElectricField { values }
}

/// `1/2 sum_K |E_K|^2 |K|`.
pub fn electric_energy(e: &ElectricField, mesh: &Mesh) -> f64 {
    0.5 * e
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| (v[0] * v[0] + v[1] * v[1]) * mesh.measure(k))
        .sum::<f64>()
}

/// Field update strategy of a scenario.
#[derive(Clone, Debug)]
pub enum FieldSolver {
    SelfConsistent { poisson: PoissonSolver, rho_b: f64 },
    Constant(ElectricField),
}

impl FieldSolver {
    pub fn self_consistent(mesh: &Mesh, ops: &OperatorSet, rho_b: f64) -> Result<Self> {
        Ok(FieldSolver::SelfConsistent {
            poisson: PoissonSolver::new(mesh, &ops.mx)?,
            rho_b,
        })
    }

    /// Compute the field of the given state and install it in `ops.mx_e`.
    pub fn update(
        &self,
        mesh: &Mesh,
        ops: &mut OperatorSet,
        x: &DenseMatrix,
        s: &DenseMatrix,
        v: &DenseMatrix,
    ) -> Result<ElectricField> {
        let e = match self {
            FieldSolver::Constant(e) => e.clone(),
            FieldSolver::SelfConsistent { poisson, rho_b } => {
                let (rho, _) = compute_density(x, s, v, &ops.mv, &ops.mx, *rho_b)?;
                let phi = poisson.solve(&rho)?;
                compute_e_field(mesh, &phi)
            }
        };
        if !e.values.iter().all(|v| v[0].is_finite() && v[1].is_finite()) {
            return Err(Error::NumericalBlowup {
                t: f64::NAN,
                context: "electric field".into(),
            });
        }
        ops.set_field(mesh, &e.values)?;
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_mass, Weight};
    use crate::mesh::{build_interval_mesh, build_rect_tri_mesh, build_triangle_domain_mesh, refine_uniform};
    use std::f64::consts::PI;

    fn nodal_error_1d(n: usize) -> f64 {
        let m = build_interval_mesh(0.0, 4.0 * PI, n, true).unwrap();
        let mx = assemble_mass(&m, Weight::One).unwrap();
        let p = PoissonSolver::new(&m, &mx).unwrap();
        let xs = m.dof_coords();
        let rho: Vec<f64> = xs.iter().map(|x| (x[0] / 2.0).cos()).collect();
        let phi = p.solve(&rho).unwrap();
        phi.iter()
            .zip(&xs)
            .map(|(f, x)| (f - 4.0 * (x[0] / 2.0).cos()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn periodic_cosine() {
        let (e1, e2) = (nodal_error_1d(32), nodal_error_1d(64));
        assert!(e1 < 0.05);
        let ratio = e1 / e2;
        assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn periodic_box_separable() {
        let m = build_rect_tri_mesh((0.0, 4.0 * PI), (0.0, 4.0 * PI), 32, 32, (true, true)).unwrap();
        let mx = assemble_mass(&m, Weight::One).unwrap();
        let p = PoissonSolver::new(&m, &mx).unwrap();
        let xs = m.dof_coords();
        let rho: Vec<f64> = xs.iter().map(|x| (x[0] / 2.0).cos() + (x[1] / 2.0).cos()).collect();
        let phi = p.solve(&rho).unwrap();
        let shifted: Vec<f64> = rho.iter().map(|r| r + 3.0).collect();
        let phi2 = p.solve(&shifted).unwrap();
        for ((a, b), x) in phi.iter().zip(&phi2).zip(&xs) {
            assert!((a - b).abs() < 1e-10);
            assert!((a - 4.0 * (x[0] / 2.0).cos() - 4.0 * (x[1] / 2.0).cos()).abs() < 0.1);
        }
        assert!(p.solve(&vec![0.0; m.n_dof()]).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gauge_required() {
        let m = build_interval_mesh(0.0, 1.0, 4, false).unwrap();
        let mx = assemble_mass(&m, Weight::One).unwrap();
        assert!(matches!(PoissonSolver::new(&m, &mx), Err(Error::Gauge(_))));
    }

    #[test]
    fn field_of_affine_potential() {
        let m = refine_uniform(&build_triangle_domain_mesh(2).unwrap()).unwrap();
        let phi: Vec<f64> = m.dof_coords().iter().map(|p| p[0] - 2.0 * p[1] + 0.3).collect();
        let e = compute_e_field(&m, &phi);
        for v in &e.values {
            assert!((v[0] + 1.0).abs() < 1e-12 && (v[1] - 2.0).abs() < 1e-12);
        }
        let c = ElectricField::constant(&m, [0.0, 4.0]);
        assert!((electric_energy(&c, &m) - 8.0 * m.total_measure()).abs() < 1e-12);
        assert_eq!(electric_energy(&ElectricField::zero(&m), &m), 0.0);
    }

    #[test]
    fn zero_state_density_is_background() {
        let m = build_interval_mesh(0.0, 1.0, 4, true).unwrap();
        let v = build_interval_mesh(-1.0, 1.0, 4, true).unwrap();
        let mx = assemble_mass(&m, Weight::One).unwrap();
        let mv = assemble_mass(&v, Weight::One).unwrap();
        let (rho, mean) = compute_density(
            &DenseMatrix::zeros(4, 1),
            &DenseMatrix::zeros(1, 1),
            &DenseMatrix::zeros(4, 1),
            &mv,
            &mx,
            1.0,
        )
        .unwrap();
        assert!(rho.iter().all(|r| *r == 1.0));
        assert!((mean - 1.0).abs() < 1e-15);
    }
}
