//! Separable inflow data and the boundary load terms of the K, S and L
//! equations.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::fem::OperatorSet;
use crate::linalg::{svd_sorted, DenseMatrix};
use crate::mesh::Mesh;
use crate::oracle::CharacteristicsSolution;

/// `g(x, v) = sum_mu gx_mu(x) gv_mu(v)` at time `t`, as P1 coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SeparableFunction {
    pub terms: Vec<(Vec<f64>, Vec<f64>)>,
    pub t: f64,
}

impl SeparableFunction {
    pub fn zero(t: f64) -> Self {
        SeparableFunction { terms: Vec::new(), t }
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Dense `n_x x n_v` coefficient matrix.
    pub fn to_dense(&self, nx: usize, nv: usize) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(nx, nv);
        for (gx, gv) in &self.terms {
            for (i, &a) in gx.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out.row_mut(i).iter_mut().zip(gv) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Factor matrices `(G_x, G_v)` with `g = G_x G_v^T`.
    pub fn factors(&self, nx: usize, nv: usize) -> Result<(DenseMatrix, DenseMatrix)> {
        let gx: Vec<Vec<f64>> = self.terms.iter().map(|t| t.0.clone()).collect();
        let gv: Vec<Vec<f64>> = self.terms.iter().map(|t| t.1.clone()).collect();
        Ok((DenseMatrix::from_columns(nx, &gx)?, DenseMatrix::from_columns(nv, &gv)?))
    }
}

/// Sorted distinct values of coordinate `k` over the dofs, and the index of
/// every dof into that list.
fn coordinate_grid(coords: &[[f64; 2]], k: usize, tol: f64) -> (Vec<f64>, Vec<usize>) {
    let mut vals: Vec<f64> = coords.iter().map(|p| p[k]).collect();
    vals.sort_by(f64::total_cmp);
    let mut uniq: Vec<f64> = Vec::new();
    for v in vals {
        if uniq.last().is_none_or(|&u| v - u > tol) {
            uniq.push(v);
        }
    }
    let idx = coords
        .iter()
        .map(|p| {
            let pos = uniq.partition_point(|&u| u < p[k] - tol);
            pos.min(uniq.len() - 1)
        })
        .collect();
    (uniq, idx)
}

/// Rank-truncated expansion `g(x, v) ~ sum_i w_i a_i(x) b_i(v)` of a sampled
/// 2D function.
fn factor_expansion(samples: &DenseMatrix, max_terms: usize) -> Result<Vec<(f64, Vec<f64>, Vec<f64>)>> {
    let svd = svd_sorted(samples)?;
    let top = svd.sigma.first().copied().unwrap_or(0.0);
    Ok(svd
        .sigma
        .iter()
        .enumerate()
        .take(max_terms)
        .filter(|(_, &s)| s > 1e-14 * top && s > 0.0)
        .map(|(i, &s)| (s, svd.u.column(i), svd.v.column(i)))
        .collect())
}

/// Sample `g(t, x, v) = prod_k factor(k, t, x_k, v_k)` on the mesh nodes and
/// compress it to at most `max_terms` separable terms.
pub fn sample_separable(
    factor: &(dyn Fn(usize, f64, f64, f64) -> f64 + Sync),
    t: f64,
    x_mesh: &Mesh,
    v_mesh: &Mesh,
    max_terms: usize,
) -> Result<SeparableFunction> {
    if max_terms < 1 {
        return Err(Error::invalid("max_terms must be at least 1"));
    }
    let dim = x_mesh.dim();
    let xc = x_mesh.dof_coords();
    let vc = v_mesh.dof_coords();
    let tol = 1e-10;
    let mut expansions = Vec::with_capacity(dim);
    let mut x_index = Vec::with_capacity(dim);
    let mut v_index = Vec::with_capacity(dim);
    for k in 0..dim {
        let (xs, xi) = coordinate_grid(&xc, k, tol);
        let (vs, vi) = coordinate_grid(&vc, k, tol);
        let samples = DenseMatrix::from_fn(xs.len(), vs.len(), |a, b| factor(k, t, xs[a], vs[b]));
        expansions.push(factor_expansion(&samples, max_terms)?);
        x_index.push(xi);
        v_index.push(vi);
    }
    // all index tuples with their combined weight, largest first
    let mut combos: Vec<(f64, Vec<usize>)> = vec![(1.0, Vec::new())];
    for exp in &expansions {
        let mut next = Vec::with_capacity(combos.len() * exp.len());
        for (w, c) in &combos {
            for (i, term) in exp.iter().enumerate() {
                let mut cc = c.clone();
                cc.push(i);
                next.push((w * term.0, cc));
            }
        }
        combos = next;
    }
    combos.sort_by(|a, b| b.0.total_cmp(&a.0));
    combos.truncate(max_terms);

    let terms = combos
        .into_iter()
        .map(|(w, c)| {
            let gx: Vec<f64> = (0..xc.len())
                .map(|d| w * (0..dim).map(|k| expansions[k][c[k]].1[x_index[k][d]]).product::<f64>())
                .collect();
            let gv: Vec<f64> = (0..vc.len())
                .map(|d| (0..dim).map(|k| expansions[k][c[k]].2[v_index[k][d]]).product::<f64>())
                .collect();
            (gx, gv)
        })
        .collect();
    Ok(SeparableFunction { terms, t })
}

/// Boundary loads `bx = M_bnd gx` and half-space loads `bv = M_half gv`,
/// one column per (piece, term) pair.
#[derive(Clone, Debug)]
pub struct InflowAssembly {
    pub bx: DenseMatrix,
    pub bv: DenseMatrix,
}

impl InflowAssembly {
    pub fn empty(nx: usize, nv: usize) -> Self {
        InflowAssembly {
            bx: DenseMatrix::zeros(nx, 0),
            bv: DenseMatrix::zeros(nv, 0),
        }
    }

    pub fn n_pairs(&self) -> usize {
        self.bx.ncols()
    }

    /// `sum bx (V^T bv)^T`, size `n_x x r`.
    pub fn gx_matrix(&self, v: &DenseMatrix) -> Result<DenseMatrix> {
        self.bx.matmul(&self.bv.t_matmul(v)?)
    }

    /// `sum bv (X^T bx)^T`, size `n_v x r`.
    pub fn gv_matrix(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.bv.matmul(&self.bx.t_matmul(x)?)
    }

    /// `sum (X^T bx)(V^T bv)^T`, size `r_x x r_v`.
    pub fn gs_matrix(&self, x: &DenseMatrix, v: &DenseMatrix) -> Result<DenseMatrix> {
        let a = self.bx.t_matmul(x)?;
        let b = self.bv.t_matmul(v)?;
        a.t_matmul(&b)
    }

    /// Dense `sum bx bv^T`.
    pub fn dense_load(&self) -> Result<DenseMatrix> {
        self.bx.matmul_t(&self.bv)
    }
}

pub fn assemble_inflow(g: &SeparableFunction, ops: &OperatorSet) -> Result<InflowAssembly> {
    let (nx, nv) = (ops.nx(), ops.nv());
    let mut bx = Vec::new();
    let mut bv = Vec::new();
    for (mb, mh) in ops.mx_bnd.iter().zip(&ops.mv_half) {
        for (gx, gv) in &g.terms {
            if gx.len() != nx || gv.len() != nv {
                return Err(Error::invalid("separable term does not match the meshes"));
            }
            let a = mb.matvec(gx)?;
            let b = mh.matvec(gv)?;
            if a.iter().all(|x| *x == 0.0) || b.iter().all(|x| *x == 0.0) {
                continue;
            }
            bx.push(a);
            bv.push(b);
        }
    }
    Ok(InflowAssembly {
        bx: DenseMatrix::from_columns(nx, &bx)?,
        bv: DenseMatrix::from_columns(nv, &bv)?,
    })
}

/// Time-dependent inflow data.
#[derive(Clone, Debug)]
pub enum InflowData {
    None,
    Characteristics {
        solution: CharacteristicsSolution,
        max_terms: usize,
    },
    /// time-independent data
    Fixed(SeparableFunction),
}

/// Inflow source with a per-step cache of assemblies keyed by stage time.
pub struct Inflow {
    data: InflowData,
    x_mesh: Arc<Mesh>,
    v_mesh: Arc<Mesh>,
    /// evaluate at the step start instead of the stage times
    pub freeze: bool,
    step_start: Mutex<f64>,
    cache: Mutex<HashMap<u64, Arc<InflowAssembly>>>,
}

impl Inflow {
    pub fn new(data: InflowData, x_mesh: Arc<Mesh>, v_mesh: Arc<Mesh>, freeze: bool) -> Self {
        Inflow {
            data,
            x_mesh,
            v_mesh,
            freeze,
            step_start: Mutex::new(0.0),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn none(x_mesh: Arc<Mesh>, v_mesh: Arc<Mesh>) -> Self {
        Self::new(InflowData::None, x_mesh, v_mesh, false)
    }

    pub fn data(&self) -> &InflowData {
        &self.data
    }

    pub fn is_none(&self) -> bool {
        matches!(self.data, InflowData::None)
    }

    /// Drop cached assemblies and record the step start time.
    pub fn begin_step(&self, t0: f64) {
        *self.step_start.lock().expect("inflow lock") = t0;
        self.cache.lock().expect("inflow lock").clear();
    }

    /// The separable data at time `t`.
    pub fn sample(&self, t: f64) -> Result<SeparableFunction> {
        match &self.data {
            InflowData::None => Ok(SeparableFunction::zero(t)),
            InflowData::Fixed(g) => Ok(SeparableFunction { terms: g.terms.clone(), t }),
            InflowData::Characteristics { solution, max_terms } => {
                let sol = *solution;
                sample_separable(
                    &move |k, t, x, v| sol.factor(k, t, x, v),
                    t,
                    &self.x_mesh,
                    &self.v_mesh,
                    *max_terms,
                )
            }
        }
    }

    pub fn assembly_at(&self, t: f64, ops: &OperatorSet) -> Result<Arc<InflowAssembly>> {
        if self.is_none() || ops.mx_bnd.is_empty() {
            return Ok(Arc::new(InflowAssembly::empty(ops.nx(), ops.nv())));
        }
        let t = if self.freeze {
            *self.step_start.lock().expect("inflow lock")
        } else {
            t
        };
        let key = t.to_bits();
        if let Some(a) = self.cache.lock().expect("inflow lock").get(&key) {
            return Ok(a.clone());
        }
        let a = Arc::new(assemble_inflow(&self.sample(t)?, ops)?);
        self.cache.lock().expect("inflow lock").insert(key, a.clone());
        Ok(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rect_tri_mesh, build_triangle_domain_mesh};

    fn meshes() -> (Mesh, Mesh) {
        (
            build_triangle_domain_mesh(10).unwrap(),
            build_rect_tri_mesh((-4.0, 4.0), (-4.0, 4.0), 16, 16, (true, true)).unwrap(),
        )
    }

    #[test]
    fn rank_one_factors_give_one_term() {
        let (x, v) = meshes();
        let f = |k: usize, _t: f64, a: f64, b: f64| if k == 0 { 1.0 + a * a } else { (b * 0.3).cos() };
        let g = sample_separable(&f, 0.0, &x, &v, 25).unwrap();
        assert_eq!(g.n_terms(), 1);
        let dense = g.to_dense(x.n_dof(), v.n_dof());
        for (i, p) in x.dof_coords().iter().enumerate() {
            for (j, q) in v.dof_coords().iter().enumerate() {
                let exact = (1.0 + p[0] * p[0]) * (q[1] * 0.3).cos();
                assert!((dense[(i, j)] - exact).abs() < 1e-12, "{i} {j} {} {exact}", dense[(i, j)]);
            }
        }
        let zero = sample_separable(&|_, _, _, _| 0.0, 0.0, &x, &v, 25).unwrap();
        assert_eq!(zero.n_terms(), 0);
        assert!(sample_separable(&f, 0.0, &x, &v, 0).is_err());
    }

    #[test]
    fn consistency_triangle() {
        let (x, v) = meshes();
        let ops = OperatorSet::assemble(&x, &v).unwrap();
        let sol = CharacteristicsSolution::default();
        let g = sample_separable(&|k, t, a, b| sol.factor(k, t, a, b), 0.1, &x, &v, 25).unwrap();
        let asm = assemble_inflow(&g, &ops).unwrap();
        assert!(asm.n_pairs() > 0);
        let xb = DenseMatrix::from_fn(x.n_dof(), 3, |i, j| ((i * (j + 2)) as f64 * 0.1).sin());
        let vb = DenseMatrix::from_fn(v.n_dof(), 2, |i, j| ((i + 7 * j) as f64 * 0.05).cos());
        let gs = asm.gs_matrix(&xb, &vb).unwrap();
        let a = xb.t_matmul(&asm.gx_matrix(&vb).unwrap()).unwrap();
        let b = vb.t_matmul(&asm.gv_matrix(&xb).unwrap()).unwrap().transpose();
        let scale = gs.max_abs();
        assert!(a.sub(&gs).max_abs() <= 1e-12 * scale);
        assert!(b.sub(&gs).max_abs() <= 1e-12 * scale);

        let empty = InflowAssembly::empty(x.n_dof(), v.n_dof());
        assert_eq!(empty.gs_matrix(&xb, &vb).unwrap().max_abs(), 0.0);
    }
}
