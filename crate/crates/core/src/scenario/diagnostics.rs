use crate::dlra::LowRankState;
use crate::error::Result;
use crate::fem::{assemble_mass, OperatorSet, Weight};
use crate::field::{electric_energy, ElectricField};
use crate::inflow::{sample_separable, SeparableFunction};
use crate::linalg::SparseMatrix;
use crate::mesh::{refine_with_prolongation, Mesh};
use crate::oracle::CharacteristicsSolution;

pub const CSV_HEADER: &str = "t,electric_energy,mass,total_energy,entropy,rank,l2_error,wall_ms";

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub electric_energy: f64,
    pub mass: f64,
    pub total_energy: f64,
    pub entropy: f64,
    pub rank: usize,
    pub l2_error: Option<f64>,
    pub wall_ms: f64,
}

impl DiagnosticsRecord {
    pub fn csv_line(&self) -> String {
        let err = self.l2_error.map(|e| format!("{e:e}")).unwrap_or_default();
        format!(
            "{:?},{:e},{:e},{:e},{:e},{},{},{:.3}",
            self.t, self.electric_energy, self.mass, self.total_energy, self.entropy, self.rank, err, self.wall_ms
        )
    }
}

/// Mass, energies, entropy and rank of a state. `l2_error` and `wall_ms`
/// are left for the caller.
pub fn diagnostics(state: &LowRankState, ops: &OperatorSet, x_mesh: &Mesh, e: &ElectricField) -> Result<DiagnosticsRecord> {
    let mx1 = ops.mx.matvec(&vec![1.0; ops.nx()])?;
    let mv1 = ops.mv.matvec(&vec![1.0; ops.nv()])?;
    let msq1 = ops.mv_sq.matvec(&vec![1.0; ops.nv()])?;
    let a = state.x.t_matvec(&mx1);
    let sa = state.s.t_matvec(&a);
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let mass = dot(&sa, &state.v.t_matvec(&mv1));
    let kinetic = 0.5 * dot(&sa, &state.v.t_matvec(&msq1));
    let ee = electric_energy(e, x_mesh);
    Ok(DiagnosticsRecord {
        t: state.t,
        electric_energy: ee,
        mass,
        total_energy: kinetic + ee,
        entropy: state.s.dot(&state.s),
        rank: state.rank(),
        l2_error: None,
        wall_ms: 0.0,
    })
}

/// Data for the L2 error against the characteristics solution on the once
/// refined mesh pair.
pub struct ErrorReference {
    pub solution: CharacteristicsSolution,
    fine_x: Mesh,
    fine_v: Mesh,
    px: SparseMatrix,
    pv: SparseMatrix,
    mx: SparseMatrix,
    mv: SparseMatrix,
    terms: usize,
}

impl ErrorReference {
    pub fn new(solution: CharacteristicsSolution, x_mesh: &Mesh, v_mesh: &Mesh, terms: usize) -> Result<Self> {
        let (fine_x, px) = refine_with_prolongation(x_mesh)?;
        let (fine_v, pv) = refine_with_prolongation(v_mesh)?;
        let mx = assemble_mass(&fine_x, Weight::One)?;
        let mv = assemble_mass(&fine_v, Weight::One)?;
        Ok(ErrorReference {
            solution,
            fine_x,
            fine_v,
            px,
            pv,
            mx,
            mv,
            terms,
        })
    }

    /// Separable interpolant of the reference on the fine meshes.
    pub fn reference(&self, t: f64) -> Result<SeparableFunction> {
        let sol = self.solution;
        sample_separable(&move |k, t, x, v| sol.factor(k, t, x, v), t, &self.fine_x, &self.fine_v, self.terms)
    }

    /// `|| P_x X S V^T P_v^T - G ||` in the fine mass norms, expanded through
    /// Gram matrices so no dense fine matrix is formed.
    pub fn error(&self, state: &LowRankState) -> Result<f64> {
        let g = self.reference(state.t)?;
        let xf = self.px.spmm(&state.x)?;
        let vf = self.pv.spmm(&state.v)?;
        let mxf = self.mx.spmm(&xf)?;
        let mvf = self.mv.spmm(&vf)?;
        let gram_xx = xf.t_matmul(&mxf)?;
        let gram_vv = vf.t_matmul(&mvf)?;
        let aa = gram_xx.matmul(&state.s)?.matmul(&gram_vv)?.dot(&state.s);
        if g.n_terms() == 0 {
            return Ok(aa.max(0.0).sqrt());
        }
        let (gx, gv) = g.factors(self.fine_x.n_dof(), self.fine_v.n_dof())?;
        let xg = mxf.t_matmul(&gx)?;
        let vg = mvf.t_matmul(&gv)?;
        let ab = xg.matmul_t(&vg)?.dot(&state.s);
        let gxx = gx.t_matmul(&self.mx.spmm(&gx)?)?;
        let gvv = gv.t_matmul(&self.mv.spmm(&gv)?)?;
        let bb = gxx.dot(&gvv);
        Ok((aa - 2.0 * ab + bb).max(0.0).sqrt())
    }
}
