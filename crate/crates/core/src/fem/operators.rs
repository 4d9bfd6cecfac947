use crate::error::{Error, Result};
use crate::fem::assembly::{
    assemble_boundary_mass, assemble_cip, assemble_halfspace_mass, assemble_mass, assemble_transport, Weight,
};
use crate::linalg::{CholeskyFactor, SparseMatrix};
use crate::mesh::Mesh;

/// All matrices of the tensor-product discretization.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub dim: usize,
    pub mx: SparseMatrix,
    pub mv: SparseMatrix,
    pub tx: Vec<SparseMatrix>,
    pub tv: Vec<SparseMatrix>,
    /// velocity-weighted mass `[<phi, v_k phi>]`
    pub mv_k: Vec<SparseMatrix>,
    /// field-weighted mass `[<phi, E_k phi>]`, replaced by [`OperatorSet::set_field`]
    pub mx_e: Vec<SparseMatrix>,
    pub mx_bnd: Vec<SparseMatrix>,
    pub mv_half: Vec<SparseMatrix>,
    pub normals: Vec<[f64; 2]>,
    pub cx: SparseMatrix,
    pub cv: SparseMatrix,
    /// `[<phi, |v|^2 phi>]`
    pub mv_sq: SparseMatrix,
    pub mx_chol: CholeskyFactor,
    pub mv_chol: CholeskyFactor,
}

impl OperatorSet {
    pub fn assemble(x_mesh: &Mesh, v_mesh: &Mesh) -> Result<OperatorSet> {
        let dim = x_mesh.dim();
        if v_mesh.dim() != dim {
            return Err(Error::invalid(format!(
                "x mesh has dimension {dim} but v mesh has dimension {}",
                v_mesh.dim()
            )));
        }
        if !v_mesh.fully_periodic() {
            return Err(Error::invalid("the velocity mesh must be periodic in every direction"));
        }
        let mx = assemble_mass(x_mesh, Weight::One)?;
        let mv = assemble_mass(v_mesh, Weight::One)?;
        let mut tx = Vec::with_capacity(dim);
        let mut tv = Vec::with_capacity(dim);
        let mut mv_k = Vec::with_capacity(dim);
        for k in 0..dim {
            tx.push(assemble_transport(x_mesh, k)?);
            tv.push(assemble_transport(v_mesh, k)?);
            mv_k.push(assemble_mass(v_mesh, Weight::Coordinate(k))?);
        }
        let mx_e = vec![SparseMatrix::zeros(mx.nrows(), mx.ncols()); dim];
        let mut mx_bnd = Vec::new();
        let mut mv_half = Vec::new();
        let mut normals = Vec::new();
        for piece in x_mesh.boundary_pieces() {
            mx_bnd.push(assemble_boundary_mass(x_mesh, piece)?);
            mv_half.push(assemble_halfspace_mass(v_mesh, piece.normal)?);
            normals.push(piece.normal);
        }
        let cx = assemble_cip(x_mesh)?;
        let cv = assemble_cip(v_mesh)?;
        let mv_sq = assemble_mass(v_mesh, Weight::SquaredNorm)?;
        let mx_chol = CholeskyFactor::new(&mx, true)?;
        let mv_chol = CholeskyFactor::new(&mv, true)?;
        Ok(OperatorSet {
            dim,
            mx,
            mv,
            tx,
            tv,
            mv_k,
            mx_e,
            mx_bnd,
            mv_half,
            normals,
            cx,
            cv,
            mv_sq,
            mx_chol,
            mv_chol,
        })
    }

    pub fn nx(&self) -> usize {
        self.mx.nrows()
    }

    pub fn nv(&self) -> usize {
        self.mv.nrows()
    }

    /// Rebuild `mx_e` from elementwise-constant field values.
    pub fn set_field(&mut self, x_mesh: &Mesh, e_field: &[[f64; 2]]) -> Result<()> {
        if e_field.len() != x_mesh.n_elements() {
            return Err(Error::invalid("field has wrong number of elements"));
        }
        for k in 0..self.dim {
            let w: Vec<f64> = e_field.iter().map(|e| e[k]).collect();
            self.mx_e[k] = assemble_mass(x_mesh, Weight::Elementwise(&w))?;
        }
        Ok(())
    }
}
