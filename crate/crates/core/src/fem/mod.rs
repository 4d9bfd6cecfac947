//! P1 finite element assembly.

mod assembly;
mod operators;
pub mod quadrature;

pub use assembly::{
    assemble_boundary_mass, assemble_cip, assemble_halfspace_mass, assemble_mass, assemble_stiffness, assemble_transport,
    Weight,
};
pub use operators::OperatorSet;
