//! Dynamical low-rank simulation of the Vlasov-Poisson equation with inflow
//! boundary conditions on P1 finite elements.

pub mod dlra;
pub mod error;
pub mod fem;
pub mod field;
pub mod inflow;
pub mod linalg;
pub mod mesh;
pub mod oracle;
pub mod par;
pub mod scenario;

pub use error::{Error, Result};
