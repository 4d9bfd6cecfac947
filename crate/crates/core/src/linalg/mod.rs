//! Dense and sparse linear algebra kernels.

mod cholesky;
mod dense;
mod orth;
mod rk3;
mod sparse;
mod svd;

pub use cholesky::{rcm_ordering, CholeskyFactor};
pub use dense::DenseMatrix;
pub use orth::{m_orthonormalize, orthonormality_defect, MOrth, OrthPolicy, DEPENDENCE_TOL};
pub use rk3::{rk3_integrate, rk3_step};
pub use sparse::SparseMatrix;
pub use svd::{svd_sorted, svd_truncate, truncation_rank, Svd};
