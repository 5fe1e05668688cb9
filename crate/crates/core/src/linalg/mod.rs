//! Dense complex linear algebra.

pub mod eigen;
mod matrix;
mod ops;

pub use eigen::{hermitian_eigen, schur, HermitianEigen, Schur};
pub use matrix::{ComplexMatrix, ComplexVector};
pub use ops::{
    hermitian_sqrt, kron, kron_all, mat_exp, mat_exp_with_guard, rotation_y, sigma_x, sigma_y,
    sigma_z, spectral_norm, unitary_complete, DEFAULT_EXP_GUARD,
};

#[cfg(test)]
mod proptests;
