//! Dense complex linear algebra for operators of dimension up to a few
//! hundred: products, Kronecker products, partial traces, subsystem
//! permutations and Hermitian eigendecomposition.

mod eig;
mod matrix;
mod shape;

pub use eig::{
    hermitian_eig, hermitian_eig_with_guess, inv_sqrt_psd, is_psd_within, psd_project,
    EigDecomposition, HERMITIAN_TOL,
};
pub use matrix::{pauli_x, pauli_y, pauli_z, DenseMatrix, C64, I, ONE, ZERO};
pub use shape::{partial_trace, permute_subsystems, swap_operator, SubsystemShape};

/// Free-function form of [`DenseMatrix::matmul`].
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> crate::Result<DenseMatrix> {
    a.matmul(b)
}

/// Free-function form of [`DenseMatrix::kron`].
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    a.kron(b)
}

/// Free-function form of [`DenseMatrix::dagger`].
pub fn dagger(a: &DenseMatrix) -> DenseMatrix {
    a.dagger()
}
