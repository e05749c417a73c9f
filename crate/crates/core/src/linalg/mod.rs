//! Dense complex linear algebra.

pub mod eig;
pub mod matrix;
pub mod nullspace;

pub use eig::{hermitian_eig, EigenDecomposition};
pub use matrix::{
    cyclic_shift, dot, fourier, hs_inner, kron, kron_vec, partial_trace_first, partial_trace_second, pauli_x, pauli_y,
    pauli_z, vec_norm, CMatrix, C64, I, ONE, ZERO,
};
pub use nullspace::{commutation_map, least_squares, nullspace, operator_nullspace, right_singular, RowCompressor};
