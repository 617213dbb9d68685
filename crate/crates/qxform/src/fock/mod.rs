//! Dense complex linear algebra over finite Hilbert spaces: matrices,
//! tensor-product layouts, canonical operators, matrix exponentials,
//! Hermitian spectra, and state containers.

pub mod density;
pub mod eig;
pub mod expm;
pub mod layout;
pub mod matrix;
pub mod ops;
pub mod state;

pub use density::DensityMatrix;
pub use eig::hermitian_eigenvalues;
pub use expm::expm;
pub use layout::{
    masked_frobenius_inner, masked_max_abs_diff, masked_offset_residual, Factor, HilbertLayout,
    MAX_TOTAL_DIM,
};
pub use matrix::{commutator, ComplexMatrix};
pub use ops::{
    annihilation, creation, excited_projector, fock_projector, ground_projector,
    momentum_quadrature, number_operator, pauli, position_quadrature, sqrt_shifted_number, Pauli,
};
pub use state::{coherent_state, StateVector};
