//! Numerical laboratory for exactly solvable transformations in trapped-ion
//! and lossy-Kerr dynamics.
//!
//! The crate is organized around pairs of routes to the same physics: a
//! closed-form or operator-algebra shortcut on one side, and a brute-force
//! numerical computation (dense matrix exponentials, RK4 integration) on the
//! other. Every shortcut ships with the machinery needed to check it.
//!
//! Conventions used throughout: `hbar = 1`, the qubit basis is ordered
//! (excited, ground) so that `sigma_z = diag(1, -1)` and `sigma_minus`
//! lowers excited into ground, and tensor products place the leftmost
//! factor on the slowest (most significant) index.

pub mod detmat;
pub mod ermakov;
pub mod error;
pub mod fock;
pub mod ion;
pub mod kerr;
pub mod slow_atom;

pub use error::{Error, Result};
pub use fock::matrix::ComplexMatrix;
pub use num_complex::Complex64;
