//! Density matrices with construction-time physicality checks.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::eig::hermitian_eigenvalues;
use crate::fock::matrix::ComplexMatrix;
use crate::fock::state::StateVector;

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = -1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: ComplexMatrix,
}

impl DensityMatrix {
    /// Validate Hermiticity, unit trace and positivity (up to float noise)
    /// before accepting the matrix.
    pub fn try_new(m: ComplexMatrix) -> Result<Self> {
        Self::try_new_with_positivity(m, POSITIVITY_TOL)
    }

    /// Like `try_new` but with a caller-chosen floor on the smallest
    /// eigenvalue, for outputs of iterative solvers whose positivity noise
    /// legitimately exceeds the construction-time default.
    pub fn try_new_with_positivity(m: ComplexMatrix, positivity_tol: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite("density matrix".into()));
        }
        if !m.is_hermitian(HERMITICITY_TOL) {
            return Err(Error::Parameter(
                "density matrix is not Hermitian within 1e-12".into(),
            ));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Parameter(format!(
                "density matrix trace is {} + {}i, expected 1 within 1e-10",
                tr.re, tr.im
            )));
        }
        let min = *hermitian_eigenvalues(&m)?
            .first()
            .ok_or_else(|| Error::Dimension("empty density matrix".into()))?;
        if min < positivity_tol {
            return Err(Error::Parameter(format!(
                "density matrix has eigenvalue {}, below the positivity tolerance",
                min
            )));
        }
        Ok(Self { m })
    }

    pub fn pure(state: &StateVector) -> Result<Self> {
        let dim = state.dim();
        let amps = state.amps();
        let m = ComplexMatrix::from_fn(dim, |i, j| amps[i] * amps[j].conj());
        Self::try_new(m)
    }

    /// `|n><n|` in a Fock space of the given size.
    pub fn fock(levels: usize, n: usize) -> Result<Self> {
        Self::pure(&StateVector::basis(levels, n)?)
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    pub fn expectation(&self, op: &ComplexMatrix) -> Result<Complex64> {
        Ok(op.mul(&self.m)?.trace())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*hermitian_eigenvalues(&self.m)?
            .first()
            .expect("dim checked at construction"))
    }
}
