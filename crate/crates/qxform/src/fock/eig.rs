//! Hermitian eigenvalues, delegated to nalgebra's symmetric eigensolver.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::fock::matrix::ComplexMatrix;

/// Eigenvalues of a Hermitian matrix, ascending. The input is symmetrized
/// as `(A + A^dag)/2` first so callers can pass matrices carrying float
/// noise; genuinely non-Hermitian inputs are rejected.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if !a.is_finite() {
        return Err(Error::NonFinite("eigenvalue input".into()));
    }
    let scale = a.max_abs().max(1.0);
    if !a.is_hermitian(1e-8 * scale) {
        return Err(Error::Parameter(
            "eigenvalue input is not Hermitian".into(),
        ));
    }
    let h = a.hermitize();
    let dim = h.dim();
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        let z = h.get(i, j);
        Complex::new(z.re, z.im)
    });
    let eig = m.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detmat::{hermitian_sample, DetRng};
    use num_complex::Complex64;

    #[test]
    fn diagonal_eigenvalues_come_back_sorted() {
        let d = ComplexMatrix::diagonal(&[3.0, -1.0, 2.0, 0.5]);
        let vals = hermitian_eigenvalues(&d).unwrap();
        assert_eq!(vals.len(), 4);
        let want = [-1.0, 0.5, 2.0, 3.0];
        for (v, w) in vals.iter().zip(want.iter()) {
            assert!((v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn pauli_x_spectrum() {
        let sx = ComplexMatrix::new(
            2,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let vals = hermitian_eigenvalues(&sx).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_and_frobenius_invariants() {
        let mut rng = DetRng::new(42);
        let h = hermitian_sample(9, &mut rng);
        let vals = hermitian_eigenvalues(&h).unwrap();
        let tr: f64 = vals.iter().sum();
        assert!((tr - h.trace().re).abs() < 1e-10);
        let frob_sq: f64 = vals.iter().map(|v| v * v).sum();
        assert!((frob_sq - h.frobenius_norm().powi(2)).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::new(
            2,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(5.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!(hermitian_eigenvalues(&a).is_err());
    }
}
