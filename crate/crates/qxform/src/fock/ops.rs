//! Canonical single-factor operators.
//!
//! Qubit basis order is (excited, ground): `sigma_z = diag(1, -1)`,
//! `sigma_minus` maps excited to ground. Quadratures follow
//! `x = (a + a^dag)/sqrt(2 nu0)`, `p = i sqrt(nu0/2) (a^dag - a)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::matrix::ComplexMatrix;

/// Lowering operator on `levels` Fock states: `a |n> = sqrt(n) |n-1>`.
pub fn annihilation(levels: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(levels);
    for n in 1..levels {
        m.set(n - 1, n, Complex64::new((n as f64).sqrt(), 0.0));
    }
    m
}

pub fn creation(levels: usize) -> ComplexMatrix {
    annihilation(levels).dagger()
}

pub fn number_operator(levels: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(levels, |i, j| {
        if i == j {
            Complex64::new(i as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Diagonal `sqrt(n + 1)`, the factor that turns the number-shift isometry
/// into the lowering operator.
pub fn sqrt_shifted_number(levels: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(levels, |i, j| {
        if i == j {
            Complex64::new(((i + 1) as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Position quadrature for a mode of frequency `nu0`.
pub fn position_quadrature(levels: usize, nu0: f64) -> Result<ComplexMatrix> {
    if !(nu0 > 0.0) || !nu0.is_finite() {
        return Err(Error::Parameter(format!(
            "mode frequency must be positive and finite, got {}",
            nu0
        )));
    }
    let a = annihilation(levels);
    let sum = a.add(&a.dagger())?;
    Ok(sum.scale_re(1.0 / (2.0 * nu0).sqrt()))
}

/// Momentum quadrature for a mode of frequency `nu0`.
pub fn momentum_quadrature(levels: usize, nu0: f64) -> Result<ComplexMatrix> {
    if !(nu0 > 0.0) || !nu0.is_finite() {
        return Err(Error::Parameter(format!(
            "mode frequency must be positive and finite, got {}",
            nu0
        )));
    }
    let a = annihilation(levels);
    let diff = a.dagger().sub(&a)?;
    Ok(diff.scale(Complex64::new(0.0, (nu0 / 2.0).sqrt())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

pub fn pauli(which: Pauli) -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let entries = match which {
        Pauli::X => vec![z, one, one, z],
        Pauli::Y => vec![z, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), z],
        Pauli::Z => vec![one, z, z, -one],
        // Basis order (excited, ground): raising maps ground to excited.
        Pauli::Plus => vec![z, one, z, z],
        Pauli::Minus => vec![z, z, one, z],
    };
    ComplexMatrix::new(2, entries).expect("2x2 entry count is fixed")
}

/// Projector onto the excited qubit state.
pub fn excited_projector() -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    ComplexMatrix::new(2, vec![one, z, z, z]).expect("2x2 entry count is fixed")
}

/// Projector onto the ground qubit state.
pub fn ground_projector() -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    ComplexMatrix::new(2, vec![z, z, z, one]).expect("2x2 entry count is fixed")
}

/// Projector `|n><n|` on a Fock factor.
pub fn fock_projector(levels: usize, n: usize) -> Result<ComplexMatrix> {
    if n >= levels {
        return Err(Error::Dimension(format!(
            "projector level {} out of range for {} levels",
            n, levels
        )));
    }
    let mut m = ComplexMatrix::zeros(levels);
    m.set(n, n, Complex64::new(1.0, 0.0));
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::matrix::commutator;

    #[test]
    fn ladder_commutator_is_identity_below_truncation() {
        // [a, a^dag] = I - levels |top><top| in a truncated space.
        let levels = 6;
        let a = annihilation(levels);
        let comm = commutator(&a, &a.dagger()).unwrap();
        let mut want = ComplexMatrix::identity(levels);
        want.set(
            levels - 1,
            levels - 1,
            Complex64::new(1.0 - levels as f64, 0.0),
        );
        assert!(comm.max_abs_diff(&want).unwrap() < 1e-14);
    }

    #[test]
    fn number_operator_equals_adag_a() {
        let levels = 5;
        let a = annihilation(levels);
        let n = a.dagger().mul(&a).unwrap();
        assert!(n.max_abs_diff(&number_operator(levels)).unwrap() < 1e-14);
    }

    #[test]
    fn pauli_algebra() {
        let sx = pauli(Pauli::X);
        let sy = pauli(Pauli::Y);
        let sz = pauli(Pauli::Z);
        // [sx, sy] = 2i sz
        let comm = commutator(&sx, &sy).unwrap();
        assert!(
            comm.max_abs_diff(&sz.scale(Complex64::new(0.0, 2.0)))
                .unwrap()
                < 1e-15
        );
        // sigma_plus = (sx + i sy)/2 in the (excited, ground) ordering
        let plus = sx
            .add(&sy.scale(Complex64::new(0.0, 1.0)))
            .unwrap()
            .scale_re(0.5);
        assert!(plus.max_abs_diff(&pauli(Pauli::Plus)).unwrap() < 1e-15);
        // sigma_plus |g> = |e>
        let p = pauli(Pauli::Plus);
        assert!((p.get(0, 1) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn quadrature_commutator() {
        // [x, p] = i (1 - N |top><top| corrections live only at the edge).
        let levels = 8;
        let nu0 = 1.7;
        let x = position_quadrature(levels, nu0).unwrap();
        let p = momentum_quadrature(levels, nu0).unwrap();
        let comm = commutator(&x, &p).unwrap();
        for i in 0..levels - 1 {
            assert!((comm.get(i, i) - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn quadratures_reconstruct_oscillator_hamiltonian() {
        // p^2/2 + nu0^2 x^2 / 2 = nu0 (N + 1/2) away from the truncation edge.
        let levels = 10;
        let nu0 = 0.8;
        let x = position_quadrature(levels, nu0).unwrap();
        let p = momentum_quadrature(levels, nu0).unwrap();
        let h = p
            .mul(&p)
            .unwrap()
            .scale_re(0.5)
            .add(&x.mul(&x).unwrap().scale_re(0.5 * nu0 * nu0))
            .unwrap();
        for n in 0..levels - 1 {
            let want = nu0 * (n as f64 + 0.5);
            assert!((h.get(n, n) - Complex64::new(want, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn rejects_nonpositive_frequency() {
        assert!(position_quadrature(4, 0.0).is_err());
        assert!(momentum_quadrature(4, -1.0).is_err());
    }

    #[test]
    fn sqrt_shifted_number_squares_to_shifted_number() {
        let levels = 7;
        let s = sqrt_shifted_number(levels);
        let sq = s.mul(&s).unwrap();
        for n in 0..levels {
            assert!((sq.get(n, n) - Complex64::new(n as f64 + 1.0, 0.0)).norm() < 1e-13);
        }
    }
}
