//! Dense matrix exponential via degree-13 Pade approximation with scaling
//! and squaring.
//!
//! The classic algorithm: scale `A` by `2^-s` until its 1-norm is below the
//! degree-13 accuracy threshold, evaluate the (13,13) Pade approximant with
//! a handful of matrix products and one linear solve, then square the result
//! `s` times. Good to close to machine precision for the operator norms this
//! crate produces (Hamiltonian generators with norm up to a few tens).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::matrix::ComplexMatrix;

/// Pade (13,13) numerator coefficients b_0..b_13.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm threshold below which the unscaled degree-13 approximant already
/// reaches double precision.
const THETA13: f64 = 5.371920351148152;

pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_finite() {
        return Err(Error::NonFinite("expm input".into()));
    }
    let norm = a.one_norm();
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.scale_re(0.5f64.powi(s as i32));

    let dim = a.dim();
    let id = ComplexMatrix::identity(dim);
    let a2 = scaled.mul(&scaled)?;
    let a4 = a2.mul(&a2)?;
    let a6 = a2.mul(&a4)?;

    // u_odd = A * (A6*(b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let mut w = a6.scale_re(PADE13[13]);
    w.add_scaled(Complex64::new(PADE13[11], 0.0), &a4)?;
    w.add_scaled(Complex64::new(PADE13[9], 0.0), &a2)?;
    let mut u_inner = a6.mul(&w)?;
    u_inner.add_scaled(Complex64::new(PADE13[7], 0.0), &a6)?;
    u_inner.add_scaled(Complex64::new(PADE13[5], 0.0), &a4)?;
    u_inner.add_scaled(Complex64::new(PADE13[3], 0.0), &a2)?;
    u_inner.add_scaled(Complex64::new(PADE13[1], 0.0), &id)?;
    let u = scaled.mul(&u_inner)?;

    // v_even = A6*(b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let mut w = a6.scale_re(PADE13[12]);
    w.add_scaled(Complex64::new(PADE13[10], 0.0), &a4)?;
    w.add_scaled(Complex64::new(PADE13[8], 0.0), &a2)?;
    let mut v = a6.mul(&w)?;
    v.add_scaled(Complex64::new(PADE13[6], 0.0), &a6)?;
    v.add_scaled(Complex64::new(PADE13[4], 0.0), &a4)?;
    v.add_scaled(Complex64::new(PADE13[2], 0.0), &a2)?;
    v.add_scaled(Complex64::new(PADE13[0], 0.0), &id)?;

    // exp(A_scaled) ~ (V - U)^-1 (V + U)
    let p = v.add(&u)?;
    let q = v.sub(&u)?;
    let mut result = solve(&q, &p)?;

    for _ in 0..s {
        result = result.mul(&result)?;
    }
    if !result.is_finite() {
        return Err(Error::NonFinite("expm result".into()));
    }
    Ok(result)
}

/// Solve `A X = B` by Gaussian elimination with partial pivoting.
fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = a.dim();
    if b.dim() != dim {
        return Err(Error::Dimension(format!(
            "solve needs equal dims, got {} and {}",
            dim,
            b.dim()
        )));
    }
    let mut lhs: Vec<Complex64> = a.entries().to_vec();
    let mut rhs: Vec<Complex64> = b.entries().to_vec();

    for col in 0..dim {
        let mut pivot_row = col;
        let mut pivot_mag = lhs[col * dim + col].norm();
        for r in col + 1..dim {
            let mag = lhs[r * dim + col].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if pivot_mag == 0.0 {
            return Err(Error::Singularity(
                "singular matrix in linear solve".into(),
            ));
        }
        if pivot_row != col {
            for j in 0..dim {
                lhs.swap(col * dim + j, pivot_row * dim + j);
                rhs.swap(col * dim + j, pivot_row * dim + j);
            }
        }
        let pivot = lhs[col * dim + col];
        for r in col + 1..dim {
            let factor = lhs[r * dim + col] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            lhs[r * dim + col] = Complex64::new(0.0, 0.0);
            for j in col + 1..dim {
                let v = lhs[col * dim + j];
                lhs[r * dim + j] -= factor * v;
            }
            for j in 0..dim {
                let v = rhs[col * dim + j];
                rhs[r * dim + j] -= factor * v;
            }
        }
    }

    for col in (0..dim).rev() {
        let pivot = lhs[col * dim + col];
        for j in 0..dim {
            let mut acc = rhs[col * dim + j];
            for k in col + 1..dim {
                acc -= lhs[col * dim + k] * rhs[k * dim + j];
            }
            rhs[col * dim + j] = acc / pivot;
        }
    }

    ComplexMatrix::new(dim, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detmat::{general_sample, hermitian_sample, DetRng};
    use crate::fock::matrix::commutator;

    #[test]
    fn exp_of_zero_is_identity() {
        let z = ComplexMatrix::zeros(5);
        let e = expm(&z).unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::identity(5)).unwrap() < 1e-15);
    }

    #[test]
    fn exp_of_diagonal_matches_scalar_exp() {
        let d = ComplexMatrix::from_fn(3, |i, j| {
            if i == j {
                Complex64::new(i as f64 - 1.0, 0.5 * i as f64)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let e = expm(&d).unwrap();
        for i in 0..3 {
            let want = Complex64::new(i as f64 - 1.0, 0.5 * i as f64).exp();
            assert!((e.get(i, i) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn exp_of_pauli_x_angle_matches_closed_form() {
        // exp(i theta sigma_x) = cos(theta) I + i sin(theta) sigma_x
        let theta = 0.7313;
        let sx = ComplexMatrix::new(
            2,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, theta),
                Complex64::new(0.0, theta),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let e = expm(&sx).unwrap();
        assert!((e.get(0, 0) - Complex64::new(theta.cos(), 0.0)).norm() < 1e-14);
        assert!((e.get(0, 1) - Complex64::new(0.0, theta.sin())).norm() < 1e-14);
    }

    #[test]
    fn additive_property_for_commuting_matrices() {
        let mut rng = DetRng::new(42);
        let a = hermitian_sample(6, &mut rng);
        let a2 = a.mul(&a).unwrap();
        // A and A^2 commute, so exp(A) exp(A^2) = exp(A + A^2).
        let lhs = expm(&a).unwrap().mul(&expm(&a2).unwrap()).unwrap();
        let rhs = expm(&a.add(&a2).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-11);
    }

    #[test]
    fn inverse_property() {
        let mut rng = DetRng::new(9);
        let a = general_sample(8, &mut rng).scale_re(2.0);
        let e = expm(&a).unwrap();
        let einv = expm(&a.scale_re(-1.0)).unwrap();
        let prod = e.mul(&einv).unwrap();
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(8)).unwrap() < 1e-12);
    }

    #[test]
    fn anti_hermitian_generator_gives_unitary() {
        let mut rng = DetRng::new(5);
        let h = hermitian_sample(10, &mut rng).scale_re(20.0);
        // Norm around 20 forces several squaring steps.
        let u = expm(&h.scale(Complex64::new(0.0, -1.0))).unwrap();
        let udu = u.dagger().mul(&u).unwrap();
        assert!(udu.max_abs_diff(&ComplexMatrix::identity(10)).unwrap() < 1e-12);
    }

    #[test]
    fn derivative_along_commuting_direction() {
        // d/dt exp(tA) = A exp(tA); checked with a central difference.
        let mut rng = DetRng::new(13);
        let a = hermitian_sample(5, &mut rng);
        let t = 0.6;
        let eps = 1e-5;
        let plus = expm(&a.scale_re(t + eps)).unwrap();
        let minus = expm(&a.scale_re(t - eps)).unwrap();
        let fd = plus.sub(&minus).unwrap().scale_re(1.0 / (2.0 * eps));
        let exact = a.mul(&expm(&a.scale_re(t)).unwrap()).unwrap();
        assert!(fd.max_abs_diff(&exact).unwrap() < 1e-9);
    }

    #[test]
    fn solve_recovers_known_product() {
        let mut rng = DetRng::new(21);
        let a = general_sample(7, &mut rng);
        let x = general_sample(7, &mut rng);
        let b = a.mul(&x).unwrap();
        let got = solve(&a, &b).unwrap();
        assert!(got.max_abs_diff(&x).unwrap() < 1e-11);
    }

    #[test]
    fn baker_campbell_hausdorff_second_order() {
        // For small t: exp(tA) exp(tB) = exp(tA + tB + t^2/2 [A,B] + O(t^3)).
        let mut rng = DetRng::new(31);
        let a = hermitian_sample(4, &mut rng);
        let b = hermitian_sample(4, &mut rng);
        let t = 1e-3;
        let lhs = expm(&a.scale_re(t))
            .unwrap()
            .mul(&expm(&b.scale_re(t)).unwrap())
            .unwrap();
        let mut gen = a.add(&b).unwrap().scale_re(t);
        gen.add_scaled(
            Complex64::new(t * t / 2.0, 0.0),
            &commutator(&a, &b).unwrap(),
        )
        .unwrap();
        let rhs = expm(&gen).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 5.0 * t * t * t);
    }
}
