//! Trapped-ion Hamiltonians and the exact transformations that linearize
//! their exponential displacement couplings.
//!
//! Three model families live here, in one submodule each:
//!
//! * [`single`]: one ion in a (possibly time-dependent) trap, driven by a
//!   laser. The trap envelope comes from the [`crate::ermakov`] solver, and
//!   the frame transformation `R(t)` (a pi/4 qubit rotation times a
//!   qubit-conditioned displacement) turns the exponential coupling into
//!   terms linear in the ladder operators.
//! * [`many`]: a register of two-level ions sharing one vibrational mode.
//!   The product transformation linearizes every coupling at once and
//!   generates an effective ion-ion dipole term.
//! * [`two_d`]: one ion vibrating in two modes, same story with a joint
//!   displacement on both modes.
//!
//! Every `linearize_*` operation returns a `claimed` matrix (the simplified
//! closed form this module is checking) next to a `computed` matrix (dense
//! conjugation `T H T^dag`, plus the frame term `i dT/dt T^dag` when the
//! transformation is time-dependent). The pair is returned raw:
//! callers decide what residual to take, and the reports keep fitted
//! coefficients so a wrong claimed coefficient is measured, never patched
//! over. Entrywise comparisons should mask the top Fock levels out; the
//! displacement operators do not close in a truncated space, so every
//! conjugation drags a localized error in from the corner.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{expm, ComplexMatrix, Pauli};

pub mod many;
pub mod single;
pub mod two_d;

pub use many::{h_many, linearize_many, t_many, LinearizedMany, ManyIonParams};
pub use single::{
    dynamics_equivalence, dynamics_trace, h_single_interaction, h_single_rotating,
    linearize_single, r_transform, BetaConvention, DynamicsRow, IonLaserParams,
    LinearizedSingle,
};
pub use two_d::{h_2d, linearize_2d, t_2d, LinearizedTwoD, TwoDParams};

/// Relative tolerance for the redundant parameter identities checked at
/// construction time.
const PARAM_IDENTITY_TOL: f64 = 1e-12;

fn require_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{} must be finite, got {}", name, v)))
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "{} must be positive and finite, got {}",
            name, v
        )))
    }
}

fn require_nonnegative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "{} must be non-negative and finite, got {}",
            name, v
        )))
    }
}

/// The pi/4 qubit rotation `exp((pi/4)(sigma_plus - sigma_minus))`, built by
/// exponentiating the exact generator.
pub fn quarter_rotation() -> ComplexMatrix {
    let gen = crate::fock::pauli(Pauli::Plus)
        .sub(&crate::fock::pauli(Pauli::Minus))
        .expect("2x2 dims match")
        .scale_re(std::f64::consts::FRAC_PI_4);
    expm(&gen).expect("2x2 exponential cannot fail")
}

/// `exp(-i s G)` for a Hermitian generator `G`: the workhorse for every
/// displacement factor in this module. Hermiticity of `s G` is what keeps
/// the result unitary, so it is checked rather than assumed.
pub fn unitary_from_generator(gen: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
    require_finite("generator scale", s)?;
    let scale = gen.max_abs().max(1.0);
    if !gen.is_hermitian(1e-12 * scale) {
        return Err(Error::Parameter(
            "unitary generator must be Hermitian".into(),
        ));
    }
    expm(&gen.scale(Complex64::new(0.0, -s)))
}

/// Largest gap between the sorted Hermitian spectra of `a` and `b`. Zero for
/// matrices related by a unitary conjugation, whatever the closed form of
/// the conjugated operator looks like.
pub fn spectrum_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let va = crate::fock::hermitian_eigenvalues(a)?;
    let vb = crate::fock::hermitian_eigenvalues(b)?;
    if va.len() != vb.len() {
        return Err(Error::Dimension("spectra have different lengths".into()));
    }
    Ok(va
        .iter()
        .zip(vb.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// The JSON shape of every `ion linearize-check` run, whichever system
/// produced it. `fitted_dipole_coefficient` is only meaningful for the
/// many-ion system, whose claimed dipole term carries the one genuinely
/// uncertain coefficient; the other systems leave it null.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinearizeReport {
    /// Largest `|claimed - computed|` entry below the truncation guard band
    /// (top two Fock levels of every mode excluded).
    pub max_residual: f64,
    /// Largest gap between the sorted spectra of the conjugated and the
    /// original Hamiltonian: a pure unitarity check, independent of any
    /// claimed closed form.
    pub spectrum_distance: f64,
    pub fitted_dipole_coefficient: Option<f64>,
}
