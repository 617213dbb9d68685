//! Slow two-level atom crossing a spatially varying cavity mode.
//!
//! On resonance the interaction-picture Hamiltonian on the composite
//! space grid (x) qubit (x) field is
//!
//! ```text
//! H_I = p^2/2 + g(x) (a sigma_plus + a^dag sigma_minus),
//! ```
//!
//! with `p^2` a periodic spectral derivative and `g(x)` diagonal on the
//! grid. The non-unitary pair `T = diag(1, V)`, with `V` the lowering
//! shift satisfying `a = sqrt(n+1) V`, rewrites this as
//!
//! ```text
//! H_I = T^dag (p^2/2 + g(x) sigma_x sqrt(n+1)) T + (p^2/2) rho_gv,
//! ```
//!
//! where `rho_gv` projects onto the ground atom with the field in
//! vacuum. The two summands commute, so the evolution factorizes:
//!
//! ```text
//! U(t) = [T^dag exp(-i H_core t) T + rho_gv] exp(-i (p^2/2) rho_gv t).
//! ```
//!
//! The payoff is that `H_core` is diagonal in the Fock index, which the
//! original coupling is not. Both the factorized product and a direct
//! dense exponential of `H_I` are built here so every identity can be
//! checked against brute force. In the truncated field space the algebra
//! survives almost untouched: `T^dag T = 1 - rho_gv` stays exact, while
//! `T T^dag` and the power identity `(T^dag A T)^k = T^dag A^k T` pick
//! up defects confined to the topmost Fock level, which is why the
//! comparisons below mask that level and the propagation entry point
//! polices leakage into it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    annihilation, expm, fock_projector, ground_projector, pauli, sqrt_shifted_number,
    ComplexMatrix, Factor, HilbertLayout, Pauli, StateVector, MAX_TOTAL_DIM,
};

/// Periodic position grid: `points` samples over `[0, length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: usize,
    pub length: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points < 8 {
            return Err(Error::Parameter(format!(
                "grid needs at least 8 points, got {}",
                self.points
            )));
        }
        if self.points % 2 != 0 {
            return Err(Error::Parameter(format!(
                "grid point count must be even for the spectral derivative, got {}",
                self.points
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::Parameter(format!(
                "grid length must be positive and finite, got {}",
                self.length
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points).map(|j| j as f64 * h).collect()
    }
}

/// Spatial profile of the cavity coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeShape {
    Constant { g0: f64 },
    /// `g0 sin(2 pi k_mode x / L)`: periodic for integer `k_mode`.
    Sinusoidal { g0: f64, k_mode: usize },
    Gaussian { g0: f64, x_center: f64, width: f64 },
}

impl ModeShape {
    pub fn g0(&self) -> f64 {
        match self {
            ModeShape::Constant { g0 }
            | ModeShape::Sinusoidal { g0, .. }
            | ModeShape::Gaussian { g0, .. } => *g0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.g0().is_finite() {
            return Err(Error::Parameter("coupling amplitude must be finite".into()));
        }
        match self {
            ModeShape::Sinusoidal { k_mode, .. } if *k_mode == 0 => Err(Error::Parameter(
                "sinusoidal mode index must be at least 1".into(),
            )),
            ModeShape::Gaussian { x_center, width, .. } => {
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::Parameter(format!(
                        "gaussian mode width must be positive, got {}",
                        width
                    )));
                }
                if !x_center.is_finite() {
                    return Err(Error::Parameter("gaussian mode center must be finite".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Coupling sampled on the grid points.
    pub fn values(&self, grid: &GridSpec) -> Vec<f64> {
        grid.positions()
            .iter()
            .map(|&x| match self {
                ModeShape::Constant { g0 } => *g0,
                ModeShape::Sinusoidal { g0, k_mode } => {
                    g0 * (2.0 * std::f64::consts::PI * (*k_mode as f64) * x / grid.length).sin()
                }
                ModeShape::Gaussian { g0, x_center, width } => {
                    g0 * (-((x - x_center) / width).powi(2) / 2.0).exp()
                }
            })
            .collect()
    }
}

/// How to discretize `p^2` on the periodic grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumScheme {
    /// Fourier multiplier `k_m^2`: exact on every resolvable plane wave.
    #[default]
    Spectral,
    /// Second-order central differences, kept for cross-validation.
    FiniteDifference,
}

/// A two-level atom of unit mass moving through a single cavity mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlowAtomSystem {
    pub grid: GridSpec,
    pub mode: ModeShape,
    pub n_fock: usize,
    /// Field frequency; only its agreement with `omega0` is used, the
    /// free-energy terms having been removed by the interaction picture.
    pub omega: f64,
    /// Atomic transition frequency.
    pub omega0: f64,
    #[serde(default)]
    pub momentum_scheme: MomentumScheme,
}

impl SlowAtomSystem {
    pub fn resonant(grid: GridSpec, mode: ModeShape, n_fock: usize) -> Self {
        Self {
            grid,
            mode,
            n_fock,
            omega: 1.0,
            omega0: 1.0,
            momentum_scheme: MomentumScheme::Spectral,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.mode.validate()?;
        if self.n_fock < 2 {
            return Err(Error::Parameter(format!(
                "need at least 2 field levels, got {}",
                self.n_fock
            )));
        }
        if !(self.omega.is_finite() && self.omega0.is_finite()) {
            return Err(Error::Parameter("frequencies must be finite".into()));
        }
        let scale = self.omega.abs().max(self.omega0.abs()).max(1.0);
        if (self.omega - self.omega0).abs() > 1e-12 * scale {
            return Err(Error::Unsupported(format!(
                "the factorization is derived on resonance; omega = {} vs omega0 = {}",
                self.omega, self.omega0
            )));
        }
        let dim = self
            .grid
            .points
            .checked_mul(2)
            .and_then(|d| d.checked_mul(self.n_fock))
            .unwrap_or(MAX_TOTAL_DIM + 1);
        if dim > MAX_TOTAL_DIM {
            return Err(Error::Dimension(format!(
                "grid x qubit x field dimension {} exceeds cap {}",
                dim, MAX_TOTAL_DIM
            )));
        }
        Ok(())
    }
}

pub fn slow_layout(sys: &SlowAtomSystem) -> Result<HilbertLayout> {
    sys.validate()?;
    HilbertLayout::new(vec![
        Factor::Grid {
            points: sys.grid.points,
            length: sys.grid.length,
        },
        Factor::Qubit,
        Factor::FockMode { levels: sys.n_fock },
    ])
}

/// The lowering shift `V = sum_n |n><n+1|`: the unique operator with
/// `a = sqrt(n+1) V`, `V^dag V = 1 - |0><0|` and, in the truncated space,
/// `V V^dag = 1 - |N-1><N-1|`.
pub fn lowering_shift(levels: usize) -> Result<ComplexMatrix> {
    if levels < 2 {
        return Err(Error::Dimension(format!(
            "lowering shift needs at least 2 levels, got {}",
            levels
        )));
    }
    Ok(ComplexMatrix::from_fn(levels, |i, j| {
        if j == i + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// `p^2` on the periodic grid, as a real symmetric circulant.
pub fn momentum_squared(grid: &GridSpec, scheme: MomentumScheme) -> Result<ComplexMatrix> {
    grid.validate()?;
    let m = grid.points;
    match scheme {
        MomentumScheme::Spectral => {
            // One pass over the signed wavenumbers m in [-M/2, M/2) gives
            // the stencil s(d) = (1/M) sum_m k_m^2 cos(2 pi m d / M).
            let half = m as i64 / 2;
            let mut stencil = vec![0.0_f64; m];
            for (d, slot) in stencil.iter_mut().enumerate() {
                let mut acc = 0.0;
                for mm in -half..half {
                    let k = 2.0 * std::f64::consts::PI * mm as f64 / grid.length;
                    let angle = 2.0 * std::f64::consts::PI * (mm as f64) * (d as f64) / m as f64;
                    acc += k * k * angle.cos();
                }
                *slot = acc / m as f64;
            }
            Ok(ComplexMatrix::from_fn(m, |i, j| {
                Complex64::new(stencil[(m + i - j) % m], 0.0)
            }))
        }
        MomentumScheme::FiniteDifference => {
            let h2 = grid.spacing() * grid.spacing();
            Ok(ComplexMatrix::from_fn(m, |i, j| {
                let d = (m + i - j) % m;
                if d == 0 {
                    Complex64::new(2.0 / h2, 0.0)
                } else if d == 1 || d == m - 1 {
                    Complex64::new(-1.0 / h2, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }))
        }
    }
}

/// Diagonal grid operator multiplying by the sampled coupling profile.
fn coupling_diagonal(sys: &SlowAtomSystem) -> ComplexMatrix {
    let vals = sys.mode.values(&sys.grid);
    ComplexMatrix::from_fn(sys.grid.points, |i, j| {
        if i == j {
            Complex64::new(vals[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `T = |e><e| (x) 1 + |g><g| (x) V`, identity on the grid factor.
pub fn t_op(sys: &SlowAtomSystem) -> Result<ComplexMatrix> {
    let layout = slow_layout(sys)?;
    let excited = layout.embed(1, &crate::fock::excited_projector())?;
    let ground = layout.embed(1, &ground_projector())?;
    let shift = layout.embed(2, &lowering_shift(sys.n_fock)?)?;
    excited.add(&ground.mul(&shift)?)
}

/// Projector onto ground atom and vacuum field, identity on the grid.
pub fn gv_projector(sys: &SlowAtomSystem) -> Result<ComplexMatrix> {
    let layout = slow_layout(sys)?;
    layout
        .embed(1, &ground_projector())?
        .mul(&layout.embed(2, &fock_projector(sys.n_fock, 0)?)?)
}

/// The interaction-picture Hamiltonian `p^2/2 + g(x)(a s+ + a^dag s-)`.
pub fn h_interaction(sys: &SlowAtomSystem) -> Result<ComplexMatrix> {
    let layout = slow_layout(sys)?;
    let kinetic = layout
        .embed(0, &momentum_squared(&sys.grid, sys.momentum_scheme)?)?
        .scale_re(0.5);
    let g = layout.embed(0, &coupling_diagonal(sys))?;
    let raising_half = layout
        .embed(1, &pauli(Pauli::Plus))?
        .mul(&layout.embed(2, &annihilation(sys.n_fock))?)?;
    let coupling = raising_half.add(&raising_half.dagger())?;
    kinetic.add(&g.mul(&coupling)?)
}

/// The conjugated core `p^2/2 + g(x) sigma_x sqrt(n+1)`: every field
/// factor is diagonal, so the summands commute where the original
/// coupling does not.
pub fn h_core(sys: &SlowAtomSystem) -> Result<ComplexMatrix> {
    let layout = slow_layout(sys)?;
    let kinetic = layout
        .embed(0, &momentum_squared(&sys.grid, sys.momentum_scheme)?)?
        .scale_re(0.5);
    let g = layout.embed(0, &coupling_diagonal(sys))?;
    let sx = layout.embed(1, &pauli(Pauli::X))?;
    let ladder = layout.embed(2, &sqrt_shifted_number(sys.n_fock))?;
    kinetic.add(&g.mul(&sx)?.mul(&ladder)?)
}

/// `exp(-i (p^2/2) rho_gv t)`, assembled blockwise: the grid exponential
/// on the projected block, identity elsewhere.
pub fn free_block_propagator(sys: &SlowAtomSystem, t: f64) -> Result<ComplexMatrix> {
    let layout = slow_layout(sys)?;
    let p2 = momentum_squared(&sys.grid, sys.momentum_scheme)?;
    let w = expm(&p2.scale(Complex64::new(0.0, -0.5 * t)))?;
    let proj = gv_projector(sys)?;
    let full = ComplexMatrix::identity(layout.dim());
    // (1 - P) + (W (x) internal) P: P commutes with the grid factor.
    let w_full = layout.embed(0, &w)?;
    full.sub(&proj)?.add(&w_full.mul(&proj)?)
}

/// The factorized evolution operator
/// `[T^dag exp(-i H_core t) T + rho_gv] exp(-i (p^2/2) rho_gv t)`.
pub fn factorized_propagator(sys: &SlowAtomSystem, t: f64) -> Result<ComplexMatrix> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Parameter(format!(
            "evolution time must be nonnegative and finite, got {}",
            t
        )));
    }
    let t_mat = t_op(sys)?;
    let core = expm(&h_core(sys)?.scale(Complex64::new(0.0, -t)))?;
    let bracket = t_mat
        .dagger()
        .mul(&core)?
        .mul(&t_mat)?
        .add(&gv_projector(sys)?)?;
    bracket.mul(&free_block_propagator(sys, t)?)
}

/// Dense-exponential oracle for the same evolution.
pub fn direct_propagator(sys: &SlowAtomSystem, t: f64) -> Result<ComplexMatrix> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Parameter(format!(
            "evolution time must be nonnegative and finite, got {}",
            t
        )));
    }
    expm(&h_interaction(sys)?.scale(Complex64::new(0.0, -t)))
}

fn check_initial_state(sys: &SlowAtomSystem, psi0: &StateVector) -> Result<()> {
    let layout = slow_layout(sys)?;
    if psi0.dim() != layout.dim() {
        return Err(Error::Dimension(format!(
            "state dim {} does not match grid x qubit x field dim {}",
            psi0.dim(),
            layout.dim()
        )));
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Parameter(format!(
            "initial state norm {} is not 1",
            psi0.norm()
        )));
    }
    let keep = layout.fock_guard_mask(2, 1)?;
    let top: Vec<bool> = keep.iter().map(|k| !k).collect();
    let leak = psi0.masked_population(&top)?;
    if leak > 1e-10 {
        return Err(Error::Truncation(format!(
            "initial top-Fock-level population {:.3e} exceeds 1e-10; raise n_fock",
            leak
        )));
    }
    Ok(())
}

/// Evolve `psi0` with the factorized propagator.
pub fn propagate(sys: &SlowAtomSystem, psi0: &StateVector, t: f64) -> Result<StateVector> {
    check_initial_state(sys, psi0)?;
    let amps = factorized_propagator(sys, t)?.apply(psi0.amps())?;
    StateVector::from_amplitudes(amps)
}

/// `|| (U_factorized - U_direct) psi0 ||`: the factorization against the
/// brute-force exponential, on one state.
pub fn compare_oracle(sys: &SlowAtomSystem, psi0: &StateVector, t: f64) -> Result<f64> {
    check_initial_state(sys, psi0)?;
    let fact = factorized_propagator(sys, t)?.apply(psi0.amps())?;
    let direct = direct_propagator(sys, t)?.apply(psi0.amps())?;
    Ok(fact
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// `(excited, ground)` atomic populations of a composite state.
pub fn populations(sys: &SlowAtomSystem, psi: &StateVector) -> Result<(f64, f64)> {
    let layout = slow_layout(sys)?;
    if psi.dim() != layout.dim() {
        return Err(Error::Dimension(format!(
            "state dim {} does not match layout dim {}",
            psi.dim(),
            layout.dim()
        )));
    }
    let mut excited = 0.0;
    for (flat, amp) in psi.amps().iter().enumerate() {
        if layout.components(flat)?[1] == 0 {
            excited += amp.norm_sqr();
        }
    }
    let total = psi.norm().powi(2);
    Ok((excited, total - excited))
}

/// Normalized Gaussian wavepacket `exp(-(x-x0)^2/(4 w^2) + i k0 x)` on
/// the grid. The tails must fit inside the box; widths within a few
/// percent of the box length will alias.
pub fn gaussian_packet(grid: &GridSpec, x0: f64, width: f64, k0: f64) -> Result<StateVector> {
    grid.validate()?;
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::Parameter(format!(
            "packet width must be positive, got {}",
            width
        )));
    }
    if !(x0.is_finite() && k0.is_finite()) {
        return Err(Error::Parameter("packet center and momentum must be finite".into()));
    }
    let amps: Vec<Complex64> = grid
        .positions()
        .iter()
        .map(|&x| {
            let envelope = (-((x - x0) / width).powi(2) / 4.0).exp();
            Complex64::from_polar(envelope, k0 * x)
        })
        .collect();
    StateVector::normalized(amps)
}

/// Normalized plane wave `exp(2 pi i m j / M) / sqrt(M)`.
pub fn plane_wave(grid: &GridSpec, m: i64) -> Result<StateVector> {
    grid.validate()?;
    let points = grid.points as f64;
    let amps: Vec<Complex64> = (0..grid.points)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * (m as f64) * (j as f64) / points;
            Complex64::from_polar(1.0 / points.sqrt(), angle)
        })
        .collect();
    StateVector::from_amplitudes(amps)
}
