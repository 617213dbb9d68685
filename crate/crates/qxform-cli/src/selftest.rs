//! Deterministic invariant battery behind `qxform selftest`.
//!
//! Every check prints one line with its measured residual and tolerance.
//! Nothing here depends on wall time, the thread count, or platform RNG:
//! two runs of the binary must produce byte-identical stdout. Tolerances
//! are pinned against measured values, so a regression in any module
//! flips its line to FAIL and the exit code to 1.

use num_complex::Complex64;

use qxform::detmat::{hermitian_sample, DetRng};
use qxform::ermakov::{solve_ermakov, FrequencySchedule};
use qxform::fock::{
    annihilation, commutator, expm, pauli, sqrt_shifted_number, Factor, HilbertLayout, Pauli,
    StateVector, coherent_state, masked_offset_residual, DensityMatrix,
};
use qxform::ion::single::{self, BetaConvention, IonLaserParams};
use qxform::ion::{many, two_d, ManyIonParams, TwoDParams};
use qxform::kerr::{analytic_solution, compare, superop_algebra_check, KerrParams};
use qxform::slow_atom::{self, GridSpec, ModeShape, SlowAtomSystem};

use crate::emit::{fnv1a, linspace, CheckLine};
use crate::{AppError, RunSummary};

/// Final-time infidelity of the stated drive-rate convention through the
/// frequency quench below; a model-level constant, measured once and
/// pinned. The conjugated convention goes to zero instead.
const QUENCH_STATED_INFIDELITY: f64 = 3.3837e-4;

/// FNV-1a digest of the first 16 generator words (little-endian bytes),
/// seed 42; pins the exact pseudo-random stream the test matrices use.
const LCG_DIGEST: u64 = 0x98c9961f851d21a3;
const LCG_FIRST: u64 = 10481999410520546993;

fn push(lines: &mut Vec<CheckLine>, name: &'static str, residual: f64, tol: f64) {
    lines.push(CheckLine { name, residual, tol });
}

pub fn run() -> Result<RunSummary, AppError> {
    let mut lines = Vec::new();

    ermakov_checks(&mut lines)?;
    single_ion_checks(&mut lines)?;
    many_ion_checks(&mut lines)?;
    two_d_checks(&mut lines)?;
    slow_atom_checks(&mut lines)?;
    kerr_checks(&mut lines)?;
    stream_checks(&mut lines);
    operator_checks(&mut lines)?;

    let total = lines.len();
    let passed = lines.iter().filter(|c| c.passed()).count();
    for line in &lines {
        println!("{}", line.render());
    }
    println!("selftest: {}/{} checks passed", passed, total);

    let mut summary = RunSummary::new("selftest");
    summary.checks = lines;
    Ok(summary)
}

fn ermakov_checks(lines: &mut Vec<CheckLine>) -> Result<(), AppError> {
    // Residual of the envelope equation itself on a constant schedule,
    // started away from the fixed point so the solution actually moves.
    let constant = FrequencySchedule::Constant { nu: 1.0 };
    let grid = linspace(0.0, 5.0, 2001);
    let sol = solve_ermakov(&constant, 1.3, 0.0, &grid)?;
    push(lines, "ermakov_constant_residual", sol.max_interior_residual(), 1e-8);

    // First integral rho_dot^2 + nu^2 rho^2 + 1/rho^2 along the same run.
    let invariant = |t: f64| -> Result<f64, AppError> {
        let r = sol.rho_at(t)?;
        let rd = sol.rho_dot_at(t)?;
        Ok(rd * rd + r * r + 1.0 / (r * r))
    };
    let base = invariant(0.0)?;
    let mut drift = 0.0_f64;
    for &t in &linspace(0.0, 5.0, 101) {
        drift = drift.max((invariant(t)? - base).abs());
    }
    push(lines, "ermakov_first_integral_drift", drift, 1e-8);

    // Fixed point: starting at nu^{-1/2} the envelope must stay there.
    let sol_fp = solve_ermakov(
        &FrequencySchedule::Constant { nu: 2.0 },
        2.0_f64.powf(-0.5),
        0.0,
        &grid,
    )?;
    let mut gap = 0.0_f64;
    for &t in &linspace(0.0, 5.0, 101) {
        gap = gap.max((sol_fp.rho_at(t)? - 2.0_f64.powf(-0.5)).abs());
    }
    push(lines, "ermakov_fixed_point_drift", gap, 1e-8);

    // Free evolution (nu = 0) has the closed form sqrt(1 + t^2).
    let free = FrequencySchedule::Tabulated {
        times: vec![0.0, 5.0],
        values: vec![0.0, 0.0],
    };
    let sol_free = solve_ermakov(&free, 1.0, 0.0, &grid)?;
    let mut gap = 0.0_f64;
    for &t in &linspace(0.0, 5.0, 101) {
        gap = gap.max((sol_free.rho_at(t)? - (1.0 + t * t).sqrt()).abs());
    }
    push(lines, "ermakov_free_closed_form", gap, 1e-8);

    // A discontinuous quench still satisfies the equation off the jump.
    let quench = FrequencySchedule::Quench {
        nu1: 1.0,
        nu2: 1.3,
        t_switch: 1.0,
    };
    let sol_q = solve_ermakov(&quench, 1.0, 0.0, &linspace(0.0, 2.5, 2001))?;
    push(lines, "ermakov_quench_residual", sol_q.max_interior_residual(), 1e-8);
    Ok(())
}

fn single_ion_checks(lines: &mut Vec<CheckLine>) -> Result<(), AppError> {
    // At the fixed point the claimed and conjugated Hamiltonians agree up
    // to a constant diagonal; fit the constant and look at what is left
    // below the truncation guard band.
    let params = IonLaserParams::resonant(1.0, 1.0, 0.04, 16);
    let grid = linspace(0.0, 1.0, 201);
    let sol = solve_ermakov(
        &FrequencySchedule::Constant { nu: 1.0 },
        1.0,
        0.0,
        &grid,
    )?;
    let lin = single::linearize_single(&params, &sol, 0.0)?;
    let layout = HilbertLayout::new(vec![
        Factor::Qubit,
        Factor::FockMode { levels: 16 },
    ])?;
    let keep = layout.fock_guard_mask(1, 2)?;
    let (_, resid) = masked_offset_residual(&lin.claimed, &lin.computed, &keep)?;
    push(lines, "ion_single_offset_fit_residual", resid, 1e-8);

    // With the coupling off, the two routes differ by the detuning on top
    // of the constant: the fitted residual is exactly delta.
    let params0 = IonLaserParams {
        nu0: 1.0,
        omega21: 1.3,
        omega_laser: 1.0,
        delta: 0.3,
        omega: 1.0,
        eta0: 0.0,
        k_wave: None,
        n_fock: 10,
    };
    let lin0 = single::linearize_single(&params0, &sol, 0.0)?;
    let layout0 = HilbertLayout::new(vec![
        Factor::Qubit,
        Factor::FockMode { levels: 10 },
    ])?;
    let keep0 = layout0.fock_guard_mask(1, 2)?;
    let (_, resid0) = masked_offset_residual(&lin0.claimed, &lin0.computed, &keep0)?;
    push(
        lines,
        "ion_single_zero_coupling_gap",
        (resid0 - 0.3).abs(),
        1e-9,
    );

    // A frequency quench separates the two drive-rate conventions: the
    // conjugated one tracks the exact frame, the stated one accumulates a
    // fixed model error.
    let params_q = IonLaserParams::resonant(1.0, 1.0, 0.1, 16);
    let quench = FrequencySchedule::Quench {
        nu1: 1.0,
        nu2: 1.3,
        t_switch: 1.0,
    };
    let sol_q = solve_ermakov(&quench, 1.0, 0.0, &linspace(0.0, 2.5, 501))?;
    let psi0 = StateVector::basis(32, 16)?;
    let conj = single::dynamics_trace(
        &params_q,
        &sol_q,
        &psi0,
        2.0,
        200,
        BetaConvention::Conjugated,
        5,
    )?;
    push(
        lines,
        "ion_single_quench_conjugated_infidelity",
        conj.last().expect("endpoints included").infidelity,
        1e-9,
    );
    let stated = single::dynamics_trace(
        &params_q,
        &sol_q,
        &psi0,
        2.0,
        200,
        BetaConvention::Stated,
        5,
    )?;
    push(
        lines,
        "ion_single_quench_stated_gap",
        (stated.last().expect("endpoints included").infidelity - QUENCH_STATED_INFIDELITY).abs(),
        1e-6,
    );
    Ok(())
}

fn many_ion_checks(lines: &mut Vec<CheckLine>) -> Result<(), AppError> {
    let params = ManyIonParams {
        nu: 1.3,
        delta: 0.2,
        omegas: vec![1.0, 0.8],
        etas: vec![0.1, 0.07],
        n_fock: 12,
    };
    let lin = many::linearize_many(&params)?;
    push(
        lines,
        "ion_many_fitted_dipole_gap",
        (lin.fitted_dipole_coefficient - 1.3).abs(),
        2e-3,
    );
    let report = many::linearize_report(&params)?;
    push(lines, "ion_many_spectrum_distance", report.spectrum_distance, 1e-9);
    Ok(())
}

fn two_d_checks(lines: &mut Vec<CheckLine>) -> Result<(), AppError> {
    let params = TwoDParams {
        nu_x: 1.0,
        nu_y: 1.3,
        delta: 0.0,
        omega: 1.0,
        eta_x: 0.1,
        eta_y: 0.05,
        n_x: 8,
        n_y: 8,
    };
    let report = two_d::linearize_report(&params)?;
    push(lines, "ion_two_d_spectrum_distance", report.spectrum_distance, 1e-9);
    Ok(())
}

fn slow_atom_checks(lines: &mut Vec<CheckLine>) -> Result<(), AppError> {
    let sys = SlowAtomSystem::resonant(
        GridSpec {
            points: 32,
            length: std::f64::consts::TAU,
        },
        ModeShape::Sinusoidal { g0: 0.5, k_mode: 1 },
        4,
    );
    let layout = slow_atom::slow_layout(&sys)?;
    let t = slow_atom::t_op(&sys)?;
    let gv = slow_atom::gv_projector(&sys)?;

    // The shift operator is an isometry whose defect is the ground/top
    // projector, exactly, entry by entry.
    let isometry_gap = t
        .dagger()
        .mul(&t)?
        .max_abs_diff(&qxform::ComplexMatrix::identity(layout.dim()).sub(&gv)?)?;
    push(lines, "slow_atom_isometry_defect", isometry_gap, 1e-15);

    // The two summands of the factorized generator commute.
    let kinetic = layout
        .embed(0, &slow_atom::momentum_squared(&sys.grid, sys.momentum_scheme)?)?
        .scale_re(0.5);
    let core = t.dagger().mul(&slow_atom::h_core(&sys)?)?.mul(&t)?;
    let comm = commutator(&core, &kinetic.mul(&gv)?)?;
    push(lines, "slow_atom_split_commutator", comm.max_abs(), 1e-10);

    // Factorized propagation against direct exponentiation on a moving
    // Gaussian packet in the excited state with an empty mode.
    let motion = slow_atom::gaussian_packet(&sys.grid, std::f64::consts::PI, 0.7, 1.0)?;
    let internal = StateVector::basis(8, 0)?;
    let psi0 = motion.tensor(&internal);
    let deviation = slow_atom::compare_oracle(&sys, &psi0, 1.0)?;
    push(lines, "slow_atom_factorization_deviation", deviation, 1e-6);
    Ok(())
}

fn kerr_checks(lines: &mut Vec<CheckLine>) -> Result<(), AppError> {
    let params = KerrParams {
        chi: 0.5,
        gamma: 0.1,
        n_fock: 8,
    };
    let rho0 = DensityMatrix::pure(&coherent_state(8, Complex64::new(1.0, 0.0))?)?;

    // Closed form against a brute-force RK4 integration of the master
    // equation.
    let times = linspace(0.0, 2.0, 5);
    let report = compare(&params, &rho0, &times, 1000)?;
    push(lines, "kerr_analytic_vs_rk4", report.max_abs_diff, 1e-6);

    // Two short evolutions compose into one long one.
    let rho_a = analytic_solution(&params, &rho0, 0.3)?;
    let rho_b = analytic_solution(&params, &rho_a, 0.7)?;
    let rho_c = analytic_solution(&params, &rho0, 1.0)?;
    push(
        lines,
        "kerr_semigroup_composition",
        rho_b.matrix().max_abs_diff(rho_c.matrix())?,
        1e-9,
    );

    // Superoperator algebra on deterministic pseudo-random Hermitian
    // samples: the number-shift commutes with the jump, and the measured
    // coefficient in [Y,J] = c (i chi R J) fits c = 1.
    let mut rng = DetRng::new(42);
    let samples: Vec<_> = (0..3).map(|_| hermitian_sample(8, &mut rng)).collect();
    let algebra = superop_algebra_check(&params, &samples)?;
    push(
        lines,
        "kerr_shift_jump_commutator",
        algebra.shift_jump_residual,
        1e-12,
    );
    push(
        lines,
        "kerr_jump_factor_fit_gap",
        (algebra.fitted_factor - Complex64::new(1.0, 0.0)).norm(),
        1e-9,
    );
    Ok(())
}

fn stream_checks(lines: &mut Vec<CheckLine>) {
    let mut rng = DetRng::new(42);
    let first = rng.next_u64();
    let mut bytes = first.to_le_bytes().to_vec();
    for _ in 1..16 {
        bytes.extend_from_slice(&rng.next_u64().to_le_bytes());
    }
    let mismatches =
        u64::from(first != LCG_FIRST) + u64::from(fnv1a(&bytes) != LCG_DIGEST);
    push(lines, "lcg_stream_digest", mismatches as f64, 0.5);
}

fn operator_checks(lines: &mut Vec<CheckLine>) -> Result<(), AppError> {
    // The annihilation operator factors into the shifted square-root
    // ladder times the pure shift, bit for bit.
    let a = annihilation(8);
    let v = slow_atom::lowering_shift(8)?;
    let product = sqrt_shifted_number(8).mul(&v)?;
    push(lines, "fock_ladder_factorization", a.max_abs_diff(&product)?, 1e-15);

    // Dense exponential of a Pauli generator against the closed-form
    // rotation cos(theta) I - i sin(theta) sigma_y.
    let theta = 0.3_f64;
    let rotation = expm(&pauli(Pauli::Y).scale(Complex64::new(0.0, -theta)))?;
    let expected = qxform::ComplexMatrix::identity(2)
        .scale_re(theta.cos())
        .add(&pauli(Pauli::Y).scale(Complex64::new(0.0, -theta.sin())))?;
    push(
        lines,
        "fock_expm_su2_rotation",
        rotation.max_abs_diff(&expected)?,
        1e-13,
    );
    Ok(())
}
