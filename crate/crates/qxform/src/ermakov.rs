//! Envelope equation for a harmonic mode with time-dependent frequency.
//!
//! The scale factor `rho(t)` obeys
//!
//! ```text
//! rho'' + nu(t)^2 rho = 1 / rho^3
//! ```
//!
//! and feeds the downstream ion-laser transformations: the effective
//! frequency is `1/rho^2`, the motional coupling scales as
//! `eta(t) = eta0 * rho(t) * sqrt(nu0)`, and the drive coefficient is
//! `beta(t) = eta*omega/2 - i*eta_dot/2`.
//!
//! The solver is a fixed-step RK4 march over a mesh that contains every
//! requested sample time and every schedule breakpoint, so no step ever
//! straddles a frequency discontinuity. For a constant frequency the
//! equation has the first integral `rho_dot^2 + nu^2 rho^2 + 1/rho^2`,
//! which the tests lean on as an independent oracle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible scale factor; crossing it aborts the march.
const RHO_FLOOR: f64 = 1e-6;

/// Trap frequency profile `nu(t)`.
///
/// `Tabulated` interpolates linearly between knots and admits zeros
/// (free evolution); the other variants require strictly positive
/// frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrequencySchedule {
    Constant {
        nu: f64,
    },
    Quench {
        nu1: f64,
        nu2: f64,
        t_switch: f64,
    },
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl FrequencySchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            FrequencySchedule::Constant { nu } => {
                if !(nu.is_finite() && *nu > 0.0) {
                    return Err(Error::Parameter(format!(
                        "constant frequency must be positive and finite, got {}",
                        nu
                    )));
                }
            }
            FrequencySchedule::Quench { nu1, nu2, t_switch } => {
                for (name, v) in [("nu1", nu1), ("nu2", nu2)] {
                    if !(v.is_finite() && *v > 0.0) {
                        return Err(Error::Parameter(format!(
                            "quench {} must be positive and finite, got {}",
                            name, v
                        )));
                    }
                }
                if !t_switch.is_finite() {
                    return Err(Error::Parameter("quench switch time must be finite".into()));
                }
            }
            FrequencySchedule::Tabulated { times, values } => {
                if times.len() != values.len() {
                    return Err(Error::Dimension(format!(
                        "table has {} times but {} values",
                        times.len(),
                        values.len()
                    )));
                }
                if times.len() < 2 {
                    return Err(Error::Parameter(
                        "table needs at least two knots".into(),
                    ));
                }
                for w in times.windows(2) {
                    if !(w[0].is_finite() && w[1].is_finite() && w[1] > w[0]) {
                        return Err(Error::Parameter(
                            "table times must be finite and strictly increasing".into(),
                        ));
                    }
                }
                for v in values {
                    if !(v.is_finite() && *v >= 0.0) {
                        return Err(Error::Parameter(format!(
                            "table frequencies must be finite and non-negative, got {}",
                            v
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Times where `nu(t)` is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            FrequencySchedule::Constant { .. } => Vec::new(),
            FrequencySchedule::Quench { t_switch, .. } => vec![*t_switch],
            FrequencySchedule::Tabulated { times, .. } => {
                times[1..times.len() - 1].to_vec()
            }
        }
    }

    /// `nu(t)^2`, with `hint` (a time strictly inside the smooth segment
    /// being integrated) selecting the branch at discontinuities.
    fn nu_squared(&self, t: f64, hint: f64) -> f64 {
        let nu = self.nu_at(t, hint);
        nu * nu
    }

    fn nu_at(&self, t: f64, hint: f64) -> f64 {
        match self {
            FrequencySchedule::Constant { nu } => *nu,
            FrequencySchedule::Quench { nu1, nu2, t_switch } => {
                if hint < *t_switch {
                    *nu1
                } else {
                    *nu2
                }
            }
            FrequencySchedule::Tabulated { times, values } => {
                let idx = times
                    .partition_point(|&knot| knot <= hint)
                    .saturating_sub(1)
                    .min(times.len() - 2);
                let (t0, t1) = (times[idx], times[idx + 1]);
                let (v0, v1) = (values[idx], values[idx + 1]);
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    fn covers(&self, t0: f64, t1: f64) -> Result<()> {
        if let FrequencySchedule::Tabulated { times, .. } = self {
            let span = (t1 - t0).abs().max(1.0);
            let tol = 1e-12 * span;
            let (lo, hi) = (times[0], times[times.len() - 1]);
            if t0 < lo - tol || t1 > hi + tol {
                return Err(Error::Parameter(format!(
                    "solve window [{}, {}] leaves the tabulated range [{}, {}]",
                    t0, t1, lo, hi
                )));
            }
        }
        Ok(())
    }
}

/// Sampled solution of the envelope equation, with enough bookkeeping to
/// answer off-node queries by cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct ErmakovSolution {
    times: Vec<f64>,
    rho: Vec<f64>,
    rho_dot: Vec<f64>,
    nu0: f64,
    schedule: FrequencySchedule,
}

/// Integrates the envelope equation from `(rho0, rho_dot0)` at `times[0]`,
/// recording `rho` and `rho_dot` at every requested sample.
///
/// The internal RK4 step never exceeds one eighth of the smallest sample
/// gap and never crosses a schedule breakpoint. The march aborts with a
/// `Singularity` error if `rho` falls to 1e-6 and `NonFinite` if the state
/// stops being representable.
pub fn solve_ermakov(
    schedule: &FrequencySchedule,
    rho0: f64,
    rho_dot0: f64,
    times: &[f64],
) -> Result<ErmakovSolution> {
    schedule.validate()?;
    if !(rho0.is_finite() && rho0 > RHO_FLOOR) {
        return Err(Error::Parameter(format!(
            "initial scale factor must be finite and exceed {}, got {}",
            RHO_FLOOR, rho0
        )));
    }
    if !rho_dot0.is_finite() {
        return Err(Error::Parameter("initial scale rate must be finite".into()));
    }
    if times.len() < 2 {
        return Err(Error::Parameter("need at least two sample times".into()));
    }
    for w in times.windows(2) {
        if !(w[0].is_finite() && w[1].is_finite() && w[1] > w[0]) {
            return Err(Error::Parameter(
                "sample times must be finite and strictly increasing".into(),
            ));
        }
    }
    let (t_start, t_end) = (times[0], times[times.len() - 1]);
    schedule.covers(t_start, t_end)?;

    let span = t_end - t_start;
    let tol = 1e-12 * span.max(1.0);

    // Mesh: every sample plus every interior breakpoint, deduplicated.
    let mut nodes: Vec<(f64, Option<usize>)> =
        times.iter().enumerate().map(|(i, &t)| (t, Some(i))).collect();
    for b in schedule.breakpoints() {
        if b <= t_start + tol || b >= t_end - tol {
            continue;
        }
        if nodes.iter().any(|&(t, _)| (t - b).abs() <= tol) {
            continue;
        }
        nodes.push((b, None));
    }
    nodes.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("mesh times are finite"));

    let min_gap = times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let h_max = min_gap / 8.0;

    let mut rho_out = vec![0.0; times.len()];
    let mut rho_dot_out = vec![0.0; times.len()];
    rho_out[0] = rho0;
    rho_dot_out[0] = rho_dot0;

    let first_hint = 0.5 * (nodes[0].0 + nodes[1].0);
    let nu0 = schedule.nu_squared(t_start, first_hint).sqrt();

    let mut r = rho0;
    let mut s = rho_dot0;
    for pair in nodes.windows(2) {
        let (a, _) = pair[0];
        let (b, marker) = pair[1];
        let gap = b - a;
        let hint = a + 0.5 * gap;
        let nsub = ((gap / h_max).ceil() as usize).max(1);
        let h = gap / nsub as f64;
        for k in 0..nsub {
            let tk = a + h * k as f64;
            (r, s) = rk4_step(schedule, r, s, tk, h, hint);
            if r.is_finite() && s.is_finite() {
                if r <= RHO_FLOOR {
                    return Err(Error::Singularity(format!(
                        "scale factor fell to {} near t = {}",
                        r,
                        tk + h
                    )));
                }
            } else {
                return Err(Error::NonFinite(format!(
                    "integration diverged near t = {}",
                    tk + h
                )));
            }
        }
        if let Some(idx) = marker {
            rho_out[idx] = r;
            rho_dot_out[idx] = s;
        }
    }

    Ok(ErmakovSolution {
        times: times.to_vec(),
        rho: rho_out,
        rho_dot: rho_dot_out,
        nu0,
        schedule: schedule.clone(),
    })
}

fn rk4_step(
    schedule: &FrequencySchedule,
    r: f64,
    s: f64,
    t: f64,
    h: f64,
    hint: f64,
) -> (f64, f64) {
    let accel = |t: f64, r: f64| -> f64 {
        let r3 = r * r * r;
        1.0 / r3 - schedule.nu_squared(t, hint) * r
    };
    let k1r = s;
    let k1s = accel(t, r);
    let k2r = s + 0.5 * h * k1s;
    let k2s = accel(t + 0.5 * h, r + 0.5 * h * k1r);
    let k3r = s + 0.5 * h * k2s;
    let k3s = accel(t + 0.5 * h, r + 0.5 * h * k2r);
    let k4r = s + h * k3s;
    let k4s = accel(t + h, r + h * k3r);
    (
        r + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r),
        s + h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s),
    )
}

impl ErmakovSolution {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn rho_dot(&self) -> &[f64] {
        &self.rho_dot
    }

    /// Reference frequency `nu(t0)`; zero for schedules that start free.
    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    /// Index of the sample interval containing `t` (clamped endpoints).
    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let (t0, t1) = (self.times[0], self.times[self.times.len() - 1]);
        let tol = 1e-12 * (t1 - t0).max(1.0);
        if t < t0 - tol || t > t1 + tol {
            return Err(Error::Parameter(format!(
                "query time {} outside solved window [{}, {}]",
                t, t0, t1
            )));
        }
        let tc = t.clamp(t0, t1);
        let idx = self
            .times
            .partition_point(|&node| node <= tc)
            .saturating_sub(1)
            .min(self.times.len() - 2);
        Ok((idx, tc))
    }

    /// Acceleration `1/rho^3 - nu^2 rho` at sample node `node`, with the
    /// frequency branch chosen for queries inside segment `seg`.
    fn accel_at_node(&self, node: usize, seg: usize) -> f64 {
        let hint = 0.5 * (self.times[seg] + self.times[seg + 1]);
        let r = self.rho[node];
        let nu2 = self.schedule.nu_squared(self.times[node], hint);
        1.0 / (r * r * r) - nu2 * r
    }

    pub fn rho_at(&self, t: f64) -> Result<f64> {
        let (i, tc) = self.locate(t)?;
        Ok(hermite(
            self.times[i],
            self.times[i + 1],
            self.rho[i],
            self.rho_dot[i],
            self.rho[i + 1],
            self.rho_dot[i + 1],
            tc,
        ))
    }

    pub fn rho_dot_at(&self, t: f64) -> Result<f64> {
        let (i, tc) = self.locate(t)?;
        Ok(hermite(
            self.times[i],
            self.times[i + 1],
            self.rho_dot[i],
            self.accel_at_node(i, i),
            self.rho_dot[i + 1],
            self.accel_at_node(i + 1, i),
            tc,
        ))
    }

    /// Effective mode frequency `1/rho(t)^2`.
    pub fn derived_frequency(&self, t: f64) -> Result<f64> {
        let r = self.rho_at(t)?;
        Ok(1.0 / (r * r))
    }

    /// Time-dependent motional coupling `eta0 * rho(t) * sqrt(nu0)`.
    pub fn lamb_dicke(&self, eta0: f64, t: f64) -> Result<f64> {
        self.check_eta(eta0)?;
        Ok(eta0 * self.rho_at(t)? * self.nu0.sqrt())
    }

    /// Analytic rate `eta0 * rho_dot(t) * sqrt(nu0)`.
    pub fn lamb_dicke_rate(&self, eta0: f64, t: f64) -> Result<f64> {
        self.check_eta(eta0)?;
        Ok(eta0 * self.rho_dot_at(t)? * self.nu0.sqrt())
    }

    /// Drive coefficient `eta*omega/2 - i*eta_dot/2` with `omega = 1/rho^2`.
    pub fn beta(&self, eta0: f64, t: f64) -> Result<Complex64> {
        let eta = self.lamb_dicke(eta0, t)?;
        let eta_dot = self.lamb_dicke_rate(eta0, t)?;
        let omega = self.derived_frequency(t)?;
        Ok(Complex64::new(0.5 * eta * omega, -0.5 * eta_dot))
    }

    fn check_eta(&self, eta0: f64) -> Result<()> {
        if !(eta0.is_finite() && eta0 >= 0.0) {
            return Err(Error::Parameter(format!(
                "coupling scale must be finite and non-negative, got {}",
                eta0
            )));
        }
        if self.nu0 <= 0.0 {
            return Err(Error::Parameter(
                "reference frequency is zero; coupling scaling undefined".into(),
            ));
        }
        Ok(())
    }

    /// Accumulated phase `∫ 1/rho^2 ds` from the start of the window to `t`,
    /// by derivative-corrected trapezoid over the sample mesh.
    pub fn phase_integral(&self, t: f64) -> Result<f64> {
        let (seg, tc) = self.locate(t)?;
        let f = |i: usize| {
            let r = self.rho[i];
            1.0 / (r * r)
        };
        let fp = |i: usize| {
            let r = self.rho[i];
            -2.0 * self.rho_dot[i] / (r * r * r)
        };
        let mut acc = 0.0;
        for i in 0..seg {
            let h = self.times[i + 1] - self.times[i];
            acc += 0.5 * h * (f(i) + f(i + 1)) + h * h / 12.0 * (fp(i) - fp(i + 1));
        }
        let h = tc - self.times[seg];
        if h > 0.0 {
            let r_end = self.rho_at(tc)?;
            let rd_end = self.rho_dot_at(tc)?;
            let f_end = 1.0 / (r_end * r_end);
            let fp_end = -2.0 * rd_end / (r_end * r_end * r_end);
            acc += 0.5 * h * (f(seg) + f_end) + h * h / 12.0 * (fp(seg) - fp_end);
        }
        Ok(acc)
    }

    /// Largest defect of the samples against the envelope equation itself,
    /// measured at interior sample points with a fifth-order two-field
    /// stencil (values and derivatives over a three-point window). Windows
    /// touching a schedule breakpoint are skipped, as are solutions with no
    /// eligible interior points (the result is then 0).
    pub fn max_interior_residual(&self) -> f64 {
        let n = self.times.len();
        if n < 3 {
            return 0.0;
        }
        let span = self.times[n - 1] - self.times[0];
        let tol = 1e-12 * span.max(1.0);
        let breaks = self.schedule.breakpoints();
        let mut worst = 0.0_f64;
        for i in 1..n - 1 {
            let (lo, hi) = (self.times[i - 1], self.times[i + 1]);
            if breaks.iter().any(|&b| b > lo - tol && b < hi + tol) {
                continue;
            }
            let d0 = self.times[i - 1] - self.times[i];
            let d2 = self.times[i + 1] - self.times[i];
            let Some(w) = second_derivative_weights(d0, d2) else {
                continue;
            };
            let rr = [self.rho[i - 1], self.rho[i], self.rho[i + 1]];
            let ss = [self.rho_dot[i - 1], self.rho_dot[i], self.rho_dot[i + 1]];
            let mut est = 0.0;
            for j in 0..3 {
                est += w[j] * rr[j] + w[3 + j] * ss[j];
            }
            let r = self.rho[i];
            let nu2 = self.schedule.nu_squared(self.times[i], self.times[i]);
            let defect = (est + nu2 * r - 1.0 / (r * r * r)).abs();
            worst = worst.max(defect);
        }
        worst
    }
}

fn hermite(ta: f64, tb: f64, fa: f64, da: f64, fb: f64, db: f64, t: f64) -> f64 {
    let h = tb - ta;
    let u = (t - ta) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    h00 * fa + h10 * h * da + h01 * fb + h11 * h * db
}

/// Weights `(c0, c1, c2, e0, e1, e2)` reproducing `p''(0)` exactly for all
/// polynomials up to degree five from values `p(d_j)` and slopes `p'(d_j)`
/// at offsets `d = (d0, 0, d2)`. Returns `None` if the window is degenerate.
fn second_derivative_weights(d0: f64, d2: f64) -> Option<[f64; 6]> {
    let d = [d0, 0.0, d2];
    let mut a = [[0.0_f64; 6]; 6];
    let mut b = [0.0_f64; 6];
    for k in 0..6 {
        for j in 0..3 {
            a[k][j] = d[j].powi(k as i32);
            a[k][3 + j] = if k == 0 {
                0.0
            } else {
                k as f64 * d[j].powi(k as i32 - 1)
            };
        }
    }
    b[2] = 2.0;
    solve_real_6(&mut a, &mut b)?;
    Some(b)
}

fn solve_real_6(a: &mut [[f64; 6]; 6], b: &mut [f64; 6]) -> Option<()> {
    for col in 0..6 {
        let mut piv = col;
        for row in col + 1..6 {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            a.swap(piv, col);
            b.swap(piv, col);
        }
        for row in col + 1..6 {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..6 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..6).rev() {
        let mut acc = b[col];
        for k in col + 1..6 {
            acc -= a[col][k] * b[k];
        }
        b[col] = acc / a[col][col];
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Closed form for a constant-frequency segment: with u = rho^2,
    /// u'' = 2E - 4 nu^2 u, so u oscillates at 2*nu around E/(2 nu^2).
    fn constant_segment(
        nu: f64,
        t_a: f64,
        rho_a: f64,
        rho_dot_a: f64,
        t: f64,
    ) -> (f64, f64) {
        let e = rho_dot_a * rho_dot_a + nu * nu * rho_a * rho_a + 1.0 / (rho_a * rho_a);
        let center = e / (2.0 * nu * nu);
        let ua = rho_a * rho_a;
        let uda = 2.0 * rho_a * rho_dot_a;
        let phase = 2.0 * nu * (t - t_a);
        let u = center + (ua - center) * phase.cos() + uda / (2.0 * nu) * phase.sin();
        let ud = -2.0 * nu * (ua - center) * phase.sin() + uda * phase.cos();
        let rho = u.sqrt();
        (rho, ud / (2.0 * rho))
    }

    #[test]
    fn constant_frequency_fixed_point_stays_put() {
        let nu = 2.0_f64;
        let schedule = FrequencySchedule::Constant { nu };
        let rho0 = 1.0 / nu.sqrt();
        let times = linspace(0.0, 5.0, 101);
        let sol = solve_ermakov(&schedule, rho0, 0.0, &times).unwrap();
        for (&r, &s) in sol.rho().iter().zip(sol.rho_dot()) {
            assert!((r - rho0).abs() < 1e-13);
            assert!(s.abs() < 1e-13);
        }
        assert!((sol.nu0() - nu).abs() < 1e-15);
        assert!((sol.derived_frequency(3.3).unwrap() - nu).abs() < 1e-12);
    }

    #[test]
    fn free_evolution_matches_sqrt_one_plus_t_squared() {
        let schedule = FrequencySchedule::Tabulated {
            times: vec![0.0, 5.0],
            values: vec![0.0, 0.0],
        };
        let times = linspace(0.0, 5.0, 251);
        let sol = solve_ermakov(&schedule, 1.0, 0.0, &times).unwrap();
        for (i, &t) in times.iter().enumerate() {
            let exact = (1.0 + t * t).sqrt();
            let exact_dot = t / exact;
            assert!(
                (sol.rho()[i] - exact).abs() < 1e-8,
                "rho off at t = {}: {} vs {}",
                t,
                sol.rho()[i],
                exact
            );
            assert!((sol.rho_dot()[i] - exact_dot).abs() < 1e-8);
        }
        assert_eq!(sol.nu0(), 0.0);
        assert!(matches!(
            sol.lamb_dicke(0.1, 1.0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn displaced_constant_oscillation_matches_closed_form() {
        let nu = 1.3_f64;
        let schedule = FrequencySchedule::Constant { nu };
        let times = linspace(0.0, 5.0, 251);
        let sol = solve_ermakov(&schedule, 1.3, 0.0, &times).unwrap();
        for (i, &t) in times.iter().enumerate() {
            let (r, s) = constant_segment(nu, 0.0, 1.3, 0.0, t);
            assert!((sol.rho()[i] - r).abs() < 1e-9);
            assert!((sol.rho_dot()[i] - s).abs() < 1e-9);
        }
    }

    #[test]
    fn first_integral_is_conserved_for_constant_frequency() {
        let nu = 1.0_f64;
        let schedule = FrequencySchedule::Constant { nu };
        let times = linspace(0.0, 5.0, 251);
        let sol = solve_ermakov(&schedule, 1.3, 0.0, &times).unwrap();
        let energy = |r: f64, s: f64| s * s + nu * nu * r * r + 1.0 / (r * r);
        let e0 = energy(sol.rho()[0], sol.rho_dot()[0]);
        for (&r, &s) in sol.rho().iter().zip(sol.rho_dot()) {
            assert!((energy(r, s) - e0).abs() < 1e-8);
        }
    }

    #[test]
    fn quench_matches_piecewise_closed_form() {
        let schedule = FrequencySchedule::Quench {
            nu1: 1.0,
            nu2: 2.0,
            t_switch: 1.0,
        };
        let times = linspace(0.0, 5.0, 501);
        let sol = solve_ermakov(&schedule, 1.0, 0.0, &times).unwrap();
        let (rho_s, rho_dot_s) = constant_segment(1.0, 0.0, 1.0, 0.0, 1.0);
        for (i, &t) in times.iter().enumerate() {
            let (r, s) = if t <= 1.0 {
                constant_segment(1.0, 0.0, 1.0, 0.0, t)
            } else {
                constant_segment(2.0, 1.0, rho_s, rho_dot_s, t)
            };
            assert!(
                (sol.rho()[i] - r).abs() < 1e-9,
                "rho off at t = {}: {} vs {}",
                t,
                sol.rho()[i],
                r
            );
            assert!((sol.rho_dot()[i] - s).abs() < 1e-9);
        }
    }

    #[test]
    fn halving_the_sample_grid_barely_moves_shared_samples() {
        let schedule = FrequencySchedule::Quench {
            nu1: 1.0,
            nu2: 2.0,
            t_switch: 1.0,
        };
        let coarse = linspace(0.0, 5.0, 251);
        let fine = linspace(0.0, 5.0, 501);
        let a = solve_ermakov(&schedule, 1.0, 0.0, &coarse).unwrap();
        let b = solve_ermakov(&schedule, 1.0, 0.0, &fine).unwrap();
        for (i, &t) in coarse.iter().enumerate() {
            let j = fine.iter().position(|&u| (u - t).abs() < 1e-9).unwrap();
            assert!((a.rho()[i] - b.rho()[j]).abs() < 1e-9);
            assert!((a.rho_dot()[i] - b.rho_dot()[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn interior_residual_shrinks_at_fourth_order() {
        // The stencil truncation error scales as h^4 with a constant set by
        // the sixth derivative of rho; the deep-dip quench below has a
        // measured constant near 1.6e5, so thresholds follow the grid.
        let quench = FrequencySchedule::Quench {
            nu1: 1.0,
            nu2: 2.0,
            t_switch: 1.0,
        };
        let coarse = solve_ermakov(&quench, 1.0, 0.0, &linspace(0.0, 5.0, 251)).unwrap();
        let fine = solve_ermakov(&quench, 1.0, 0.0, &linspace(0.0, 5.0, 501)).unwrap();
        let (rc, rf) = (coarse.max_interior_residual(), fine.max_interior_residual());
        assert!(rc < 1e-4, "coarse residual {}", rc);
        assert!(rf < rc / 8.0, "expected ~16x drop, got {} -> {}", rc, rf);
    }

    #[test]
    fn interior_residual_is_small_on_dense_grids() {
        let times = linspace(0.0, 5.0, 2001);
        let constant = FrequencySchedule::Constant { nu: 1.0 };
        let sol = solve_ermakov(&constant, 1.3, 0.0, &times).unwrap();
        assert!(sol.max_interior_residual() < 1e-8);

        let quench = FrequencySchedule::Quench {
            nu1: 1.0,
            nu2: 1.3,
            t_switch: 1.0,
        };
        let sol = solve_ermakov(&quench, 1.0, 0.0, &times).unwrap();
        assert!(sol.max_interior_residual() < 1e-8);

        let ramp = FrequencySchedule::Tabulated {
            times: linspace(0.0, 5.0, 11),
            values: linspace(1.0, 2.0, 11),
        };
        let sol = solve_ermakov(&ramp, 1.0, 0.0, &times).unwrap();
        assert!(sol.max_interior_residual() < 1e-8);
    }

    #[test]
    fn derived_quantities_reduce_correctly_at_a_fixed_point() {
        let nu = 1.0_f64;
        let schedule = FrequencySchedule::Constant { nu };
        let times = linspace(0.0, 5.0, 101);
        let sol = solve_ermakov(&schedule, 1.0, 0.0, &times).unwrap();
        let eta0 = 0.1;
        assert!((sol.lamb_dicke(eta0, 2.0).unwrap() - eta0).abs() < 1e-12);
        assert!(sol.lamb_dicke_rate(eta0, 2.0).unwrap().abs() < 1e-12);
        let beta = sol.beta(eta0, 2.0).unwrap();
        assert!((beta.re - 0.5 * eta0 * nu).abs() < 1e-12);
        assert!(beta.im.abs() < 1e-12);
        assert!((sol.phase_integral(5.0).unwrap() - 5.0 * nu).abs() < 1e-10);
        assert!((sol.beta(0.0, 1.0).unwrap()).norm() == 0.0);
        assert!(sol.rho_at(5.0 + 1e-3).is_err());
    }

    #[test]
    fn coupling_rate_matches_a_finite_difference_of_the_coupling() {
        let schedule = FrequencySchedule::Quench {
            nu1: 1.0,
            nu2: 2.0,
            t_switch: 1.0,
        };
        let times = linspace(0.0, 5.0, 501);
        let sol = solve_ermakov(&schedule, 1.0, 0.0, &times).unwrap();
        let eta0 = 0.1;
        let t = 2.5;
        let eps = 0.01;
        let d = |e: f64| {
            let up = sol.lamb_dicke(eta0, t + e).unwrap();
            let dn = sol.lamb_dicke(eta0, t - e).unwrap();
            (up - dn) / (2.0 * e)
        };
        let richardson = (4.0 * d(eps) - d(2.0 * eps)) / 3.0;
        let analytic = sol.lamb_dicke_rate(eta0, t).unwrap();
        assert!(
            (richardson - analytic).abs() < 1e-6,
            "rate {} vs finite difference {}",
            analytic,
            richardson
        );
        let beta = sol.beta(eta0, t).unwrap();
        assert!((beta.im + 0.5 * analytic).abs() < 1e-12);
    }

    #[test]
    fn phase_integral_matches_closed_form_free_evolution() {
        // For rho = sqrt(1 + t^2) the phase is arctan(t).
        let schedule = FrequencySchedule::Tabulated {
            times: vec![0.0, 5.0],
            values: vec![0.0, 0.0],
        };
        let times = linspace(0.0, 5.0, 251);
        let sol = solve_ermakov(&schedule, 1.0, 0.0, &times).unwrap();
        for &t in &[0.5, 1.0, 2.5, 5.0] {
            assert!(
                (sol.phase_integral(t).unwrap() - t.atan()).abs() < 1e-9,
                "phase off at t = {}",
                t
            );
        }
    }

    #[test]
    fn near_miss_of_the_origin_reports_a_singularity() {
        let schedule = FrequencySchedule::Tabulated {
            times: vec![0.0, 1.0],
            values: vec![0.0, 0.0],
        };
        // rho(t)^2 = (1 - c t)^2 + t^2 with c = 1e7 dips to ~1e-7 at t ~ 1e-7.
        let times = linspace(0.0, 3e-7, 61);
        let err = solve_ermakov(&schedule, 1.0, -1e7, &times).unwrap_err();
        assert!(matches!(err, Error::Singularity(_)), "got {:?}", err);
    }

    #[test]
    fn unstable_coarse_march_fails_loudly() {
        let schedule = FrequencySchedule::Constant { nu: 30.0 };
        let times = linspace(0.0, 500.0, 11);
        let err = solve_ermakov(&schedule, 1.0, 0.0, &times).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)), "got {:?}", err);
    }

    #[test]
    fn tabulated_constant_agrees_bitwise_with_constant_schedule() {
        let times = linspace(0.0, 5.0, 101);
        let tab = FrequencySchedule::Tabulated {
            times: vec![0.0, 5.0],
            values: vec![1.7, 1.7],
        };
        let cons = FrequencySchedule::Constant { nu: 1.7 };
        let a = solve_ermakov(&tab, 1.0, 0.2, &times).unwrap();
        let b = solve_ermakov(&cons, 1.0, 0.2, &times).unwrap();
        for i in 0..times.len() {
            assert_eq!(a.rho()[i].to_bits(), b.rho()[i].to_bits());
            assert_eq!(a.rho_dot()[i].to_bits(), b.rho_dot()[i].to_bits());
        }
    }

    #[test]
    fn schedule_validation_rejects_bad_input() {
        assert!(FrequencySchedule::Constant { nu: 0.0 }.validate().is_err());
        assert!(FrequencySchedule::Constant { nu: -1.0 }.validate().is_err());
        assert!(FrequencySchedule::Quench {
            nu1: 1.0,
            nu2: 0.0,
            t_switch: 1.0
        }
        .validate()
        .is_err());
        assert!(FrequencySchedule::Tabulated {
            times: vec![0.0, 0.0],
            values: vec![1.0, 1.0]
        }
        .validate()
        .is_err());
        assert!(FrequencySchedule::Tabulated {
            times: vec![0.0, 1.0],
            values: vec![1.0, -0.5]
        }
        .validate()
        .is_err());
        assert!(FrequencySchedule::Tabulated {
            times: vec![0.0, 1.0],
            values: vec![1.0]
        }
        .validate()
        .is_err());
    }

    #[test]
    fn schedule_json_round_trips() {
        let quench = FrequencySchedule::Quench {
            nu1: 1.0,
            nu2: 2.0,
            t_switch: 1.0,
        };
        let text = serde_json::to_string(&quench).unwrap();
        assert!(text.contains("\"type\":\"quench\""));
        let back: FrequencySchedule = serde_json::from_str(&text).unwrap();
        assert_eq!(back, quench);
        let parsed: FrequencySchedule =
            serde_json::from_str(r#"{"type":"constant","nu":1.5}"#).unwrap();
        assert_eq!(parsed, FrequencySchedule::Constant { nu: 1.5 });
        assert!(serde_json::from_str::<FrequencySchedule>(
            r#"{"type":"constant","nu":1.5,"bogus":1}"#
        )
        .is_err());
    }

    #[test]
    fn solve_window_must_stay_inside_the_table() {
        let schedule = FrequencySchedule::Tabulated {
            times: vec![0.0, 2.0],
            values: vec![1.0, 1.0],
        };
        let err = solve_ermakov(&schedule, 1.0, 0.0, &[0.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }
}
