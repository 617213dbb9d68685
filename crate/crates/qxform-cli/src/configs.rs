//! Scenario configuration files.
//!
//! Every subcommand reads one JSON file. The structs here mirror the library
//! parameter types and add the plumbing fields (`time`, `output`) that the
//! command-line flags can override. Unknown fields are rejected so a typo
//! fails loudly instead of silently falling back to a default.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use qxform::ermakov::FrequencySchedule;
use qxform::fock::{coherent_state, ComplexMatrix, DensityMatrix};
use qxform::ion::single::BetaConvention;
use qxform::ion::{IonLaserParams, ManyIonParams, TwoDParams};
use qxform::slow_atom::SlowAtomSystem;

use crate::emit::parse_matrix_entries;
use crate::AppError;

/// Optional `{"t0":…, "t1":…, "samples":…}` block; flags take precedence.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindow {
    #[serde(default)]
    pub t0: Option<f64>,
    #[serde(default)]
    pub t1: Option<f64>,
    #[serde(default)]
    pub samples: Option<usize>,
}

/// Optional `{"path":…, "format":…}` block; `--out` takes precedence and
/// the format, when given, must match what the subcommand emits.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<String>,
}

impl OutputSpec {
    pub fn check_format(&self, native: &str) -> Result<(), AppError> {
        match self.format.as_deref() {
            None => Ok(()),
            Some(f) if f == native => Ok(()),
            Some(f) => Err(AppError::Invalid(format!(
                "output.format is {:?} but this subcommand emits {}",
                f, native
            ))),
        }
    }
}

fn read_value(path: &Path) -> Result<(serde_json::Value, Vec<u8>), AppError> {
    let bytes = fs::read(path)
        .map_err(|e| AppError::Usage(format!("cannot read {}: {}", path.display(), e)))?;
    let value = serde_json::from_slice(&bytes)
        .map_err(|e| AppError::Usage(format!("cannot parse {}: {}", path.display(), e)))?;
    Ok((value, bytes))
}

pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<(T, Vec<u8>), AppError> {
    let (value, bytes) = read_value(path)?;
    let parsed = serde_json::from_value(value)
        .map_err(|e| AppError::Usage(format!("bad config {}: {}", path.display(), e)))?;
    Ok((parsed, bytes))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErmakovScenario {
    pub schedule: FrequencySchedule,
    #[serde(default)]
    pub rho0: Option<f64>,
    #[serde(default)]
    pub rho_dot0: Option<f64>,
    #[serde(default)]
    pub eta0: Option<f64>,
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default)]
    pub time: Option<TimeWindow>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

/// Accepts either a full scenario object or a bare frequency schedule
/// (`{"type": "constant", "nu": 1.0}`), since the schedule is the only
/// required field.
pub fn load_ermakov(path: &Path) -> Result<(ErmakovScenario, Vec<u8>), AppError> {
    let (value, bytes) = read_value(path)?;
    let scenario = if value.get("schedule").is_some() {
        serde_json::from_value(value)
            .map_err(|e| AppError::Usage(format!("bad config {}: {}", path.display(), e)))?
    } else {
        let schedule: FrequencySchedule = serde_json::from_value(value)
            .map_err(|e| AppError::Usage(format!("bad schedule {}: {}", path.display(), e)))?;
        ErmakovScenario {
            schedule,
            rho0: None,
            rho_dot0: None,
            eta0: None,
            grid_points: None,
            time: None,
            output: None,
        }
    };
    Ok((scenario, bytes))
}

/// Frequency at a single time, used only to seed the default initial
/// envelope `nu(t0)^{-1/2}`; tabulated schedules interpolate linearly.
pub fn schedule_frequency_at(schedule: &FrequencySchedule, t: f64) -> f64 {
    match schedule {
        FrequencySchedule::Constant { nu } => *nu,
        FrequencySchedule::Quench { nu1, nu2, t_switch } => {
            if t < *t_switch {
                *nu1
            } else {
                *nu2
            }
        }
        FrequencySchedule::Tabulated { times, values } => {
            if times.is_empty() {
                return f64::NAN;
            }
            if t <= times[0] {
                return values[0];
            }
            if t >= times[times.len() - 1] {
                return values[values.len() - 1];
            }
            let k = times.partition_point(|&u| u <= t) - 1;
            let w = (t - times[k]) / (times[k + 1] - times[k]);
            values[k] * (1.0 - w) + values[k + 1] * w
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitLevel {
    Excited,
    Ground,
}

impl QubitLevel {
    pub fn index(self) -> usize {
        match self {
            QubitLevel::Excited => 0,
            QubitLevel::Ground => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialIonState {
    /// Electronic level and Fock occupation, e.g.
    /// `{"type": "qubit_fock", "level": "ground", "fock": 0}`.
    QubitFock {
        level: QubitLevel,
        #[serde(default)]
        fock: usize,
    },
    /// Raw index in the flattened `[qubit, fock]` basis.
    Basis { index: usize },
}

impl InitialIonState {
    pub fn flat_index(&self, n_fock: usize) -> Result<usize, AppError> {
        match *self {
            InitialIonState::QubitFock { level, fock } => {
                if fock >= n_fock {
                    return Err(AppError::Invalid(format!(
                        "initial Fock occupation {} outside the {}-level truncation",
                        fock, n_fock
                    )));
                }
                Ok(level.index() * n_fock + fock)
            }
            InitialIonState::Basis { index } => {
                if index >= 2 * n_fock {
                    return Err(AppError::Invalid(format!(
                        "initial basis index {} outside dimension {}",
                        index,
                        2 * n_fock
                    )));
                }
                Ok(index)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleIonScenario {
    pub params: IonLaserParams,
    /// Defaults to a constant schedule at the reference trap frequency.
    #[serde(default)]
    pub schedule: Option<FrequencySchedule>,
    #[serde(default)]
    pub rho0: Option<f64>,
    #[serde(default)]
    pub rho_dot0: Option<f64>,
    /// Evaluation time of the instantaneous comparison (default 0).
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManyIonScenario {
    pub params: ManyIonParams,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoDScenario {
    pub params: TwoDParams,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsScenario {
    pub params: IonLaserParams,
    #[serde(default)]
    pub schedule: Option<FrequencySchedule>,
    #[serde(default)]
    pub rho0: Option<f64>,
    #[serde(default)]
    pub rho_dot0: Option<f64>,
    /// Defaults to the electronic ground state with an empty mode.
    #[serde(default)]
    pub initial: Option<InitialIonState>,
    #[serde(default)]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub samples: Option<usize>,
    /// `"stated"` (default) or `"conjugated"` drive-rate convention.
    #[serde(default)]
    pub convention: Option<BetaConvention>,
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MotionSpec {
    /// Periodized Gaussian envelope with optional carrier momentum.
    Gaussian {
        x0: f64,
        width: f64,
        #[serde(default)]
        k0: f64,
    },
    /// Single momentum eigenstate of the periodic grid.
    PlaneWave { m: i64 },
}

fn default_excited() -> QubitLevel {
    QubitLevel::Excited
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlowInitial {
    pub motion: MotionSpec,
    #[serde(default = "default_excited")]
    pub level: QubitLevel,
    #[serde(default)]
    pub fock: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlowScenario {
    pub system: SlowAtomSystem,
    pub initial: SlowInitial,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KerrInitial {
    /// Number state `|n>`.
    Fock { n: usize },
    /// Truncated and renormalized coherent state with amplitude
    /// `alpha + i alpha_im`.
    Coherent {
        alpha: f64,
        #[serde(default)]
        alpha_im: f64,
    },
    /// Explicit density matrix in the row-major `{dim, entries}` layout.
    Matrix { dim: usize, entries: Vec<[f64; 2]> },
}

impl KerrInitial {
    pub fn build(&self, n_fock: usize) -> qxform::Result<DensityMatrix> {
        match self {
            KerrInitial::Fock { n } => DensityMatrix::fock(n_fock, *n),
            KerrInitial::Coherent { alpha, alpha_im } => {
                let state = coherent_state(n_fock, Complex64::new(*alpha, *alpha_im))?;
                DensityMatrix::pure(&state)
            }
            KerrInitial::Matrix { dim, entries } => {
                if *dim != n_fock {
                    return Err(qxform::Error::Dimension(format!(
                        "initial matrix dimension {} does not match n_fock {}",
                        dim, n_fock
                    )));
                }
                let m = ComplexMatrix::new(*dim, parse_matrix_entries(entries))?;
                DensityMatrix::try_new(m)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KerrScenario {
    pub chi: f64,
    pub gamma: f64,
    pub n_fock: usize,
    pub initial: KerrInitial,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub time: Option<TimeWindow>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

pub const DESCRIBE_ERMAKOV: &str = "\
ermakov solve: JSON config (--schedule)
  schedule      frequency schedule, one of
                  {\"type\": \"constant\", \"nu\": f64 > 0}
                  {\"type\": \"quench\", \"nu1\": f64, \"nu2\": f64, \"t_switch\": f64}
                  {\"type\": \"tabulated\", \"times\": [f64...], \"values\": [f64 >= 0...]}
                (a bare schedule object is also accepted as the whole file)
  rho0          initial envelope; default nu(t0)^{-1/2}, or 1.0 when nu(t0) = 0
  rho_dot0      initial envelope slope; default 0
  eta0          baseline coupling scaled into the eta/beta columns; default 0.1
  grid_points   integration grid size; default 2001 (>= samples)
  time          {\"t0\": f64 (default 0), \"t1\": f64, \"samples\": int >= 2 (default 11)}
  output        {\"path\": str, \"format\": \"csv\"}
flags --t0/--t1/--samples/--rho0/--rho-dot0/--eta0/--grid-points override the config.
emits CSV: t,rho,rho_dot,omega_tilde,eta,beta_re,beta_im
";

pub const DESCRIBE_LINEARIZE: &str = "\
ion linearize-check: JSON config (--config), shape depends on --system
  single: {\"params\": {nu0, omega21, omega_laser, delta, omega, eta0, n_fock},
           \"schedule\": optional (default constant at nu0),
           \"rho0\": optional (default fixed point), \"rho_dot0\": optional,
           \"t\": optional evaluation time (default 0), \"grid_points\": optional}
  many:   {\"params\": {nu, delta, omegas: [f64...], etas: [f64...], n_fock}}
  2d:     {\"params\": {nu_x, nu_y, delta, omega, eta_x, eta_y, n_x, n_y}}
  all:    \"output\": {\"path\": str, \"format\": \"json\"}
emits JSON: {max_residual, spectrum_distance, fitted_dipole_coefficient}
--tol-residual/--tol-spectrum enable pass/fail checks (exit 1 on failure).
";

pub const DESCRIBE_DYNAMICS: &str = "\
ion dynamics: JSON config (--config)
  params        {nu0, omega21, omega_laser, delta, omega, eta0, n_fock}
  schedule      optional frequency schedule (default constant at nu0)
  rho0          optional initial envelope (default fixed point)
  rho_dot0      optional initial envelope slope (default 0)
  initial       {\"type\": \"qubit_fock\", \"level\": \"excited\"|\"ground\", \"fock\": int}
                or {\"type\": \"basis\", \"index\": int}; default ground/0
  t_final       final time (flag --t-final overrides)
  steps         propagation steps; default 400 ((samples-1) must divide steps)
  samples       CSV rows including endpoints; default 11
  convention    \"stated\" (default) or \"conjugated\" drive-rate convention
  grid_points   envelope integration grid; default 2001
  output        {\"path\": str, \"format\": \"csv\"}
emits CSV: t,infidelity,leakage
--tol checks the final-row infidelity (exit 1 on failure).
";

pub const DESCRIBE_SLOW: &str = "\
slow-atom propagate: JSON config (--config)
  system        {\"grid\": {\"points\": even int >= 8, \"length\": f64 > 0},
                 \"mode\": {\"shape\": \"constant\", \"g0\": f64}
                        | {\"shape\": \"sinusoidal\", \"g0\": f64, \"k_mode\": int >= 1}
                        | {\"shape\": \"gaussian\", \"g0\": f64, \"x_center\": f64, \"width\": f64 > 0},
                 \"n_fock\": int >= 2, \"omega\": f64, \"omega0\": f64 (must match omega),
                 \"momentum_scheme\": \"spectral\" (default) | \"finite_difference\"}
  initial       {\"motion\": {\"type\": \"gaussian\", \"x0\": f64, \"width\": f64, \"k0\": f64}
                          | {\"type\": \"plane_wave\", \"m\": int},
                 \"level\": \"excited\" (default) | \"ground\", \"fock\": int (default 0)}
  t             evaluation time (flag --t overrides)
  samples       optional row count; switches output to a CSV time series
  output        {\"path\": str, \"format\": \"json\" or \"csv\" with samples}
emits JSON {deviation, norm, populations: {excited, ground}} at time t,
or CSV t,deviation,norm,excited,ground when --samples is given.
--tol checks the deviation at the final time (exit 1 on failure).
";

pub const DESCRIBE_KERR: &str = "\
kerr evolve / kerr compare: JSON config (--config)
  chi           Kerr strength (finite)
  gamma         decay rate >= 0
  n_fock        Fock truncation >= 2
  initial       {\"type\": \"fock\", \"n\": int}
              | {\"type\": \"coherent\", \"alpha\": f64, \"alpha_im\": f64 (default 0)}
              | {\"type\": \"matrix\", \"dim\": int, \"entries\": [[re, im]...]} (row-major)
  t             evolve: evaluation time (flag --t overrides)
  time          compare: {\"t0\" (default 0), \"t1\", \"samples\" (default 11)}
  steps         compare: RK4 steps per sample interval; default 5000
  output        {\"path\": str, \"format\": \"json\" (evolve) or \"csv\" (compare)}
evolve emits the evolved density matrix as {\"dim\": N, \"entries\": [[re, im]...]}.
compare emits CSV: t,max_abs_diff,trace_analytic,trace_rk4,min_eig_analytic
--tol (compare) checks the worst elementwise gap (exit 1 on failure).
";
