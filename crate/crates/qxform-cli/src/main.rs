//! Command-line scenario runner for the qxform library.
//!
//! Each subcommand reads a JSON config, dispatches into the library, and
//! emits a machine-readable payload (CSV or JSON) on stdout or to a file.
//! A one-line run report with a scenario hash and the wall time goes to
//! stderr so the data payload stays byte-identical between runs.
//!
//! Exit codes: 0 success, 1 an enabled check failed, 2 usage or parse
//! error, 3 parameter validation error, 4 numerical failure (convergence,
//! truncation, singularity, non-finite values).

mod configs;
mod emit;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qxform::ermakov::{solve_ermakov, FrequencySchedule};
use qxform::fock::StateVector;
use qxform::ion::single::BetaConvention;
use qxform::kerr::{analytic_solution, compare, KerrParams};
use qxform::{ion, slow_atom};

use configs::*;
use emit::{fnv1a, linspace, CheckLine, Csv, Sink};

#[derive(Debug)]
pub enum AppError {
    /// Unreadable or unparseable input (exit 2).
    Usage(String),
    /// Semantically invalid scenario caught by the CLI itself (exit 3).
    Invalid(String),
    /// Error surfaced by the library (exit 3 or 4 by kind).
    Lib(qxform::Error),
}

impl From<qxform::Error> for AppError {
    fn from(e: qxform::Error) -> Self {
        AppError::Lib(e)
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Invalid(_) => 3,
            AppError::Lib(e) if e.is_validation() => 3,
            AppError::Lib(_) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            AppError::Usage(m) | AppError::Invalid(m) => m.clone(),
            AppError::Lib(e) => e.to_string(),
        }
    }
}

/// What a runner hands back for the stderr report.
struct RunSummary {
    name: &'static str,
    hash: u64,
    checks: Vec<CheckLine>,
    outputs: Vec<String>,
}

impl RunSummary {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            hash: fnv1a(name.as_bytes()),
            checks: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn absorb(&mut self, bytes: &[u8]) {
        let mut buf = self.hash.to_le_bytes().to_vec();
        buf.extend_from_slice(bytes);
        self.hash = fnv1a(&buf);
    }

    fn failed_checks(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }
}

/// Numerical laboratory for exactly solvable quantum-optics models.
#[derive(Parser)]
#[command(name = "qxform", version, propagate_version = true)]
struct Cli {
    /// Worker threads for the data-parallel kernels (0 keeps the default).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time-dependent envelope equation: integrate and tabulate the
    /// derived frame quantities.
    Ermakov {
        #[command(subcommand)]
        action: ErmakovCmd,
    },
    /// Trapped-ion linearization checks and two-frame dynamics.
    Ion {
        #[command(subcommand)]
        action: IonCmd,
    },
    /// Moving two-level atom: factorized versus direct propagator.
    SlowAtom {
        #[command(subcommand)]
        action: SlowAtomCmd,
    },
    /// Lossy Kerr cavity: closed-form evolution and an RK4 cross-check.
    Kerr {
        #[command(subcommand)]
        action: KerrCmd,
    },
    /// Deterministic invariant battery; stdout is byte-identical across
    /// runs and the exit code reflects the worst check.
    Selftest,
}

#[derive(Subcommand)]
enum ErmakovCmd {
    /// Integrate the envelope equation and emit a CSV table.
    Solve(ErmakovArgs),
}

#[derive(Args)]
struct ErmakovArgs {
    /// JSON file: a scenario object or a bare frequency schedule.
    #[arg(long, value_name = "json")]
    schedule: Option<PathBuf>,
    /// Alias for --schedule, for symmetry with the other subcommands.
    #[arg(long, value_name = "json", conflicts_with = "schedule")]
    config: Option<PathBuf>,
    /// Start time (default 0).
    #[arg(long)]
    t0: Option<f64>,
    /// End time.
    #[arg(long)]
    t1: Option<f64>,
    /// Number of CSV rows, endpoints included (default 11).
    #[arg(long)]
    samples: Option<usize>,
    /// Initial envelope (default: fixed point of the initial frequency).
    #[arg(long)]
    rho0: Option<f64>,
    /// Initial envelope slope (default 0).
    #[arg(long)]
    rho_dot0: Option<f64>,
    /// Baseline coupling for the eta and beta columns (default 0.1).
    #[arg(long)]
    eta0: Option<f64>,
    /// Integration grid size (default 2001).
    #[arg(long)]
    grid_points: Option<usize>,
    /// Output file (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the config schema and exit.
    #[arg(long)]
    describe: bool,
}

#[derive(Subcommand)]
enum IonCmd {
    /// Compare the claimed linearized Hamiltonian against the direct
    /// frame conjugation and emit a JSON report.
    LinearizeCheck(LinearizeArgs),
    /// Propagate the same state in both frames and emit the infidelity
    /// trace as CSV.
    Dynamics(DynamicsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SystemKind {
    Single,
    Many,
    #[value(name = "2d")]
    TwoD,
}

#[derive(Args)]
struct LinearizeArgs {
    /// Which trap model to check.
    #[arg(long, value_enum)]
    system: Option<SystemKind>,
    #[arg(long, value_name = "json")]
    config: Option<PathBuf>,
    /// Enable a pass/fail check on max_residual.
    #[arg(long)]
    tol_residual: Option<f64>,
    /// Enable a pass/fail check on spectrum_distance.
    #[arg(long)]
    tol_spectrum: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    describe: bool,
}

#[derive(Args)]
struct DynamicsArgs {
    #[arg(long, value_name = "json")]
    config: Option<PathBuf>,
    /// Final time (overrides config t_final).
    #[arg(long)]
    t_final: Option<f64>,
    /// Propagation steps (overrides config).
    #[arg(long)]
    steps: Option<usize>,
    /// CSV rows including endpoints (overrides config).
    #[arg(long)]
    samples: Option<usize>,
    /// Enable a pass/fail check on the final infidelity.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    describe: bool,
}

#[derive(Subcommand)]
enum SlowAtomCmd {
    /// Propagate with the factorized evolution operator and report its
    /// deviation from direct exponentiation.
    Propagate(SlowArgs),
}

#[derive(Args)]
struct SlowArgs {
    #[arg(long, value_name = "json")]
    config: Option<PathBuf>,
    /// Evaluation time.
    #[arg(long)]
    t: Option<f64>,
    /// Emit a CSV time series with this many rows instead of JSON.
    #[arg(long)]
    samples: Option<usize>,
    /// Enable a pass/fail check on the deviation at the final time.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    describe: bool,
}

#[derive(Subcommand)]
enum KerrCmd {
    /// Evaluate the closed-form solution at one time and emit the
    /// density matrix as JSON.
    Evolve(KerrEvolveArgs),
    /// Sweep the closed form against an RK4 integration of the master
    /// equation and emit the gap table as CSV.
    Compare(KerrCompareArgs),
}

#[derive(Args)]
struct KerrEvolveArgs {
    #[arg(long, value_name = "json")]
    config: Option<PathBuf>,
    /// Evaluation time.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    describe: bool,
}

#[derive(Args)]
struct KerrCompareArgs {
    #[arg(long, value_name = "json")]
    config: Option<PathBuf>,
    /// Start time (default 0).
    #[arg(long)]
    t0: Option<f64>,
    /// End time.
    #[arg(long)]
    t1: Option<f64>,
    /// Sample count including endpoints (default 11).
    #[arg(long)]
    samples: Option<usize>,
    /// RK4 steps per sample interval (default 5000).
    #[arg(long)]
    steps: Option<usize>,
    /// Enable a pass/fail check on the worst elementwise gap.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    describe: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        // Ignore the error: the global pool can only be set once and a
        // second initialization means the default was already in use.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    let started = Instant::now();
    let result = dispatch(cli.command);
    match result {
        Ok(summary) => {
            for check in &summary.checks {
                eprintln!("{}", check.render());
            }
            let failed = summary.failed_checks();
            let outputs = if summary.outputs.is_empty() {
                "-".to_string()
            } else {
                summary.outputs.join(",")
            };
            eprintln!(
                "scenario=0x{:016x} cmd={} checks={}/{} wall_ms={:.1} out={}",
                summary.hash,
                summary.name,
                summary.checks.len() - failed,
                summary.checks.len(),
                started.elapsed().as_secs_f64() * 1e3,
                outputs
            );
            if failed > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<RunSummary, AppError> {
    match command {
        Command::Ermakov { action: ErmakovCmd::Solve(args) } => run_ermakov(args),
        Command::Ion { action: IonCmd::LinearizeCheck(args) } => run_linearize(args),
        Command::Ion { action: IonCmd::Dynamics(args) } => run_dynamics(args),
        Command::SlowAtom { action: SlowAtomCmd::Propagate(args) } => run_slow(args),
        Command::Kerr { action: KerrCmd::Evolve(args) } => run_kerr_evolve(args),
        Command::Kerr { action: KerrCmd::Compare(args) } => run_kerr_compare(args),
        Command::Selftest => selftest::run(),
    }
}

fn require_config(path: Option<PathBuf>, flag: &str) -> Result<PathBuf, AppError> {
    path.ok_or_else(|| AppError::Usage(format!("missing {} <json>", flag)))
}

fn described(name: &'static str, text: &str) -> RunSummary {
    print!("{}", text);
    RunSummary::new(name)
}

/// The time window shared by the sweep-style subcommands.
fn resolve_window(
    flag_t0: Option<f64>,
    flag_t1: Option<f64>,
    flag_samples: Option<usize>,
    window: Option<TimeWindow>,
) -> Result<(f64, f64, usize), AppError> {
    let w = window.unwrap_or_default();
    let t0 = flag_t0.or(w.t0).unwrap_or(0.0);
    let t1 = flag_t1
        .or(w.t1)
        .ok_or_else(|| AppError::Invalid("final time missing (--t1 or config time.t1)".into()))?;
    let samples = flag_samples.or(w.samples).unwrap_or(11);
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(AppError::Invalid(format!(
            "need finite t1 > t0, got t0 = {}, t1 = {}",
            t0, t1
        )));
    }
    if samples < 2 {
        return Err(AppError::Invalid(format!(
            "need at least 2 samples, got {}",
            samples
        )));
    }
    Ok((t0, t1, samples))
}

fn run_ermakov(args: ErmakovArgs) -> Result<RunSummary, AppError> {
    if args.describe {
        return Ok(described("ermakov-solve", DESCRIBE_ERMAKOV));
    }
    let path = require_config(args.schedule.or(args.config), "--schedule")?;
    let (scn, raw) = load_ermakov(&path)?;
    let mut summary = RunSummary::new("ermakov-solve");
    summary.absorb(&raw);

    let (t0, t1, samples) = resolve_window(args.t0, args.t1, args.samples, scn.time)?;
    let rho_dot0 = args.rho_dot0.or(scn.rho_dot0).unwrap_or(0.0);
    let rho0 = match args.rho0.or(scn.rho0) {
        Some(r) => r,
        None => {
            let nu = schedule_frequency_at(&scn.schedule, t0);
            if nu > 0.0 {
                nu.powf(-0.5)
            } else {
                1.0
            }
        }
    };
    let eta0 = args.eta0.or(scn.eta0).unwrap_or(0.1);
    let grid_points = args
        .grid_points
        .or(scn.grid_points)
        .unwrap_or(2001)
        .max(samples);
    summary.absorb(format!("{t0},{t1},{samples},{rho0},{rho_dot0},{eta0},{grid_points}").as_bytes());

    let grid = linspace(t0, t1, grid_points);
    let sol = solve_ermakov(&scn.schedule, rho0, rho_dot0, &grid)?;

    let mut csv = Csv::new("t,rho,rho_dot,omega_tilde,eta,beta_re,beta_im");
    for &t in &linspace(t0, t1, samples) {
        let beta = sol.beta(eta0, t)?;
        csv.row(&[
            t,
            sol.rho_at(t)?,
            sol.rho_dot_at(t)?,
            sol.derived_frequency(t)?,
            sol.lamb_dicke(eta0, t)?,
            beta.re,
            beta.im,
        ]);
    }

    if let Some(output) = &scn.output {
        output.check_format("csv")?;
    }
    let sink = Sink::resolve(args.out, scn.output.and_then(|o| o.path));
    summary.outputs.push(sink.write(&csv.finish())?);
    Ok(summary)
}

/// Envelope solution for the single-ion scenarios: constant schedule at the
/// reference frequency unless the config supplies one.
fn single_envelope(
    params: &qxform::ion::IonLaserParams,
    schedule: Option<FrequencySchedule>,
    rho0: Option<f64>,
    rho_dot0: Option<f64>,
    t_max: f64,
    grid_points: usize,
) -> Result<(FrequencySchedule, qxform::ermakov::ErmakovSolution), AppError> {
    let schedule = schedule.unwrap_or(FrequencySchedule::Constant { nu: params.nu0 });
    let rho0 = match rho0 {
        Some(r) => r,
        None => {
            let nu = schedule_frequency_at(&schedule, 0.0);
            if nu > 0.0 {
                nu.powf(-0.5)
            } else {
                1.0
            }
        }
    };
    let rho_dot0 = rho_dot0.unwrap_or(0.0);
    let grid = linspace(0.0, t_max.max(1.0), grid_points.max(2));
    let sol = solve_ermakov(&schedule, rho0, rho_dot0, &grid)?;
    Ok((schedule, sol))
}

fn run_linearize(args: LinearizeArgs) -> Result<RunSummary, AppError> {
    if args.describe {
        return Ok(described("ion-linearize-check", DESCRIBE_LINEARIZE));
    }
    let system = args
        .system
        .ok_or_else(|| AppError::Usage("missing --system {single|many|2d}".into()))?;
    let path = require_config(args.config, "--config")?;
    let mut summary = RunSummary::new("ion-linearize-check");

    let (report, output_spec) = match system {
        SystemKind::Single => {
            let (scn, raw) = load::<SingleIonScenario>(&path)?;
            summary.absorb(&raw);
            let t = scn.t.unwrap_or(0.0);
            if !(t.is_finite() && t >= 0.0) {
                return Err(AppError::Invalid(format!(
                    "evaluation time must be finite and non-negative, got {}",
                    t
                )));
            }
            let grid_points = scn.grid_points.unwrap_or(2001);
            let (_, sol) =
                single_envelope(&scn.params, scn.schedule, scn.rho0, scn.rho_dot0, t, grid_points)?;
            (ion::single::linearize_report(&scn.params, &sol, t)?, scn.output)
        }
        SystemKind::Many => {
            let (scn, raw) = load::<ManyIonScenario>(&path)?;
            summary.absorb(&raw);
            (ion::many::linearize_report(&scn.params)?, scn.output)
        }
        SystemKind::TwoD => {
            let (scn, raw) = load::<TwoDScenario>(&path)?;
            summary.absorb(&raw);
            (ion::two_d::linearize_report(&scn.params)?, scn.output)
        }
    };

    if let Some(tol) = args.tol_residual {
        summary.checks.push(CheckLine {
            name: "linearize_max_residual",
            residual: report.max_residual,
            tol,
        });
    }
    if let Some(tol) = args.tol_spectrum {
        summary.checks.push(CheckLine {
            name: "linearize_spectrum_distance",
            residual: report.spectrum_distance,
            tol,
        });
    }

    let payload = serde_json::to_string_pretty(&report)
        .map_err(|e| AppError::Usage(format!("cannot serialize report: {}", e)))?
        + "\n";
    if let Some(output) = &output_spec {
        output.check_format("json")?;
    }
    let sink = Sink::resolve(args.out, output_spec.and_then(|o| o.path));
    summary.outputs.push(sink.write(&payload)?);
    Ok(summary)
}

fn run_dynamics(args: DynamicsArgs) -> Result<RunSummary, AppError> {
    if args.describe {
        return Ok(described("ion-dynamics", DESCRIBE_DYNAMICS));
    }
    let path = require_config(args.config, "--config")?;
    let (scn, raw) = load::<DynamicsScenario>(&path)?;
    let mut summary = RunSummary::new("ion-dynamics");
    summary.absorb(&raw);

    let t_final = args
        .t_final
        .or(scn.t_final)
        .ok_or_else(|| AppError::Invalid("final time missing (--t-final or config t_final)".into()))?;
    let steps = args.steps.or(scn.steps).unwrap_or(400);
    let samples = args.samples.or(scn.samples).unwrap_or(11);
    let convention = scn.convention.unwrap_or(BetaConvention::Stated);
    let grid_points = scn.grid_points.unwrap_or(2001);
    summary.absorb(format!("{t_final},{steps},{samples},{convention:?}").as_bytes());

    let initial = scn.initial.unwrap_or(InitialIonState::QubitFock {
        level: QubitLevel::Ground,
        fock: 0,
    });
    let index = initial.flat_index(scn.params.n_fock)?;
    let psi0 = StateVector::basis(2 * scn.params.n_fock, index)?;

    let (_, sol) = single_envelope(
        &scn.params,
        scn.schedule,
        scn.rho0,
        scn.rho_dot0,
        t_final,
        grid_points,
    )?;
    let rows = ion::single::dynamics_trace(
        &scn.params,
        &sol,
        &psi0,
        t_final,
        steps,
        convention,
        samples,
    )?;

    let mut csv = Csv::new("t,infidelity,leakage");
    for row in &rows {
        csv.row(&[row.t, row.infidelity, row.leakage]);
    }
    if let Some(tol) = args.tol {
        let last = rows.last().expect("dynamics_trace returns at least two rows");
        summary.checks.push(CheckLine {
            name: "dynamics_final_infidelity",
            residual: last.infidelity,
            tol,
        });
    }

    if let Some(output) = &scn.output {
        output.check_format("csv")?;
    }
    let sink = Sink::resolve(args.out, scn.output.and_then(|o| o.path));
    summary.outputs.push(sink.write(&csv.finish())?);
    Ok(summary)
}

fn run_slow(args: SlowArgs) -> Result<RunSummary, AppError> {
    if args.describe {
        return Ok(described("slow-atom-propagate", DESCRIBE_SLOW));
    }
    let path = require_config(args.config, "--config")?;
    let (scn, raw) = load::<SlowScenario>(&path)?;
    let mut summary = RunSummary::new("slow-atom-propagate");
    summary.absorb(&raw);

    let t = args
        .t
        .or(scn.t)
        .ok_or_else(|| AppError::Invalid("evaluation time missing (--t or config t)".into()))?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(AppError::Invalid(format!(
            "evaluation time must be finite and non-negative, got {}",
            t
        )));
    }
    summary.absorb(format!("{t}").as_bytes());

    let sys = scn.system;
    let motion = match scn.initial.motion {
        MotionSpec::Gaussian { x0, width, k0 } => {
            slow_atom::gaussian_packet(&sys.grid, x0, width, k0)?
        }
        MotionSpec::PlaneWave { m } => slow_atom::plane_wave(&sys.grid, m)?,
    };
    if scn.initial.fock >= sys.n_fock {
        return Err(AppError::Invalid(format!(
            "initial Fock occupation {} outside the {}-level truncation",
            scn.initial.fock, sys.n_fock
        )));
    }
    let internal = StateVector::basis(
        2 * sys.n_fock,
        scn.initial.level.index() * sys.n_fock + scn.initial.fock,
    )?;
    let psi0 = motion.tensor(&internal);

    let samples = args.samples.or(scn.samples);
    let (payload, native, final_deviation) = match samples {
        None => {
            let deviation = slow_atom::compare_oracle(&sys, &psi0, t)?;
            let psi_t = slow_atom::propagate(&sys, &psi0, t)?;
            let (excited, ground) = slow_atom::populations(&sys, &psi_t)?;
            let value = serde_json::json!({
                "deviation": deviation,
                "norm": psi_t.norm(),
                "populations": { "excited": excited, "ground": ground },
            });
            let text = serde_json::to_string_pretty(&value)
                .map_err(|e| AppError::Usage(format!("cannot serialize report: {}", e)))?
                + "\n";
            (text, "json", deviation)
        }
        Some(n) => {
            if n < 2 {
                return Err(AppError::Invalid(format!(
                    "need at least 2 samples, got {}",
                    n
                )));
            }
            let mut csv = Csv::new("t,deviation,norm,excited,ground");
            let mut last = 0.0;
            for &tau in &linspace(0.0, t, n) {
                let deviation = slow_atom::compare_oracle(&sys, &psi0, tau)?;
                let psi_tau = slow_atom::propagate(&sys, &psi0, tau)?;
                let (excited, ground) = slow_atom::populations(&sys, &psi_tau)?;
                csv.row(&[tau, deviation, psi_tau.norm(), excited, ground]);
                last = deviation;
            }
            (csv.finish(), "csv", last)
        }
    };

    if let Some(tol) = args.tol {
        summary.checks.push(CheckLine {
            name: "propagator_deviation",
            residual: final_deviation,
            tol,
        });
    }

    if let Some(output) = &scn.output {
        output.check_format(native)?;
    }
    let sink = Sink::resolve(args.out, scn.output.and_then(|o| o.path));
    summary.outputs.push(sink.write(&payload)?);
    Ok(summary)
}

fn kerr_params(scn: &KerrScenario) -> KerrParams {
    KerrParams {
        chi: scn.chi,
        gamma: scn.gamma,
        n_fock: scn.n_fock,
    }
}

fn run_kerr_evolve(args: KerrEvolveArgs) -> Result<RunSummary, AppError> {
    if args.describe {
        return Ok(described("kerr-evolve", DESCRIBE_KERR));
    }
    let path = require_config(args.config, "--config")?;
    let (scn, raw) = load::<KerrScenario>(&path)?;
    let mut summary = RunSummary::new("kerr-evolve");
    summary.absorb(&raw);

    let t = args
        .t
        .or(scn.t)
        .ok_or_else(|| AppError::Invalid("evaluation time missing (--t or config t)".into()))?;
    summary.absorb(format!("{t}").as_bytes());
    let params = kerr_params(&scn);
    let rho0 = scn.initial.build(scn.n_fock)?;
    let rho_t = analytic_solution(&params, &rho0, t)?;

    let payload = serde_json::to_string_pretty(&emit::matrix_json(&rho_t))
        .map_err(|e| AppError::Usage(format!("cannot serialize matrix: {}", e)))?
        + "\n";
    if let Some(output) = &scn.output {
        output.check_format("json")?;
    }
    let sink = Sink::resolve(args.out, scn.output.and_then(|o| o.path));
    summary.outputs.push(sink.write(&payload)?);
    Ok(summary)
}

fn run_kerr_compare(args: KerrCompareArgs) -> Result<RunSummary, AppError> {
    if args.describe {
        return Ok(described("kerr-compare", DESCRIBE_KERR));
    }
    let path = require_config(args.config, "--config")?;
    let (scn, raw) = load::<KerrScenario>(&path)?;
    let mut summary = RunSummary::new("kerr-compare");
    summary.absorb(&raw);

    let (t0, t1, samples) = resolve_window(args.t0, args.t1, args.samples, scn.time)?;
    if t0 < 0.0 {
        return Err(AppError::Invalid(format!(
            "start time must be non-negative, got {}",
            t0
        )));
    }
    let steps = args.steps.or(scn.steps).unwrap_or(5000);
    summary.absorb(format!("{t0},{t1},{samples},{steps}").as_bytes());

    let params = kerr_params(&scn);
    let rho0 = scn.initial.build(scn.n_fock)?;
    let times = linspace(t0, t1, samples);
    let report = compare(&params, &rho0, &times, steps)?;

    let mut csv = Csv::new("t,max_abs_diff,trace_analytic,trace_rk4,min_eig_analytic");
    for row in &report.rows {
        csv.row(&[
            row.t,
            row.max_abs_diff,
            row.trace_analytic,
            row.trace_rk4,
            row.min_eig_analytic,
        ]);
    }
    if let Some(tol) = args.tol {
        summary.checks.push(CheckLine {
            name: "kerr_compare_max_abs_diff",
            residual: report.max_abs_diff,
            tol,
        });
    }

    if let Some(output) = &scn.output {
        output.check_format("csv")?;
    }
    let sink = Sink::resolve(args.out, scn.output.and_then(|o| o.path));
    summary.outputs.push(sink.write(&csv.finish())?);
    Ok(summary)
}
