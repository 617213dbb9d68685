//! Output plumbing: sinks, hashing, and the serialization formats shared by
//! the subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use num_complex::Complex64;
use qxform::fock::DensityMatrix;

use crate::AppError;

/// FNV-1a over a byte stream; used to tag scenarios in the run report.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Where a subcommand's data payload goes. Relative file paths are
/// re-rooted under `QXFORM_OUT` when that variable is set.
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn resolve(flag: Option<PathBuf>, config_path: Option<PathBuf>) -> Self {
        let path = match flag.or(config_path) {
            Some(p) => p,
            None => return Sink::Stdout,
        };
        if path.is_relative() {
            if let Ok(root) = std::env::var("QXFORM_OUT") {
                if !root.is_empty() {
                    return Sink::File(PathBuf::from(root).join(path));
                }
            }
        }
        Sink::File(path)
    }

    /// Write the payload and return the label used in the run report.
    pub fn write(&self, payload: &str) -> Result<String, AppError> {
        match self {
            Sink::Stdout => {
                print!("{}", payload);
                Ok("-".into())
            }
            Sink::File(path) => {
                if let Some(parent) = path.parent() {
                    if !parent.as_os_str().is_empty() {
                        fs::create_dir_all(parent).map_err(|e| {
                            AppError::Usage(format!("cannot create {}: {}", parent.display(), e))
                        })?;
                    }
                }
                fs::write(path, payload).map_err(|e| {
                    AppError::Usage(format!("cannot write {}: {}", path.display(), e))
                })?;
                Ok(path.display().to_string())
            }
        }
    }
}

/// CSV table with a fixed header; floats print with shortest round-trip
/// digits so identical runs give identical bytes.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut buf = String::new();
        let _ = writeln!(buf, "{}", header);
        Self {
            buf,
            columns: header.split(',').count(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.columns);
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            let _ = write!(self.buf, "{}", v);
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Density matrix as `{"dim": N, "entries": [[re, im], ...]}`, row-major.
pub fn matrix_json(rho: &DensityMatrix) -> serde_json::Value {
    let entries: Vec<[f64; 2]> = rho
        .matrix()
        .entries()
        .iter()
        .map(|z| [z.re, z.im])
        .collect();
    serde_json::json!({ "dim": rho.dim(), "entries": entries })
}

/// Re/im pairs to complex entries; length errors are left to the matrix
/// constructor, which reports them as dimension failures.
pub fn parse_matrix_entries(pairs: &[[f64; 2]]) -> Vec<Complex64> {
    pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// One executed invariant check, echoed in the run report.
pub struct CheckLine {
    pub name: &'static str,
    pub residual: f64,
    pub tol: f64,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        self.residual.is_finite() && self.residual < self.tol
    }

    pub fn render(&self) -> String {
        format!(
            "check {} residual={:.6e} tol={:.1e} {}",
            self.name,
            self.residual,
            self.tol,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}
