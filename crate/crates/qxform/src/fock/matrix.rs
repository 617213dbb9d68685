//! Square complex matrices in row-major storage.
//!
//! Multiplication accumulates along `k` in ascending order for every output
//! element, and the parallel path (rayon over output rows) reuses the exact
//! same row kernel as the serial path, so both produce bit-identical results.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this dimension the parallel path falls through to serial; splitting
/// tiny products across threads costs more than it saves.
pub const PARALLEL_MIN_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "matrix of dim {} needs {} entries, got {}",
                dim,
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    /// Diagonal matrix from real values.
    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, v) in values.iter().enumerate() {
            m.entries[i * dim + i] = Complex64::new(*v, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    fn check_same_dim(&self, other: &Self, op: &str) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "{} needs equal dims, got {} and {}",
                op, self.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other, "add")?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            dim: self.dim,
            entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other, "sub")?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            dim: self.dim,
            entries,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// In-place `self += c * other`.
    pub fn add_scaled(&mut self, c: Complex64, other: &Self) -> Result<()> {
        self.check_same_dim(other, "add_scaled")?;
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += c * b;
        }
        Ok(())
    }

    /// Shared row kernel: `out[j] = sum_k a_row[k] * b[k][j]`, `k` ascending.
    /// Both multiplication paths call this, which is what makes them
    /// bit-identical.
    fn row_product(a_row: &[Complex64], b: &Self, out: &mut [Complex64]) {
        for v in out.iter_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
        for (k, a_ik) in a_row.iter().enumerate() {
            let b_row = b.row(k);
            for (j, b_kj) in b_row.iter().enumerate() {
                out[j] += a_ik * b_kj;
            }
        }
    }

    pub fn mul_serial(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other, "mul")?;
        let dim = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            Self::row_product(self.row(i), other, &mut entries[i * dim..(i + 1) * dim]);
        }
        Ok(Self { dim, entries })
    }

    #[cfg(feature = "parallel")]
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other, "mul")?;
        let dim = self.dim;
        if dim < PARALLEL_MIN_DIM {
            return self.mul_serial(other);
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        entries
            .par_chunks_mut(dim)
            .enumerate()
            .for_each(|(i, out_row)| {
                Self::row_product(self.row(i), other, out_row);
            });
        Ok(Self { dim, entries })
    }

    #[cfg(not(feature = "parallel"))]
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_serial(other)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let dim = self.dim;
        Self::from_fn(dim, |i, j| self.get(j, i).conj())
    }

    /// Hermitian part `(A + A^dag) / 2`.
    pub fn hermitize(&self) -> Self {
        let dim = self.dim;
        Self::from_fn(dim, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * Complex64::new(0.5, 0.0)
        })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other, "max_abs_diff")?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Induced 1-norm (max absolute column sum), used to pick the scaling
    /// power for the matrix exponential.
    pub fn one_norm(&self) -> f64 {
        let mut best = 0.0_f64;
        for j in 0..self.dim {
            let mut s = 0.0;
            for i in 0..self.dim {
                s += self.get(i, j).norm();
            }
            best = best.max(s);
        }
        best
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for j in i..self.dim {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// True when `A† A` is within `tol` of the identity entrywise.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let gram = match self.dagger().mul(self) {
            Ok(g) => g,
            Err(_) => return false,
        };
        let id = ComplexMatrix::identity(self.dim);
        match gram.max_abs_diff(&id) {
            Ok(d) => d <= tol,
            Err(_) => false,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(Error::Dimension(format!(
                "matvec needs vector of len {}, got {}",
                self.dim,
                v.len()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for i in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, a_ik) in self.row(i).iter().enumerate() {
                acc += a_ik * v[k];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Kronecker product, `self` on the slow (leftmost) index.
    pub fn kron(&self, other: &Self) -> Self {
        let da = self.dim;
        let db = other.dim;
        let dim = da * db;
        let mut m = Self::zeros(dim);
        for ia in 0..da {
            for ja in 0..da {
                let a = self.get(ia, ja);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for ib in 0..db {
                    for jb in 0..db {
                        let v = a * other.get(ib, jb);
                        m.set(ia * db + ib, ja * db + jb, v);
                    }
                }
            }
        }
        m
    }

    /// Frobenius inner product `<self, other> = sum conj(self_ij) other_ij`.
    pub fn frobenius_inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_dim(other, "frobenius_inner")?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.mul(b)?.sub(&b.mul(a)?)
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("ComplexMatrix", 2)?;
        st.serialize_field("dim", &self.dim)?;
        let pairs: Vec<[f64; 2]> = self.entries.iter().map(|z| [z.re, z.im]).collect();
        st.serialize_field("entries", &pairs)?;
        st.end()
    }
}

#[derive(Deserialize)]
struct MatrixRepr {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        if repr.entries.len() != repr.dim * repr.dim {
            return Err(D::Error::custom(format!(
                "matrix of dim {} needs {} entries, got {}",
                repr.dim,
                repr.dim * repr.dim,
                repr.entries.len()
            )));
        }
        for (idx, [re, im]) in repr.entries.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(D::Error::custom(format!(
                    "non-finite matrix entry at flat index {}",
                    idx
                )));
            }
        }
        Ok(ComplexMatrix {
            dim: repr.dim,
            entries: repr
                .entries
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        })
    }
}
