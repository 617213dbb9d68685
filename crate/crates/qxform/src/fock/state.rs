//! State vectors and a few standard preparations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::matrix::ComplexMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wrap amplitudes that are already normalized (within 1e-12).
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::Dimension("state needs at least one amplitude".into()));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("state amplitudes".into()));
        }
        let norm = norm_of(&amps);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "state norm is {}, expected 1 within 1e-12",
                norm
            )));
        }
        Ok(Self { amps })
    }

    /// Normalize arbitrary finite amplitudes.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::Dimension("state needs at least one amplitude".into()));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("state amplitudes".into()));
        }
        let norm = norm_of(&amps);
        if norm < 1e-12 {
            return Err(Error::Parameter("cannot normalize a zero state".into()));
        }
        let inv = 1.0 / norm;
        Ok(Self {
            amps: amps.into_iter().map(|z| z * inv).collect(),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Dimension(format!(
                "basis index {} out of range for dim {}",
                index, dim
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm_of(&self.amps)
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "inner product needs equal dims, got {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Probability carried by the basis states the mask keeps.
    pub fn masked_population(&self, keep: &[bool]) -> Result<f64> {
        if keep.len() != self.dim() {
            return Err(Error::Dimension(
                "population mask length mismatch".into(),
            ));
        }
        Ok(self
            .amps
            .iter()
            .zip(keep)
            .filter(|(_, k)| **k)
            .map(|(z, _)| z.norm_sqr())
            .sum())
    }

    /// Tensor product; `self` takes the slow (leftmost) index.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { amps }
    }

    pub fn apply(&self, op: &ComplexMatrix) -> Result<Self> {
        let amps = op.apply(&self.amps)?;
        Ok(Self { amps })
    }
}

pub(crate) fn norm_of(amps: &[Complex64]) -> f64 {
    amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Truncated coherent state, renormalized so the tail chopped off by the
/// Fock cutoff does not leave the norm short.
pub fn coherent_state(levels: usize, alpha: Complex64) -> Result<StateVector> {
    if levels < 2 {
        return Err(Error::Dimension(format!(
            "coherent state needs at least 2 levels, got {}",
            levels
        )));
    }
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::NonFinite("coherent amplitude".into()));
    }
    let mut amps = Vec::with_capacity(levels);
    let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(c);
    for n in 1..levels {
        c = c * alpha / Complex64::new((n as f64).sqrt(), 0.0);
        amps.push(c);
    }
    StateVector::normalized(amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ops::{annihilation, number_operator};

    #[test]
    fn basis_state_has_unit_norm() {
        let s = StateVector::basis(5, 2).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!((s.amps()[2] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn from_amplitudes_rejects_unnormalized() {
        let res = StateVector::from_amplitudes(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]);
        assert!(res.is_err());
    }

    #[test]
    fn tensor_ordering_is_leftmost_slowest() {
        let q = StateVector::basis(2, 1).unwrap();
        let f = StateVector::basis(3, 0).unwrap();
        let t = q.tensor(&f);
        assert_eq!(t.dim(), 6);
        assert!((t.amps()[3] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn coherent_state_is_lowering_eigenstate_away_from_cutoff() {
        let levels = 30;
        let alpha = Complex64::new(0.9, -0.4);
        let s = coherent_state(levels, alpha).unwrap();
        let a = annihilation(levels);
        let lowered = s.apply(&a).unwrap();
        // a|alpha> = alpha|alpha> except in the last few levels where the
        // truncation bites.
        for n in 0..levels - 5 {
            let want = alpha * s.amps()[n];
            assert!((lowered.amps()[n] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn coherent_state_mean_occupation() {
        let levels = 40;
        let alpha = Complex64::new(1.2, 0.5);
        let s = coherent_state(levels, alpha).unwrap();
        let n_op = number_operator(levels);
        let mean: Complex64 = s.inner(&s.apply(&n_op).unwrap()).unwrap();
        assert!((mean.re - alpha.norm_sqr()).abs() < 1e-9);
        assert!(mean.im.abs() < 1e-12);
    }
}
