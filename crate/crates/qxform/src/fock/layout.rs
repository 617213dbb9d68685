//! Tensor-product bookkeeping for composite Hilbert spaces.
//!
//! A layout is an ordered list of factors; the leftmost factor owns the
//! slowest (most significant) part of the flat basis index. `embed` lifts a
//! single-factor operator to the full space, which keeps every module from
//! hand-rolling its own Kronecker index arithmetic.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::matrix::ComplexMatrix;

pub const MAX_TOTAL_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    Qubit,
    FockMode { levels: usize },
    Grid { points: usize, length: f64 },
}

impl Factor {
    pub fn dim(&self) -> usize {
        match self {
            Factor::Qubit => 2,
            Factor::FockMode { levels } => *levels,
            Factor::Grid { points, .. } => *points,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HilbertLayout {
    factors: Vec<Factor>,
}

impl HilbertLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Dimension("layout needs at least one factor".into()));
        }
        let mut total: usize = 1;
        for (i, f) in factors.iter().enumerate() {
            if f.dim() < 2 {
                return Err(Error::Dimension(format!(
                    "factor {} has dim {}, need at least 2",
                    i,
                    f.dim()
                )));
            }
            if let Factor::Grid { length, .. } = f {
                if !(length.is_finite() && *length > 0.0) {
                    return Err(Error::Parameter(format!(
                        "grid factor {} needs a positive finite length, got {}",
                        i, length
                    )));
                }
            }
            total = total.checked_mul(f.dim()).ok_or_else(|| {
                Error::Dimension("layout dimension overflows".into())
            })?;
        }
        if total > MAX_TOTAL_DIM {
            return Err(Error::Dimension(format!(
                "layout dimension {} exceeds cap {}",
                total, MAX_TOTAL_DIM
            )));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).product()
    }

    pub fn factor_dim(&self, idx: usize) -> Result<usize> {
        self.factors
            .get(idx)
            .map(|f| f.dim())
            .ok_or_else(|| Error::Dimension(format!("no factor at index {}", idx)))
    }

    fn pre_post(&self, idx: usize) -> Result<(usize, usize)> {
        if idx >= self.factors.len() {
            return Err(Error::Dimension(format!("no factor at index {}", idx)));
        }
        let pre: usize = self.factors[..idx].iter().map(|f| f.dim()).product();
        let post: usize = self.factors[idx + 1..].iter().map(|f| f.dim()).product();
        Ok((pre, post))
    }

    /// Lift `op`, acting on factor `idx`, to the full space:
    /// `I_pre (x) op (x) I_post`.
    pub fn embed(&self, idx: usize, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.factor_dim(idx)?;
        if op.dim() != d {
            return Err(Error::Dimension(format!(
                "operator dim {} does not match factor {} dim {}",
                op.dim(),
                idx,
                d
            )));
        }
        let (pre, post) = self.pre_post(idx)?;
        let total = pre * d * post;
        let mut out = ComplexMatrix::zeros(total);
        for p in 0..pre {
            for fr in 0..d {
                for fc in 0..d {
                    let v = op.get(fr, fc);
                    if v == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let row_base = (p * d + fr) * post;
                    let col_base = (p * d + fc) * post;
                    for t in 0..post {
                        out.set(row_base + t, col_base + t, v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Flat basis index from one index per factor (leftmost slowest).
    pub fn basis_index(&self, components: &[usize]) -> Result<usize> {
        if components.len() != self.factors.len() {
            return Err(Error::Dimension(format!(
                "need {} components, got {}",
                self.factors.len(),
                components.len()
            )));
        }
        let mut flat = 0;
        for (c, f) in components.iter().zip(&self.factors) {
            if *c >= f.dim() {
                return Err(Error::Dimension(format!(
                    "component {} out of range for factor of dim {}",
                    c,
                    f.dim()
                )));
            }
            flat = flat * f.dim() + c;
        }
        Ok(flat)
    }

    /// Per-factor indices of a flat basis index.
    pub fn components(&self, flat: usize) -> Result<Vec<usize>> {
        if flat >= self.dim() {
            return Err(Error::Dimension(format!(
                "basis index {} out of range for dim {}",
                flat,
                self.dim()
            )));
        }
        let mut rest = flat;
        let mut out = vec![0usize; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            let d = f.dim();
            *slot = rest % d;
            rest /= d;
        }
        Ok(out)
    }

    /// Keep-mask over the full basis that drops every state whose Fock index
    /// on factor `idx` lies within `guard` levels of the truncation edge.
    pub fn fock_guard_mask(&self, idx: usize, guard: usize) -> Result<Vec<bool>> {
        let d = self.factor_dim(idx)?;
        if guard >= d {
            return Err(Error::Parameter(format!(
                "guard {} swallows the whole {}-level factor",
                guard, d
            )));
        }
        let dim = self.dim();
        let mut mask = vec![false; dim];
        for (flat, slot) in mask.iter_mut().enumerate() {
            let comps = self.components(flat)?;
            *slot = comps[idx] < d - guard;
        }
        Ok(mask)
    }
}

/// Largest `|a - b|` entry over rows and columns the mask keeps.
pub fn masked_max_abs_diff(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    keep: &[bool],
) -> Result<f64> {
    if a.dim() != b.dim() || keep.len() != a.dim() {
        return Err(Error::Dimension(
            "masked comparison needs matching dims and mask length".into(),
        ));
    }
    let mut worst = 0.0_f64;
    for i in 0..a.dim() {
        if !keep[i] {
            continue;
        }
        for j in 0..a.dim() {
            if !keep[j] {
                continue;
            }
            worst = worst.max((a.get(i, j) - b.get(i, j)).norm());
        }
    }
    Ok(worst)
}

/// Frobenius inner product `sum conj(a_ij) b_ij` restricted to entries with
/// both indices kept. Restricting matters: a truncated unitary conjugation
/// preserves every full-matrix trace, so projections taken over the whole
/// matrix see the guard-band anomaly cancel exactly the component they are
/// trying to measure.
pub fn masked_frobenius_inner(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    keep: &[bool],
) -> Result<Complex64> {
    if a.dim() != b.dim() || keep.len() != a.dim() {
        return Err(Error::Dimension(
            "masked comparison needs matching dims and mask length".into(),
        ));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.dim() {
        if !keep[i] {
            continue;
        }
        for j in 0..a.dim() {
            if keep[j] {
                acc += a.get(i, j).conj() * b.get(i, j);
            }
        }
    }
    Ok(acc)
}

/// Fit the best constant `c` such that `a ~ b + c I` on the kept diagonal,
/// then report `(c, max kept-entry residual of a - b - c I)`. Operators that
/// agree up to a global energy offset compare equal under this.
pub fn masked_offset_residual(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    keep: &[bool],
) -> Result<(Complex64, f64)> {
    if a.dim() != b.dim() || keep.len() != a.dim() {
        return Err(Error::Dimension(
            "masked comparison needs matching dims and mask length".into(),
        ));
    }
    let mut c = Complex64::new(0.0, 0.0);
    let mut count = 0usize;
    for i in 0..a.dim() {
        if keep[i] {
            c += a.get(i, i) - b.get(i, i);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Parameter("mask keeps nothing".into()));
    }
    c /= count as f64;
    let mut worst = 0.0_f64;
    for i in 0..a.dim() {
        if !keep[i] {
            continue;
        }
        for j in 0..a.dim() {
            if !keep[j] {
                continue;
            }
            let shift = if i == j { c } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((a.get(i, j) - b.get(i, j) - shift).norm());
        }
    }
    Ok((c, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ops::{annihilation, number_operator, pauli, Pauli};

    fn qubit_fock(levels: usize) -> HilbertLayout {
        HilbertLayout::new(vec![Factor::Qubit, Factor::FockMode { levels }]).unwrap()
    }

    #[test]
    fn embed_matches_explicit_kron() {
        let layout = qubit_fock(4);
        let sz = pauli(Pauli::Z);
        let n = number_operator(4);

        let via_embed_q = layout.embed(0, &sz).unwrap();
        let via_kron_q = sz.kron(&ComplexMatrix::identity(4));
        assert!(via_embed_q.max_abs_diff(&via_kron_q).unwrap() == 0.0);

        let via_embed_f = layout.embed(1, &n).unwrap();
        let via_kron_f = ComplexMatrix::identity(2).kron(&n);
        assert!(via_embed_f.max_abs_diff(&via_kron_f).unwrap() == 0.0);
    }

    #[test]
    fn embeds_on_different_factors_commute() {
        let layout = HilbertLayout::new(vec![
            Factor::Qubit,
            Factor::Qubit,
            Factor::FockMode { levels: 3 },
        ])
        .unwrap();
        let a = layout.embed(0, &pauli(Pauli::X)).unwrap();
        let b = layout.embed(2, &annihilation(3)).unwrap();
        let comm = crate::fock::matrix::commutator(&a, &b).unwrap();
        assert!(comm.max_abs() == 0.0);
    }

    #[test]
    fn middle_factor_embedding_places_blocks_correctly() {
        let layout = HilbertLayout::new(vec![
            Factor::FockMode { levels: 2 },
            Factor::Qubit,
            Factor::FockMode { levels: 3 },
        ])
        .unwrap();
        let sx = pauli(Pauli::X);
        let lifted = layout.embed(1, &sx).unwrap();
        let manual = ComplexMatrix::identity(2)
            .kron(&sx)
            .kron(&ComplexMatrix::identity(3));
        assert!(lifted.max_abs_diff(&manual).unwrap() == 0.0);
    }

    #[test]
    fn basis_index_round_trips() {
        let layout = HilbertLayout::new(vec![
            Factor::Qubit,
            Factor::FockMode { levels: 5 },
            Factor::Qubit,
        ])
        .unwrap();
        for flat in 0..layout.dim() {
            let comps = layout.components(flat).unwrap();
            assert_eq!(layout.basis_index(&comps).unwrap(), flat);
        }
        // Leftmost factor is slowest: flipping it jumps by 10.
        assert_eq!(layout.basis_index(&[1, 0, 0]).unwrap(), 10);
        assert_eq!(layout.basis_index(&[0, 1, 0]).unwrap(), 2);
        assert_eq!(layout.basis_index(&[0, 0, 1]).unwrap(), 1);
    }

    #[test]
    fn guard_mask_drops_top_levels() {
        let layout = qubit_fock(4);
        let mask = layout.fock_guard_mask(1, 2).unwrap();
        // Kept: fock index 0 or 1, for both qubit states.
        let want = [true, true, false, false, true, true, false, false];
        assert_eq!(mask, want);
    }

    #[test]
    fn offset_fit_recovers_planted_shift() {
        let layout = qubit_fock(3);
        let n = layout.embed(1, &number_operator(3)).unwrap();
        let shifted = n
            .add(&ComplexMatrix::identity(6).scale(Complex64::new(0.25, 0.0)))
            .unwrap();
        let keep = vec![true; 6];
        let (c, resid) = masked_offset_residual(&shifted, &n, &keep).unwrap();
        assert!((c - Complex64::new(0.25, 0.0)).norm() < 1e-14);
        assert!(resid < 1e-14);
    }

    #[test]
    fn dimension_cap_enforced() {
        let res = HilbertLayout::new(vec![
            Factor::FockMode { levels: 100 },
            Factor::FockMode { levels: 100 },
        ]);
        assert!(matches!(res, Err(Error::Dimension(_))));
    }

    #[test]
    fn grid_factor_needs_positive_length() {
        let bad = HilbertLayout::new(vec![Factor::Grid {
            points: 8,
            length: 0.0,
        }]);
        assert!(matches!(bad, Err(Error::Parameter(_))));
        let good = HilbertLayout::new(vec![Factor::Grid {
            points: 8,
            length: 2.0 * std::f64::consts::PI,
        }])
        .unwrap();
        assert_eq!(good.dim(), 8);
    }
}
