use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::state::{norm, QuantumState, C64};

pub type CMatrix = DMatrix<C64>;

/// Tolerance on `‖Σ_k M_k* M_k − I‖_max`.
pub const COMPLETENESS_TOL: f64 = 1e-12;
/// Smallest accepted `|det M_k|`.
pub const MIN_ABS_DET: f64 = 1e-12;
/// Smallest accepted `‖Mφ‖` before the normalisation is refused.
pub const MIN_IMAGE_NORM: f64 = 1e-14;

/// `𝕄(φ) = Mφ/‖Mφ‖`.
pub fn apply_measurement(m: &CMatrix, phi: &QuantumState) -> Result<QuantumState> {
    check_dims(m, phi)?;
    let v = m * nalgebra::DVector::from_column_slice(phi.components());
    normalize_image(v.as_slice().to_vec())
}

/// `𝕄⁻¹(φ) = M⁻¹φ/‖M⁻¹φ‖`.
pub fn inverse_measurement(m: &CMatrix, phi: &QuantumState) -> Result<QuantumState> {
    check_dims(m, phi)?;
    let inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("measurement matrix is singular".into()))?;
    apply_measurement(&inv, phi)
}

fn check_dims(m: &CMatrix, phi: &QuantumState) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() != phi.dim() {
        return Err(Error::InvalidArgument(format!(
            "matrix {}x{} does not act on dimension {}",
            m.nrows(),
            m.ncols(),
            phi.dim()
        )));
    }
    Ok(())
}

fn normalize_image(v: Vec<C64>) -> Result<QuantumState> {
    let n = norm(&v);
    if !(n >= MIN_IMAGE_NORM) {
        return Err(Error::NearSingular(format!("‖Mφ‖ = {n}")));
    }
    Ok(QuantumState::normalized(v).expect("norm checked"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    General,
    Diagonal,
}

#[derive(Debug, Clone)]
enum Storage {
    /// `table[k][i] = m_k(i)`.
    Diagonal(Vec<Vec<f64>>),
    General { matrices: Vec<CMatrix>, inverses: Vec<CMatrix> },
}

/// `K` invertible measurement operators on `C^N`.
///
/// Immutable once built. The checked constructors enforce completeness and
/// invertibility; the `*_unchecked` ones only require invertibility and exist
/// for diagnostics that need to report a broken ensemble.
#[derive(Debug, Clone)]
pub struct MeasurementEnsemble {
    dim: usize,
    storage: Storage,
    abs_dets: Vec<f64>,
}

impl MeasurementEnsemble {
    /// Diagonal ensemble `M_k = diag(m_k(1), …, m_k(N))` from a `K×N` table.
    pub fn diagonal(table: Vec<Vec<f64>>) -> Result<Self> {
        let e = Self::diagonal_unchecked(table)?;
        e.validate()?;
        Ok(e)
    }

    pub fn diagonal_unchecked(table: Vec<Vec<f64>>) -> Result<Self> {
        let dim = table.first().map(Vec::len).unwrap_or(0);
        if dim == 0 || table.iter().any(|row| row.len() != dim) {
            return Err(Error::InvalidArgument("diagonal table must be a non-empty K×N array".into()));
        }
        if table.iter().flatten().any(|&m| !m.is_finite() || m == 0.0) {
            return Err(Error::InvalidArgument("diagonal entries must be finite and nonzero".into()));
        }
        let abs_dets = table.iter().map(|row| row.iter().map(|m| m.abs()).product()).collect();
        Ok(Self { dim, storage: Storage::Diagonal(table), abs_dets })
    }

    /// General ensemble from full complex matrices.
    pub fn general(matrices: Vec<CMatrix>) -> Result<Self> {
        let e = Self::general_unchecked(matrices)?;
        e.validate()?;
        Ok(e)
    }

    pub fn general_unchecked(matrices: Vec<CMatrix>) -> Result<Self> {
        let dim = matrices.first().map(|m| m.nrows()).unwrap_or(0);
        if dim == 0 || matrices.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::InvalidArgument("matrices must be a non-empty list of N×N matrices".into()));
        }
        let mut inverses = Vec::with_capacity(matrices.len());
        let mut abs_dets = Vec::with_capacity(matrices.len());
        for (k, m) in matrices.iter().enumerate() {
            let d = m.determinant().norm();
            if !(d > MIN_ABS_DET) {
                return Err(Error::InvalidArgument(format!("M_{} is singular (|det| = {d:e})", k + 1)));
            }
            let inv = m
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::InvalidArgument(format!("M_{} is not invertible", k + 1)))?;
            inverses.push(inv);
            abs_dets.push(d);
        }
        Ok(Self { dim, storage: Storage::General { matrices, inverses }, abs_dets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.abs_dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abs_dets.is_empty()
    }

    pub fn kind(&self) -> EnsembleKind {
        match self.storage {
            Storage::Diagonal(_) => EnsembleKind::Diagonal,
            Storage::General { .. } => EnsembleKind::General,
        }
    }

    /// The `K×N` entry table of a diagonal ensemble.
    pub fn diagonal_table(&self) -> Option<&[Vec<f64>]> {
        match &self.storage {
            Storage::Diagonal(t) => Some(t),
            Storage::General { .. } => None,
        }
    }

    /// `|det M_k|`.
    pub fn abs_det(&self, k: usize) -> f64 {
        self.abs_dets[k]
    }

    pub fn matrix(&self, k: usize) -> CMatrix {
        match &self.storage {
            Storage::Diagonal(t) => CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                self.dim,
                t[k].iter().map(|&m| C64::new(m, 0.0)),
            )),
            Storage::General { matrices, .. } => matrices[k].clone(),
        }
    }

    pub fn inverse_matrix(&self, k: usize) -> CMatrix {
        match &self.storage {
            Storage::Diagonal(t) => CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                self.dim,
                t[k].iter().map(|&m| C64::new(1.0 / m, 0.0)),
            )),
            Storage::General { inverses, .. } => inverses[k].clone(),
        }
    }

    /// `M_k φ` (unnormalised).
    pub fn raw_apply(&self, k: usize, phi: &QuantumState) -> Vec<C64> {
        match &self.storage {
            Storage::Diagonal(t) => phi.components().iter().zip(&t[k]).map(|(c, &m)| c * m).collect(),
            Storage::General { matrices, .. } => mat_vec(&matrices[k], phi.components()),
        }
    }

    /// `M_k⁻¹ φ` (unnormalised).
    pub fn raw_inverse(&self, k: usize, phi: &QuantumState) -> Vec<C64> {
        match &self.storage {
            Storage::Diagonal(t) => phi.components().iter().zip(&t[k]).map(|(c, &m)| c / m).collect(),
            Storage::General { inverses, .. } => mat_vec(&inverses[k], phi.components()),
        }
    }

    pub fn apply(&self, k: usize, phi: &QuantumState) -> Result<QuantumState> {
        self.check_state(phi)?;
        normalize_image(self.raw_apply(k, phi))
    }

    pub fn inverse(&self, k: usize, phi: &QuantumState) -> Result<QuantumState> {
        self.check_state(phi)?;
        normalize_image(self.raw_inverse(k, phi))
    }

    /// `p_k(φ) = ‖M_k φ‖²`.
    pub fn outcome_probabilities(&self, phi: &QuantumState) -> Result<Vec<f64>> {
        self.check_state(phi)?;
        Ok((0..self.len()).map(|k| norm_sqr(&self.raw_apply(k, phi))).collect())
    }

    /// Entry of `Σ_k M_k* M_k − I` with the largest modulus, as `(row, col, value)`.
    pub fn completeness_deviation(&self) -> (usize, usize, C64) {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for k in 0..self.len() {
            let m = self.matrix(k);
            acc += m.adjoint() * m;
        }
        acc -= CMatrix::identity(self.dim, self.dim);
        let mut worst = (0, 0, C64::new(0.0, 0.0));
        for i in 0..self.dim {
            for j in 0..self.dim {
                if acc[(i, j)].norm() > worst.2.norm() {
                    worst = (i, j, acc[(i, j)]);
                }
            }
        }
        worst
    }

    /// `‖Σ_k M_k* M_k − I‖_max`.
    pub fn completeness_residual(&self) -> f64 {
        self.completeness_deviation().2.norm()
    }

    /// Checks completeness and, for diagonal ensembles, the entry constraints
    /// `m_k(i) ∈ (0, 1)` and `m_k(i₁) ≠ m_k(i₂)` for `i₁ ≠ i₂`.
    pub fn validate(&self) -> Result<()> {
        if self.abs_dets.iter().any(|&d| !(d > MIN_ABS_DET)) {
            return Err(Error::ModelInconsistency("a measurement matrix is singular".into()));
        }
        let r = self.completeness_residual();
        if !(r < COMPLETENESS_TOL) {
            return Err(Error::ModelInconsistency(format!("completeness residual {r:e}")));
        }
        if let Storage::Diagonal(t) = &self.storage {
            for (k, row) in t.iter().enumerate() {
                if row.iter().any(|&m| !(m > 0.0 && m < 1.0)) {
                    return Err(Error::ModelInconsistency(format!("entries of M_{} must lie in (0, 1)", k + 1)));
                }
                for i in 0..row.len() {
                    for j in i + 1..row.len() {
                        if row[i] == row[j] {
                            return Err(Error::ModelInconsistency(format!(
                                "M_{} repeats the entry {} on the diagonal",
                                k + 1,
                                row[i]
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Human-readable notes for matrices that are not Hermitian positive
    /// definite. Only invertibility and completeness enter the formulas, so
    /// these are informational.
    pub fn structure_flags(&self) -> Vec<String> {
        let mut flags = Vec::new();
        for k in 0..self.len() {
            let m = self.matrix(k);
            let herm_dev = (&m - m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
            if herm_dev > 1e-12 {
                flags.push(format!("M_{} is not Hermitian (deviation {herm_dev:.3e})", k + 1));
            } else if Cholesky::new(m).is_none() {
                flags.push(format!("M_{} is not positive definite", k + 1));
            }
        }
        flags
    }

    fn check_state(&self, phi: &QuantumState) -> Result<()> {
        if phi.dim() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "state has dimension {}, ensemble acts on {}",
                phi.dim(),
                self.dim
            )));
        }
        Ok(())
    }
}

pub(crate) fn mat_vec(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

pub(crate) fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}
