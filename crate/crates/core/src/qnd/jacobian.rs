//! Closed-form Jacobian determinants of normalised linear maps on spheres.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qnd::CMatrix;
use crate::state::QuantumState;

/// `|det D𝕄(φ)| = |det M| / ‖Mφ‖^N` for `𝕄(φ) = Mφ/‖Mφ‖` on `S^{N-1}`.
pub fn jacobian_det_real(m: &DMatrix<f64>, phi: &[f64]) -> Result<f64> {
    let n = phi.len();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::InvalidArgument("matrix and vector dimensions differ".into()));
    }
    let pn: f64 = phi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (pn - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("point has norm {pn}, expected 1")));
    }
    let det = m.determinant().abs();
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::InvalidArgument("matrix is singular".into()));
    }
    let image = m * nalgebra::DVector::from_column_slice(phi);
    Ok(det / image.norm().powi(n as i32))
}

/// The real `2N×2N` matrix `[[M_R, −M_I], [M_I, M_R]]` acting on `[Re φ; Im φ]`.
pub fn realify_matrix(m: &CMatrix) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let c = m[(i, j)];
            out[(i, j)] = c.re;
            out[(i, n + j)] = -c.im;
            out[(n + i, j)] = c.im;
            out[(n + i, n + j)] = c.re;
        }
    }
    out
}

/// `|det D𝕄(φ)| = |det M|² / ‖Mφ‖^{2N}` on `S_N ≅ S^{2N-1}`.
pub fn jacobian_det_complex(m: &CMatrix, phi: &QuantumState) -> Result<f64> {
    let n = phi.dim();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::InvalidArgument("matrix and state dimensions differ".into()));
    }
    let det = m.determinant().norm();
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::InvalidArgument("matrix is singular".into()));
    }
    let image = m * nalgebra::DVector::from_column_slice(phi.components());
    Ok(closed_form_complex(det, image.norm(), n))
}

/// The same determinant computed through the real formula on the realified map.
pub fn jacobian_det_complex_realified(m: &CMatrix, phi: &QuantumState) -> Result<f64> {
    jacobian_det_real(&realify_matrix(m), &phi.realify())
}

pub(crate) fn closed_form_complex(abs_det: f64, image_norm: f64, n: usize) -> f64 {
    abs_det * abs_det / image_norm.powi(2 * n as i32)
}
