//! The Frobenius–Perron operator of the measurement chain and the Fock
//! Lyapunov density.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::markov::{Density, IfsBranch, IfsModel};
use crate::qnd::ensemble::norm_sqr;
use crate::qnd::jacobian::closed_form_complex;
use crate::qnd::MeasurementEnsemble;
use crate::state::{norm, QuantumState};

/// Modulus below which a coordinate is treated as exactly zero.
pub const FOCK_SINGULAR_EPS: f64 = 1e-14;

/// `ρ(φ) = 1 / Π_i |φ_i|²`, infinite on `∪_i {φ_i = 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockLyapunovDensity {
    pub dim: usize,
}

impl FockLyapunovDensity {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Density<QuantumState> for FockLyapunovDensity {
    fn eval(&self, phi: &QuantumState) -> f64 {
        if phi.min_modulus() < FOCK_SINGULAR_EPS {
            return f64::INFINITY;
        }
        1.0 / phi.components().iter().map(|c| c.norm_sqr()).product::<f64>()
    }

    fn singular_distance(&self, phi: &QuantumState) -> f64 {
        phi.min_modulus()
    }
}

/// `𝒫ρ(φ) = Σ_k |det M_k⁻¹|² / ‖M_k⁻¹φ‖^{2N+2} · ρ(M_k⁻¹φ / ‖M_k⁻¹φ‖)`.
pub fn perron_qnd(ensemble: &MeasurementEnsemble, rho: &dyn Density<QuantumState>, phi: &QuantumState) -> Result<f64> {
    let n = ensemble.dim();
    if phi.dim() != n {
        return Err(Error::InvalidArgument("state dimension does not match the ensemble".into()));
    }
    let mut total = 0.0;
    for k in 0..ensemble.len() {
        let pre = ensemble.raw_inverse(k, phi);
        let pre_norm = norm(&pre);
        let inv_det = 1.0 / ensemble.abs_det(k);
        let r = rho.eval(&QuantumState::normalized(pre)?);
        if !r.is_finite() {
            return Err(Error::SingularEvaluation { branch: k });
        }
        total += inv_det * inv_det / pre_norm.powi(2 * n as i32 + 2) * r;
    }
    Ok(total)
}

/// `Σ_k 1/‖M_k⁻¹φ‖²`, the factor with `𝒫ρ = ratio · ρ` for the Fock density.
///
/// At most one; equal to one exactly when every `m_k` is constant over the
/// support of `φ`. Only defined for diagonal ensembles.
pub fn subinvariance_ratio(ensemble: &MeasurementEnsemble, phi: &QuantumState) -> Result<f64> {
    let table = ensemble
        .diagonal_table()
        .ok_or_else(|| Error::Unsupported("subinvariance ratio requires a diagonal ensemble".into()))?;
    if phi.dim() != ensemble.dim() {
        return Err(Error::InvalidArgument("state dimension does not match the ensemble".into()));
    }
    let phi_sq = norm_sqr(phi.components());
    Ok(table
        .iter()
        .map(|row| {
            let inv_sq: f64 = phi.components().iter().zip(row).map(|(c, m)| c.norm_sqr() / (m * m)).sum();
            phi_sq / inv_sq
        })
        .sum())
}

/// Branch `k` of the measurement chain seen as a generic IFS branch.
struct MeasurementBranch {
    ensemble: Arc<MeasurementEnsemble>,
    k: usize,
}

impl IfsBranch for MeasurementBranch {
    fn forward(&self, x: &QuantumState) -> Result<QuantumState> {
        self.ensemble.apply(self.k, x)
    }

    fn inverse(&self, x: &QuantumState) -> Result<QuantumState> {
        self.ensemble.inverse(self.k, x)
    }

    fn inv_jacobian_det(&self, x: &QuantumState) -> Result<f64> {
        let image_norm = norm(&self.ensemble.raw_inverse(self.k, x));
        Ok(closed_form_complex(1.0 / self.ensemble.abs_det(self.k), image_norm, self.ensemble.dim()))
    }

    fn weight(&self, x: &QuantumState) -> f64 {
        norm_sqr(&self.ensemble.raw_apply(self.k, x))
    }
}

impl MeasurementEnsemble {
    /// The chain `Φ_{n+1} = 𝕄_{κ_n}(Φ_n)` as an [`IfsModel`] with
    /// `p_k(φ) = ‖M_k φ‖²`.
    pub fn to_ifs_model(&self) -> IfsModel {
        let shared = Arc::new(self.clone());
        let branches: Vec<Arc<dyn IfsBranch>> = (0..self.len())
            .map(|k| Arc::new(MeasurementBranch { ensemble: shared.clone(), k }) as Arc<dyn IfsBranch>)
            .collect();
        IfsModel::new(self.dim(), branches).expect("ensemble is non-empty")
    }
}
