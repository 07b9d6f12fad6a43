//! Quantum non-demolition measurement chains on the complex unit sphere.

mod ensemble;
mod jacobian;
mod perron;

pub use crate::state::QuantumState;
pub use ensemble::{
    apply_measurement, inverse_measurement, CMatrix, EnsembleKind, MeasurementEnsemble, COMPLETENESS_TOL,
    MIN_ABS_DET,
};
pub use jacobian::{jacobian_det_complex, jacobian_det_complex_realified, jacobian_det_real, realify_matrix};
pub use perron::{perron_qnd, subinvariance_ratio, FockLyapunovDensity, FOCK_SINGULAR_EPS};

/// The two-outcome, two-level example: `M_1 = diag(0.6, 0.8)`, `M_2 = diag(0.8, 0.6)`.
pub fn example_ensemble() -> MeasurementEnsemble {
    MeasurementEnsemble::diagonal(vec![vec![0.6, 0.8], vec![0.8, 0.6]]).expect("example ensemble is valid")
}
