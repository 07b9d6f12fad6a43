//! Lyapunov-density certificates and empirical sweeping diagnostics.
//!
//! A positive density `u` with `𝒫u < u` almost everywhere that is integrable
//! on every member of an admissible family certifies that the process sweeps
//! away from those members. [`check_proper_subinvariance`] and
//! [`check_local_integrability`] check the two conditions numerically;
//! [`sweeping_diagnostic`] observes the consequence on simulated ensembles.

mod family;
mod subinvariance;
mod sweeping;

pub use family::{check_local_integrability, AdmissibleFamily, AdmissibleFamilySpec, IntervalFamily, MemberIntegral, SphereFamily};
pub use subinvariance::{
    check_proper_subinvariance, CertificatePlan, CertificateReport, SampleMargin, Verdict, Violation, MAX_RESAMPLE_FRACTION,
};
pub use sweeping::{
    classify_trend, fock_proximity_diagnostic, fock_proximity_from_snapshots, sweeping_diagnostic, sweeping_from_snapshots, FockProximity, MemberMass, MemberTrend, SweepingReport, Trend,
    TREND_SLACK_SE,
};
