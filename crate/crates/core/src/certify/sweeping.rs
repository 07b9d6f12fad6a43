use serde::Serialize;

use crate::certify::AdmissibleFamily;
use crate::error::{Error, Result};
use crate::markov::{run_ensemble, IfsModel, MarkovProcess, TrajectorySnapshot};
use crate::numerics::RandomStream;
use crate::qnd::MeasurementEnsemble;
use crate::state::QuantumState;

/// Slack, in combined standard errors, allowed when comparing consecutive masses.
pub const TREND_SLACK_SE: f64 = 3.0;

/// `Prob(Φ_n ∈ A)` estimated from an ensemble, with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemberMass {
    pub member_id: usize,
    pub member_param: f64,
    pub checkpoint: usize,
    pub mass: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Decaying,
    NotDecaying,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberTrend {
    pub member_id: usize,
    pub member_param: f64,
    pub trend: Trend,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepingReport {
    pub n_trajectories: usize,
    pub checkpoints: Vec<usize>,
    /// Member-major, checkpoint-minor.
    pub masses: Vec<MemberMass>,
    pub trends: Vec<MemberTrend>,
    pub trend_rule: String,
}

impl SweepingReport {
    pub fn member_masses(&self, member_id: usize) -> Vec<MemberMass> {
        self.masses.iter().filter(|m| m.member_id == member_id).copied().collect()
    }
}

/// Decaying when the sequence never rises by more than the slack and ends
/// strictly below where it started.
pub fn classify_trend(masses: &[MemberMass]) -> Trend {
    let rises = masses
        .windows(2)
        .any(|w| w[1].mass > w[0].mass + TREND_SLACK_SE * w[0].std_error.hypot(w[1].std_error));
    match (masses.first(), masses.last()) {
        (Some(a), Some(b)) if !rises && b.mass < a.mass => Trend::Decaying,
        _ => Trend::NotDecaying,
    }
}

/// Estimates the mass of each family member along an ensemble and classifies
/// the trend per member.
pub fn sweeping_diagnostic<P, F, I>(
    model: &P,
    initial: I,
    family: &F,
    checkpoints: &[usize],
    n_traj: usize,
    rng: &RandomStream,
) -> Result<SweepingReport>
where
    P: MarkovProcess,
    F: AdmissibleFamily<State = P::State>,
    I: Fn(&mut RandomStream) -> Result<P::State> + Sync,
{
    if !checkpoints.contains(&0) {
        return Err(Error::InvalidArgument("checkpoints must include 0".into()));
    }
    let snaps = run_ensemble(model, initial, n_traj, checkpoints, rng)?;
    Ok(sweeping_from_snapshots(family, &snaps))
}

/// Builds a sweeping report from already simulated checkpoint snapshots.
pub fn sweeping_from_snapshots<S, F>(family: &F, snaps: &[TrajectorySnapshot<S>]) -> SweepingReport
where
    F: AdmissibleFamily<State = S>,
{
    let n_traj = snaps.first().map_or(0, |s| s.states.len());
    let nf = n_traj as f64;
    let mut masses = Vec::with_capacity(family.len() * snaps.len());
    let mut trends = Vec::with_capacity(family.len());
    for i in 0..family.len() {
        let start = masses.len();
        for snap in snaps {
            let hits = snap.states.iter().filter(|x| family.contains(i, x)).count();
            let p = hits as f64 / nf;
            masses.push(MemberMass {
                member_id: i,
                member_param: family.param(i),
                checkpoint: snap.step_index,
                mass: p,
                std_error: (p * (1.0 - p) / nf).sqrt(),
            });
        }
        trends.push(MemberTrend { member_id: i, member_param: family.param(i), trend: classify_trend(&masses[start..]) });
    }
    SweepingReport {
        n_trajectories: n_traj,
        checkpoints: snaps.iter().map(|s| s.step_index).collect(),
        masses,
        trends,
        trend_rule: format!(
            "decaying: mass non-increasing between consecutive checkpoints within {TREND_SLACK_SE} combined std errors, and final < initial"
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockProximity {
    pub checkpoint: usize,
    pub fraction: f64,
}

/// Fraction of trajectories with `max_i |φ_i|² ≥ 1 − δ` at each checkpoint.
///
/// Exploratory only: there is no pass/fail attached to this quantity.
pub fn fock_proximity_diagnostic<I>(
    ensemble: &MeasurementEnsemble,
    initial: I,
    n_traj: usize,
    checkpoints: &[usize],
    delta: f64,
    rng: &RandomStream,
) -> Result<Vec<FockProximity>>
where
    I: Fn(&mut RandomStream) -> Result<QuantumState> + Sync,
{
    if ensemble.diagonal_table().is_none() {
        return Err(Error::Unsupported("Fock proximity is defined for diagonal ensembles".into()));
    }
    let model: IfsModel = ensemble.to_ifs_model();
    let snaps = run_ensemble(&model, initial, n_traj, checkpoints, rng)?;
    Ok(fock_proximity_from_snapshots(&snaps, delta))
}

pub fn fock_proximity_from_snapshots(snaps: &[TrajectorySnapshot<QuantumState>], delta: f64) -> Vec<FockProximity> {
    snaps
        .iter()
        .map(|s| FockProximity {
            checkpoint: s.step_index,
            fraction: s.states.iter().filter(|x| x.max_population() >= 1.0 - delta).count() as f64 / s.states.len() as f64,
        })
        .collect()
}
