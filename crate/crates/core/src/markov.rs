//! Markov processes driven by state-dependent iterated function systems.
//!
//! [`MarkovProcess`] is the interface the certificate checker and the
//! ensemble runner work against. [`IfsModel`] implements it for `K` invertible
//! branch maps on the complex unit sphere with place-dependent weights
//! `p_k(x)`, where
//!
//! ```text
//! P(x, A)  = Σ_k p_k(x) 1_A(S_k x)
//! 𝒫ρ(x)    = Σ_k p_k(S_k⁻¹x) ρ(S_k⁻¹x) |det DS_k⁻¹(x)|
//! ```

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{block_moments, mc_integral_on_sphere, MonteCarloEstimate, RandomStream, MAX_REJECTED_FRACTION};
use crate::state::QuantumState;

/// Tolerance on `Σ_k p_k(x) = 1` when stepping.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;
/// Largest norm drift tolerated before renormalising a sphere state.
pub const NORM_DRIFT_TOL: f64 = 1e-8;

/// Membership test for a measurable set.
pub trait Region<S>: Sync {
    fn contains(&self, x: &S) -> bool;
}

/// A non-negative density given as an evaluation callback.
///
/// Evaluations on the singular set return a non-finite value;
/// `singular_distance` describes that set so samplers can keep clear of it.
pub trait Density<S>: Sync {
    fn eval(&self, x: &S) -> f64;

    fn singular_distance(&self, _x: &S) -> f64 {
        f64::INFINITY
    }
}

impl<S, F> Density<S> for F
where
    F: Fn(&S) -> f64 + Sync,
{
    fn eval(&self, x: &S) -> f64 {
        self(x)
    }
}

/// A discrete-time Markov process with a pointwise Frobenius–Perron operator.
pub trait MarkovProcess: Sync {
    type State: Clone + Send + Sync + fmt::Debug;
    type Region: Region<Self::State>;

    /// One transition; returns the branch taken (0-based) and the next state.
    fn step(&self, x: &Self::State, rng: &mut RandomStream) -> Result<(usize, Self::State)>;

    /// `(𝒫ρ)(x)`.
    fn perron(&self, rho: &dyn Density<Self::State>, x: &Self::State) -> Result<f64>;

    /// `P(x, A)`.
    fn transition_probability(&self, x: &Self::State, region: &Self::Region) -> Result<f64>;

    /// `∫_A f dm` with respect to the reference measure of the state space.
    fn integrate_over(
        &self,
        f: &(dyn Fn(&Self::State) -> f64 + Sync),
        region: &Self::Region,
        n: usize,
        rng: &RandomStream,
    ) -> Result<MonteCarloEstimate>;
}

/// One invertible branch `S_k` of an iterated function system.
pub trait IfsBranch: Send + Sync {
    fn forward(&self, x: &QuantumState) -> Result<QuantumState>;
    fn inverse(&self, x: &QuantumState) -> Result<QuantumState>;
    /// `|det DS_k⁻¹(x)|` on the tangent space of the sphere.
    fn inv_jacobian_det(&self, x: &QuantumState) -> Result<f64>;
    /// `p_k(x)`.
    fn weight(&self, x: &QuantumState) -> f64;
}

type StateMap = dyn Fn(&QuantumState) -> Result<QuantumState> + Send + Sync;
type StateScalar = dyn Fn(&QuantumState) -> f64 + Send + Sync;

/// A branch assembled from closures.
pub struct FnBranch {
    pub forward: Box<StateMap>,
    pub inverse: Box<StateMap>,
    pub inv_jacobian_det: Box<StateScalar>,
    pub weight: Box<StateScalar>,
}

impl FnBranch {
    /// The identity map with constant weight.
    pub fn identity(weight: f64) -> Self {
        Self {
            forward: Box::new(|x| Ok(x.clone())),
            inverse: Box::new(|x| Ok(x.clone())),
            inv_jacobian_det: Box::new(|_| 1.0),
            weight: Box::new(move |_| weight),
        }
    }
}

impl IfsBranch for FnBranch {
    fn forward(&self, x: &QuantumState) -> Result<QuantumState> {
        (self.forward)(x)
    }
    fn inverse(&self, x: &QuantumState) -> Result<QuantumState> {
        (self.inverse)(x)
    }
    fn inv_jacobian_det(&self, x: &QuantumState) -> Result<f64> {
        Ok((self.inv_jacobian_det)(x))
    }
    fn weight(&self, x: &QuantumState) -> f64 {
        (self.weight)(x)
    }
}

/// A state-dependent IFS on the complex unit sphere `S_N`.
#[derive(Clone)]
pub struct IfsModel {
    dim: usize,
    branches: Vec<Arc<dyn IfsBranch>>,
}

impl fmt::Debug for IfsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IfsModel")
            .field("dim", &self.dim)
            .field("branch_count", &self.branches.len())
            .finish()
    }
}

impl IfsModel {
    pub fn new(dim: usize, branches: Vec<Arc<dyn IfsBranch>>) -> Result<Self> {
        if dim == 0 || branches.is_empty() {
            return Err(Error::InvalidArgument("IFS needs dim >= 1 and at least one branch".into()));
        }
        Ok(Self { dim, branches })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn branch(&self, k: usize) -> &dyn IfsBranch {
        self.branches[k].as_ref()
    }

    pub fn weights(&self, x: &QuantumState) -> Vec<f64> {
        self.branches.iter().map(|b| b.weight(x)).collect()
    }

    /// Checks the model invariants at `x`: non-negative weights summing to one
    /// within 1e-12, and `S_k⁻¹(S_k x) = x` within 1e-10.
    pub fn check_invariants_at(&self, x: &QuantumState) -> Result<()> {
        let w = self.weights(x);
        if w.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::ModelInconsistency(format!("negative or non-finite weight {w:?}")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::ModelInconsistency(format!("weights sum to {sum}")));
        }
        for (k, b) in self.branches.iter().enumerate() {
            let back = b.inverse(&b.forward(x)?)?;
            let dev = back
                .components()
                .iter()
                .zip(x.components())
                .map(|(a, c)| (a - c).norm())
                .fold(0.0, f64::max);
            if dev > 1e-10 {
                return Err(Error::ModelInconsistency(format!("branch {k}: inverse(forward(x)) deviates by {dev}")));
            }
        }
        Ok(())
    }

    pub fn transition_probability(&self, x: &QuantumState, region: &SphereRegion) -> Result<f64> {
        let mut p = 0.0;
        for b in &self.branches {
            if region.contains(&b.forward(x)?) {
                p += b.weight(x);
            }
        }
        Ok(p.clamp(0.0, 1.0))
    }

    /// `𝒫ρ(x) = Σ_k p_k(S_k⁻¹x) ρ(S_k⁻¹x) |det DS_k⁻¹(x)|`.
    pub fn perron_pointwise(&self, rho: &dyn Density<QuantumState>, x: &QuantumState) -> Result<f64> {
        let mut total = 0.0;
        for (k, b) in self.branches.iter().enumerate() {
            let pre = b.inverse(x)?;
            let r = rho.eval(&pre);
            if !r.is_finite() {
                return Err(Error::SingularEvaluation { branch: k });
            }
            total += b.weight(&pre) * r * b.inv_jacobian_det(x)?;
        }
        Ok(total)
    }

    pub fn step(&self, x: &QuantumState, rng: &mut RandomStream) -> Result<(usize, QuantumState)> {
        let w = self.weights(x);
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL || w.iter().any(|&p| p < 0.0) {
            return Err(Error::ModelInconsistency(format!("weights {w:?} do not form a distribution")));
        }
        let k = pick_branch(&w, rng.uniform());
        let next = self.branches[k].forward(x)?;
        let drift = (next.norm() - 1.0).abs();
        if drift > NORM_DRIFT_TOL {
            return Err(Error::Integrity(format!("norm drift {drift} after branch {k}")));
        }
        Ok((k, QuantumState::normalized(next.into_components())?))
    }
}

/// Inverse-CDF walk over cumulative weights with one uniform draw.
pub(crate) fn pick_branch(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    // u landed in the rounding gap at the top; take the last positive branch
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// Measurable subsets of the sphere.
#[derive(Clone)]
pub enum SphereRegion {
    Whole,
    /// `A_ε = {φ : min_i |φ_i| ≥ ε}`.
    MinModulusAtLeast(f64),
    Predicate(Arc<dyn Fn(&QuantumState) -> bool + Send + Sync>),
}

impl fmt::Debug for SphereRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SphereRegion::Whole => write!(f, "Whole"),
            SphereRegion::MinModulusAtLeast(e) => write!(f, "MinModulusAtLeast({e})"),
            SphereRegion::Predicate(_) => write!(f, "Predicate(..)"),
        }
    }
}

impl Region<QuantumState> for SphereRegion {
    fn contains(&self, x: &QuantumState) -> bool {
        match self {
            SphereRegion::Whole => true,
            SphereRegion::MinModulusAtLeast(eps) => x.min_modulus() >= *eps,
            SphereRegion::Predicate(p) => p(x),
        }
    }
}

impl MarkovProcess for IfsModel {
    type State = QuantumState;
    type Region = SphereRegion;

    fn step(&self, x: &QuantumState, rng: &mut RandomStream) -> Result<(usize, QuantumState)> {
        IfsModel::step(self, x, rng)
    }

    fn perron(&self, rho: &dyn Density<QuantumState>, x: &QuantumState) -> Result<f64> {
        self.perron_pointwise(rho, x)
    }

    fn transition_probability(&self, x: &QuantumState, region: &SphereRegion) -> Result<f64> {
        IfsModel::transition_probability(self, x, region)
    }

    fn integrate_over(
        &self,
        f: &(dyn Fn(&QuantumState) -> f64 + Sync),
        region: &SphereRegion,
        n: usize,
        rng: &RandomStream,
    ) -> Result<MonteCarloEstimate> {
        mc_integral_on_sphere(|x| if region.contains(x) { f(x) } else { 0.0 }, self.dim, n, rng)
    }
}

/// States of every trajectory at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySnapshot<S> {
    pub step_index: usize,
    pub states: Vec<S>,
}

/// Runs `n_traj` independent trajectories and records them at `checkpoints`.
///
/// Trajectory `i` draws its initial state and every step from
/// `rng.substream(i)`, so the output is independent of the worker count.
pub fn run_ensemble<P, I>(
    model: &P,
    initial: I,
    n_traj: usize,
    checkpoints: &[usize],
    rng: &RandomStream,
) -> Result<Vec<TrajectorySnapshot<P::State>>>
where
    P: MarkovProcess,
    I: Fn(&mut RandomStream) -> Result<P::State> + Sync,
{
    if n_traj == 0 {
        return Err(Error::InvalidArgument("n_traj must be positive".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("checkpoints must be sorted ascending".into()));
    }
    let trajectories: Vec<Vec<P::State>> = (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let mut stream = rng.substream(i as u64);
            let mut x = initial(&mut stream)?;
            let mut n = 0;
            let mut out = Vec::with_capacity(checkpoints.len());
            for &c in checkpoints {
                while n < c {
                    x = model.step(&x, &mut stream)?.1;
                    n += 1;
                }
                out.push(x.clone());
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut snapshots: Vec<TrajectorySnapshot<P::State>> = checkpoints
        .iter()
        .map(|&c| TrajectorySnapshot { step_index: c, states: Vec::with_capacity(n_traj) })
        .collect();
    for traj in trajectories {
        for (snap, x) in snapshots.iter_mut().zip(traj) {
            snap.states.push(x);
        }
    }
    Ok(snapshots)
}

/// Monte Carlo check of `∫_A 𝒫ρ dm = ∫ ρ(x) P(x, A) dm`.
///
/// Returns `LHS − RHS` with the two standard errors added in quadrature. The
/// left side integrates `𝒫ρ` over `A`; the right side averages `P(x, A)` over
/// `x ~ ρ` drawn by `rho_sampler`. The two sides use independent substreams.
pub fn duality_residual<P, S>(
    model: &P,
    rho: &dyn Density<P::State>,
    rho_sampler: S,
    region: &P::Region,
    n_mc: usize,
    rng: &RandomStream,
) -> Result<MonteCarloEstimate>
where
    P: MarkovProcess,
    S: Fn(&mut RandomStream) -> Result<P::State> + Sync,
{
    let lhs = duality_lhs(model, rho, region, n_mc, &rng.substream(0))?;
    let rhs = duality_rhs(model, rho_sampler, region, n_mc, &rng.substream(1))?;
    Ok(MonteCarloEstimate {
        value: lhs.value - rhs.value,
        std_error: lhs.std_error.hypot(rhs.std_error),
        n_samples: n_mc,
        rejected: lhs.rejected + rhs.rejected,
    })
}

pub(crate) fn duality_lhs<P: MarkovProcess>(
    model: &P,
    rho: &dyn Density<P::State>,
    region: &P::Region,
    n_mc: usize,
    rng: &RandomStream,
) -> Result<MonteCarloEstimate> {
    let integrand = |x: &P::State| model.perron(rho, x).unwrap_or(f64::NAN);
    model.integrate_over(&integrand, region, n_mc, rng)
}

pub(crate) fn duality_rhs<P, S>(
    model: &P,
    rho_sampler: S,
    region: &P::Region,
    n_mc: usize,
    rng: &RandomStream,
) -> Result<MonteCarloEstimate>
where
    P: MarkovProcess,
    S: Fn(&mut RandomStream) -> Result<P::State> + Sync,
{
    let m = block_moments(n_mc, rng, |s| match rho_sampler(s) {
        Ok(x) => model.transition_probability(&x, region).unwrap_or(f64::NAN),
        Err(_) => f64::NAN,
    });
    if m.rejected as f64 > MAX_REJECTED_FRACTION * n_mc as f64 || m.count == 0 {
        return Err(Error::SingularityExposure { rejected: m.rejected, n: n_mc });
    }
    Ok(MonteCarloEstimate { value: m.mean, std_error: m.std_error(), n_samples: m.count, rejected: m.rejected })
}
