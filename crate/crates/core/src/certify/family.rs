use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::Density;
use crate::numerics::{integrate_1d, mc_integral_on_sphere, MonteCarloEstimate, RandomStream};
use crate::state::QuantumState;

/// A finite list of nested, finite-measure sets whose union exhausts the
/// state space outside the sweeping target.
pub trait AdmissibleFamily: Sync {
    type State;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The defining parameter of member `i` (`ε` or `a`).
    fn param(&self, i: usize) -> f64;

    fn contains(&self, i: usize, x: &Self::State) -> bool;

    /// `∫_{A_i} u dm`.
    fn integrate(&self, u: &dyn Density<Self::State>, i: usize, n_mc: usize, rng: &RandomStream) -> Result<MonteCarloEstimate>;
}

/// `A_ε = {φ ∈ S_N : min_i |φ_i| ≥ ε}`; the limit set is `∪_i {φ_i = 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereFamily {
    pub dim: usize,
    pub eps: Vec<f64>,
}

impl SphereFamily {
    pub fn new(dim: usize, eps: Vec<f64>) -> Result<Self> {
        if dim == 0 || eps.is_empty() {
            return Err(Error::InvalidArgument("sphere family needs dim >= 1 and at least one member".into()));
        }
        let cap = 1.0 / (dim as f64).sqrt();
        if let Some(e) = eps.iter().find(|&&e| !(0.0..=cap).contains(&e)) {
            return Err(Error::InvalidArgument(format!("epsilon {e} outside [0, 1/sqrt(N)]")));
        }
        Ok(Self { dim, eps })
    }
}

impl AdmissibleFamily for SphereFamily {
    type State = QuantumState;

    fn len(&self) -> usize {
        self.eps.len()
    }

    fn param(&self, i: usize) -> f64 {
        self.eps[i]
    }

    fn contains(&self, i: usize, x: &QuantumState) -> bool {
        x.min_modulus() >= self.eps[i]
    }

    fn integrate(&self, u: &dyn Density<QuantumState>, i: usize, n_mc: usize, rng: &RandomStream) -> Result<MonteCarloEstimate> {
        let eps = self.eps[i];
        mc_integral_on_sphere(|x| if x.min_modulus() >= eps { u.eval(x) } else { 0.0 }, self.dim, n_mc, rng)
    }
}

/// `[σ, a)` on the half-line; the process sweeps to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalFamily {
    pub sigma: f64,
    pub ends: Vec<f64>,
}

impl IntervalFamily {
    pub fn new(sigma: f64, ends: Vec<f64>) -> Result<Self> {
        if ends.is_empty() {
            return Err(Error::InvalidArgument("interval family needs at least one member".into()));
        }
        if let Some(a) = ends.iter().find(|&&a| !(a > sigma && a.is_finite())) {
            return Err(Error::InvalidArgument(format!("interval end {a} must be finite and exceed sigma = {sigma}")));
        }
        Ok(Self { sigma, ends })
    }
}

impl AdmissibleFamily for IntervalFamily {
    type State = f64;

    fn len(&self) -> usize {
        self.ends.len()
    }

    fn param(&self, i: usize) -> f64 {
        self.ends[i]
    }

    fn contains(&self, i: usize, x: &f64) -> bool {
        *x >= self.sigma && *x < self.ends[i]
    }

    fn integrate(&self, u: &dyn Density<f64>, i: usize, _n_mc: usize, _rng: &RandomStream) -> Result<MonteCarloEstimate> {
        let v = integrate_1d(|x| u.eval(&x), self.sigma, self.ends[i], 1e-12)?;
        Ok(MonteCarloEstimate::exact(v))
    }
}

/// Serializable description of an admissible family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AdmissibleFamilySpec {
    SphereMinCoordinate(SphereFamily),
    HalfLineInterval(IntervalFamily),
}

/// Integral of the candidate density over one family member.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberIntegral {
    pub member_id: usize,
    pub param: f64,
    pub value: f64,
    pub std_error: f64,
    pub finite: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Estimates `∫_A u dm` for every member; member `i` uses substream `i`.
pub fn check_local_integrability<F: AdmissibleFamily>(
    u: &dyn Density<F::State>,
    family: &F,
    n_mc: usize,
    rng: &RandomStream,
) -> Vec<MemberIntegral> {
    (0..family.len())
        .map(|i| match family.integrate(u, i, n_mc, &rng.substream(i as u64)) {
            Ok(est) => MemberIntegral {
                member_id: i,
                param: family.param(i),
                value: est.value,
                std_error: est.std_error,
                finite: est.value.is_finite() && est.std_error.is_finite(),
                note: None,
            },
            Err(e) => MemberIntegral {
                member_id: i,
                param: family.param(i),
                value: f64::NAN,
                std_error: f64::NAN,
                finite: false,
                note: Some(e.to_string()),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell_cycle::PowerDensity;
    use crate::numerics::sphere_volume;
    use crate::qnd::FockLyapunovDensity;

    #[test]
    fn power_density_on_interval() {
        let fam = IntervalFamily::new(0.5, vec![2.0]).unwrap();
        let r = check_local_integrability(&PowerDensity { beta: 0.1 }, &fam, 0, &RandomStream::new(0, 0));
        let exact = (2f64.powf(0.1) - 0.5f64.powf(0.1)) / 0.1;
        assert!((r[0].value - exact).abs() < 1e-10);
        assert!((r[0].value - 1.387_404_7).abs() < 1e-6);
        assert!(r[0].finite);
    }

    #[test]
    fn constant_density_gives_member_measure() {
        let fam = IntervalFamily::new(0.5, vec![1.0, 4.0]).unwrap();
        let one = |_: &f64| 1.0;
        let r = check_local_integrability(&one, &fam, 0, &RandomStream::new(0, 0));
        assert!((r[0].value - 0.5).abs() < 1e-12 && (r[1].value - 3.5).abs() < 1e-12);

        let sf = SphereFamily::new(2, vec![0.0]).unwrap();
        let one = |_: &QuantumState| 1.0;
        let r = check_local_integrability(&one, &sf, 1000, &RandomStream::new(0, 0));
        assert!((r[0].value - sphere_volume(2)).abs() < 1e-9);
    }

    #[test]
    fn fock_density_bounded_on_a03() {
        let sf = SphereFamily::new(2, vec![0.3]).unwrap();
        let r = check_local_integrability(&FockLyapunovDensity::new(2), &sf, 200_000, &RandomStream::new(1, 0));
        assert!(r[0].finite);
        assert!(r[0].value > 0.0 && r[0].value <= 0.3f64.powi(-4) * sphere_volume(2));
    }

    #[test]
    fn descriptor_validation() {
        assert!(SphereFamily::new(2, vec![0.8]).is_err());
        assert!(IntervalFamily::new(0.5, vec![0.4]).is_err());
        assert!(IntervalFamily::new(0.5, vec![f64::INFINITY]).is_err());
    }
}
