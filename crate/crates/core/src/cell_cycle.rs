//! Cell-size-at-birth process on the half-line `[σ, ∞)`.
//!
//! The transition kernel is
//!
//! ```text
//!           ⎧ (α/σ)(x/σ)^{-1-α}        σ ≤ y < 1
//! K(x, y) = ⎨ (α/σ)(x/σ)^{-1-α} y^α    1 ≤ y < x/σ
//!           ⎩ 0                        x/σ ≤ y
//! ```
//!
//! so the daughter of a cell of birth size `y` is Pareto distributed with
//! scale `σ·max(1, y)` and shape `α`. The power density `x^{-1+β}` is properly
//! subinvariant whenever `f(β) = α − σ^β(α+β) < 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::{Density, MarkovProcess, Region};
use crate::numerics::{integrate_1d, MonteCarloEstimate, RandomStream};

/// Absolute tolerance of the quadrature behind [`CellCycleModel::perron_quadrature`].
pub const PERRON_QUAD_TOL: f64 = 1e-13;
/// A grid β qualifies when `f(β)` is below this.
pub const BETA_MARGIN_THRESHOLD: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellCycleModel {
    pub alpha: f64,
    pub sigma: f64,
    pub beta: f64,
}

impl CellCycleModel {
    pub fn new(alpha: f64, sigma: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be non-negative, got {beta}")));
        }
        Ok(Self { alpha, sigma, beta })
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        Self::new(self.alpha, self.sigma, beta)
    }

    /// `α ln σ ≥ −1`: the regime in which the process sweeps to infinity.
    pub fn in_sweeping_regime(&self) -> bool {
        self.alpha * self.sigma.ln() >= -1.0
    }

    pub fn kernel_eval(&self, x: f64, y: f64) -> Result<f64> {
        let (a, s) = (self.alpha, self.sigma);
        if !(x >= s) || !(y >= s) {
            return Err(Error::InvalidArgument(format!("kernel arguments must be >= sigma = {s}, got ({x}, {y})")));
        }
        if y >= x / s {
            return Ok(0.0);
        }
        let base = a / s * (x / s).powf(-1.0 - a);
        Ok(if y < 1.0 { base } else { base * y.powf(a) })
    }

    /// Lower end of the support of `K(·, y)`.
    pub fn daughter_support_min(&self, y: f64) -> f64 {
        self.sigma * y.max(1.0)
    }

    /// Inverse-CDF daughter size for a given uniform `u ∈ (0, 1)`.
    pub fn daughter_size_from_uniform(&self, y: f64, u: f64) -> f64 {
        self.daughter_support_min(y) * u.powf(-1.0 / self.alpha)
    }

    pub fn sample_daughter_size(&self, y: f64, rng: &mut RandomStream) -> f64 {
        self.daughter_size_from_uniform(y, rng.uniform_open())
    }

    /// `∫_A K(z, y) dz` for `A = [lo, hi)`.
    pub fn interval_probability(&self, y: f64, lo: f64, hi: f64) -> f64 {
        let cdf = |z: f64| {
            let m = self.daughter_support_min(y);
            if z <= m {
                0.0
            } else if z.is_infinite() {
                1.0
            } else {
                1.0 - (z / m).powf(-self.alpha)
            }
        };
        if hi <= lo {
            return 0.0;
        }
        (cdf(hi) - cdf(lo)).clamp(0.0, 1.0)
    }

    /// `f(β) = α − σ^β (α + β)`.
    pub fn certificate_margin(&self, beta: f64) -> f64 {
        self.alpha - self.sigma.powf(beta) * (self.alpha + beta)
    }

    /// `f'(0) = −α ln σ − 1`.
    pub fn certificate_slope_at_zero(&self) -> f64 {
        -self.alpha * self.sigma.ln() - 1.0
    }

    fn certificate_slope(&self, beta: f64) -> f64 {
        -self.sigma.powf(beta) * (self.sigma.ln() * (self.alpha + beta) + 1.0)
    }

    /// `𝒫(x^{-1+β})(x)` in closed form:
    /// `α/((α+β)σ^β) x^{-1+β} + α(α − σ^β(α+β))/(β(α+β)σ^{-α}) x^{-1-α}`.
    pub fn perron_power_closed_form(&self, x: f64) -> Result<f64> {
        let (a, s, b) = (self.alpha, self.sigma, self.beta);
        if !(b > 0.0) {
            return Err(Error::InvalidArgument("closed form needs beta > 0".into()));
        }
        if s > 1.0 {
            return Err(Error::InvalidArgument("closed form assumes sigma <= 1".into()));
        }
        if !(x >= s) {
            return Err(Error::InvalidArgument(format!("x = {x} is below sigma = {s}")));
        }
        let (c1, c2) = self.power_coefficients();
        Ok(c1 * x.powf(-1.0 + b) + c2 * x.powf(-1.0 - a))
    }

    /// The two coefficients of the closed form, in order.
    pub fn power_coefficients(&self) -> (f64, f64) {
        let (a, s, b) = (self.alpha, self.sigma, self.beta);
        let c1 = a / ((a + b) * s.powf(b));
        let c2 = a * self.certificate_margin(b) / (b * (a + b) * s.powf(-a));
        (c1, c2)
    }

    /// `(𝒫ρ)(x) = ∫_σ^{x/σ} K(x, y) ρ(y) dy` by adaptive quadrature, split at `y = 1`.
    pub fn perron_quadrature(&self, rho: &dyn Density<f64>, x: f64, tol: f64) -> Result<f64> {
        let s = self.sigma;
        if !(x >= s) {
            return Err(Error::InvalidArgument(format!("x = {x} is below sigma = {s}")));
        }
        let upper = x / s;
        let integrand = |y: f64| self.kernel_eval(x, y).unwrap_or(0.0) * rho.eval(&y);
        let mut pieces = vec![s];
        if s < 1.0 && 1.0 < upper {
            pieces.push(1.0);
        }
        pieces.push(upper);
        let mut total = 0.0;
        let share = tol / (pieces.len() - 1) as f64;
        for w in pieces.windows(2) {
            total += integrate_1d(integrand, w[0], w[1], share)?;
        }
        if !total.is_finite() {
            return Err(Error::SingularEvaluation { branch: 0 });
        }
        Ok(total)
    }

    /// Searches for `β ∈ (0, beta_max]` with `f(β) < 0`.
    ///
    /// Scans a log-spaced grid on `[beta_max·1e-4, beta_max]`; if some grid
    /// point has `f < −1e-9`, bisects on the sign of `f'` inside the bracket
    /// around the most negative grid point and returns the refined minimiser.
    pub fn find_beta(&self, beta_max: f64, grid: usize) -> Option<f64> {
        if !(beta_max > 0.0) || grid == 0 {
            return None;
        }
        let lo_exp = (beta_max * 1e-4).ln();
        let hi_exp = beta_max.ln();
        let betas: Vec<f64> = (0..grid)
            .map(|j| {
                if grid == 1 {
                    beta_max
                } else {
                    (lo_exp + (hi_exp - lo_exp) * j as f64 / (grid - 1) as f64).exp()
                }
            })
            .collect();
        let margins: Vec<f64> = betas.iter().map(|&b| self.certificate_margin(b)).collect();
        betas.iter().zip(&margins).find(|(_, &m)| m < BETA_MARGIN_THRESHOLD)?;

        let best = margins
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .expect("grid is non-empty");
        let mut lo = if best == 0 { 0.0 } else { betas[best - 1] };
        let mut hi = if best + 1 == grid { beta_max } else { betas[best + 1] };
        // f' < 0 to the left of the minimiser and > 0 to the right
        if self.certificate_slope(lo) < 0.0 && self.certificate_slope(hi) > 0.0 {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if self.certificate_slope(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * hi {
                    break;
                }
            }
            let refined = 0.5 * (lo + hi);
            if self.certificate_margin(refined) <= margins[best] && refined > 0.0 {
                return Some(refined);
            }
        }
        Some(betas[best])
    }

    /// `∫_σ^a x^{-1+β} dx = (a^β − σ^β)/β`.
    pub fn power_density_mass(&self, a: f64) -> f64 {
        let (s, b) = (self.sigma, self.beta);
        if b == 0.0 {
            (a / s).ln()
        } else {
            (a.powf(b) - s.powf(b)) / b
        }
    }
}

/// The power density `u(x) = x^{-1+β}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerDensity {
    pub beta: f64,
}

impl Density<f64> for PowerDensity {
    fn eval(&self, x: &f64) -> f64 {
        x.powf(-1.0 + self.beta)
    }
}

/// Half-open interval `[lo, hi)`; `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Region<f64> for Interval {
    fn contains(&self, x: &f64) -> bool {
        *x >= self.lo && *x < self.hi
    }
}

impl MarkovProcess for CellCycleModel {
    type State = f64;
    type Region = Interval;

    fn step(&self, y: &f64, rng: &mut RandomStream) -> Result<(usize, f64)> {
        if !(*y >= self.sigma) {
            return Err(Error::Integrity(format!("cell size {y} below sigma {}", self.sigma)));
        }
        let branch = usize::from(*y >= 1.0);
        Ok((branch, self.sample_daughter_size(*y, rng)))
    }

    fn perron(&self, rho: &dyn Density<f64>, x: &f64) -> Result<f64> {
        self.perron_quadrature(rho, *x, PERRON_QUAD_TOL)
    }

    fn transition_probability(&self, y: &f64, region: &Interval) -> Result<f64> {
        if !(*y >= self.sigma) {
            return Err(Error::InvalidArgument(format!("cell size {y} below sigma {}", self.sigma)));
        }
        Ok(self.interval_probability(*y, region.lo, region.hi))
    }

    /// Deterministic quadrature; the returned standard error is zero.
    fn integrate_over(
        &self,
        f: &(dyn Fn(&f64) -> f64 + Sync),
        region: &Interval,
        _n: usize,
        _rng: &RandomStream,
    ) -> Result<MonteCarloEstimate> {
        let lo = region.lo.max(self.sigma);
        if region.hi <= lo {
            return Ok(MonteCarloEstimate::exact(0.0));
        }
        let v = integrate_1d(|x| f(&x), lo, region.hi, 1e-10)?;
        Ok(MonteCarloEstimate::exact(v))
    }
}
