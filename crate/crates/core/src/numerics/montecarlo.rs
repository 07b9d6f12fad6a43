use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sample_uniform_sphere, sphere_volume, RandomStream};
use crate::state::QuantumState;

/// Samples per block; block `b` always draws from substream `b`, so results do
/// not depend on how blocks are scheduled across threads.
pub const MC_BLOCK: usize = 8192;

/// Largest tolerated fraction of non-finite integrand evaluations.
pub const MAX_REJECTED_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    /// Samples dropped because the integrand was non-finite there.
    #[serde(default)]
    pub rejected: usize,
}

impl MonteCarloEstimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0, n_samples: 1, rejected: 0 }
    }
}

/// Running mean/variance (Welford), merged with Chan's formula.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub count: usize,
    pub mean: f64,
    pub m2: f64,
    pub rejected: usize,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        if !x.is_finite() {
            self.rejected += 1;
            return;
        }
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return Moments { rejected: self.rejected + other.rejected, ..other };
        }
        if other.count == 0 {
            return Moments { rejected: self.rejected + other.rejected, ..self };
        }
        let n = self.count + other.count;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.count as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.count as f64 * other.count as f64) / n as f64;
        Moments { count: n, mean, m2, rejected: self.rejected + other.rejected }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

/// Mean of `sample(stream)` over `n` draws, computed in fixed-size blocks in
/// parallel and reduced in block order.
pub(crate) fn block_moments<F>(n: usize, rng: &RandomStream, sample: F) -> Moments
where
    F: Fn(&mut RandomStream) -> f64 + Sync,
{
    let blocks = n.div_ceil(MC_BLOCK);
    let parts: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut stream = rng.substream(b as u64);
            let len = MC_BLOCK.min(n - b * MC_BLOCK);
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(sample(&mut stream));
            }
            m
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge)
}

/// Monte Carlo estimate of `∫ g dm` over `S_N` with the Riemannian measure.
///
/// `value = vol(S^{2N-1}) · mean(g)`. Non-finite evaluations are dropped and
/// counted; more than 0.01% of them is a singularity-exposure error.
pub fn mc_integral_on_sphere<G>(g: G, dim_complex: usize, n: usize, rng: &RandomStream) -> Result<MonteCarloEstimate>
where
    G: Fn(&QuantumState) -> f64 + Sync,
{
    if dim_complex == 0 || n == 0 {
        return Err(Error::InvalidArgument("dimension and sample count must be positive".into()));
    }
    let vol = sphere_volume(dim_complex);
    let m = block_moments(n, rng, |s| {
        let phi = sample_uniform_sphere(dim_complex, s).expect("dimension checked above");
        g(&phi)
    });
    if m.rejected as f64 > MAX_REJECTED_FRACTION * n as f64 || m.count == 0 {
        return Err(Error::SingularityExposure { rejected: m.rejected, n });
    }
    Ok(MonteCarloEstimate {
        value: vol * m.mean,
        std_error: vol * m.std_error(),
        n_samples: m.count,
        rejected: m.rejected,
    })
}
