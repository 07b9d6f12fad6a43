use crate::error::{Error, Result};
use crate::numerics::RandomStream;
use crate::state::{QuantumState, C64};

/// Draws a state uniformly from `S_N`, i.e. from the real sphere `S^{2N-1}`.
///
/// Normalised standard Gaussian `2N`-vectors are exactly uniform by rotation
/// invariance.
pub fn sample_uniform_sphere(dim_complex: usize, rng: &mut RandomStream) -> Result<QuantumState> {
    if dim_complex == 0 {
        return Err(Error::InvalidArgument("dim_complex must be >= 1".into()));
    }
    loop {
        let v: Vec<C64> = (0..dim_complex)
            .map(|_| {
                let re = rng.standard_normal();
                let im = rng.standard_normal();
                C64::new(re, im)
            })
            .collect();
        // zero vector has probability zero; redraw if it happens
        if v.iter().any(|c| c.norm_sqr() > 0.0) {
            return QuantumState::normalized(v);
        }
    }
}

/// `vol(S^{2N-1}) = 2π^N / (N-1)!`.
pub fn sphere_volume(dim_complex: usize) -> f64 {
    let n = dim_complex as i32;
    let fact: f64 = (1..dim_complex).map(|k| k as f64).product();
    2.0 * std::f64::consts::PI.powi(n) / fact
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_is_phase() {
        let mut rng = RandomStream::new(5, 0);
        for _ in 0..100 {
            let s = sample_uniform_sphere(1, &mut rng).unwrap();
            assert!((s.components()[0].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_dim_rejected() {
        let mut rng = RandomStream::new(5, 0);
        assert!(matches!(sample_uniform_sphere(0, &mut rng), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn volumes() {
        assert!((sphere_volume(1) - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((sphere_volume(2) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-13);
        assert!((sphere_volume(3) - std::f64::consts::PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn moments_match_symmetry() {
        // E[x_j] = 0 and E|φ_1|² = 1/N for the uniform law
        let n = 1_000_000;
        let mut rng = RandomStream::new(42, 0);
        let mut sum = [0.0f64; 4];
        let mut sumsq = [0.0f64; 4];
        let mut pop = 0.0;
        let mut pop_sq = 0.0;
        for _ in 0..n {
            let s = sample_uniform_sphere(2, &mut rng).unwrap();
            let r = s.realify();
            for j in 0..4 {
                sum[j] += r[j];
                sumsq[j] += r[j] * r[j];
            }
            let p = s.components()[0].norm_sqr();
            pop += p;
            pop_sq += p * p;
        }
        let nf = n as f64;
        for j in 0..4 {
            let mean = sum[j] / nf;
            let se = ((sumsq[j] / nf - mean * mean) / nf).sqrt();
            assert!(mean.abs() < 4.0 * se, "coordinate {j}: mean {mean}, se {se}");
        }
        let mean = pop / nf;
        let se = ((pop_sq / nf - mean * mean) / nf).sqrt();
        assert!((mean - 0.5).abs() < 4.0 * se);
    }
}
