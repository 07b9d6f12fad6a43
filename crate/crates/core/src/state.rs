//! Pure states on the complex unit sphere.

use nalgebra::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Tolerance on `|‖φ‖ - 1|` accepted by [`QuantumState::from_unit`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// A unit-norm vector in `C^N`.
///
/// Global phase is not quotiented out: `φ` and `e^{iθ}φ` are distinct points.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    components: Vec<C64>,
}

impl QuantumState {
    /// Normalises an arbitrary nonzero vector.
    pub fn normalized(components: Vec<C64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("state dimension must be >= 1".into()));
        }
        let norm = norm(&components);
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::NearSingular(format!("cannot normalise vector of norm {norm}")));
        }
        Ok(Self {
            components: components.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// Wraps components that are already unit norm (within [`UNIT_NORM_TOL`]).
    pub fn from_unit(components: Vec<C64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("state dimension must be >= 1".into()));
        }
        let n = norm(&components);
        if (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidArgument(format!("state norm {n} is not 1")));
        }
        Ok(Self { components })
    }

    /// Builds a state from real amplitudes, normalising them.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// The computational basis vector `e_i` (0-based).
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::InvalidArgument(format!("basis index {i} out of range for dimension {dim}")));
        }
        let mut c = vec![C64::new(0.0, 0.0); dim];
        c[i] = C64::new(1.0, 0.0);
        Ok(Self { components: c })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[C64] {
        &self.components
    }

    pub fn into_components(self) -> Vec<C64> {
        self.components
    }

    pub fn norm(&self) -> f64 {
        norm(&self.components)
    }

    /// `min_i |φ_i|`, the distance-like quantity defining the sets `A_ε`.
    pub fn min_modulus(&self) -> f64 {
        self.components.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min)
    }

    /// `max_i |φ_i|²`, used to measure proximity to Fock states.
    pub fn max_population(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max)
    }

    /// Real coordinates in block order `[Re φ; Im φ]`.
    pub fn realify(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; 2 * n];
        for (i, c) in self.components.iter().enumerate() {
            out[i] = c.re;
            out[n + i] = c.im;
        }
        out
    }

    /// Inverse of [`realify`](Self::realify); renormalises.
    pub fn from_realified(coords: &[f64]) -> Result<Self> {
        if coords.len() % 2 != 0 || coords.is_empty() {
            return Err(Error::InvalidArgument("realified length must be a positive even number".into()));
        }
        let n = coords.len() / 2;
        Self::normalized((0..n).map(|i| C64::new(coords[i], coords[n + i])).collect())
    }
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

// Serialized as a list of `[re, im]` pairs.
impl Serialize for QuantumState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.components.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuantumState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        QuantumState::normalized(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .map_err(serde::de::Error::custom)
    }
}
