//! Shared numerical substrate: random streams, sphere sampling, finite
//! differences, quadrature and Monte Carlo integration.

mod fd;
mod montecarlo;
mod quadrature;
mod rng;
mod sphere;

pub use fd::{fd_jacobian_det_on_sphere, tangent_basis, FdJacobian, DEFAULT_FD_STEP};
pub(crate) use montecarlo::block_moments;
pub use montecarlo::{mc_integral_on_sphere, MonteCarloEstimate, MAX_REJECTED_FRACTION, MC_BLOCK};
pub use quadrature::integrate_1d;
pub use rng::RandomStream;
pub use sphere::{sample_uniform_sphere, sphere_volume};
