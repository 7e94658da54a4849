//! Deterministic radial quadrature, importance-sampled Monte Carlo against
//! the invariant measure, and the closed-form sharp constants.

mod gauss;
mod mc;
mod radial;
mod sharp;

pub use gauss::gauss_legendre;
pub use mc::{mc_integrate_invariant, pairwise_sum, Estimate, McConfig, Sample, SampleSet, DEFAULT_SAMPLES};
pub use radial::{radial_integrate, radial_integrate_with_breaks, RadialPoint, DEFAULT_NODES};
pub use sharp::{entropy_lower_bound, j_prime, j_second, j_value, sharp_rhs};
