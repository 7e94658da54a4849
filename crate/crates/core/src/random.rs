//! Reproducible random test objects keyed by `(seed, ...)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::Point;
use crate::space::{monomial_norm_sq, MixedState, MultiIndex, PolyFunction, SpaceParams};
use crate::Result;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn gaussian(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

/// Unit-norm polynomial of degree at most `degree` whose coordinates in the
/// orthonormal monomial basis are iid complex Gaussians.
pub fn random_polynomial(params: &SpaceParams, degree: usize, seed: u64) -> Result<PolyFunction> {
    let params = if degree > params.degree_cap() { params.with_degree_cap(degree) } else { params.clone() };
    let mut r = rng(seed, degree as u64);
    let coeffs: Vec<_> = MultiIndex::enumerate(params.n(), degree)
        .into_iter()
        .map(|m| {
            let c = gaussian(&mut r) / monomial_norm_sq(&m, &params).sqrt();
            (m, c)
        })
        .collect();
    PolyFunction::new(params, coeffs)?.normalized()
}

/// Uniformly distributed point of the Euclidean ball of radius `bound < 1`.
pub fn random_point(n: usize, bound: f64, seed: u64) -> Point {
    let mut r = rng(seed, u64::MAX);
    let v: Vec<Complex64> = (0..n).map(|_| gaussian(&mut r)).collect();
    let len = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let u: f64 = r.random();
    let rad = bound * u.powf(1.0 / (2 * n) as f64);
    Point::new(v.into_iter().map(|c| c * (rad / len)).collect()).expect("radius below one")
}

/// Random mixed state of the given rank built from random polynomials.
pub fn random_mixed(params: &SpaceParams, degree: usize, rank: usize, seed: u64) -> Result<MixedState> {
    let mut r = rng(seed, u64::MAX - 1);
    let weights: Vec<f64> = (0..rank).map(|_| r.random::<f64>() + 0.1).collect();
    let states = (0..rank)
        .map(|i| random_polynomial(params, degree, seed.wrapping_add(1 + i as u64)))
        .collect::<Result<Vec<_>>>()?;
    MixedState::new(weights, states)
}
