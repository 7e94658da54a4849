use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::space::{ln_gamma, SpaceParams};
use crate::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 200_000;

/// Smallest sample count for which a standard error is reported.
pub const MIN_SAMPLES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Equal-probability strata of the radial proposal; `None` for plain sampling.
    #[serde(default)]
    pub strata: Option<usize>,
    /// Each base draw is replicated under `z -> e^{2πik/M} z`, `k < M`.
    #[serde(default)]
    pub rotations: Option<usize>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { n_samples: DEFAULT_SAMPLES, seed: 0, strata: None, rotations: None }
    }
}

impl McConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self { n_samples, seed, strata: None, rotations: None }
    }

    pub fn stratified(mut self, strata: usize) -> Self {
        self.strata = Some(strata);
        self
    }

    /// Orbit averaging under `M` equally spaced diagonal rotations; `n_samples`
    /// counts every rotated copy and must be a multiple of `M`.
    pub fn rotated(mut self, m: usize) -> Self {
        self.rotations = Some(m);
        self
    }

    /// Same configuration with `factor` times as many samples.
    pub fn scaled(&self, factor: usize) -> Self {
        Self { n_samples: self.n_samples * factor, ..self.clone() }
    }

    /// Same configuration on an independent stream of randomness.
    pub fn reseeded(&self, salt: u64) -> Self {
        Self { seed: self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15), ..self.clone() }
    }

    /// Returns `(strata, rotations)`.
    fn validate(&self) -> Result<(usize, usize)> {
        let strata = self.strata.unwrap_or(1).max(1);
        let rot = self.rotations.unwrap_or(1).max(1);
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::Invalid(format!("need at least {MIN_SAMPLES} samples, got {}", self.n_samples)));
        }
        if !self.n_samples.is_multiple_of(rot) {
            return Err(Error::Invalid(format!("{} samples are not a multiple of {rot} rotations", self.n_samples)));
        }
        if self.n_samples / rot < 2 * strata {
            return Err(Error::Invalid(format!("{} base draws cannot fill {strata} strata", self.n_samples / rot)));
        }
        Ok((strata, rot))
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { mean: value, stderr: 0.0, n: 0 }
    }

    /// Whether `value` lies within `k` standard errors (or `abs_tol`) of the mean.
    pub fn agrees_with(&self, value: f64, k: f64, abs_tol: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr + abs_tol
    }
}

/// One draw from the radial proposal: `|z|^2 ~ Beta(N, α - N)` and a uniform
/// direction on the sphere.
#[derive(Clone, Debug)]
pub struct Sample {
    pub point: Point,
    /// `1 - |z|^2`, drawn directly so it keeps full relative precision.
    pub gap: f64,
    /// Importance weight `(1 - |z|^2)^{-α} / c_α`.
    pub weight: f64,
    /// Contribution of this sample to the mean: `1 / (S n_h M)`.
    pub share: f64,
    pub stratum: usize,
}

/// A frozen set of proposal draws. `∫ F dm ≈ Σ_j share_j weight_j F(z_j)`.
#[derive(Clone, Debug)]
pub struct SampleSet {
    params: SpaceParams,
    cfg: McConfig,
    samples: Vec<Sample>,
    strata: usize,
    /// Consecutive runs of this many samples form one rotation orbit.
    rotations: usize,
}

impl SampleSet {
    /// Draws are keyed by `(seed, index)` and are independent of the thread schedule.
    pub fn draw(params: &SpaceParams, cfg: &McConfig) -> Result<Self> {
        let (strata, rot) = cfg.validate()?;
        let bases = cfg.n_samples / rot;
        let sampler = RadialSampler::new(params);
        let counts: Vec<usize> = (0..strata).map(|h| (bases - h).div_ceil(strata)).collect();
        let base = ChaCha8Rng::seed_from_u64(cfg.seed);
        let turns: Vec<Complex64> =
            (0..rot).map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / rot as f64)).collect();
        let samples = (0..bases)
            .into_par_iter()
            .flat_map_iter(|b| {
                let mut rng = base.clone();
                rng.set_stream(b as u64);
                let h = b % strata;
                let u = (h as f64 + open_unit(&mut rng)) / strata as f64;
                let (point, gap) = sampler.draw(u, &mut rng);
                let weight = (-params.alpha() * gap.ln() - params.ln_c_alpha()).exp();
                let share = 1.0 / (strata as f64 * counts[h] as f64 * rot as f64);
                turns.iter().map(move |&w| {
                    let point = if rot == 1 {
                        point.clone()
                    } else {
                        Point::from_coords_unchecked(point.coords().iter().map(|c| c * w).collect())
                    };
                    Sample { point, gap, weight, share, stratum: h }
                })
            })
            .collect();
        Ok(Self { params: params.clone(), cfg: cfg.clone(), samples, strata, rotations: rot })
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn config(&self) -> &McConfig {
        &self.cfg
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `∫ F dm` for a point function `F(z, 1 - |z|^2)`.
    pub fn integrate<F>(&self, f: F) -> Result<Estimate>
    where
        F: Fn(&Point, f64) -> f64 + Sync,
    {
        let values: Vec<f64> = self.samples.par_iter().map(|s| f(&s.point, s.gap) * s.weight).collect();
        self.estimate_contributions(&values)
    }

    /// Estimate from per-sample weighted integrand values `F(z_j) · weight_j`.
    pub fn estimate_contributions(&self, values: &[f64]) -> Result<Estimate> {
        assert_eq!(values.len(), self.samples.len(), "one value per sample");
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            let z = self.samples[i].point.coords().iter().map(|c| [c.re, c.im]).collect();
            return Err(Error::IntegrationFailure { z });
        }
        let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); self.strata];
        for (orbit, s) in values.chunks(self.rotations).zip(self.samples.iter().step_by(self.rotations)) {
            buckets[s.stratum].push(pairwise_sum(orbit) / self.rotations as f64);
        }
        let mut mean = 0.0;
        let mut var = 0.0;
        for b in &buckets {
            let m = b.len() as f64;
            let mu = pairwise_sum(b) / m;
            let dev: Vec<f64> = b.iter().map(|x| (x - mu) * (x - mu)).collect();
            let s2 = if b.len() > 1 { pairwise_sum(&dev) / (m - 1.0) } else { 0.0 };
            mean += mu;
            var += s2 / m;
        }
        let s = self.strata as f64;
        Ok(Estimate { mean: mean / s, stderr: var.sqrt() / s, n: values.len() })
    }
}

/// `∫_{B_N} F dm` by importance sampling from the radial proposal.
pub fn mc_integrate_invariant<F>(f: F, params: &SpaceParams, cfg: &McConfig) -> Result<Estimate>
where
    F: Fn(&Point, f64) -> f64 + Sync,
{
    SampleSet::draw(params, cfg)?.integrate(f)
}

/// Fixed-shape pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Inverse-CDF sampler for `1 - |z|^2 ~ Beta(α - N, N)`.
///
/// For integer `N` the CDF is `I_g(β, N) = g^β Σ_{j<N} (β)_j / j! (1 - g)^j`.
struct RadialSampler {
    n: usize,
    beta: f64,
    /// `(β)_j / j!` for `j < N`
    poch: Vec<f64>,
    ln_norm: f64,
}

impl RadialSampler {
    fn new(params: &SpaceParams) -> Self {
        let n = params.n();
        let beta = params.beta();
        let mut poch = Vec::with_capacity(n);
        let mut acc = 1.0;
        for j in 0..n {
            poch.push(acc);
            acc *= (beta + j as f64) / (j as f64 + 1.0);
        }
        let ln_norm = ln_gamma(beta + n as f64) - ln_gamma(beta) - ln_gamma(n as f64);
        Self { n, beta, poch, ln_norm }
    }

    fn cdf(&self, g: f64) -> f64 {
        let q = 1.0 - g;
        let mut s = 0.0;
        let mut qp = 1.0;
        for c in &self.poch {
            s += c * qp;
            qp *= q;
        }
        g.powf(self.beta) * s
    }

    /// Density in the log variable `x = ln g`: `g · pdf(g)`.
    fn dcdf_dlog(&self, g: f64) -> f64 {
        (self.ln_norm + self.beta * g.ln() + (self.n as f64 - 1.0) * (1.0 - g).ln()).exp()
    }

    fn invert(&self, u: f64) -> f64 {
        let lu = u.ln();
        if self.n == 1 {
            return (lu / self.beta).exp();
        }
        let total: f64 = self.poch.iter().sum();
        // g^β <= F(g) <= g^β Σ poch
        let mut hi = (lu / self.beta).min(0.0);
        let mut lo = (lu - total.ln()) / self.beta;
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let g = x.exp();
            let f = self.cdf(g) - u;
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.dcdf_dlog(g);
            let mut next = x - f / d;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() < 1e-15 * x.abs().max(1e-300) || hi - lo < 1e-16 {
                x = next;
                break;
            }
            x = next;
        }
        x.exp()
    }

    fn draw(&self, u: f64, rng: &mut impl Rng) -> (Point, f64) {
        let gap = self.invert(u);
        let t = (1.0 - gap).max(0.0);
        let mut dir: Vec<Complex64> = (0..self.n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm: f64 = dir.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let scale = t.sqrt() / norm;
        for c in &mut dir {
            *c *= scale;
        }
        (Point::from_coords_unchecked(dir), gap)
    }
}
