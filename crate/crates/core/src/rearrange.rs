//! Distribution function `μ(t) = m({u > t})`, decreasing rearrangement
//! `u*(s) = sup{t : μ(t) > s}`, the superlevel integral
//! `I(s) = ∫_{u > u*(s)} u dm`, and the monotone quantity
//! `g(t) = t^{1/α} (μ(t)^{1/N} + 1)`.
//!
//! Everything is read off one frozen [`SampleSet`]: samples sorted by `u`
//! with cumulative importance mass form an exactly monotone empirical `μ`,
//! and `u*` is its generalized inverse found by bisection on the cumulative
//! table.

use std::fmt::Write as _;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::quadrature::{Estimate, McConfig, SampleSet};
use crate::space::Husimi;
use crate::{Error, Result};

/// Levels below this are not resolved; `u*` is clipped here.
pub const T_MIN: f64 = 1e-8;

/// Number of best samples used as starting points when polishing `sup u`.
const POLISH_STARTS: usize = 8;

/// Empirical level structure of one Husimi function.
#[derive(Clone, Debug)]
pub struct LevelProfile {
    samples: SampleSet,
    /// `u(z_j)` indexed by sample.
    u: Vec<f64>,
    /// Sample indices sorted by decreasing `u` (ties by index).
    order: Vec<usize>,
    /// `cumulative[k] = Σ_{i <= k} share·weight` along `order`.
    cumulative: Vec<f64>,
    sup: f64,
    argmax: Point,
    norm_sq: f64,
    alpha: f64,
    n: usize,
}

impl LevelProfile {
    pub fn build<F: Husimi + ?Sized>(f: &F, cfg: &McConfig) -> Result<Self> {
        let samples = SampleSet::draw(f.params(), cfg)?;
        Self::from_samples(f, samples)
    }

    pub fn from_samples<F: Husimi + ?Sized>(f: &F, samples: SampleSet) -> Result<Self> {
        if !samples.params().same_space(f.params()) {
            return Err(Error::ParamsMismatch);
        }
        let u: Vec<f64> = samples.samples().par_iter().map(|s| f.husimi_with_gap(&s.point, s.gap)).collect();
        let mut order: Vec<usize> = (0..u.len()).collect();
        order.sort_by(|&a, &b| u[b].total_cmp(&u[a]).then(a.cmp(&b)));
        let mut acc = 0.0;
        let cumulative = order
            .iter()
            .map(|&i| {
                let s = &samples.samples()[i];
                acc += s.share * s.weight;
                acc
            })
            .collect();
        let starts: Vec<Point> = order.iter().take(POLISH_STARTS).map(|&i| samples.samples()[i].point.clone()).collect();
        let (argmax, sup) = polish_sup(f, &starts);
        let sup = sup.max(order.first().map_or(0.0, |&i| u[i]));
        Ok(Self {
            n: f.params().n(),
            alpha: f.params().alpha(),
            norm_sq: f.norm_sq(),
            samples,
            u,
            order,
            cumulative,
            sup,
            argmax,
        })
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    /// Husimi values at the samples, by sample index.
    pub fn values(&self) -> &[f64] {
        &self.u
    }

    /// Polished approximation of `‖u‖_∞`.
    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn argmax(&self) -> &Point {
        &self.argmax
    }

    /// Largest sampled value of `u`.
    pub fn max_sampled(&self) -> f64 {
        self.order.first().map_or(0.0, |&i| self.u[i])
    }

    /// Point estimate of `μ(t)` from the cumulative table.
    pub fn mu_hat(&self, t: f64) -> f64 {
        let k = self.order.partition_point(|&i| self.u[i] > t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// `μ(t)` with its standard error.
    pub fn mu(&self, t: f64) -> Result<Estimate> {
        if !(t > 0.0) {
            return Err(Error::Invalid(format!("level must be positive, got {t}")));
        }
        self.estimate(|u, _| if u > t { 1.0 } else { 0.0 })
    }

    /// Whether `u*(s)` is resolved above [`T_MIN`].
    pub fn covers(&self, s: f64) -> bool {
        let k = self.cumulative.partition_point(|&c| c <= s);
        k < self.order.len() && self.u[self.order[k]] >= T_MIN
    }

    /// `u*(s)`; `u*(0)` is the polished supremum.
    pub fn u_star(&self, s: f64) -> f64 {
        assert!(s >= 0.0, "u* is defined for s >= 0");
        if s == 0.0 {
            return self.sup;
        }
        let k = self.cumulative.partition_point(|&c| c <= s);
        if k >= self.order.len() || self.u[self.order[k]] < T_MIN {
            warn!("u*({s}) lies below the resolved range; clipped to {T_MIN}");
            return T_MIN;
        }
        self.u[self.order[k]]
    }

    /// `I(s) = ∫_{u > u*(s)} u dm`.
    pub fn superlevel_integral(&self, s: f64) -> Result<Estimate> {
        assert!(s >= 0.0, "I is defined for s >= 0");
        if s == 0.0 {
            return Ok(Estimate { mean: 0.0, stderr: 0.0, n: self.u.len() });
        }
        let thr = self.u_star(s);
        self.estimate(|u, _| if u > thr { u } else { 0.0 })
    }

    /// Central difference `(I(s+h) - I(s-h)) / 2h` with the standard error of
    /// the band estimator.
    pub fn superlevel_slope(&self, s: f64, h: f64) -> Result<Estimate> {
        assert!(s > h && h > 0.0, "need 0 < h < s");
        let hi = self.u_star(s - h);
        let lo = self.u_star(s + h);
        self.estimate(|u, _| if u > lo && u <= hi { u / (2.0 * h) } else { 0.0 })
    }

    /// `g(t) = t^{1/α} (μ(t)^{1/N} + 1)` on the given levels, with a delta-method error band.
    pub fn li_su(&self, levels: &[f64]) -> Result<Vec<LiSuPoint>> {
        let n = self.n as f64;
        levels
            .iter()
            .map(|&t| {
                let mu = self.mu(t)?;
                let scale = t.powf(1.0 / self.alpha);
                let root = mu.mean.max(0.0).powf(1.0 / n);
                let stderr = if mu.mean > 0.0 { scale * root / (n * mu.mean) * mu.stderr } else { 0.0 };
                Ok(LiSuPoint { t, g: scale * (root + 1.0), stderr })
            })
            .collect()
    }

    /// CSV with columns `t,mu,stderr`.
    pub fn to_csv(&self, levels: &[f64]) -> Result<String> {
        let mut out = String::from("t,mu,stderr\n");
        for &t in levels {
            let e = self.mu(t)?;
            writeln!(out, "{t:e},{:e},{:e}", e.mean, e.stderr).expect("writing to a String");
        }
        Ok(out)
    }

    /// `m` log-spaced levels from `0.99·sup` down to `max(T_MIN, lowest)`.
    pub fn default_levels(&self, m: usize, lowest: f64) -> Vec<f64> {
        let hi = 0.99 * self.sup;
        let lo = lowest.max(T_MIN).min(hi);
        (0..m)
            .map(|i| {
                let f = if m == 1 { 0.0 } else { i as f64 / (m - 1) as f64 };
                (hi.ln() + f * (lo.ln() - hi.ln())).exp()
            })
            .collect()
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// Estimate of `∫ F(u(z), z) dm` over the frozen sample.
    pub fn estimate(&self, f: impl Fn(f64, usize) -> f64 + Sync) -> Result<Estimate> {
        let values: Vec<f64> = self
            .samples
            .samples()
            .par_iter()
            .zip(self.u.par_iter())
            .enumerate()
            .map(|(j, (s, &u))| {
                let v = f(u, j);
                if v == 0.0 {
                    0.0
                } else {
                    v * s.weight
                }
            })
            .collect();
        self.samples.estimate_contributions(&values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiSuPoint {
    pub t: f64,
    pub g: f64,
    pub stderr: f64,
}

/// For levels in decreasing order, checks that `g` does not decrease by more
/// than `k` combined standard errors between consecutive levels.
pub fn li_su_nonincreasing(points: &[LiSuPoint], k: f64) -> bool {
    points.windows(2).all(|w| {
        let (a, b) = (w[0], w[1]);
        debug_assert!(a.t >= b.t);
        a.g <= b.g + k * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()
    })
}

/// `m({u_f > t})`.
pub fn mu<F: Husimi + ?Sized>(f: &F, t: f64, cfg: &McConfig) -> Result<Estimate> {
    if !(t > 0.0) {
        return Err(Error::Invalid(format!("level must be positive, got {t}")));
    }
    LevelProfile::build(f, cfg)?.mu(t)
}

pub fn u_star<F: Husimi + ?Sized>(f: &F, s: f64, cfg: &McConfig) -> Result<f64> {
    Ok(LevelProfile::build(f, cfg)?.u_star(s))
}

pub fn superlevel_integral<F: Husimi + ?Sized>(f: &F, s: f64, cfg: &McConfig) -> Result<Estimate> {
    LevelProfile::build(f, cfg)?.superlevel_integral(s)
}

pub fn li_su_diagnostic<F: Husimi + ?Sized>(f: &F, levels: &[f64], cfg: &McConfig) -> Result<Vec<LiSuPoint>> {
    LevelProfile::build(f, cfg)?.li_su(levels)
}

/// Local maximization of `u` by compass search in `R^{2N}` from each start;
/// returns the best point found and its value.
pub fn polish_sup<F: Husimi + ?Sized>(f: &F, starts: &[Point]) -> (Point, f64) {
    let n = f.params().n();
    let mut best = (Point::origin(n), f.husimi(&Point::origin(n)));
    for start in starts {
        let (p, v) = compass_ascent(f, start);
        if v > best.1 {
            best = (p, v);
        }
    }
    best
}

fn compass_ascent<F: Husimi + ?Sized>(f: &F, start: &Point) -> (Point, f64) {
    let mut x: Vec<f64> = start.coords().iter().flat_map(|c| [c.re, c.im]).collect();
    let to_point = |x: &[f64]| -> Option<Point> {
        let coords = x.chunks(2).map(|c| num_complex::Complex64::new(c[0], c[1])).collect();
        Point::new(coords).ok()
    };
    let mut val = f.husimi(start);
    let mut step = 0.05;
    let mut iters = 0;
    while step > 1e-10 && iters < 20_000 {
        iters += 1;
        let mut improved = false;
        for k in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[k] += dir * step;
                if let Some(p) = to_point(&y) {
                    let v = f.husimi(&p);
                    if v > val {
                        val = v;
                        x = y;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (to_point(&x).unwrap_or_else(|| start.clone()), val)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::space::{CoherentState, MultiIndex, PolyFunction, SpaceParams};

    fn ground(n: usize, a: f64) -> PolyFunction {
        PolyFunction::constant(SpaceParams::new(n, a).unwrap(), Complex64::new(1.0, 0.0))
    }

    /// Closed-form `μ(t) = (t^{-1/α} - 1)^N` for the ground state.
    fn mu_ground(t: f64, n: usize, a: f64) -> f64 {
        (t.powf(-1.0 / a) - 1.0).powi(n as i32)
    }

    #[test]
    fn ground_state_distribution() {
        let cfg = McConfig::new(100_000, 11);
        let prof = LevelProfile::build(&ground(1, 2.0), &cfg).unwrap();
        let e = prof.mu(0.25).unwrap();
        assert!(e.agrees_with(mu_ground(0.25, 1, 2.0), 3.0, 0.0), "{e:?}");
        assert!((mu_ground(0.25, 1, 2.0) - 1.0).abs() < 1e-15);
        let prof = LevelProfile::build(&ground(2, 3.0), &cfg).unwrap();
        let e = prof.mu(0.125).unwrap();
        assert!(e.agrees_with(1.0, 3.0, 0.0), "{e:?}");
    }

    #[test]
    fn empty_superlevel_set() {
        let p = SpaceParams::new(1, 2.0).unwrap();
        let z = PolyFunction::new(p, [(MultiIndex::new(vec![1]), Complex64::new(1.0, 0.0))]).unwrap();
        // sup u = 4/27 for f = z
        let e = mu(&z, 0.2, &McConfig::new(10_000, 1)).unwrap();
        assert_eq!(e.mean, 0.0);
        assert!(mu(&z, 0.0, &McConfig::new(10_000, 1)).is_err());
    }

    #[test]
    fn rearrangement_of_ground_state() {
        let cfg = McConfig::new(100_000, 5);
        let prof = LevelProfile::build(&ground(1, 2.0), &cfg).unwrap();
        assert!((prof.u_star(1.0) - 0.25).abs() < 0.01);
        assert!((prof.sup() - 1.0).abs() < 1e-12);
        let prof = LevelProfile::build(&ground(2, 3.0), &cfg).unwrap();
        assert!((prof.u_star(1.0) - 0.125).abs() < 0.01);
    }

    #[test]
    fn coherent_sup_is_one() {
        let p = SpaceParams::new(2, 3.0).unwrap();
        let z0 = Point::new(vec![Complex64::new(0.3, 0.2), Complex64::new(-0.1, 0.4)]).unwrap();
        let cs = CoherentState::new(p, z0, 0.7).unwrap();
        let prof = LevelProfile::build(&cs, &McConfig::new(20_000, 2)).unwrap();
        assert!(prof.u_star(0.0) > 1.0 - 1e-9);
        assert!(prof.sup() <= 1.0 + 1e-12);
    }

    #[test]
    fn superlevel_integral_examples() {
        let cfg = McConfig::new(200_000, 9);
        let prof = LevelProfile::build(&ground(1, 2.0), &cfg).unwrap();
        assert_eq!(prof.superlevel_integral(0.0).unwrap().mean, 0.0);
        let e = prof.superlevel_integral(1.0).unwrap();
        assert!(e.agrees_with(0.5, 3.0, 0.0), "{e:?}");
        let e = prof.superlevel_integral(1e4).unwrap();
        assert!(e.agrees_with(1.0, 3.0, 1e-3), "{e:?}");
    }

    #[test]
    fn profile_is_monotone() {
        let p = SpaceParams::new(1, 2.0).unwrap();
        let f = PolyFunction::new(
            p,
            [
                (MultiIndex::new(vec![0]), Complex64::new(0.4, 0.1)),
                (MultiIndex::new(vec![2]), Complex64::new(-0.8, 0.5)),
            ],
        )
        .unwrap()
        .normalized()
        .unwrap();
        let prof = LevelProfile::build(&f, &McConfig::new(20_000, 3)).unwrap();
        let ts: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        assert!(ts.windows(2).all(|w| prof.mu_hat(w[0]) >= prof.mu_hat(w[1])));
        let ss: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        assert!(ss.windows(2).all(|w| prof.u_star(w[0]) >= prof.u_star(w[1])));
        let is: Vec<f64> = ss.iter().map(|&s| prof.superlevel_integral(s).unwrap().mean).collect();
        assert!(is.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn li_su_constant_for_ground_state() {
        let prof = LevelProfile::build(&ground(1, 2.0), &McConfig::new(100_000, 4)).unwrap();
        let pts = prof.li_su(&[0.8, 0.5, 0.2, 0.05]).unwrap();
        for p in &pts {
            assert!((p.g - 1.0).abs() <= 3.0 * p.stderr + 1e-12, "{p:?}");
        }
        assert!(li_su_nonincreasing(&pts, 3.0));
    }

    #[test]
    fn csv_export() {
        let prof = LevelProfile::build(&ground(1, 2.0), &McConfig::new(1_000, 4)).unwrap();
        let csv = prof.to_csv(&[0.5, 0.1]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,mu,stderr");
        assert_eq!(lines.len(), 3);
    }
}
