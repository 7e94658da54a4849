//! Sample-average maximization of `c ↦ ∫Φ(u_{f_c}) dm` over unit vectors `c`
//! of coefficients in the orthonormal monomial basis of degree `≤ D`.
//!
//! The Monte Carlo sample is frozen for a whole run, so the surrogate is a
//! smooth deterministic function on the sphere and can be ascended with a
//! projected gradient and Armijo backtracking.

use log::warn;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::quadrature::{sharp_rhs, Estimate, McConfig, SampleSet};
use crate::random::random_point;
use crate::rearrange::LevelProfile;
use crate::space::{
    expand_coherent, inner_product, CoeffEntry, CoherentState, ConvexProbe, MonomialBasis, PolyFunction,
    SpaceParams,
};
use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 2000;
pub const STOP_TOL: f64 = 1e-8;
pub const GRADIENT_GATE_TOL: f64 = 1e-5;
const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 50;
/// A failed line search with a gradient this small counts as convergence.
const STALL_TOL: f64 = 1e-6;
const GATE_POINTS: usize = 5;
const FD_STEP: f64 = 1e-6;

/// Frozen sample, basis values and weights for one optimization run.
pub struct SaaProblem {
    params: SpaceParams,
    probe: ConvexProbe,
    basis: MonomialBasis,
    samples: SampleSet,
    /// Row-major `n × K` orthonormal basis values at the samples.
    values: Vec<Complex64>,
    /// `(1 - |z_j|^2)^α`.
    q: Vec<f64>,
    /// Slope of the probe when it is affine; that part is integrated exactly.
    slope: f64,
}

impl SaaProblem {
    pub fn new(params: &SpaceParams, probe: ConvexProbe, degree: usize, cfg: &McConfig) -> Result<Self> {
        let params = if degree > params.degree_cap() { params.with_degree_cap(degree) } else { params.clone() };
        let samples = SampleSet::draw(&params, cfg)?;
        let basis = MonomialBasis::new(&params, degree);
        let rows: Vec<Vec<Complex64>> =
            samples.samples().par_iter().map(|s| basis.eval_orthonormal(s.point.coords())).collect();
        let q = samples.samples().iter().map(|s| s.gap.powf(params.alpha())).collect();
        let slope = if probe.is_affine() { probe.derivative(0.0) } else { 0.0 };
        Ok(Self { params, probe, basis, samples, values: rows.concat(), q, slope })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    fn row(&self, j: usize) -> &[Complex64] {
        let k = self.dim();
        &self.values[j * k..(j + 1) * k]
    }

    fn residual(&self, u: f64) -> f64 {
        self.probe.eval(u) - self.slope * u
    }

    fn exact_part(&self, c: &[Complex64]) -> f64 {
        self.slope * norm_sq(c) / self.params.c_alpha()
    }

    /// Surrogate objective at (not necessarily unit) `c`.
    pub fn objective(&self, c: &[Complex64]) -> f64 {
        let sampled: f64 = (0..self.samples.len())
            .map(|j| {
                let s = &self.samples.samples()[j];
                let f = dot(self.row(j), c);
                s.share * s.weight * self.residual(self.q[j] * f.norm_sqr())
            })
            .sum();
        sampled + self.exact_part(c)
    }

    /// Objective with its Monte Carlo standard error.
    pub fn estimate(&self, c: &[Complex64]) -> Result<Estimate> {
        let contributions: Vec<f64> = (0..self.samples.len())
            .map(|j| {
                let f = dot(self.row(j), c);
                self.samples.samples()[j].weight * self.residual(self.q[j] * f.norm_sqr())
            })
            .collect();
        let e = self.samples.estimate_contributions(&contributions)?;
        Ok(Estimate { mean: e.mean + self.exact_part(c), ..e })
    }

    /// Objective and its gradient `G` with `dF = Re Σ conj(G_k) δc_k`.
    pub fn gradient(&self, c: &[Complex64]) -> (f64, Vec<Complex64>) {
        let k = self.dim();
        let mut g = vec![Complex64::new(0.0, 0.0); k];
        let mut value = 0.0;
        for j in 0..self.samples.len() {
            let s = &self.samples.samples()[j];
            let row = self.row(j);
            let f = dot(row, c);
            let u = self.q[j] * f.norm_sqr();
            let sw = s.share * s.weight;
            value += sw * self.residual(u);
            if u > 0.0 {
                let coef = 2.0 * sw * (self.probe.derivative(u) - self.slope) * self.q[j];
                for (gk, b) in g.iter_mut().zip(row) {
                    *gk += coef * f * b.conj();
                }
            }
        }
        if self.slope != 0.0 {
            let scale = 2.0 * self.slope / self.params.c_alpha();
            for (gk, ck) in g.iter_mut().zip(c) {
                *gk += scale * ck;
            }
        }
        (value + self.exact_part(c), g)
    }

    /// Largest relative disagreement between the analytic gradient and
    /// central differences over all real coordinates, at `points` random unit vectors.
    pub fn gradient_check(&self, points: usize, seed: u64) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..points {
            let c = random_unit(self.dim(), seed, 1 << 32 | i as u64);
            let (_, g) = self.gradient(&c);
            let mut err = 0.0;
            let mut size = 0.0;
            for k in 0..self.dim() {
                for (dir, analytic) in [(Complex64::new(1.0, 0.0), g[k].re), (Complex64::new(0.0, 1.0), g[k].im)] {
                    let mut plus = c.clone();
                    let mut minus = c.clone();
                    plus[k] += dir * FD_STEP;
                    minus[k] -= dir * FD_STEP;
                    let fd = (self.objective(&plus) - self.objective(&minus)) / (2.0 * FD_STEP);
                    err += (fd - analytic).powi(2);
                    size += analytic * analytic;
                }
            }
            let rel = if size > 0.0 { (err / size).sqrt() } else { err.sqrt() };
            worst = worst.max(rel);
        }
        worst
    }

    /// Unit coefficients in the monomial basis as a function.
    pub fn to_function(&self, c: &[Complex64]) -> Result<PolyFunction> {
        let coeffs = self.basis.indices.iter().zip(&self.basis.norms_sq).zip(c).map(|((m, g), &ck)| (m.clone(), ck / g.sqrt()));
        PolyFunction::new(self.params.clone(), coeffs)
    }

    /// Orthonormal coordinates of `f` (truncated to the basis).
    pub fn coordinates(&self, f: &PolyFunction) -> Vec<Complex64> {
        self.basis.indices.iter().zip(&self.basis.norms_sq).map(|(m, g)| f.coeff(m) * g.sqrt()).collect()
    }

    fn ascend(&self, start: Vec<Complex64>, keep_trace: bool) -> Ascent {
        let mut c = normalize(start);
        let (mut value, mut grad) = self.gradient(&c);
        let mut trace = keep_trace.then(|| vec![value]);
        let mut step = 1.0;
        let mut iterations = 0;
        let status = loop {
            let t = project(&c, &grad);
            let gnorm = norm_sq(&t).sqrt();
            if gnorm <= STOP_TOL * (1.0 + value.abs()) {
                break Status::Converged;
            }
            if iterations >= MAX_ITERATIONS {
                break Status::MaxIterations;
            }
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let trial = normalize(c.iter().zip(&t).map(|(a, b)| a + step * b).collect());
                let v = self.objective(&trial);
                if v >= value + ARMIJO_C * step * gnorm * gnorm && v > value {
                    accepted = Some(trial);
                    break;
                }
                step *= 0.5;
            }
            match accepted {
                Some(trial) => {
                    c = trial;
                    (value, grad) = self.gradient(&c);
                    if let Some(tr) = trace.as_mut() {
                        tr.push(value);
                    }
                    iterations += 1;
                    step *= 2.0;
                }
                None if gnorm <= STALL_TOL * (1.0 + value.abs()) => break Status::Converged,
                None => break Status::Abandoned,
            }
        };
        let gnorm = norm_sq(&project(&c, &grad)).sqrt();
        Ascent { c, value, iterations, status, grad_norm: gnorm, trace }
    }
}

struct Ascent {
    c: Vec<Complex64>,
    value: f64,
    iterations: usize,
    status: Status,
    grad_norm: f64,
    trace: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    MaxIterations,
    /// The line search failed away from a stationary point.
    Abandoned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartKind {
    Random,
    Coherent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartStat {
    pub index: usize,
    pub start: StartKind,
    pub status: Status,
    pub iterations: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub fresh: Option<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceDiagnostic {
    pub sup_u: f64,
    pub z0_fit: Point,
    /// `|⟨φ_{z0}, f⟩|^2`.
    pub overlap: f64,
    /// `sup u - 1`.
    pub g_prime_proxy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientGate {
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalReport {
    pub params: SpaceParams,
    pub probe: ConvexProbe,
    pub degree: usize,
    pub seed: u64,
    pub n_samples: usize,
    pub coeffs: Vec<CoeffEntry>,
    /// Surrogate objective at the best point.
    pub value: Estimate,
    /// Re-evaluation on an independent sample four times larger.
    pub fresh: Estimate,
    pub rhs: f64,
    /// `rhs - fresh.mean`.
    pub gap: f64,
    /// Both estimates, lowered by three standard errors, stay below `rhs`.
    pub bound_holds: bool,
    pub coherence: CoherenceDiagnostic,
    pub gradient_gate: GradientGate,
    pub best_restart: usize,
    pub restarts: Vec<RestartStat>,
}

impl ExtremalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Debug)]
pub struct SaaOptions {
    /// Random starts; one coherent warm start is added on top.
    pub restarts: usize,
    pub seed: u64,
    pub traces: bool,
    /// Sample count for locating `sup u` in the coherence diagnostic.
    pub diagnostic_samples: usize,
}

impl Default for SaaOptions {
    fn default() -> Self {
        Self { restarts: 5, seed: 0, traces: false, diagnostic_samples: 20_000 }
    }
}

/// Best of `restarts` random starts plus one coherent warm start.
pub fn saa_maximize(problem: &SaaProblem, opts: &SaaOptions) -> Result<ExtremalReport> {
    let rel = problem.gradient_check(GATE_POINTS, opts.seed);
    let gate = GradientGate { max_rel_error: rel, tolerance: GRADIENT_GATE_TOL, passed: rel <= GRADIENT_GATE_TOL };
    if !gate.passed {
        return Err(Error::GradientCheck(rel));
    }
    let params = problem.params().clone();
    let starts: Vec<(StartKind, Vec<Complex64>)> = (0..=opts.restarts)
        .map(|i| {
            if i < opts.restarts {
                Ok((StartKind::Random, random_unit(problem.dim(), opts.seed, i as u64)))
            } else {
                let z0 = random_point(params.n(), 0.5, opts.seed ^ 0xC0);
                let cs = CoherentState::new(params.clone(), z0, 0.0)?;
                let trunc = expand_coherent(&cs, problem.basis.max_degree)?;
                Ok((StartKind::Coherent, problem.coordinates(&trunc)))
            }
        })
        .collect::<Result<_>>()?;
    let runs: Vec<Ascent> = starts.par_iter().map(|(_, c)| problem.ascend(c.clone(), opts.traces)).collect();

    let cfg = problem.samples.config();
    let fresh_problem = SaaProblem::new(&params, problem.probe, problem.basis.max_degree, &cfg.scaled(4).reseeded(1))?;
    let mut stats = Vec::with_capacity(runs.len());
    for (index, ((start, _), run)) in starts.iter().zip(&runs).enumerate() {
        if run.status == Status::Abandoned {
            warn!("restart {index} abandoned: line search failed at gradient norm {:e}", run.grad_norm);
        }
        let fresh = if run.status == Status::Abandoned { None } else { Some(fresh_problem.estimate(&run.c)?) };
        stats.push(RestartStat {
            index,
            start: *start,
            status: run.status,
            iterations: run.iterations,
            value: run.value,
            grad_norm: run.grad_norm,
            fresh,
            trace: run.trace.clone(),
        });
    }
    let mut best: Option<usize> = None;
    for s in &stats {
        if let Some(f) = s.fresh {
            let better = match best {
                None => true,
                Some(b) => f.mean > stats[b].fresh.expect("best has a fresh value").mean + 1e-12,
            };
            if better {
                best = Some(s.index);
            }
        }
    }
    let best = best.ok_or_else(|| Error::Invalid("every restart was abandoned".into()))?;
    let c = &runs[best].c;
    let f = problem.to_function(c)?;
    let value = problem.estimate(c)?;
    let fresh = stats[best].fresh.expect("best has a fresh value");
    let rhs = sharp_rhs(&problem.probe, &params)?;
    let diag_cfg = McConfig::new(opts.diagnostic_samples, opts.seed ^ 0xD1A6);
    let coherence = coherence_diagnostic(&f, &diag_cfg)?;
    Ok(ExtremalReport {
        params,
        probe: problem.probe,
        degree: problem.basis.max_degree,
        seed: opts.seed,
        n_samples: cfg.n_samples,
        coeffs: f.coeffs().iter().map(|(m, c)| CoeffEntry { m: m.clone(), c: [c.re, c.im] }).collect(),
        value,
        fresh,
        rhs,
        gap: rhs - fresh.mean,
        bound_holds: value.mean - 3.0 * value.stderr <= rhs && fresh.mean - 3.0 * fresh.stderr <= rhs,
        coherence,
        gradient_gate: gate,
        best_restart: best,
        restarts: stats,
    })
}

/// Location and height of `sup u_f` and the overlap of `f` with the
/// coherent state centered there.
pub fn coherence_diagnostic(f: &PolyFunction, cfg: &McConfig) -> Result<CoherenceDiagnostic> {
    let profile = LevelProfile::build(f, cfg)?;
    let z0 = profile.argmax().clone();
    let cs = CoherentState::new(f.params().clone(), z0.clone(), 0.0)?;
    let phi = expand_coherent(&cs, f.degree() + 10)?;
    let overlap = inner_product(&phi, f)?.norm_sqr().min(1.0);
    Ok(CoherenceDiagnostic { sup_u: profile.sup(), z0_fit: z0, overlap, g_prime_proxy: profile.sup() - 1.0 })
}

fn dot(row: &[Complex64], c: &[Complex64]) -> Complex64 {
    row.iter().zip(c).map(|(b, x)| b * x).sum()
}

fn norm_sq(c: &[Complex64]) -> f64 {
    c.iter().map(|x| x.norm_sqr()).sum()
}

fn normalize(c: Vec<Complex64>) -> Vec<Complex64> {
    let n = norm_sq(&c).sqrt();
    c.into_iter().map(|x| x / n).collect()
}

/// Tangential part `g - Re⟨c, g⟩ c` at the unit vector `c`.
fn project(c: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    let radial: f64 = c.iter().zip(g).map(|(a, b)| (a.conj() * b).re).sum();
    g.iter().zip(c).map(|(gk, ck)| gk - radial * ck).collect()
}

fn random_unit(k: usize, seed: u64, stream: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let v = (0..k)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    normalize(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::MultiIndex;

    fn p12() -> SpaceParams {
        SpaceParams::new(1, 2.0).unwrap()
    }

    #[test]
    fn gradient_matches_differences() {
        for probe in [ConvexProbe::Power(2.0), ConvexProbe::Power(1.5), ConvexProbe::XLogX, ConvexProbe::Power(1.0)] {
            let pr = SaaProblem::new(&SpaceParams::new(2, 3.0).unwrap(), probe, 3, &McConfig::new(2_000, 1)).unwrap();
            assert!(pr.gradient_check(3, 9) < GRADIENT_GATE_TOL, "{probe}");
        }
    }

    #[test]
    fn affine_probe_converges_immediately() {
        let pr = SaaProblem::new(&p12(), ConvexProbe::Power(1.0), 4, &McConfig::new(5_000, 2)).unwrap();
        let rep = saa_maximize(&pr, &SaaOptions { restarts: 3, seed: 1, ..Default::default() }).unwrap();
        assert!(rep.restarts.iter().all(|r| r.iterations == 0 && r.status == Status::Converged));
        assert!((rep.value.mean - 1.0).abs() < 1e-12);
        assert_eq!(rep.fresh.stderr, 0.0);
    }

    #[test]
    fn degree_zero_is_the_ground_state() {
        let cfg = McConfig::new(20_000, 3).stratified(32);
        let pr = SaaProblem::new(&p12(), ConvexProbe::Power(2.0), 0, &cfg).unwrap();
        let rep = saa_maximize(&pr, &SaaOptions { restarts: 2, seed: 4, ..Default::default() }).unwrap();
        assert!(rep.fresh.agrees_with(1.0 / 3.0, 3.0, 0.0), "{:?}", rep.fresh);
        assert!(rep.coherence.overlap > 1.0 - 1e-9);
        assert!(rep.coherence.z0_fit.norm() < 1e-6);
    }

    #[test]
    fn ascent_is_monotone() {
        let pr = SaaProblem::new(&p12(), ConvexProbe::Power(2.0), 3, &McConfig::new(5_000, 5)).unwrap();
        let run = pr.ascend(random_unit(pr.dim(), 1, 0), true);
        let tr = run.trace.unwrap();
        assert!(tr.windows(2).all(|w| w[1] > w[0]));
        assert!(run.value <= 1.0 / 3.0 + 0.05);
    }

    #[test]
    fn phase_does_not_change_objective() {
        let pr = SaaProblem::new(&p12(), ConvexProbe::Power(2.0), 3, &McConfig::new(1_000, 6)).unwrap();
        let c = random_unit(pr.dim(), 2, 0);
        let phase = Complex64::from_polar(1.0, 0.9);
        let d: Vec<Complex64> = c.iter().map(|x| x * phase).collect();
        assert!((pr.objective(&c) - pr.objective(&d)).abs() < 1e-14);
    }

    #[test]
    fn diagnostic_examples() {
        let cs = CoherentState::new(p12(), Point::real(&[0.3]).unwrap(), 0.0).unwrap();
        let f = expand_coherent(&cs, 40).unwrap();
        let d = coherence_diagnostic(&f, &McConfig::new(5_000, 1)).unwrap();
        assert!((d.sup_u - 1.0).abs() < 1e-6 && d.overlap > 1.0 - 1e-6, "{d:?}");
        let z = PolyFunction::monomial(p12(), MultiIndex::new(vec![1]), Complex64::new(2f64.sqrt(), 0.0)).unwrap();
        let d = coherence_diagnostic(&z, &McConfig::new(5_000, 1)).unwrap();
        assert!((d.sup_u - 8.0 / 27.0).abs() < 1e-10, "{d:?}");
        assert!(d.overlap < 0.5);
        let one = PolyFunction::constant(p12(), Complex64::new(1.0, 0.0));
        let d = coherence_diagnostic(&one, &McConfig::new(5_000, 1)).unwrap();
        assert!((d.sup_u - 1.0).abs() < 1e-15 && d.z0_fit.is_origin() && (d.overlap - 1.0).abs() < 1e-12);
    }
}
