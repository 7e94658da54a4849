//! Statistical verification of the sharp inequalities: the pointwise bound
//! `u_f ≤ ‖f‖^2`, the Wehrl-type bound `∫Φ(u_f) dm ≤ ∫Φ((1-|z|^2)^α) dm`
//! for pure and mixed states, the Faber–Krahn bound `∫_E u_f dm ≤ J(m(E))`
//! and the entropy bound.
//!
//! Every check yields a [`CheckReport`] whose verdict is derived from the
//! margin `rhs - lhs` and the Monte Carlo standard error alone.

use serde::{Deserialize, Serialize};

use crate::geometry::{measure_of_euclidean_ball, mobius_gap, BallSpec, Point};
use crate::quadrature::{j_prime, j_value, sharp_rhs, Estimate, McConfig, SampleSet};
use crate::rearrange::LevelProfile;
use crate::space::{ConvexProbe, Husimi, MixedState, SpaceParams, State};
use crate::{Error, Result};

/// Relative floor of the equality band.
pub const EQUALITY_REL: f64 = 1e-3;

/// `sup u ≥ (1 - COHERENCE_TOL)‖f‖^2` counts as numerically coherent.
pub const COHERENCE_TOL: f64 = 1e-6;

/// Largest `|Υ_{z0}(center)|^2` for a ball to count as centered at `z0`.
const CENTER_TOL_SQ: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "holds")]
    Holds,
    #[serde(rename = "equality-band")]
    EqualityBand,
    #[serde(rename = "violated-beyond-3sigma")]
    ViolatedBeyond3Sigma,
}

impl Verdict {
    /// `equality` says whether the extremal case is admissible for this input.
    pub fn classify(margin: f64, stderr: f64, rhs: f64, equality: bool) -> Self {
        let band = (3.0 * stderr).max(EQUALITY_REL * rhs.abs());
        if margin < -band {
            Verdict::ViolatedBeyond3Sigma
        } else if margin.abs() <= band && equality {
            Verdict::EqualityBand
        } else {
            Verdict::Holds
        }
    }

    pub fn is_violation(self) -> bool {
        self == Verdict::ViolatedBeyond3Sigma
    }
}

/// Where the maximum of `u` sits and how close it is to `‖f‖^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coherence {
    pub sup_u: f64,
    pub z0_fit: Point,
    /// `sup u - 1`: zero exactly for coherent states.
    pub g_prime_proxy: f64,
    pub coherent: bool,
}

impl Coherence {
    fn of(profile: &LevelProfile) -> Self {
        let sup_u = profile.sup();
        Self {
            sup_u,
            z0_fit: profile.argmax().clone(),
            g_prime_proxy: sup_u - 1.0,
            coherent: sup_u >= (1.0 - COHERENCE_TOL) * profile.norm_sq(),
        }
    }
}

/// A secondary inequality checked alongside the main one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Auxiliary {
    pub name: String,
    pub value: Estimate,
    pub holds: bool,
}

/// Measurable set for the Faber–Krahn check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetSpec {
    GeodesicBall { center: Point, measure: f64 },
    /// `{r1 < |z| < r2}`.
    EuclideanAnnulus { r1: f64, r2: f64 },
    /// `{u_f > level}` of the function under test.
    Superlevel { level: f64 },
}

impl SetSpec {
    pub fn centered_ball(n: usize, measure: f64) -> Self {
        SetSpec::GeodesicBall { center: Point::origin(n), measure }
    }

    /// Invariant measure, when it is known in closed form.
    pub fn exact_measure(&self) -> Result<Option<f64>> {
        match self {
            SetSpec::GeodesicBall { measure, .. } => {
                if measure.is_finite() && *measure >= 0.0 {
                    Ok(Some(*measure))
                } else {
                    Err(Error::Invalid(format!("set measure must be finite and nonnegative, got {measure}")))
                }
            }
            SetSpec::EuclideanAnnulus { r1, r2 } => {
                if !(0.0 <= *r1 && r1 < r2 && *r2 < 1.0) {
                    return Err(Error::Invalid(format!("annulus needs 0 <= r1 < r2 < 1, got ({r1}, {r2})")));
                }
                Ok(None)
            }
            SetSpec::Superlevel { level } => {
                if !(*level > 0.0 && level.is_finite()) {
                    return Err(Error::Invalid(format!("superlevel needs a positive level, got {level}")));
                }
                Ok(None)
            }
        }
    }

    fn measure_in(&self, n: usize) -> Result<Option<f64>> {
        match self {
            SetSpec::EuclideanAnnulus { r1, r2 } => {
                self.exact_measure()?;
                Ok(Some(measure_of_euclidean_ball(*r2, n)? - measure_of_euclidean_ball(*r1, n)?))
            }
            _ => self.exact_measure(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: SpaceParams,
    pub probe: Option<ConvexProbe>,
    pub lhs: Estimate,
    pub rhs: f64,
    pub margin: f64,
    /// `margin / lhs.stderr`; absent for exact left-hand sides.
    pub sigmas: Option<f64>,
    pub verdict: Verdict,
    pub seed: u64,
    pub n_samples: usize,
    /// `α` is not of the form `(N+1)k`.
    pub exploratory: bool,
    /// The input had to be rescaled to unit norm.
    pub renormalized: bool,
    /// The first pass was violated and the report comes from a 4× rerun.
    pub rerun: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub set: Option<SetSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coherence: Option<Coherence>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub auxiliary: Option<Auxiliary>,
}

impl CheckReport {
    fn new(check: &str, params: &SpaceParams, cfg: &McConfig, lhs: Estimate, rhs: f64, equality: bool) -> Self {
        let margin = rhs - lhs.mean;
        Self {
            check: check.into(),
            params: params.clone(),
            probe: None,
            lhs,
            rhs,
            margin,
            sigmas: (lhs.stderr > 0.0).then(|| margin / lhs.stderr),
            verdict: Verdict::classify(margin, lhs.stderr, rhs, equality),
            seed: cfg.seed,
            n_samples: cfg.n_samples,
            exploratory: !params.is_wehrl_conforming(),
            renormalized: false,
            rerun: false,
            set: None,
            coherence: None,
            auxiliary: None,
        }
    }

    pub fn is_violation(&self) -> bool {
        self.verdict.is_violation()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Configuration used for the automatic rerun of a violated check.
pub fn rerun_config(cfg: &McConfig) -> McConfig {
    cfg.scaled(4).reseeded(4)
}

/// Runs `check`, and once more on [`rerun_config`] if the first verdict is a violation.
fn with_rerun(cfg: &McConfig, check: impl Fn(&McConfig) -> Result<CheckReport>) -> Result<CheckReport> {
    let first = check(cfg)?;
    if !first.is_violation() {
        return Ok(first);
    }
    let mut second = check(&rerun_config(cfg))?;
    second.rerun = true;
    Ok(second)
}

/// `sup u_f ≤ ‖f‖^2`, with the supremum searched over `grid_size` sample points.
pub fn check_pointwise(f: &State, grid_size: usize, cfg: &McConfig) -> Result<CheckReport> {
    let cfg = McConfig { n_samples: grid_size, ..cfg.clone() };
    let profile = LevelProfile::build(f, &cfg)?;
    let coherence = Coherence::of(&profile);
    let mut r = CheckReport::new(
        "pointwise",
        f.params(),
        &cfg,
        Estimate { mean: profile.sup(), stderr: 0.0, n: grid_size },
        f.norm_sq(),
        coherence.coherent,
    );
    r.coherence = Some(coherence);
    Ok(r)
}

/// `∫Φ(u_f) dm ≤ ∫Φ((1-|z|^2)^α) dm` for unit `f`.
pub fn check_wehrl(f: &State, probe: &ConvexProbe, cfg: &McConfig) -> Result<CheckReport> {
    Ok(check_wehrl_probes(f, std::slice::from_ref(probe), cfg)?.remove(0))
}

/// [`check_wehrl`] for several probes on one shared sample.
pub fn check_wehrl_probes(f: &State, probes: &[ConvexProbe], cfg: &McConfig) -> Result<Vec<CheckReport>> {
    let (g, renormalized) = f.normalized()?;
    let rhs: Vec<f64> = probes.iter().map(|p| sharp_rhs(p, g.params())).collect::<Result<_>>()?;
    let run = |cfg: &McConfig| -> Result<Vec<CheckReport>> {
        let profile = LevelProfile::build(&g, cfg)?;
        let coherence = Coherence::of(&profile);
        probes
            .iter()
            .zip(&rhs)
            .map(|(p, &rhs)| {
                let lhs = profile.estimate(|u, _| p.eval(u))?;
                let mut r = CheckReport::new("wehrl", g.params(), cfg, lhs, rhs, coherence.coherent || p.is_affine());
                r.probe = Some(*p);
                r.renormalized = renormalized;
                r.coherence = Some(coherence.clone());
                Ok(r)
            })
            .collect()
    };
    let mut reports = run(cfg)?;
    if reports.iter().any(CheckReport::is_violation) {
        let again = run(&rerun_config(cfg))?;
        for (r, mut a) in reports.iter_mut().zip(again) {
            if r.is_violation() {
                a.rerun = true;
                *r = a;
            }
        }
    }
    Ok(reports)
}

/// Wehrl bound for a density matrix, together with the convexity step
/// `∫Φ(Σλ_i u_i) dm ≤ Σλ_i ∫Φ(u_i) dm`.
pub fn check_mixture(state: &MixedState, probe: &ConvexProbe, cfg: &McConfig) -> Result<CheckReport> {
    let rhs = sharp_rhs(probe, state.params())?;
    with_rerun(cfg, |cfg| {
        let profile = LevelProfile::build(state, cfg)?;
        let coherence = Coherence::of(&profile);
        let lhs = profile.estimate(|u, _| probe.eval(u))?;
        let samples = profile.samples();
        let lambdas = state.weights();
        let mut convex = Vec::with_capacity(samples.len());
        let mut gap = Vec::with_capacity(samples.len());
        for (s, &u) in samples.samples().iter().zip(profile.values()) {
            let sum: f64 =
                state.component_husimi(&s.point, s.gap).iter().zip(lambdas).map(|(&ui, &l)| l * probe.eval(ui)).sum();
            convex.push(s.weight * sum);
            gap.push(s.weight * (sum - probe.eval(u)));
        }
        let convex = samples.estimate_contributions(&convex)?;
        let gap = samples.estimate_contributions(&gap)?;
        let holds = gap.mean >= -3.0 * gap.stderr - 1e-12;
        let mut r = CheckReport::new("mixture", state.params(), cfg, lhs, rhs, coherence.coherent || probe.is_affine());
        if !holds {
            r.verdict = Verdict::ViolatedBeyond3Sigma;
        }
        r.probe = Some(*probe);
        r.coherence = Some(coherence);
        r.auxiliary = Some(Auxiliary { name: "convexity".into(), value: convex, holds });
        Ok(r)
    })
}

/// `∫_E u_f dm ≤ J(m(E))` for unit `f`.
pub fn check_faber_krahn(f: &State, set: &SetSpec, cfg: &McConfig) -> Result<CheckReport> {
    let (g, renormalized) = f.normalized()?;
    let params = g.params().clone();
    let n = params.n();
    let exact = set.measure_in(n)?;
    let ball = match set {
        SetSpec::GeodesicBall { center, measure } => {
            if center.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: center.dim() });
            }
            Some(BallSpec::from_measure(center.clone(), *measure)?)
        }
        _ => None,
    };
    with_rerun(cfg, |cfg| {
        let profile = LevelProfile::build(&g, cfg)?;
        let coherence = Coherence::of(&profile);
        let samples = profile.samples().samples();
        let member = |u: f64, j: usize| -> bool {
            let s = &samples[j];
            match set {
                SetSpec::GeodesicBall { .. } => ball.as_ref().expect("ball built above").contains_with_gap(&s.point, s.gap),
                SetSpec::EuclideanAnnulus { r1, r2 } => s.gap > 1.0 - r2 * r2 && s.gap < 1.0 - r1 * r1,
                SetSpec::Superlevel { level } => u > *level,
            }
        };
        let mut lhs = profile.estimate(|u, j| if member(u, j) { u } else { 0.0 })?;
        let rhs = match exact {
            Some(s) => j_value(s, &params),
            None => {
                // Random measure: fold the error of m(E) into the margin by the delta method.
                let m = profile.estimate(|u, j| if member(u, j) { 1.0 } else { 0.0 })?;
                let slope = j_prime(m.mean, &params);
                lhs.stderr = profile.estimate(|u, j| if member(u, j) { u - slope } else { 0.0 })?.stderr;
                j_value(m.mean, &params)
            }
        };
        let centered = match (set, &ball) {
            (SetSpec::Superlevel { .. }, _) => true,
            (_, Some(b)) => mobius_gap(&coherence.z0_fit, &b.center, b.center.gap()) >= 1.0 - CENTER_TOL_SQ,
            _ => false,
        };
        let mut r = CheckReport::new("faber-krahn", &params, cfg, lhs, rhs, coherence.coherent && centered);
        r.renormalized = renormalized;
        r.set = Some(set.clone());
        r.coherence = Some(coherence);
        Ok(r)
    })
}

/// `-∫ u_f ln u_f dm` for unit `f`.
pub fn wehrl_entropy<F: Husimi + ?Sized>(f: &F, cfg: &McConfig) -> Result<Estimate> {
    let samples = SampleSet::draw(f.params(), cfg)?;
    let e = samples.integrate(|z, gap| ConvexProbe::XLogX.eval(f.husimi_with_gap(z, gap)))?;
    Ok(Estimate { mean: -e.mean, ..e })
}

/// Entropy bound, phrased as `∫ u ln u dm ≤ ∫ v ln v dm` with `v = (1-|z|^2)^α`;
/// the entropy itself is `-lhs`.
pub fn check_entropy(f: &State, cfg: &McConfig) -> Result<CheckReport> {
    let mut r = check_wehrl(f, &ConvexProbe::XLogX, cfg)?;
    r.check = "entropy".into();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::space::{CoherentState, MultiIndex, PolyFunction};

    fn p12() -> SpaceParams {
        SpaceParams::new(1, 2.0).unwrap()
    }

    fn z_scaled(scale: f64) -> State {
        PolyFunction::monomial(p12(), MultiIndex::new(vec![1]), Complex64::new(scale, 0.0)).unwrap().into()
    }

    fn coherent(z0: f64) -> State {
        CoherentState::new(p12(), Point::real(&[z0]).unwrap(), 0.4).unwrap().into()
    }

    fn cfg() -> McConfig {
        McConfig::new(100_000, 21)
    }

    #[test]
    fn verdict_rules() {
        assert_eq!(Verdict::classify(-1.0, 0.1, 1.0, true), Verdict::ViolatedBeyond3Sigma);
        assert_eq!(Verdict::classify(0.2, 0.1, 1.0, true), Verdict::EqualityBand);
        assert_eq!(Verdict::classify(0.2, 0.1, 1.0, false), Verdict::Holds);
        assert_eq!(Verdict::classify(0.0005, 0.0, 1.0, true), Verdict::EqualityBand);
        assert_eq!(Verdict::classify(0.5, 0.1, 1.0, true), Verdict::Holds);
        let json = serde_json::to_string(&Verdict::ViolatedBeyond3Sigma).unwrap();
        assert_eq!(json, "\"violated-beyond-3sigma\"");
    }

    #[test]
    fn pointwise_examples() {
        let r = check_pointwise(&coherent(0.5), 20_000, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::EqualityBand);
        // f = z: max of t(1-t)^2 is 4/27 at t = 1/3
        let r = check_pointwise(&z_scaled(1.0), 20_000, &cfg()).unwrap();
        assert!((r.lhs.mean - 4.0 / 27.0).abs() < 1e-12, "{}", r.lhs.mean);
        assert!((r.rhs - 0.5).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.sigmas.is_none());
        let zero: State = PolyFunction::zero(p12()).into();
        let r = check_pointwise(&zero, 1_000, &cfg()).unwrap();
        assert_eq!((r.lhs.mean, r.rhs, r.verdict), (0.0, 0.0, Verdict::EqualityBand));
    }

    #[test]
    fn wehrl_examples() {
        let r = check_wehrl(&coherent(0.3), &ConvexProbe::Power(2.0), &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::EqualityBand, "{r:?}");
        let one: State = PolyFunction::constant(SpaceParams::new(2, 3.0).unwrap(), Complex64::new(1.0, 0.0)).into();
        let r = check_wehrl(&one, &ConvexProbe::Power(1.0), &cfg()).unwrap();
        assert!(r.margin.abs() < 1e-12);
        // oracle: ∫ 4 t^2 (1-t)^4 dt / (1-t)^2 = 2/15
        let r = check_wehrl(&z_scaled(2f64.sqrt()), &ConvexProbe::Power(2.0), &cfg()).unwrap();
        assert!(r.lhs.agrees_with(2.0 / 15.0, 3.0, 0.0), "{r:?}");
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(!r.renormalized && !r.exploratory);
        let r = check_wehrl(&z_scaled(1.0), &ConvexProbe::Power(2.0), &cfg()).unwrap();
        assert!(r.renormalized);
    }

    #[test]
    fn affine_probe_has_zero_margin() {
        let f = crate::random::random_polynomial(&p12(), 4, 3).unwrap();
        let r = check_wehrl(&f.into(), &ConvexProbe::Power(1.0), &cfg()).unwrap();
        assert!(r.margin.abs() <= 3.0 * r.lhs.stderr, "{r:?}");
        assert_eq!(r.verdict, Verdict::EqualityBand);
    }

    #[test]
    fn mixture_examples() {
        let one = PolyFunction::constant(p12(), Complex64::new(1.0, 0.0));
        let z = PolyFunction::monomial(p12(), MultiIndex::new(vec![1]), Complex64::new(2f64.sqrt(), 0.0)).unwrap();
        let m = MixedState::new(vec![0.5, 0.5], vec![one.clone(), z]).unwrap();
        // oracle: ∫ (1-t)^2 (1/2 + t)^2 dt = 1/5
        let r = check_mixture(&m, &ConvexProbe::Power(2.0), &cfg()).unwrap();
        assert!(r.lhs.agrees_with(0.2, 3.0, 0.0), "{r:?}");
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.sigmas.unwrap() > 3.0);
        assert!(r.auxiliary.as_ref().unwrap().holds);
        let pure = check_mixture(&MixedState::pure(one).unwrap(), &ConvexProbe::Power(2.0), &cfg()).unwrap();
        assert_eq!(pure.verdict, Verdict::EqualityBand);
    }

    #[test]
    fn faber_krahn_examples() {
        let one: State = PolyFunction::constant(p12(), Complex64::new(1.0, 0.0)).into();
        let r = check_faber_krahn(&one, &SetSpec::centered_ball(1, 1.0), &cfg()).unwrap();
        assert!((r.rhs - 0.5).abs() < 1e-14);
        assert_eq!(r.verdict, Verdict::EqualityBand, "{r:?}");
        // annulus of measure 1: t/(1-t) goes from 1/3 to 4/3
        let (r1, r2) = ((0.25f64).sqrt(), (4.0f64 / 7.0).sqrt());
        let set = SetSpec::EuclideanAnnulus { r1, r2 };
        assert!((set.measure_in(1).unwrap().unwrap() - 1.0).abs() < 1e-12);
        let r = check_faber_krahn(&one, &set, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.sigmas.unwrap() > 3.0);
        // oracle: ∫_0^{1/2} 2t dt = 1/4
        let r = check_faber_krahn(&z_scaled(2f64.sqrt()), &SetSpec::centered_ball(1, 1.0), &cfg()).unwrap();
        assert!(r.lhs.agrees_with(0.25, 3.0, 0.0), "{r:?}");
        assert_eq!(r.verdict, Verdict::Holds);
        let r = check_faber_krahn(&coherent(0.4), &SetSpec::Superlevel { level: 0.3 }, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::EqualityBand, "{r:?}");
        let bad = SetSpec::centered_ball(1, f64::INFINITY);
        assert!(check_faber_krahn(&one, &bad, &cfg()).is_err());
    }

    #[test]
    fn off_center_ball_is_not_equality() {
        let set = SetSpec::GeodesicBall { center: Point::real(&[0.5]).unwrap(), measure: 1.0 };
        let r = check_faber_krahn(&coherent(0.0), &set, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let r = check_faber_krahn(&coherent(0.5), &set, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::EqualityBand, "{r:?}");
    }

    #[test]
    fn entropy_examples() {
        let e = wehrl_entropy(&coherent(0.2), &cfg()).unwrap();
        assert!(e.agrees_with(2.0, 3.0, 0.0), "{e:?}");
        // oracle: -∫ 2t ln(2t(1-t)^2) dt
        let e = wehrl_entropy(&z_scaled(2f64.sqrt()), &cfg()).unwrap();
        assert!(e.agrees_with(2.806852819440055, 3.0, 0.0), "{e:?}");
        let r = check_entropy(&z_scaled(2f64.sqrt()), &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.check, "entropy");
    }

    #[test]
    fn report_json_fields() {
        let r = check_wehrl(&coherent(0.3), &ConvexProbe::Power(2.0), &McConfig::new(1_000, 1)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in ["check", "params", "probe", "lhs", "rhs", "margin", "sigmas", "verdict", "seed"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["probe"], "power:2");
        assert_eq!(v["lhs"]["n"], 1000);
    }
}
