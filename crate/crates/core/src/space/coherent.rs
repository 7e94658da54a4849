use num_complex::Complex64;

use super::{params::ln_gamma, MultiIndex, PolyFunction, SpaceParams};
use crate::geometry::{inner_unchecked, mobius_gap, Point};
use crate::{Error, Result};

/// `e^{iθ} φ_{z0}` with `φ_{z0}(z) = ((1 - |z0|^2) / (1 - ⟨z, z0⟩)^2)^{α/2}`.
///
/// Powers use the principal branch; `Re(1 - ⟨z, z0⟩) > 0` on the ball so the
/// branch is smooth and `φ_{z0}(0) > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentState {
    params: SpaceParams,
    z0: Point,
    theta: f64,
}

impl CoherentState {
    pub fn new(params: SpaceParams, z0: Point, theta: f64) -> Result<Self> {
        if z0.dim() != params.n() {
            return Err(Error::DimensionMismatch { expected: params.n(), got: z0.dim() });
        }
        if !theta.is_finite() {
            return Err(Error::Invalid("phase must be finite".into()));
        }
        Ok(Self { params, z0, theta })
    }

    /// The ground state `φ_0 ≡ 1`.
    pub fn ground(params: SpaceParams) -> Self {
        let n = params.n();
        Self { params, z0: Point::origin(n), theta: 0.0 }
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn center(&self) -> &Point {
        &self.z0
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn eval(&self, z: &Point) -> Complex64 {
        let a = self.params.alpha();
        let w = Complex64::new(1.0, 0.0) - inner_unchecked(z.coords(), self.z0.coords());
        let log = Complex64::new(0.5 * a * self.z0.gap().ln(), self.theta) - a * w.ln();
        log.exp()
    }

    /// `u(z) = (1 - |Υ_{z0}(z)|^2)^α`; the phase never enters.
    pub fn husimi_with_gap(&self, z: &Point, gap: f64) -> f64 {
        mobius_gap(&self.z0, z, gap).powf(self.params.alpha())
    }
}

/// Taylor expansion of a coherent state about the origin up to total degree
/// `degree`:
/// `c_m = e^{iθ} (1 - |z0|^2)^{α/2} (α)_{|m|} / m! · conj(z0)^m`.
///
/// The returned polynomial carries a degree cap of at least `degree`.
pub fn expand_coherent(cs: &CoherentState, degree: usize) -> Result<PolyFunction> {
    let params = cs.params.with_degree_cap(cs.params.degree_cap().max(degree));
    let a = params.alpha();
    let ln_pref = 0.5 * a * cs.z0.gap().ln();
    let phase = Complex64::from_polar(1.0, cs.theta);
    let conj_z0: Vec<Complex64> = cs.z0.coords().iter().map(|c| c.conj()).collect();
    let powers = super::multi::power_tables(&conj_z0, degree);
    let coeffs = MultiIndex::enumerate(params.n(), degree).into_iter().filter_map(|m| {
        let k = m.degree() as f64;
        let mag = (ln_pref + ln_gamma(a + k) - ln_gamma(a) - m.ln_factorial()).exp();
        let c = phase * mag * m.eval_with(&powers);
        (c.norm_sqr() > 0.0).then_some((m, c))
    });
    PolyFunction::new(params.clone(), coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ground_state_is_one() {
        let cs = CoherentState::ground(SpaceParams::new(2, 3.7).unwrap());
        let z = Point::new(vec![c(0.2, -0.3), c(0.1, 0.5)]).unwrap();
        assert!((cs.eval(&z) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn value_at_origin() {
        let p = SpaceParams::new(1, 2.0).unwrap();
        let cs = CoherentState::new(p, Point::real(&[0.5]).unwrap(), 0.0).unwrap();
        assert!((cs.eval(&Point::origin(1)) - c(0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn husimi_peaks_at_center() {
        let p = SpaceParams::new(2, 4.5).unwrap();
        let z0 = Point::new(vec![c(0.3, 0.1), c(-0.2, 0.4)]).unwrap();
        let cs = CoherentState::new(p, z0.clone(), 1.3).unwrap();
        assert!((cs.husimi_with_gap(&z0, z0.gap()) - 1.0).abs() < 1e-15);
        // |φ|^2 (1-|z|^2)^α agrees with the Möbius form
        let z = Point::new(vec![c(-0.1, 0.2), c(0.5, 0.0)]).unwrap();
        let direct = cs.eval(&z).norm_sqr() * z.gap().powf(4.5);
        assert!((direct - cs.husimi_with_gap(&z, z.gap())).abs() < 1e-14);
    }

    #[test]
    fn expansion_examples() {
        let p = SpaceParams::new(1, 2.0).unwrap();
        let ground = expand_coherent(&CoherentState::ground(p.clone()), 7).unwrap();
        assert_eq!(ground.coeffs().len(), 1);
        assert!((ground.coeff(&MultiIndex::zero(1)) - c(1.0, 0.0)).norm() < 1e-15);

        let cs = CoherentState::new(p.clone(), Point::real(&[0.5]).unwrap(), 0.0).unwrap();
        let e0 = expand_coherent(&cs, 0).unwrap();
        assert!((e0.coeff(&MultiIndex::zero(1)) - c(0.75, 0.0)).norm() < 1e-15);

        // Exact tail: ‖φ‖^2 - ‖trunc_D‖^2 = (1-|a|^2)^2 Σ_{m>D} (m+1) |a|^{2m}.
        let e20 = expand_coherent(&cs, 20).unwrap();
        let tail: f64 = (21..400).map(|m| (m as f64 + 1.0) * 0.25f64.powi(m)).sum::<f64>() * 0.75 * 0.75;
        assert!(e20.norm_sq() > 0.99 && e20.norm_sq() <= 1.0);
        assert!((1.0 - e20.norm_sq() - tail).abs() < 1e-14);
    }

    #[test]
    fn expansion_matches_pointwise_value() {
        let p = SpaceParams::new(2, 3.5).unwrap();
        let z0 = Point::new(vec![c(0.2, 0.1), c(-0.1, 0.25)]).unwrap();
        let cs = CoherentState::new(p, z0, 0.4).unwrap();
        let e = expand_coherent(&cs, 40).unwrap();
        let z = Point::new(vec![c(0.3, -0.2), c(0.1, 0.1)]).unwrap();
        assert!((e.eval(&z) - cs.eval(&z)).norm() < 1e-12);
        assert!((e.norm_sq() - 1.0).abs() < 1e-12);
    }
}
