use num_complex::Complex64;

use super::{CoherentState, MixedState, PolyFunction, SpaceParams};
use crate::geometry::{inner_unchecked, Point};
use crate::{Error, Result};

/// Anything with a Husimi function `u(z) = ⟨φ_z, ρ φ_z⟩`.
pub trait Husimi: Sync {
    fn params(&self) -> &SpaceParams;

    /// `u(z)` given a precomputed `1 - |z|^2` (kept separately so sampled
    /// points near the boundary do not lose precision).
    fn husimi_with_gap(&self, z: &Point, gap: f64) -> f64;

    fn husimi(&self, z: &Point) -> f64 {
        self.husimi_with_gap(z, z.gap())
    }

    /// `‖f‖^2` for pure states, `tr ρ` for mixtures.
    fn norm_sq(&self) -> f64;
}

impl Husimi for PolyFunction {
    fn params(&self) -> &SpaceParams {
        PolyFunction::params(self)
    }

    fn husimi_with_gap(&self, z: &Point, gap: f64) -> f64 {
        self.eval(z).norm_sqr() * gap.powf(self.params().alpha())
    }

    fn norm_sq(&self) -> f64 {
        PolyFunction::norm_sq(self)
    }
}

impl Husimi for CoherentState {
    fn params(&self) -> &SpaceParams {
        CoherentState::params(self)
    }

    fn husimi_with_gap(&self, z: &Point, gap: f64) -> f64 {
        CoherentState::husimi_with_gap(self, z, gap)
    }

    fn norm_sq(&self) -> f64 {
        1.0
    }
}

impl Husimi for MixedState {
    fn params(&self) -> &SpaceParams {
        MixedState::params(self)
    }

    fn husimi_with_gap(&self, z: &Point, gap: f64) -> f64 {
        MixedState::husimi_with_gap(self, z, gap)
    }

    fn norm_sq(&self) -> f64 {
        1.0
    }
}

/// Any of the three function representations.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Poly(PolyFunction),
    Coherent(CoherentState),
    Mixed(MixedState),
}

impl State {
    /// Pointwise value; mixtures have none.
    pub fn eval(&self, z: &Point) -> Result<Complex64> {
        match self {
            State::Poly(f) => Ok(f.eval(z)),
            State::Coherent(c) => Ok(c.eval(z)),
            State::Mixed(_) => Err(Error::Invalid("a mixed state has no pointwise value".into())),
        }
    }

    /// Unit-norm version and whether a rescaling was needed.
    pub fn normalized(&self) -> Result<(State, bool)> {
        match self {
            State::Poly(f) => {
                let n2 = f.norm_sq();
                if (n2 - 1.0).abs() <= 1e-12 {
                    Ok((self.clone(), false))
                } else {
                    Ok((State::Poly(f.normalized()?), true))
                }
            }
            _ => Ok((self.clone(), false)),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            State::Poly(_) => "poly",
            State::Coherent(_) => "coherent",
            State::Mixed(_) => "mixed",
        }
    }

    /// Highest polynomial degree (0 for coherent states, which are not polynomials).
    pub fn degree(&self) -> usize {
        match self {
            State::Poly(f) => f.degree(),
            State::Coherent(_) => 0,
            State::Mixed(m) => m.states().iter().map(PolyFunction::degree).max().unwrap_or(0),
        }
    }
}

impl Husimi for State {
    fn params(&self) -> &SpaceParams {
        match self {
            State::Poly(f) => f.params(),
            State::Coherent(c) => c.params(),
            State::Mixed(m) => m.params(),
        }
    }

    fn husimi_with_gap(&self, z: &Point, gap: f64) -> f64 {
        match self {
            State::Poly(f) => f.husimi_with_gap(z, gap),
            State::Coherent(c) => c.husimi_with_gap(z, gap),
            State::Mixed(m) => m.husimi_with_gap(z, gap),
        }
    }

    fn norm_sq(&self) -> f64 {
        match self {
            State::Poly(f) => Husimi::norm_sq(f),
            State::Coherent(_) | State::Mixed(_) => 1.0,
        }
    }
}

impl From<PolyFunction> for State {
    fn from(f: PolyFunction) -> Self {
        State::Poly(f)
    }
}

impl From<CoherentState> for State {
    fn from(c: CoherentState) -> Self {
        State::Coherent(c)
    }
}

impl From<MixedState> for State {
    fn from(m: MixedState) -> Self {
        State::Mixed(m)
    }
}

/// Reproducing kernel `K_w(z) = (1 - ⟨z, w⟩)^{-α}` on the principal branch.
pub fn kernel_eval(w: &Point, z: &Point, params: &SpaceParams) -> Result<Complex64> {
    if w.dim() != z.dim() || z.dim() != params.n() {
        return Err(Error::DimensionMismatch { expected: params.n(), got: z.dim().min(w.dim()) });
    }
    let base = Complex64::new(1.0, 0.0) - inner_unchecked(z.coords(), w.coords());
    Ok((-params.alpha() * base.ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{expand_coherent, inner_product, MultiIndex};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kernel_values() {
        let p = SpaceParams::new(1, 2.0).unwrap();
        let z = Point::real(&[0.5]).unwrap();
        assert!((kernel_eval(&Point::origin(1), &z, &p).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((kernel_eval(&z, &z, &p).unwrap() - c(16.0 / 9.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn reproducing_property() {
        // K_w = (1 - |w|^2)^{-α/2} φ_w, so its monomial expansion is exact up to
        // any degree; with first-slot conjugation f(w) = ⟨K_w, f⟩.
        let p = SpaceParams::new(1, 2.0).unwrap();
        let f = PolyFunction::new(
            p.clone(),
            [(MultiIndex::new(vec![0]), c(1.0, 0.0)), (MultiIndex::new(vec![2]), c(0.3, -0.7))],
        )
        .unwrap();
        let w = Point::new(vec![c(0.4, 0.2)]).unwrap();
        let cs = CoherentState::new(p.clone(), w.clone(), 0.0).unwrap();
        let kw = expand_coherent(&cs, 5).unwrap().scale(c(w.gap().powf(-1.0), 0.0));
        let via_inner = inner_product(&kw, &f).unwrap();
        assert!((via_inner - f.eval(&w)).norm() < 1e-13);
        // the kernel expansion agrees with the closed form
        let z = Point::new(vec![c(-0.3, 0.1)]).unwrap();
        let kw_long = expand_coherent(&cs, 60).unwrap().scale(c(w.gap().powf(-1.0), 0.0));
        assert!((kw_long.eval(&z) - kernel_eval(&w, &z, &p).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn husimi_examples() {
        let p = SpaceParams::new(1, 2.0).unwrap();
        let one = PolyFunction::constant(p.clone(), c(1.0, 0.0));
        assert_eq!(one.husimi(&Point::origin(1)), 1.0);
        let z = Point::real(&[0.5f64.sqrt()]).unwrap();
        assert!((one.husimi(&z) - 0.25).abs() < 1e-14);
        let cs = CoherentState::new(p, Point::new(vec![c(0.1, 0.6)]).unwrap(), 2.0).unwrap();
        assert!((cs.husimi(cs.center()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_overlap_identity() {
        // |⟨φ_z, f⟩|^2 = u_f(z)
        let p = SpaceParams::new(2, 3.0).unwrap();
        let f = PolyFunction::new(
            p.clone(),
            [
                (MultiIndex::new(vec![0, 0]), c(0.3, 0.1)),
                (MultiIndex::new(vec![1, 1]), c(-0.5, 0.2)),
                (MultiIndex::new(vec![0, 3]), c(0.2, 0.9)),
            ],
        )
        .unwrap();
        let z = Point::new(vec![c(0.2, -0.3), c(0.4, 0.1)]).unwrap();
        let phi_z = expand_coherent(&CoherentState::new(p, z.clone(), 0.0).unwrap(), 3).unwrap();
        let overlap = inner_product(&phi_z, &f).unwrap().norm_sqr();
        assert!((overlap - f.husimi(&z)).abs() < 1e-14);
    }
}
