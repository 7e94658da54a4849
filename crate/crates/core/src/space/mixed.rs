use super::{gram_schmidt, inner_product, PolyFunction, SpaceParams};
use crate::geometry::Point;
use crate::{Error, Result};

/// Tolerance for the orthonormality of the components.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// A density operator `ρ = Σ λ_i |ψ_i⟩⟨ψ_i|` with orthonormal `ψ_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    params: SpaceParams,
    weights: Vec<f64>,
    states: Vec<PolyFunction>,
}

impl MixedState {
    /// Weights are renormalized to sum to one and the components are
    /// re-orthonormalized in the order given, unless they already are
    /// orthonormal to `1e-12`, in which case they are kept as given.
    pub fn new(weights: Vec<f64>, states: Vec<PolyFunction>) -> Result<Self> {
        if states.is_empty() || weights.len() != states.len() {
            return Err(Error::Invalid(format!(
                "need matching non-empty weights and states, got {} and {}",
                weights.len(),
                states.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Invalid("mixture weights must be positive and finite".into()));
        }
        let total: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let params = states[0].params().clone();
        let states = if gram_defect(&states)? <= 1e-12 { states } else { gram_schmidt(&states)? };
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate().skip(i) {
                let g = inner_product(a, b)?;
                let target = if i == j { 1.0 } else { 0.0 };
                if (g.re - target).abs() > ORTHONORMAL_TOL || g.im.abs() > ORTHONORMAL_TOL {
                    return Err(Error::Invalid(format!("Gram entry ({i},{j}) = {g} after orthonormalization")));
                }
            }
        }
        Ok(Self { params, weights, states })
    }

    /// The rank-one projector onto `f / ‖f‖`.
    pub fn pure(f: PolyFunction) -> Result<Self> {
        Self::new(vec![1.0], vec![f])
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[PolyFunction] {
        &self.states
    }

    pub fn rank(&self) -> usize {
        self.states.len()
    }

    /// `⟨φ_z, ρ φ_z⟩ = Σ λ_i u_{ψ_i}(z)`.
    pub fn husimi_with_gap(&self, z: &Point, gap: f64) -> f64 {
        let w = gap.powf(self.params.alpha());
        self.weights
            .iter()
            .zip(&self.states)
            .map(|(l, s)| l * s.eval(z).norm_sqr())
            .sum::<f64>()
            * w
    }

    /// Per-component Husimi values `u_{ψ_i}(z)`.
    pub fn component_husimi(&self, z: &Point, gap: f64) -> Vec<f64> {
        let w = gap.powf(self.params.alpha());
        self.states.iter().map(|s| s.eval(z).norm_sqr() * w).collect()
    }
}

/// Largest deviation of the Gram matrix from the identity.
fn gram_defect(states: &[PolyFunction]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate().skip(i) {
            let g = inner_product(a, b)?;
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    Ok(worst)
}
