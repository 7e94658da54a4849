use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{monomial_norm_sq, params::ln_gamma, SpaceParams};

/// Exponent vector of a monomial `z^m = Π z_i^{m_i}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    /// `ln Π m_i!`
    pub fn ln_factorial(&self) -> f64 {
        self.0.iter().map(|&e| ln_gamma(e as f64 + 1.0)).sum()
    }

    /// All multi-indices in `n` variables of total degree `<= max_degree`,
    /// ordered by degree and then lexicographically (descending in the first slot).
    pub fn enumerate(n: usize, max_degree: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for d in 0..=max_degree {
            let mut cur = vec![0u32; n];
            fill(&mut out, &mut cur, 0, d as u32);
        }
        out
    }

    /// `z^m` given per-coordinate power tables `powers[i][e] = z_i^e`.
    pub(crate) fn eval_with(&self, powers: &[Vec<Complex64>]) -> Complex64 {
        self.0
            .iter()
            .zip(powers)
            .fold(Complex64::new(1.0, 0.0), |acc, (&e, p)| acc * p[e as usize])
    }
}

fn fill(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, rest: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = rest;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for e in (0..=rest).rev() {
        cur[pos] = e;
        fill(out, cur, pos + 1, rest - e);
    }
}

/// Tables `z_i^e` for `e = 0..=max_degree`.
pub(crate) fn power_tables(z: &[Complex64], max_degree: usize) -> Vec<Vec<Complex64>> {
    z.iter()
        .map(|&zi| {
            let mut row = Vec::with_capacity(max_degree + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..=max_degree {
                row.push(acc);
                acc *= zi;
            }
            row
        })
        .collect()
}

/// The orthogonal monomial basis of degree `<= D` together with its exact
/// squared norms.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    pub indices: Vec<MultiIndex>,
    pub norms_sq: Vec<f64>,
    pub max_degree: usize,
}

impl MonomialBasis {
    pub fn new(params: &SpaceParams, max_degree: usize) -> Self {
        let indices = MultiIndex::enumerate(params.n(), max_degree);
        let norms_sq = indices.iter().map(|m| monomial_norm_sq(m, params)).collect();
        Self { indices, norms_sq, max_degree }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Monomial values at `z`, each divided by its norm (orthonormal basis values).
    pub fn eval_orthonormal(&self, z: &[Complex64]) -> Vec<Complex64> {
        let powers = power_tables(z, self.max_degree);
        self.indices
            .iter()
            .zip(&self.norms_sq)
            .map(|(m, g)| m.eval_with(&powers) / g.sqrt())
            .collect()
    }
}
