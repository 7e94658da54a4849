use std::collections::BTreeMap;

use num_complex::Complex64;

use super::multi::power_tables;
use super::{monomial_norm_sq, MultiIndex, SpaceParams};
use crate::geometry::Point;
use crate::{Error, Result};

/// Relative residual below which [`gram_schmidt`] declares a vector dependent.
pub const GRAM_RESIDUAL_TOL: f64 = 1e-12;

/// A holomorphic polynomial `Σ c_m z^m` stored sparsely.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyFunction {
    params: SpaceParams,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl PolyFunction {
    pub fn new(params: SpaceParams, coeffs: impl IntoIterator<Item = (MultiIndex, Complex64)>) -> Result<Self> {
        let mut map: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (m, c) in coeffs {
            if m.dim() != params.n() {
                return Err(Error::DimensionMismatch { expected: params.n(), got: m.dim() });
            }
            if m.degree() > params.degree_cap() {
                return Err(Error::DegreeCap { degree: m.degree(), cap: params.degree_cap() });
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::Invalid("non-finite coefficient".into()));
            }
            *map.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| c.re != 0.0 || c.im != 0.0);
        Ok(Self { params, coeffs: map })
    }

    pub fn zero(params: SpaceParams) -> Self {
        Self { params, coeffs: BTreeMap::new() }
    }

    pub fn constant(params: SpaceParams, c: Complex64) -> Self {
        let n = params.n();
        Self::new(params, [(MultiIndex::zero(n), c)]).expect("constant polynomial is always valid")
    }

    pub fn monomial(params: SpaceParams, m: MultiIndex, c: Complex64) -> Result<Self> {
        Self::new(params, [(m, c)])
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, m: &MultiIndex) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or_default()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, z: &Point) -> Complex64 {
        self.eval_coords(z.coords())
    }

    pub(crate) fn eval_coords(&self, z: &[Complex64]) -> Complex64 {
        if self.coeffs.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let powers = power_tables(z, self.degree());
        self.coeffs.iter().map(|(m, c)| c * m.eval_with(&powers)).sum()
    }

    /// Exact `‖f‖^2` from the orthogonality of monomials.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|(m, c)| c.norm_sqr() * monomial_norm_sq(m, &self.params)).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let coeffs = self.coeffs.iter().map(|(m, c)| (m.clone(), c * s));
        Self::new(self.params.clone(), coeffs).expect("scaling keeps a valid polynomial")
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: Complex64, other: &PolyFunction) -> Result<Self> {
        if !self.params.same_space(&other.params) {
            return Err(Error::ParamsMismatch);
        }
        let params = self.params.with_degree_cap(self.params.degree_cap().max(other.params.degree_cap()));
        let coeffs = self
            .coeffs
            .iter()
            .map(|(m, c)| (m.clone(), *c))
            .chain(other.coeffs.iter().map(|(m, c)| (m.clone(), c * s)));
        Self::new(params, coeffs)
    }

    /// `f / ‖f‖`; the zero polynomial is rejected.
    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sq();
        if !(n2 > 0.0) {
            return Err(Error::Invalid("cannot normalize the zero function".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / n2.sqrt(), 0.0)))
    }
}

/// Exact `⟨f, g⟩ = Σ_m conj(f_m) g_m ‖z^m‖^2`.
pub fn inner_product(f: &PolyFunction, g: &PolyFunction) -> Result<Complex64> {
    if !f.params.same_space(&g.params) {
        return Err(Error::ParamsMismatch);
    }
    let (small, large, flip) = if f.coeffs.len() <= g.coeffs.len() { (f, g, false) } else { (g, f, true) };
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, a) in &small.coeffs {
        if let Some(b) = large.coeffs.get(m) {
            let w = monomial_norm_sq(m, &f.params);
            acc += if flip { b.conj() * a } else { a.conj() * b } * w;
        }
    }
    Ok(acc)
}

/// Orthonormalizes `fs` in order (modified Gram–Schmidt with one
/// re-orthogonalization pass). A vector whose residual has relative squared
/// norm below [`GRAM_RESIDUAL_TOL`] is reported by index.
pub fn gram_schmidt(fs: &[PolyFunction]) -> Result<Vec<PolyFunction>> {
    let mut out: Vec<PolyFunction> = Vec::with_capacity(fs.len());
    for (i, f) in fs.iter().enumerate() {
        if let Some(first) = fs.first() {
            if !first.params.same_space(&f.params) {
                return Err(Error::ParamsMismatch);
            }
        }
        let n0 = f.norm_sq();
        if !(n0 > 0.0) {
            return Err(Error::RankDeficient(i));
        }
        let mut v = f.clone();
        for _pass in 0..2 {
            for q in &out {
                let proj = inner_product(q, &v)?;
                v = v.axpy(-proj, q)?;
            }
        }
        let r = v.norm_sq();
        if r < GRAM_RESIDUAL_TOL * n0 {
            return Err(Error::RankDeficient(i));
        }
        out.push(v.normalized()?);
    }
    Ok(out)
}
