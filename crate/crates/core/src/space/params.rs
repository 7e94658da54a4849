use serde::{Deserialize, Serialize};

use super::MultiIndex;
use crate::{Error, Result};

pub const DEFAULT_DEGREE_CAP: usize = 24;

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// The pair `(N, α)` with `α > N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsDoc", into = "ParamsDoc")]
pub struct SpaceParams {
    n: usize,
    alpha: f64,
    wehrl_k: Option<u32>,
    degree_cap: usize,
    ln_c_alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct ParamsDoc {
    n: usize,
    alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
}

impl TryFrom<ParamsDoc> for SpaceParams {
    type Error = Error;

    fn try_from(d: ParamsDoc) -> Result<Self> {
        let p = SpaceParams::new(d.n, d.alpha)?;
        match d.k {
            Some(k) if (d.n + 1) as f64 * k as f64 != d.alpha => Err(Error::InvalidParams(
                format!("k = {k} is inconsistent with alpha = {}", d.alpha),
            )),
            Some(k) => Ok(Self { wehrl_k: Some(k), ..p }),
            None => Ok(p),
        }
    }
}

impl From<SpaceParams> for ParamsDoc {
    fn from(p: SpaceParams) -> Self {
        ParamsDoc { n: p.n, alpha: p.alpha, k: p.wehrl_k }
    }
}

impl SpaceParams {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("dimension N must be positive".into()));
        }
        if !alpha.is_finite() || alpha <= n as f64 {
            return Err(Error::InvalidParams(format!("need alpha > N, got N = {n}, alpha = {alpha}")));
        }
        let ln_c_alpha = ln_gamma(alpha) - ln_gamma(n as f64 + 1.0) - ln_gamma(alpha - n as f64);
        Ok(Self { n, alpha, wehrl_k: None, degree_cap: DEFAULT_DEGREE_CAP, ln_c_alpha })
    }

    /// The discrete-series value `α = (N + 1) k`.
    pub fn wehrl(n: usize, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("k must be a positive integer".into()));
        }
        let p = Self::new(n, ((n + 1) as u64 * k as u64) as f64)?;
        Ok(Self { wehrl_k: Some(k), ..p })
    }

    pub fn with_degree_cap(&self, cap: usize) -> Self {
        Self { degree_cap: cap, ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn wehrl_k(&self) -> Option<u32> {
        self.wehrl_k
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    /// True when `α = (N + 1) k` for a positive integer `k`, whether or not
    /// the parameters were built through [`SpaceParams::wehrl`].
    pub fn is_wehrl_conforming(&self) -> bool {
        let k = self.alpha / (self.n + 1) as f64;
        k >= 1.0 && k.fract() == 0.0
    }

    pub fn c_alpha(&self) -> f64 {
        self.ln_c_alpha.exp()
    }

    pub fn ln_c_alpha(&self) -> f64 {
        self.ln_c_alpha
    }

    /// `α - N`, the exponent margin of the radial weight.
    pub fn beta(&self) -> f64 {
        self.alpha - self.n as f64
    }

    /// Same space up to the degree cap.
    pub fn same_space(&self, other: &SpaceParams) -> bool {
        self.n == other.n && self.alpha == other.alpha
    }
}

/// `c_α = Γ(α) / (N! Γ(α - N))`.
pub fn normalizing_constant(params: &SpaceParams) -> f64 {
    params.c_alpha()
}

/// `‖z^m‖^2 = m! Γ(α) / Γ(α + |m|)` with `m! = Π m_i!`.
pub fn monomial_norm_sq(m: &MultiIndex, params: &SpaceParams) -> f64 {
    let a = params.alpha();
    (m.ln_factorial() + ln_gamma(a) - ln_gamma(a + m.degree() as f64)).exp()
}
