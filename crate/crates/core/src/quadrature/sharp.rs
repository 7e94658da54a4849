use super::gauss::{gauss_legendre, integrate_panel};
use super::radial::{radial_integrate_with_breaks, DEFAULT_NODES};
use crate::space::{ConvexProbe, SpaceParams};
use crate::Result;

/// Sharp constant of the Wehrl-type inequality:
/// `sup ∫ Φ(u_f) dm = ∫_{B_N} Φ((1 - |z|^2)^α) dm`, the value at the ground state.
pub fn sharp_rhs(probe: &ConvexProbe, params: &SpaceParams) -> Result<f64> {
    let a = params.alpha();
    let breaks: Vec<f64> = probe.kinks().iter().map(|t| t.powf(1.0 / a)).collect();
    let g = |x: super::RadialPoint| match *probe {
        // s ln s with s = v^α, written to stay accurate as v → 0
        ConvexProbe::XLogX => a * x.gap.powf(a) * x.gap.ln(),
        ConvexProbe::Power(p) => x.gap.powf(a * p),
        _ => probe.eval(x.gap.powf(a)),
    };
    radial_integrate_with_breaks(g, params, DEFAULT_NODES, &breaks)
}

/// Minimum Wehrl entropy `-∫ u ln u dm` over unit-norm states.
pub fn entropy_lower_bound(params: &SpaceParams) -> Result<f64> {
    Ok(-sharp_rhs(&ConvexProbe::XLogX, params)?)
}

/// `J'(s) = (1 + s^{1/N})^{-α}`.
pub fn j_prime(s: f64, params: &SpaceParams) -> f64 {
    assert!(s >= 0.0, "J is defined for s >= 0");
    let x = s.powf(1.0 / params.n() as f64);
    (-params.alpha() * x.ln_1p()).exp()
}

/// `J''(s) = -α s J'(s) / (N s^{(2N-1)/N} + N s^2)`.
pub fn j_second(s: f64, params: &SpaceParams) -> f64 {
    assert!(s >= 0.0, "J is defined for s >= 0");
    let n = params.n() as f64;
    let jp = j_prime(s, params);
    -params.alpha() * s * jp / (n * s.powf((2.0 * n - 1.0) / n) + n * s * s)
}

/// `J(s) = ∫_{B_s} (1 - |z|^2)^α dm = ∫_0^s (1 + σ^{1/N})^{-α} dσ` over the centered
/// ball of invariant measure `s`.
///
/// `N = 1` uses `(1 - (1+s)^{1-α}) / (α - 1)`. Otherwise, with `x = s^{1/N}`, the
/// integral `N ∫_0^x ξ^{N-1} (1+ξ)^{-α} dξ` is taken by Gauss–Legendre for
/// `x <= 2`, and for `x > 2` as `1/c_α` minus the exact tail
/// `N Σ_j C(N-1, j) (-1)^j V^{j+β} / (j+β)`, `V = 1/(1+x)`, `β = α - N`.
pub fn j_value(s: f64, params: &SpaceParams) -> f64 {
    assert!(s >= 0.0, "J is defined for s >= 0");
    if s == 0.0 {
        return 0.0;
    }
    let a = params.alpha();
    let n = params.n();
    if n == 1 {
        return -((1.0 - a) * s.ln_1p()).exp_m1() / (a - 1.0);
    }
    let nf = n as f64;
    let x = s.powf(1.0 / nf);
    if x <= 2.0 {
        let rule = gauss_legendre(64);
        return integrate_panel(|xi| nf * xi.powi(n as i32 - 1) * (-a * xi.ln_1p()).exp(), 0.0, x, &rule);
    }
    let beta = params.beta();
    let v = 1.0 / (1.0 + x);
    let mut tail = 0.0;
    let mut binom = 1.0;
    for j in 0..n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        tail += sign * binom * v.powf(j as f64 + beta) / (j as f64 + beta);
        binom *= (n - 1 - j) as f64 / (j as f64 + 1.0);
    }
    1.0 / params.c_alpha() - nf * tail
}
