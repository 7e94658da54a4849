//! Closed-form cross-checks of the deterministic quadrature: each entry
//! compares a computed quantity with an independent formula.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use crate::geometry::ball_r2_gap;
use crate::quadrature::{
    entropy_lower_bound, j_prime, j_second, j_value, radial_integrate_with_breaks, sharp_rhs, DEFAULT_NODES,
};
use crate::space::{ln_gamma, ConvexProbe, SpaceParams};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    /// Relative tolerance (absolute when `expected` is zero).
    pub tol: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: impl Into<String>, value: f64, expected: f64, tol: f64) -> Self {
        let scale = if expected == 0.0 { 1.0 } else { expected.abs() };
        let pass = value.is_finite() && (value - expected).abs() <= tol * scale;
        Self { name: name.into(), value, expected, tol, pass }
    }
}

/// Points at which the derivative identities of `J` are checked.
pub const DERIVATIVE_POINTS: [f64; 3] = [0.1, 1.0, 10.0];

/// Central difference of `J` against `J'`.
pub fn j_prime_fd_check(s: f64, params: &SpaceParams) -> IdentityCheck {
    let h = 1e-4 * s;
    let fd = (j_value(s + h, params) - j_value(s - h, params)) / (2.0 * h);
    IdentityCheck::new(format!("fd J' at s={s}"), fd, j_prime(s, params), 1e-6)
}

/// Central difference of `J'` against `J''`.
pub fn j_second_fd_check(s: f64, params: &SpaceParams) -> IdentityCheck {
    let h = 1e-4 * s;
    let fd = (j_prime(s + h, params) - j_prime(s - h, params)) / (2.0 * h);
    IdentityCheck::new(format!("fd J'' at s={s}"), fd, j_second(s, params), 1e-5)
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// All identities for one space.
pub fn run_identities(params: &SpaceParams) -> Result<Vec<IdentityCheck>> {
    let n = params.n();
    let nf = n as f64;
    let a = params.alpha();
    let c = params.c_alpha();
    let mut out = Vec::new();

    out.push(IdentityCheck::new(
        "c_alpha * rhs(power:1) = 1",
        c * sharp_rhs(&ConvexProbe::Power(1.0), params)?,
        1.0,
        1e-9,
    ));
    for p in [1.5, 2.0, 3.0] {
        // ∫ v^{αp} dm = N B(αp - N, N)
        out.push(IdentityCheck::new(
            format!("rhs(power:{p}) = N B(alpha p - N, N)"),
            sharp_rhs(&ConvexProbe::Power(p), params)?,
            nf * ln_beta(a * p - nf, nf).exp(),
            1e-9,
        ));
    }
    let xlogx = (a / c) * (digamma(a - nf) - digamma(a));
    out.push(IdentityCheck::new("rhs(xlogx) digamma form", sharp_rhs(&ConvexProbe::XLogX, params)?, xlogx, 1e-9));
    out.push(IdentityCheck::new("entropy bound digamma form", entropy_lower_bound(params)?, -xlogx, 1e-9));
    for tau in [0.1f64, 0.3, 0.7] {
        // ∫ (u - τ)_+ over the ground state is J(s_τ) - τ s_τ with u*(s_τ) = τ
        let s_tau = (tau.powf(-1.0 / a) - 1.0).powi(n as i32);
        out.push(IdentityCheck::new(
            format!("rhs(hinge:{tau}) = J(s) - tau s"),
            sharp_rhs(&ConvexProbe::Hinge(tau), params)?,
            j_value(s_tau, params) - tau * s_tau,
            1e-8,
        ));
    }
    out.push(IdentityCheck::new("J'(0) = 1", j_prime(0.0, params), 1.0, 1e-15));
    for s in DERIVATIVE_POINTS {
        out.push(j_prime_fd_check(s, params));
        out.push(j_second_fd_check(s, params));
    }
    for s in [0.5, 1.0, 4.0] {
        // J(s) is the ground-state mass of the centered ball of measure s
        let (_, ball_gap) = ball_r2_gap(s, n);
        let radial = radial_integrate_with_breaks(
            |x| if x.gap > ball_gap { x.gap.powf(a) } else { 0.0 },
            params,
            DEFAULT_NODES,
            &[ball_gap],
        )?;
        out.push(IdentityCheck::new(format!("J({s}) = ground mass of ball"), j_value(s, params), radial, 1e-9));
    }
    // the tail ∫_S^∞ J' is at most S^{1-α/N} / (α/N - 1)
    let big = 1e15f64;
    let tail = big.powf(1.0 - a / nf) / (a / nf - 1.0);
    out.push(IdentityCheck::new("c_alpha J(1e15) -> 1", c * j_value(big, params), 1.0, (c * tail).max(1e-6)));
    for t in [0.05f64, 0.25, 0.6] {
        // ground-state distribution function μ(t) = (t^{-1/α} - 1)^N
        let level_gap = t.powf(1.0 / a);
        let mu = radial_integrate_with_breaks(|x| if x.gap > level_gap { 1.0 } else { 0.0 }, params, DEFAULT_NODES, &[level_gap])?;
        out.push(IdentityCheck::new(format!("ground mu({t})"), mu, (t.powf(-1.0 / a) - 1.0).powi(n as i32), 1e-9));
        // u*(μ(t)) = t, i.e. J'(μ(t)) = t
        out.push(IdentityCheck::new(format!("J'(mu({t})) = {t}"), j_prime(mu, params), t, 1e-9));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_identities_pass() {
        for (n, a) in [(1, 2.0), (1, 4.0), (2, 3.0), (3, 4.5), (2, 2.5)] {
            let p = SpaceParams::new(n, a).unwrap();
            for c in run_identities(&p).unwrap() {
                assert!(c.pass, "({n}, {a}) {c:?}");
            }
        }
    }

    #[test]
    fn failing_identity_is_reported() {
        let c = IdentityCheck::new("x", 1.0, 2.0, 1e-9);
        assert!(!c.pass);
        assert!(!IdentityCheck::new("nan", f64::NAN, 0.0, 1.0).pass);
    }
}
