//! Points of the complex hyperbolic ball `B_N ⊂ C^N`, the Hermitian inner
//! product, the involutive automorphisms `Υ_{z0}`, and the correspondence
//! between hyperbolic radius, Euclidean radius and invariant measure of
//! centered balls.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Points with `|z|^2 > 1 - BOUNDARY_MARGIN` are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-14;

/// A point strictly inside the unit ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Point {
    coords: Vec<Complex64>,
}

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Invalid("a point needs at least one coordinate".into()));
        }
        let norm_sq: f64 = coords.iter().map(|c| c.norm_sqr()).sum();
        if !norm_sq.is_finite() || norm_sq > 1.0 - BOUNDARY_MARGIN {
            return Err(Error::OutsideBall(norm_sq));
        }
        Ok(Self { coords })
    }

    pub fn origin(n: usize) -> Self {
        Self { coords: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Real point `(x_1, ..., x_N)`.
    pub fn real(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `1 - |z|^2`.
    pub fn gap(&self) -> f64 {
        1.0 - self.norm_sq()
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub(crate) fn from_coords_unchecked(coords: Vec<Complex64>) -> Self {
        Self { coords }
    }
}

impl TryFrom<Vec<[f64; 2]>> for Point {
    type Error = Error;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Point::new(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<Point> for Vec<[f64; 2]> {
    fn from(p: Point) -> Self {
        p.coords.iter().map(|c| [c.re, c.im]).collect()
    }
}

/// `⟨z, w⟩ = Σ z_k conj(w_k)`.
pub fn hermitian_inner(z: &Point, w: &Point) -> Result<Complex64> {
    check_dims(z, w)?;
    Ok(inner_unchecked(z.coords(), w.coords()))
}

pub(crate) fn inner_unchecked(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

fn check_dims(z: &Point, w: &Point) -> Result<()> {
    if z.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: z.dim(), got: w.dim() });
    }
    Ok(())
}

/// The automorphism `Υ_{z0}` of the ball. It swaps `0` and `z0` and is an
/// involution. `Υ_0` is taken to be the identity.
pub fn mobius(z0: &Point, z: &Point) -> Result<Point> {
    check_dims(z0, z)?;
    if z0.is_origin() {
        return Ok(z.clone());
    }
    let a2 = z0.norm_sq();
    let zc = z.coords();
    let ac = z0.coords();
    let za = inner_unchecked(zc, ac);
    let proj = za / a2;
    let s = (1.0 - a2).sqrt();
    let denom = Complex64::new(1.0, 0.0) - za;
    let coords: Vec<Complex64> = zc
        .iter()
        .zip(ac)
        .map(|(&zk, &ak)| {
            let pz = proj * ak;
            (ak - pz - s * (zk - pz)) / denom
        })
        .collect();
    // The image of an interior point is interior; tiny overshoot only comes
    // from rounding next to the boundary.
    let n2: f64 = coords.iter().map(|c| c.norm_sqr()).sum();
    if n2 > 1.0 - BOUNDARY_MARGIN {
        return Err(Error::OutsideBall(n2));
    }
    Ok(Point::from_coords_unchecked(coords))
}

/// `1 - |Υ_{z0}(z)|^2 = (1 - |z0|^2)(1 - |z|^2) / |1 - ⟨z, z0⟩|^2`, evaluated
/// without forming the image point.
pub fn mobius_gap(z0: &Point, z: &Point, z_gap: f64) -> f64 {
    let za = inner_unchecked(z.coords(), z0.coords());
    z0.gap() * z_gap / (Complex64::new(1.0, 0.0) - za).norm_sqr()
}

/// Density of the invariant measure `dm` against normalized volume: `(1 - |z|^2)^{-(N+1)}`.
pub fn invariant_density(z: &Point) -> f64 {
    z.gap().powi(-(z.dim() as i32 + 1))
}

/// Invariant measure of a centered ball of hyperbolic radius `rho`: `sinh(rho)^{2N}`.
pub fn ball_measure_from_radius(rho: f64, n: usize) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::Negative(rho));
    }
    Ok(rho.sinh().powi(2 * n as i32))
}

/// Inverse of [`ball_measure_from_radius`]: returns `(rho, r)` with `r = tanh(rho)`
/// the Euclidean radius of the centered ball of measure `s`.
pub fn radius_from_measure(s: f64, n: usize) -> Result<(f64, f64)> {
    if !(s >= 0.0) {
        return Err(Error::Negative(s));
    }
    let x = s.powf(1.0 / (2 * n) as f64);
    let rho = x.asinh();
    let r = x / (1.0 + x * x).sqrt();
    Ok((rho, r))
}

/// Squared Euclidean radius of the centered ball of measure `s`, together with
/// the gap `1 - r^2`, both computed without cancellation.
pub fn ball_r2_gap(s: f64, n: usize) -> (f64, f64) {
    let x2 = s.powf(1.0 / n as f64);
    (x2 / (1.0 + x2), 1.0 / (1.0 + x2))
}

/// Invariant measure of the centered Euclidean ball `|z| < r`.
pub fn measure_of_euclidean_ball(r: f64, n: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::OutsideBall(r * r));
    }
    let r2 = r * r;
    Ok((r2 / (1.0 - r2)).powi(n as i32))
}

/// A geodesic ball `{z : |Υ_center(z)| < r}` of invariant measure `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: Point,
    pub measure: f64,
    pub hyperbolic_radius: f64,
    pub euclidean_radius: f64,
}

impl BallSpec {
    pub fn from_measure(center: Point, s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::Invalid(format!("ball measure must be finite, got {s}")));
        }
        let (rho, r) = radius_from_measure(s, center.dim())?;
        Ok(Self { center, measure: s, hyperbolic_radius: rho, euclidean_radius: r })
    }

    pub fn from_hyperbolic_radius(center: Point, rho: f64) -> Result<Self> {
        let s = ball_measure_from_radius(rho, center.dim())?;
        Ok(Self { center, measure: s, hyperbolic_radius: rho, euclidean_radius: rho.tanh() })
    }

    pub fn contains(&self, z: &Point) -> bool {
        self.contains_with_gap(z, z.gap())
    }

    /// Membership test using a precomputed `1 - |z|^2`.
    pub fn contains_with_gap(&self, z: &Point, gap: f64) -> bool {
        let (_, ball_gap) = ball_r2_gap(self.measure, self.center.dim());
        mobius_gap(&self.center, z, gap) > ball_gap
    }
}
