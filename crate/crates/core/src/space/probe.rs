use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Convex `Φ : [0, 1] → R` with `Φ(0) = 0`, from a closed catalog.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ConvexProbe {
    /// `s^p`, `p >= 1`.
    Power(f64),
    /// `max(s - t, 0)`, `0 < t < 1`.
    Hinge(f64),
    /// `s ln s`.
    XLogX,
}

impl ConvexProbe {
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidProbe(format!("power exponent must be >= 1, got {p}")));
        }
        Ok(Self::Power(p))
    }

    pub fn hinge(t: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidProbe(format!("hinge threshold must lie in (0, 1), got {t}")));
        }
        Ok(Self::Hinge(t))
    }

    pub fn eval(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match *self {
            Self::Power(p) if p == 1.0 => s,
            Self::Power(p) if p == 2.0 => s * s,
            Self::Power(p) => s.powf(p),
            Self::Hinge(t) => (s - t).max(0.0),
            Self::XLogX if s == 0.0 => 0.0,
            Self::XLogX => s * s.ln(),
        }
    }

    /// Right derivative `Φ'(s+)`.
    pub fn derivative(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match *self {
            Self::Power(p) if p == 1.0 => 1.0,
            Self::Power(p) => p * s.powf(p - 1.0),
            Self::Hinge(t) => {
                if s >= t {
                    1.0
                } else {
                    0.0
                }
            }
            Self::XLogX => s.ln() + 1.0,
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(*self, Self::Power(p) if p == 1.0)
    }

    pub fn is_strictly_convex(&self) -> bool {
        match *self {
            Self::Power(p) => p > 1.0,
            Self::Hinge(_) => false,
            Self::XLogX => true,
        }
    }

    /// Points in `(0, 1)` where `Φ` is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            Self::Hinge(t) => vec![t],
            _ => Vec::new(),
        }
    }

    /// Midpoint convexity `Φ((a+b)/2) <= (Φ(a)+Φ(b))/2 + tol` on all grid pairs.
    pub fn midpoint_convex_on(&self, grid: &[f64], tol: f64) -> bool {
        grid.iter().all(|&a| {
            grid.iter().all(|&b| self.eval(0.5 * (a + b)) <= 0.5 * (self.eval(a) + self.eval(b)) + tol)
        })
    }
}

impl fmt::Display for ConvexProbe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Power(p) => write!(f, "power:{p}"),
            Self::Hinge(t) => write!(f, "hinge:{t}"),
            Self::XLogX => write!(f, "xlogx"),
        }
    }
}

impl FromStr for ConvexProbe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "xlogx" {
            return Ok(Self::XLogX);
        }
        let (tag, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidProbe(format!("expected power:<p>, hinge:<t> or xlogx, got {s:?}")))?;
        let x: f64 = arg.parse().map_err(|_| Error::InvalidProbe(format!("bad number in {s:?}")))?;
        match tag {
            "power" => Self::power(x),
            "hinge" => Self::hinge(x),
            _ => Err(Error::InvalidProbe(format!("unknown probe {tag:?}"))),
        }
    }
}

impl TryFrom<String> for ConvexProbe {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ConvexProbe> for String {
    fn from(p: ConvexProbe) -> Self {
        p.to_string()
    }
}
