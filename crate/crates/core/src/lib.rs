//! Numerical toolkit for weighted Bergman spaces `A_α` on the complex unit
//! ball `B_N`.
//!
//! The crate covers the objects needed to test sharp Wehrl-type and
//! Faber–Krahn inequalities for coherent-state transforms of `SU(N,1)`:
//!
//! * [`geometry`]: points of the ball, Möbius automorphisms, invariant measure of balls.
//! * [`space`]: space parameters, exact monomial calculus, coherent and mixed states,
//!   Husimi functions and convex probes.
//! * [`quadrature`]: radial Gauss–Legendre quadrature, importance-sampled Monte Carlo
//!   against the invariant measure, and the closed-form sharp constants.
//! * [`rearrange`]: distribution functions, decreasing rearrangements and
//!   superlevel-set integrals.
//! * [`bounds`]: inequality checks with statistical verdicts.
//! * [`extremize`]: sample-average maximization of the Wehrl functional.

pub mod bounds;
pub mod error;
pub mod extremize;
pub mod geometry;
pub mod identities;
pub mod quadrature;
pub mod random;
pub mod rearrange;
pub mod space;

pub use error::{Error, Result};
pub use geometry::{BallSpec, Point};
pub use num_complex::Complex64;
pub use quadrature::{Estimate, McConfig, SampleSet};
pub use space::{
    CoherentState, ConvexProbe, Husimi, MixedState, MultiIndex, PolyFunction, SpaceParams, State,
};
