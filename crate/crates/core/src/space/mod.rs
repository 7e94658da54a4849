//! Bergman-space parameters, exact monomial calculus and the function
//! representations the rest of the crate consumes.
//!
//! Inner products are conjugate-linear in the first argument:
//! `⟨f, g⟩ = c_α ∫ conj(f) g (1 - |z|^2)^α dm`.

mod coherent;
mod mixed;
mod multi;
mod params;
mod poly;
mod probe;
mod serial;
mod state;

pub use coherent::{expand_coherent, CoherentState};
pub use mixed::MixedState;
pub use multi::{MonomialBasis, MultiIndex};
pub use params::{ln_gamma, monomial_norm_sq, normalizing_constant, SpaceParams, DEFAULT_DEGREE_CAP};
pub use poly::{gram_schmidt, inner_product, PolyFunction};
pub use probe::ConvexProbe;
pub use serial::{CoeffEntry, StateDoc};
pub use state::{kernel_eval, Husimi, State};
