//! Complex quantum trajectories: the velocity field `m ẋ = (ħ/i) Ψ′/Ψ` in the
//! complex plane, recovery of the Born density on the real line, and the
//! conserved extended density `ρ(x_r, x_i)` along complex paths.

pub mod born;
pub mod dynamics;
pub mod error;
pub mod extended;
mod quad;
pub mod scenario;
pub mod states;

pub use error::{Error, Result};
pub use states::{ComplexPoint, StateKind, StateSpec, UnitSystem};
