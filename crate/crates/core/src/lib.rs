//! Jet-based construction and verification of three-dimensional Lorentzian
//! Einstein-Weyl structures.
//!
//! Everything here is `no_std` with `alloc`. Coefficients are generic over
//! [`Scalar`]: `f64` for fast sampling, [`Q`] for exact rational checks.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bridge;
pub mod coframe;
pub mod error;
pub mod expr;
pub mod families;
pub mod field;
pub mod invariants;
pub mod jet;
pub mod linalg;
pub mod scalar;
pub mod weyl;

pub use error::{Error, Result};
pub use expr::{Expression, FreeFunction};
pub use field::{PairJets, ScalarField, WeylPair};
pub use jet::{Jet, JetSpace, MultiIndex};
pub use scalar::{CoefficientMode, Scalar, Q};
