//! Finite-size scaling functions of the critical Casimir effect for the
//! two-dimensional Ising model on an open rectangle.

pub mod casimir;
pub mod effspin;
pub mod error;
pub mod quad;
pub mod roots;
pub mod sigma;
pub mod specialfn;
pub mod strip;
pub mod thermo_constants;
pub mod weights;

pub use error::{Error, Result};
