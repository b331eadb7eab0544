//! Stochastic integration against Gaussian processes and fields by Wiener
//! chaos expansion.

pub mod chaos;
pub mod error;
pub mod function_space;
pub mod integrator;
pub mod kernel;
pub mod mc;
pub mod sde;
pub mod verify;

pub use error::{ChaosError, Result};
