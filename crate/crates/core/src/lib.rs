//! Weighted Fredholm theory for Laplace and Dirac type operators on manifolds
//! with conical, cylindrical and hyperbolic ends.

pub mod error;
pub mod fredholm;
pub mod link_spectra;
pub mod model_cone;
pub mod oracles;
pub mod scalar;
pub mod symbols;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;
