pub mod algebra;
pub mod cli;
pub mod cm;
pub mod error;
pub mod hecke;
pub mod hypergeom;
pub mod modular;
pub mod numerics;
pub mod registry;
pub mod series;
pub mod verifier;

pub use error::{Error, Result};
pub use numerics::{BigComplex, BigReal, PrecisionContext};
