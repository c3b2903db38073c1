//! Numerical laboratory for wave maps into the Lorentzian surface
//! `λ = (du₁² − du₂²)/(2u₁)`.

pub mod cauchy;
pub mod eds;
pub mod error;
pub mod export;
pub mod expr;
pub mod func;
pub mod geometry;
pub mod jet;
pub mod ode;
pub mod quadrature;
pub mod report;
pub mod sigma;
pub mod simulator;
pub mod verify;
pub mod vessiot;
pub mod weierstrass;

pub use error::{Error, Result};
pub use func::ScalarFn;
pub use jet::Jet;
pub use report::{Check, VerificationReport};
