//! Numerical tools for dually flat (α, β)-metrics: second-order jets,
//! Riemannian and Finsler tensor calculus, the φ-equation, β-deformations and
//! a catalog of worked metrics.

pub mod catalog;
pub mod deform;
pub mod error;
pub mod finsler;
pub mod jets;
pub mod linalg;
pub mod phi;
pub mod quad;
pub mod riemann;
pub mod univariate;

pub use error::{Error, Result};
pub use jets::Jet2;
