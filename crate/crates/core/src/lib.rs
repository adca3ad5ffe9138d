//! Dulac maps, isoclines, leaves and limit-cycle bounds for the slow-fast
//! foliation `eps (1 - y) d(y - x^2) + (y - x^2) d(1 - y) = 0` and its
//! polynomial perturbations.

pub mod analytic;
pub mod blowup;
pub mod cyclicity;
pub mod dulac;
pub mod error;
pub mod export;
pub mod foliation;
pub mod isoclines;
pub mod leaves;
pub mod ode;

pub use analytic::{Cpx, Eps};
pub use error::{Error, Result};
