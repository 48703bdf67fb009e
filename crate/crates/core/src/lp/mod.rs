//! Exact-rational fractional matchings and Farkas certificates.

mod fractional;
mod scalar;
mod simplex;

pub use fractional::*;
