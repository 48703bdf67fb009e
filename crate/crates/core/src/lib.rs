//! Perfect matchings in k-uniform hypergraphs under minimum positive
//! codegree conditions.
//!
//! The crate provides exact oracles for perfect and maximum matchings,
//! exact-rational fractional matchings with Farkas certificates, absorbing
//! structures, a weighted nibble, the constructive extremal-case solver and
//! a pipeline tying them together.

pub mod absorbing;
pub mod constructions;
pub mod error;
pub mod exact;
pub mod extremal;
pub mod hypergraph;
pub mod io;
pub mod lp;
pub mod nibble;
pub mod par;
pub mod pipeline;
pub mod rational;
pub mod sweep;
pub mod vertex_set;

pub use error::{Error, Result};
pub use hypergraph::{Hypergraph, Matching};
pub use vertex_set::VertexSet;
