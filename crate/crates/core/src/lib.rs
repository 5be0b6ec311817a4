//! Critical random forests: exact combinatorics, samplers, the breadth-first
//! exploration chain, the drift correction `α`, and the limiting reflected
//! diffusion, plus the statistical harness that compares them.

pub mod analysis;
pub mod combinatorics;
pub mod diffusion;
pub mod drift;
pub mod error;
pub mod exploration;
pub mod forest_io;
pub mod graph;
pub mod logmath;
pub mod manifest;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod samplers;
pub mod stable_density;
pub mod verify;

pub use error::{Error, Result};
