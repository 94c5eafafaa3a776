//! Metric-geometry quantities on finite metric spaces: pointwise Lipschitz
//! constants, chains and quasi-convexity, the p-modulus of curve families,
//! Hajłasz and upper gradients, doubling and Poincaré constants, and a
//! corpus of closed-form example spaces.

pub mod corpus;
pub mod curves;
pub mod error;
pub mod lipschitz;
pub mod metric;
pub mod modulus;
pub mod sobolev;
pub mod solver;

pub use error::{Error, Result};
