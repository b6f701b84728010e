//! Numerics for the resolvent of the Laplacian on `SL(3,R)/SO(3)`.

pub mod atlas;
pub mod error;
pub mod fit;
pub mod flat;
pub mod geometry;
pub mod ode;
pub mod parametrix;
pub mod product;
pub mod report;
pub mod sparse;
pub mod spherical;
pub mod verify;

pub use error::{Error, Result};
