//! The product model `R x H^2` near the faces of the chamber.

pub mod dissipative;
pub mod distance;
pub mod kernels;
pub mod model;
