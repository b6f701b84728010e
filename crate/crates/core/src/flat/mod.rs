//! The radial Laplacian on the flat: discretisation, resolvent solves and
//! asymptotic extraction.

pub mod asymptotics;
pub mod grid;
pub mod operator;
pub mod sobolev;
pub mod solve;
pub mod spectral;
