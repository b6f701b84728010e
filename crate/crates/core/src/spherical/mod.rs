//! Spherical functions: plane waves, wall-matched Weyl sums, the resolvent
//! construction and threshold waves at the walls.

pub mod resolvent;
pub mod twobody;
pub mod wall;
pub mod weyl;

pub use resolvent::{spherical_via_resolvent, ConeCutoff, ResolventSpherical};
pub use twobody::{regular_solution, two_body_coeff, two_body_fit, TwoBodyCoeff, TwoBodyFit};
pub use wall::{wall_uniformity, ThresholdWave, WallUniformity, WallWindow};
pub use weyl::{
    plane_wave, spherical_eval, spherical_on_grid, weyl_sum_coeffs, SpectralVector, WeylSum,
};
