//! The spherical function as a plane wave corrected by the resolvent:
//! `U = psi u0 - R(lambda) (Delta - lambda)(psi u0)`.
//!
//! `psi` is one on a cone about `Im xi` and vanishes before the walls, so the
//! error `(Delta - lambda)(psi u0)` grows more slowly than `u0` itself and the
//! resolvent can absorb it. On a truncated grid the Dirichlet ring reflects
//! part of that correction; agreement with the exact function is limited by
//! how far the comparison points sit from the ring.

use std::f64::consts::{FRAC_PI_3, PI};

use num_complex::Complex64;
use serde::Serialize;

use super::weyl::{fold_z, plane_wave, SpectralVector};
use crate::error::Result;
use crate::flat::operator::RadialOperator;
use crate::flat::solve::{Reduction, ResolventSolver};
use crate::flat::spectral::SpectralParam;
use crate::parametrix::partition::spline_step;

type C = Complex64;

/// Angle kept between the cone and the nearest wall.
pub const CONE_WALL_GAP: f64 = PI / 36.0;

/// Below this radius the cutoff is switched off, where the angle means little.
const CORE: (f64, f64) = (2.0, 4.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeCutoff {
    /// Direction of `Im xi`, from the wall `j = 0`.
    pub centre: f64,
    /// `psi = 1` within this angle of the centre.
    pub half_angle: f64,
    /// ... and falls to zero over this further angle.
    pub fall: f64,
}

impl ConeCutoff {
    pub fn for_frequency(xi: &SpectralVector) -> Self {
        let im = xi.im_part();
        let centre = im[1].atan2(im[0]);
        let to_wall = centre.min(FRAC_PI_3 - centre);
        let half_angle = to_wall - CONE_WALL_GAP;
        Self {
            centre,
            half_angle,
            fall: CONE_WALL_GAP / 2.0,
        }
    }

    pub fn eval(&self, z: [f64; 2]) -> f64 {
        let z = fold_z(z);
        let r = z[0].hypot(z[1]);
        let off = (z[1].atan2(z[0]) - self.centre).abs();
        let angular = 1.0 - spline_step((off - self.half_angle) / self.fall);
        angular * spline_step((r - CORE.0) / (CORE.1 - CORE.0))
    }

    /// Whether `psi = 1` at `z`.
    pub fn is_one(&self, z: [f64; 2]) -> bool {
        self.eval(z) == 1.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolventSpherical {
    pub cutoff: ConeCutoff,
    /// The corrected function on every node.
    pub u: Vec<C>,
    /// `psi u0`.
    pub cut_wave: Vec<C>,
}

pub fn spherical_via_resolvent(
    op: &RadialOperator,
    xi: &SpectralVector,
) -> Result<ResolventSpherical> {
    let grid = &op.grid;
    let cutoff = ConeCutoff::for_frequency(xi);
    let cut_wave: Vec<C> = grid.sample(|z| {
        let zf = fold_z(z);
        plane_wave(xi.xi, zf) * cutoff.eval(zf)
    });
    let param = SpectralParam::new(xi.lambda)?;
    let error = op.residual(&cut_wave, xi.lambda, &vec![C::new(0.0, 0.0); grid.len()]);
    let correction = ResolventSolver::new(op, param, Reduction::WeylInvariant)?.solve(&error)?;
    let u = cut_wave
        .iter()
        .zip(&correction)
        .map(|(a, b)| a - b)
        .collect();
    Ok(ResolventSpherical {
        cutoff,
        u,
        cut_wave,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat::grid::ChamberGrid;
    use crate::flat::operator::assemble_radial;
    use crate::spherical::weyl::{spherical_on_grid, weyl_sum_coeffs};

    #[test]
    fn cutoff_shape() {
        let xi = SpectralVector::along(C::new(-0.4, 1.2), 25f64.to_radians()).unwrap();
        let c = ConeCutoff::for_frequency(&xi);
        assert!((c.half_angle - 20f64.to_radians()).abs() < 1e-12);
        let at =
            |deg: f64, r: f64| c.eval([r * deg.to_radians().cos(), r * deg.to_radians().sin()]);
        assert_eq!(at(25.0, 10.0), 1.0);
        assert_eq!(at(5.0, 10.0), 1.0);
        assert_eq!(at(0.0, 10.0), 0.0);
        assert_eq!(at(60.0, 10.0), 0.0);
        assert_eq!(at(25.0, 1.0), 0.0);
        // Weyl invariant.
        assert_eq!(at(-25.0, 10.0), 1.0);
    }

    #[test]
    fn solves_the_eigen_equation_and_tracks_the_weyl_sum() {
        let xi = SpectralVector::along(C::new(-0.4, 1.2), 25f64.to_radians()).unwrap();
        let grid = ChamberGrid::new(0.2, 20.0).unwrap();
        let op = assemble_radial(grid.clone());
        let s = spherical_via_resolvent(&op, &xi).unwrap();
        let r = op.residual(&s.u, xi.lambda, &vec![C::new(0.0, 0.0); grid.len()]);
        let inner = |k: usize| {
            !grid.is_boundary(k)
                && grid
                    .neighbors(k)
                    .iter()
                    .all(|n| n.is_some_and(|m| !grid.is_boundary(m)))
        };
        let scale = s.u.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let worst = (0..grid.len())
            .filter(|&k| inner(k))
            .map(|k| r[k].norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9 * scale, "{worst} vs {scale}");
        let w = spherical_on_grid(&weyl_sum_coeffs(&xi).unwrap(), &grid);
        let keep = |k: usize| {
            let z = grid.z(k);
            grid.in_positive_chamber(k)
                && (8.0..12.0).contains(&grid.radius(k))
                && s.cutoff.is_one(z)
        };
        let diff: Vec<C> = s.u.iter().zip(&w).map(|(a, b)| a - b).collect();
        let rel = op.norm_on(&diff, keep) / op.norm_on(&w, keep);
        assert!(rel < 0.1, "{rel}");
    }
}
