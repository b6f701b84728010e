//! Angular partition of unity on the flat.
//!
//! Each wedge piece lives on the folded angle `phi` in `[0, pi/3]` of the
//! positive chamber, measured from its own wall: the sharp face owns the wall
//! `j = 0` and the supersharp face the wall `i = 0`, which the reflection in
//! the bisector exchanges. In local coordinates the two are identical, so one
//! profile serves both.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::flat::grid::ChamberGrid;

/// Default angular separation between a `phi` support and its `d psi` support.
pub const DEFAULT_THETA: f64 = std::f64::consts::FRAC_PI_8;

/// The two wedge faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Face {
    /// Near the wall `j = 0` (angle 0).
    Sharp,
    /// Near the wall `i = 0` (angle `pi/3`).
    Supersharp,
}

impl Face {
    pub const BOTH: [Face; 2] = [Face::Sharp, Face::Supersharp];

    /// Local axial coordinates of a positive-chamber node: the supersharp face
    /// sees the lattice reflected in the bisector, which swaps `i` and `j`.
    pub fn local_axial(&self, a: [i32; 2]) -> [i32; 2] {
        match self {
            Face::Sharp => a,
            Face::Supersharp => [a[1], a[0]],
        }
    }
}

/// `6t^5 - 15t^4 + 10t^3` clamped to `[0, 1]`: a `C^2` step.
pub fn spline_step(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

/// Falls from 1 at `x <= lo` to 0 at `x >= hi`.
fn fall(x: f64, lo: f64, hi: f64) -> f64 {
    1.0 - spline_step((x - lo) / (hi - lo))
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionOfUnity {
    pub theta: f64,
    /// `phi_0 = 1` for `r <= inner`, `0` for `r >= outer`.
    pub inner: f64,
    pub outer: f64,
    /// The wedge pieces split over `[pi/6 - half_width, pi/6 + half_width]`.
    pub half_width: f64,
    /// `psi` falls from 1 to 0 over this range of local angle.
    pub psi_fall: (f64, f64),
    /// `psi` falls from 1 to 0 radially over `[inner - ramp, inner]` inwards.
    pub ramp: f64,
    pub phi_sharp: Vec<f64>,
    pub phi_supersharp: Vec<f64>,
    pub phi_0: Vec<f64>,
    pub psi_sharp: Vec<f64>,
    pub psi_supersharp: Vec<f64>,
}

/// Polar angle of a point in the upper half-plane, in `[0, pi]`.
fn angle(z: [f64; 2]) -> f64 {
    z[1].atan2(z[0]).max(0.0)
}

impl PartitionOfUnity {
    /// Partition with the compact piece on `r <= outer`.
    ///
    /// The margin `pi/6 - theta` left by the target is split in three: the
    /// `phi` transition takes a third either side of the bisector and `psi`
    /// must vanish within the last third before the opposite wall.
    pub fn new(grid: &ChamberGrid, theta: f64, inner: f64, outer: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < FRAC_PI_6) {
            return invalid(format!(
                "angular separation {theta} is not achievable: need 0 < theta < pi/6"
            ));
        }
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return invalid(format!(
                "compact piece needs 0 < inner < outer, got {inner}, {outer}"
            ));
        }
        let margin = FRAC_PI_6 - theta;
        let half_width = margin / 3.0;
        let psi_fall = (FRAC_PI_6 + half_width + theta, FRAC_PI_3 - half_width);
        let ramp = (inner / 3.0).min(2.0);
        let mut p = Self {
            theta,
            inner,
            outer,
            half_width,
            psi_fall,
            ramp,
            phi_sharp: Vec::new(),
            phi_supersharp: Vec::new(),
            phi_0: Vec::new(),
            psi_sharp: Vec::new(),
            psi_supersharp: Vec::new(),
        };
        let n = grid.len();
        for k in 0..n {
            let z = grid.z(grid.fold(k));
            p.phi_0.push(p.phi_0_at(z));
            let zs = p.local_point(grid, k, Face::Supersharp);
            p.phi_sharp.push(p.phi_local(z));
            p.phi_supersharp.push(p.phi_local(zs));
            p.psi_sharp.push(p.psi_local(z));
            p.psi_supersharp.push(p.psi_local(zs));
        }
        Ok(p)
    }

    /// The default construction: `theta = pi/8` and `phi_0` on `r <= 9`.
    pub fn standard(grid: &ChamberGrid) -> Result<Self> {
        Self::new(grid, DEFAULT_THETA, 6.0, 9.0)
    }

    /// Folded node in the face's local coordinates.
    pub fn local_point(&self, grid: &ChamberGrid, k: usize, face: Face) -> [f64; 2] {
        let a = face.local_axial(grid.axial(grid.fold(k)));
        crate::flat::grid::axial_to_z(grid.h, a)
    }

    pub fn phi_0_at(&self, z: [f64; 2]) -> f64 {
        fall(z[0].hypot(z[1]), self.inner, self.outer)
    }

    /// Wedge piece at a point of the local upper half-plane. Past the
    /// opposite wall it vanishes.
    pub fn phi_local(&self, z: [f64; 2]) -> f64 {
        let t = angle(z);
        let w = fall(t, FRAC_PI_6 - self.half_width, FRAC_PI_6 + self.half_width);
        (1.0 - self.phi_0_at(z)) * w
    }

    /// Enlarged cutoff: one on the support of [`Self::phi_local`].
    pub fn psi_local(&self, z: [f64; 2]) -> f64 {
        let r = z[0].hypot(z[1]);
        let radial = spline_step((r - (self.inner - self.ramp)) / self.ramp);
        radial * fall(angle(z), self.psi_fall.0, self.psi_fall.1)
    }

    pub fn phi(&self, face: Face) -> &[f64] {
        match face {
            Face::Sharp => &self.phi_sharp,
            Face::Supersharp => &self.phi_supersharp,
        }
    }

    pub fn psi(&self, face: Face) -> &[f64] {
        match face {
            Face::Sharp => &self.psi_sharp,
            Face::Supersharp => &self.psi_supersharp,
        }
    }

    /// Largest `|phi_sharp + phi_supersharp + phi_0 - 1|` over the nodes.
    pub fn sum_defect(&self) -> f64 {
        (0..self.phi_0.len())
            .map(|k| (self.phi_sharp[k] + self.phi_supersharp[k] + self.phi_0[k] - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Angular gap, on nodes outside the compact piece, between the support
    /// of `phi` and the support of `d psi` of the sharp face (the other face
    /// is its mirror image).
    pub fn measured_gap(&self, grid: &ChamberGrid) -> f64 {
        let mut phi_hi = f64::NEG_INFINITY;
        let mut dpsi_lo = f64::INFINITY;
        for k in 0..grid.len() {
            if !grid.in_positive_chamber(k) || grid.radius(k) < self.outer {
                continue;
            }
            let t = angle(grid.z(k));
            if self.phi_sharp[k] > 0.0 {
                phi_hi = phi_hi.max(t);
            }
            let ang = fall(t, self.psi_fall.0, self.psi_fall.1);
            if ang > 0.0 && ang < 1.0 {
                dpsi_lo = dpsi_lo.min(t);
            }
        }
        dpsi_lo - phi_hi
    }

    /// Whether `psi = 1` wherever `phi > 0`, for both faces.
    pub fn psi_covers_phi(&self) -> bool {
        Face::BOTH.iter().all(|&f| {
            self.phi(f)
                .iter()
                .zip(self.psi(f))
                .all(|(p, s)| *p == 0.0 || *s == 1.0)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> ChamberGrid {
        ChamberGrid::new(0.25, 20.0).unwrap()
    }

    #[test]
    fn sums_to_one() {
        let g = grid();
        let p = PartitionOfUnity::standard(&g).unwrap();
        assert!(p.sum_defect() < 1e-12);
        assert!(p.psi_covers_phi());
    }

    #[test]
    fn gap_reaches_target() {
        let g = grid();
        for theta in [0.1, DEFAULT_THETA, 0.45] {
            let p = PartitionOfUnity::new(&g, theta, 5.0, 8.0).unwrap();
            assert!(
                p.measured_gap(&g) >= theta,
                "{theta}: {}",
                p.measured_gap(&g)
            );
        }
        assert!(PartitionOfUnity::new(&g, FRAC_PI_6, 5.0, 8.0).is_err());
        assert!(PartitionOfUnity::new(&g, 0.0, 5.0, 8.0).is_err());
    }

    #[test]
    fn compact_piece_ignores_truncation() {
        let a = PartitionOfUnity::standard(&ChamberGrid::new(0.25, 15.0).unwrap()).unwrap();
        let b = PartitionOfUnity::standard(&ChamberGrid::new(0.25, 25.0).unwrap()).unwrap();
        let support = |p: &PartitionOfUnity, g: &ChamberGrid| {
            (0..g.len())
                .filter(|&k| p.phi_0[k] > 0.0)
                .map(|k| g.radius(k))
                .fold(0.0, f64::max)
        };
        let (ga, gb) = (
            ChamberGrid::new(0.25, 15.0).unwrap(),
            ChamberGrid::new(0.25, 25.0).unwrap(),
        );
        assert_eq!(support(&a, &ga), support(&b, &gb));
        assert!(support(&a, &ga) < 9.0);
    }

    #[test]
    fn faces_are_mirror_images() {
        let g = grid();
        let p = PartitionOfUnity::standard(&g).unwrap();
        for k in 0..g.len() {
            let [i, j] = g.axial(k);
            if let Some(m) = g.index(j, i) {
                assert_eq!(p.phi_sharp[k], p.phi_supersharp[m]);
                assert_eq!(p.psi_sharp[k], p.psi_supersharp[m]);
            }
        }
    }

    #[test]
    fn spline_is_c2() {
        let h = 1e-4;
        for t in [0.0, 1.0] {
            let d2 = (spline_step(t + h) - 2.0 * spline_step(t) + spline_step(t - h)) / (h * h);
            assert!(d2.abs() < 1e-2);
        }
        assert_eq!(spline_step(0.5), 0.5);
    }
}
