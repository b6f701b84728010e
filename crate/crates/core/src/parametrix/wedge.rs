//! Wedge model solves: `(L_sharp - lambda)^{-1}` transported to the flat.
//!
//! Near the wall `j = 0` and away from the opposite wall, the volume density
//! is `sinh(y / sqrt 3) e^x / 4` up to `O(e^{-(x - y/sqrt 3)})`, with
//! `(x, y)` the flat point. In `a = c - x`, `b = y` the radial Laplacian with
//! that density is exactly `L_sharp = -d_a^2 + d_a + B = s L0 s^{-1}`,
//! `s = e^{a/2}`. The product grid is laid on the lattice: `h_a = h/2` and
//! the vertex-centred `b` rows coincide with the lattice rows, so lattice
//! nodes are product nodes and the transfer back is exact. The supersharp
//! face uses the same model after reflecting in the bisector.

use num_complex::Complex64;
use serde::Serialize;

use super::partition::Face;
use crate::error::{invalid, Result};
use crate::flat::grid::ChamberGrid;
use crate::flat::spectral::SpectralParam;
use crate::geometry::SQRT_3;
use crate::product::model::{lsharp_resolvent, ProductGrid, ProductMethod};

type C = Complex64;

#[derive(Debug, Clone, Serialize)]
pub struct WedgeSolver {
    pub face: Face,
    pub product: ProductGrid,
    /// Lattice spacing of the flat grid.
    pub h: f64,
    /// `x` of the upper Dirichlet end, in half lattice steps.
    x_end: i64,
}

impl WedgeSolver {
    /// A product grid covering the closed positive chamber of `grid` with
    /// `margin` to spare beyond it, in flat units.
    pub fn new(grid: &ChamberGrid, face: Face, margin: f64) -> Result<Self> {
        if !(margin > 0.0 && margin.is_finite()) {
            return invalid(format!("wedge margin must be positive, got {margin}"));
        }
        let h = grid.h;
        let n = grid.n as i64;
        let extra = (margin / (h / 2.0)).ceil() as i64;
        let (x_lo, x_end) = (-extra, 2 * n + extra);
        let na = (x_end - x_lo - 1) as usize;
        let h_b = h * SQRT_3 / 2.0;
        let nb = grid.n as usize + 1 + (margin / h_b).ceil() as usize;
        let product =
            ProductGrid::vertex_centred((x_end - x_lo) as f64 * h / 4.0, nb as f64 * h_b, na, nb)?;
        Ok(Self {
            face,
            product,
            h,
            x_end,
        })
    }

    /// Product index of local axial coordinates `(p, q)`, if on the grid.
    fn product_index(&self, p: i64, q: i64) -> Option<usize> {
        let (na, nb) = self.product.shape();
        let i = self.x_end - (2 * p + q) - 1;
        (i >= 0 && (i as usize) < na && q >= 0 && (q as usize) < nb)
            .then(|| self.product.index(i as usize, q as usize))
    }

    /// Carry a Weyl-invariant lattice function onto the product grid. Product
    /// nodes that are lattice nodes take the nodal value; the others sit at
    /// edge midpoints of a lattice row and take the mean of its two ends.
    /// Points outside the hexagon read zero.
    pub fn to_product(&self, grid: &ChamberGrid, f: &[C]) -> Vec<C> {
        let (na, nb) = self.product.shape();
        let value = |p: i64, q: i64| -> C {
            let a = self.face.local_axial([p as i32, q as i32]);
            grid.index(a[0], a[1]).map_or(C::new(0.0, 0.0), |k| f[k])
        };
        let mut out = vec![C::new(0.0, 0.0); na * nb];
        for i in 0..na {
            let x_half = self.x_end - i as i64 - 1;
            for q in 0..nb as i64 {
                let d = x_half - q;
                out[self.product.index(i, q as usize)] = if d.rem_euclid(2) == 0 {
                    value(d / 2, q)
                } else {
                    (value(d.div_euclid(2), q) + value(d.div_euclid(2) + 1, q)) * 0.5
                };
            }
        }
        out
    }

    /// Read a product function back at every lattice node through its folded,
    /// face-local representative.
    pub fn to_lattice(&self, grid: &ChamberGrid, u: &[C]) -> Vec<C> {
        (0..grid.len())
            .map(|k| {
                let [p, q] = self.face.local_axial(grid.axial(grid.fold(k)));
                self.product_index(p as i64, q as i64)
                    .map_or(C::new(0.0, 0.0), |m| u[m])
            })
            .collect()
    }

    /// As [`Self::solve`], for data that must lie where the face's enlarged
    /// cutoff `psi` equals one; anything outside is reported as leakage.
    pub fn solve_localized(
        &self,
        grid: &ChamberGrid,
        psi: &[f64],
        param: &SpectralParam,
        f: &[C],
    ) -> Result<Vec<C>> {
        if psi.len() != grid.len() || f.len() != grid.len() {
            return invalid("cutoff and data must live on the grid");
        }
        if let Some(k) = (0..grid.len()).find(|&k| psi[k] < 1.0 && f[k].norm() > 0.0) {
            return invalid(format!(
                "support leakage outside the {:?} wedge at z = {:?}",
                self.face,
                grid.z(k)
            ));
        }
        self.solve(grid, param, f)
    }

    /// `(L_sharp - lambda)^{-1}` of a lattice function, returned on the lattice.
    pub fn solve(&self, grid: &ChamberGrid, param: &SpectralParam, f: &[C]) -> Result<Vec<C>> {
        let g = self.to_product(grid, f);
        let u = lsharp_resolvent(&self.product, param, &g, ProductMethod::Spectral)?;
        Ok(self.to_lattice(grid, &u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_round_trip_is_exact() {
        let grid = ChamberGrid::new(0.2, 6.0).unwrap();
        let f = grid.sample(|z| C::new((-(z[0] * z[0] + z[1] * z[1]) / 4.0).exp(), z[0].cos()));
        let f: Vec<C> = (0..grid.len()).map(|k| f[grid.fold(k)]).collect();
        for face in Face::BOTH {
            let w = WedgeSolver::new(&grid, face, 2.0).unwrap();
            let back = w.to_lattice(&grid, &w.to_product(&grid, &f));
            let err = f
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "{face:?}: {err}");
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let grid = ChamberGrid::new(0.25, 4.0).unwrap();
        let w = WedgeSolver::new(&grid, Face::Sharp, 2.0).unwrap();
        let p = SpectralParam::real(-1.0).unwrap();
        let u = w
            .solve(&grid, &p, &vec![C::new(0.0, 0.0); grid.len()])
            .unwrap();
        assert!(u.iter().all(|x| x.norm() == 0.0));
        let psi = vec![0.5; grid.len()];
        let mut f = vec![C::new(0.0, 0.0); grid.len()];
        f[0] = C::new(1.0, 0.0);
        assert!(w.solve_localized(&grid, &psi, &p, &f).is_err());
    }

    #[test]
    fn model_solve_inverts_the_sharp_operator_deep_in_the_wedge() {
        // Far from the opposite wall the lattice operator and L_sharp agree up
        // to e^{-2(w3 - w2)}; the defect relative to the data is small there.
        use crate::flat::operator::assemble_radial;
        let grid = ChamberGrid::new(0.2, 24.0).unwrap();
        let op = assemble_radial(grid.clone());
        let p = SpectralParam::real(-1.0).unwrap();
        let w = WedgeSolver::new(&grid, Face::Sharp, 10.0).unwrap();
        let bump = |z: [f64; 2]| {
            let d2 = ((z[0] - 12.0).powi(2) + (z[1] - 1.0).powi(2)) / 4.0;
            if d2 < 1.0 {
                (-1.0 / (1.0 - d2)).exp()
            } else {
                0.0
            }
        };
        let f: Vec<C> = (0..grid.len())
            .map(|k| C::new(bump(grid.z(grid.fold(k))), 0.0))
            .collect();
        let u = w.solve(&grid, &p, &f).unwrap();
        let r = op.residual(&u, p.lambda, &f);
        let near = |k: usize| {
            grid.radius(k) < 18.0
                && grid.in_positive_chamber(k)
                && grid.z(k)[1] < 0.5 * grid.z(k)[0]
        };
        let rel = op.norm_on(&r, near) / op.norm_on(&f, near);
        assert!(rel < 0.05, "{rel}");
    }
}
