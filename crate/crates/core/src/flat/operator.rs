//! Finite-volume discretisation of the radial Laplacian
//! `-(1/J) div(J grad u)` on the flat, with `J = prod_{i<j} |sinh(w_i - w_j)|`
//! the radial part of the invariant volume.
//!
//! Cell volumes and face fluxes integrate `J` exactly enough that the walls,
//! where `J` vanishes, need no special treatment: every wall lies on edges of
//! the quadrature triangles and passes through face midpoints, so `J` is
//! smooth on each quadrature piece.

use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::{axial_to_z, ChamberGrid, NEIGHBOR_OFFSETS};
use crate::geometry::{z_to_w, SQRT_3};

/// Radial part of the volume density at a flat point.
pub fn volume_density(z: [f64; 2]) -> f64 {
    let w = z_to_w(z);
    ((w[1] - w[0]).sinh() * (w[2] - w[1]).sinh() * (w[2] - w[0]).sinh()).abs()
}

/// `rho_sharp rho^sharp` Weyl-transported: `exp(-|rho . z|)` folded into the
/// positive chamber, i.e. `exp(-(w_max - w_min))`.
pub fn rho_product(z: [f64; 2]) -> f64 {
    let w = z_to_w(z);
    let hi = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
    (lo - hi).exp()
}

// Degree-5 seven-point rule on triangles (barycentric coordinates, weights sum to 1).
const TRI_RULE: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    (
        [
            0.059_715_871_789_770,
            0.470_142_064_105_115,
            0.470_142_064_105_115,
        ],
        0.132_394_152_788_506,
    ),
    (
        [
            0.470_142_064_105_115,
            0.059_715_871_789_770,
            0.470_142_064_105_115,
        ],
        0.132_394_152_788_506,
    ),
    (
        [
            0.470_142_064_105_115,
            0.470_142_064_105_115,
            0.059_715_871_789_770,
        ],
        0.132_394_152_788_506,
    ),
    (
        [
            0.797_426_985_353_087,
            0.101_286_507_323_456,
            0.101_286_507_323_456,
        ],
        0.125_939_180_544_827,
    ),
    (
        [
            0.101_286_507_323_456,
            0.797_426_985_353_087,
            0.101_286_507_323_456,
        ],
        0.125_939_180_544_827,
    ),
    (
        [
            0.101_286_507_323_456,
            0.101_286_507_323_456,
            0.797_426_985_353_087,
        ],
        0.125_939_180_544_827,
    ),
];

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
];

fn triangle_integral(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs();
    let mut s = 0.0;
    for (l, w) in TRI_RULE {
        let p = [
            l[0] * a[0] + l[1] * b[0] + l[2] * c[0],
            l[0] * a[1] + l[1] * b[1] + l[2] * c[1],
        ];
        s += w * volume_density(p);
    }
    s * area
}

fn segment_integral(a: [f64; 2], b: [f64; 2]) -> f64 {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    let mut s = 0.0;
    for (x, w) in GAUSS4 {
        let t = 0.5 * (1.0 + x);
        s += w * volume_density([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
    }
    0.5 * s * len
}

/// `int_cell J dA` over the hexagonal Voronoi cell of a node.
fn cell_volume(h: f64, z: [f64; 2]) -> f64 {
    let rv = h / SQRT_3;
    let mut s = 0.0;
    for k in 0..6 {
        let t = k as f64 * std::f64::consts::FRAC_PI_3;
        let mid = [z[0] + 0.5 * h * t.cos(), z[1] + 0.5 * h * t.sin()];
        let tv = t + std::f64::consts::FRAC_PI_6;
        let ver = [z[0] + rv * tv.cos(), z[1] + rv * tv.sin()];
        let t2 = t + std::f64::consts::FRAC_PI_3;
        let mid2 = [z[0] + 0.5 * h * t2.cos(), z[1] + 0.5 * h * t2.sin()];
        s += triangle_integral(z, mid, ver) + triangle_integral(z, ver, mid2);
    }
    s
}

/// `(1/h) int_face J ds` for the dual face of the edge leaving `z` in lattice
/// direction `k`. The face is split at the edge midpoint.
fn face_flux(h: f64, z: [f64; 2], k: usize) -> f64 {
    let t = k as f64 * std::f64::consts::FRAC_PI_3;
    let (c, s) = (t.cos(), t.sin());
    let mid = [z[0] + 0.5 * h * c, z[1] + 0.5 * h * s];
    let half = 0.5 * h / SQRT_3;
    let p = [mid[0] - half * s, mid[1] + half * c];
    let q = [mid[0] + half * s, mid[1] - half * c];
    (segment_integral(p, mid) + segment_integral(mid, q)) / h
}

/// The discretised radial Laplacian on a hexagonal grid with Dirichlet
/// condition on the outer ring.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    pub grid: ChamberGrid,
    /// `int_cell J` per node.
    pub volume: Vec<f64>,
    /// Face flux coefficient per node and lattice direction (0 towards
    /// missing neighbours).
    pub flux: Vec<[f64; 6]>,
    /// Neighbour indices (`u32::MAX` when absent).
    pub nbr: Vec<[u32; 6]>,
}

pub fn assemble_radial(grid: ChamberGrid) -> RadialOperator {
    let h = grid.h;
    let n = grid.len();
    let volume: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| cell_volume(h, grid.z(k)))
        .collect();
    let nbr: Vec<[u32; 6]> = (0..n)
        .map(|k| {
            grid.neighbors(k)
                .map(|o| o.map_or(super::grid::NONE, |v| v as u32))
        })
        .collect();
    // Each edge is integrated once, from its endpoint with the forward direction.
    let forward: Vec<[f64; 3]> = (0..n)
        .into_par_iter()
        .map(|k| {
            let z = grid.z(k);
            let mut f = [0.0; 3];
            for (d, slot) in f.iter_mut().enumerate() {
                if nbr[k][d] != super::grid::NONE {
                    *slot = face_flux(h, z, d);
                }
            }
            f
        })
        .collect();
    let mut flux = vec![[0.0; 6]; n];
    for k in 0..n {
        for d in 0..3 {
            let m = nbr[k][d];
            if m != super::grid::NONE {
                flux[k][d] = forward[k][d];
                flux[m as usize][d + 3] = forward[k][d];
            }
        }
    }
    RadialOperator {
        grid,
        volume,
        flux,
        nbr,
    }
}

impl RadialOperator {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `(Delta u)_k` at interior nodes; boundary rows are set to zero.
    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        (0..self.len())
            .into_par_iter()
            .map(|k| {
                if self.grid.is_boundary(k) {
                    return Complex64::new(0.0, 0.0);
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for d in 0..6 {
                    let m = self.nbr[k][d] as usize;
                    acc += (u[k] - u[m]) * self.flux[k][d];
                }
                acc / self.volume[k]
            })
            .collect()
    }

    /// `(Delta - lambda) u - f` at interior nodes, zero on the boundary ring.
    pub fn residual(&self, u: &[Complex64], lambda: Complex64, f: &[Complex64]) -> Vec<Complex64> {
        let mut r = self.apply(u);
        for k in 0..self.len() {
            r[k] = if self.grid.is_boundary(k) {
                Complex64::new(0.0, 0.0)
            } else {
                r[k] - lambda * u[k] - f[k]
            };
        }
        r
    }

    /// Volume-weighted inner product over interior nodes.
    pub fn inner(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        (0..self.len())
            .filter(|&k| !self.grid.is_boundary(k))
            .map(|k| u[k] * v[k].conj() * self.volume[k])
            .sum()
    }

    pub fn norm(&self, u: &[Complex64]) -> f64 {
        self.inner(u, u).re.sqrt()
    }

    /// Volume-weighted norm restricted to nodes selected by `keep`.
    pub fn norm_on(&self, u: &[Complex64], keep: impl Fn(usize) -> bool) -> f64 {
        (0..self.len())
            .filter(|&k| !self.grid.is_boundary(k) && keep(k))
            .map(|k| u[k].norm_sqr() * self.volume[k])
            .sum::<f64>()
            .sqrt()
    }

    /// Node positions and flux of a neighbour offset, for callers building
    /// their own stencils.
    pub fn neighbor_z(&self, k: usize, d: usize) -> [f64; 2] {
        let [i, j] = self.grid.axial(k);
        let [di, dj] = NEIGHBOR_OFFSETS[d];
        axial_to_z(self.grid.h, [i + di, j + dj])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WeylElement;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn density_far_in_chamber() {
        let z = [40.0, 20.0];
        let w = z_to_w(z);
        let rho_z = 0.5 * z[0] + z[1] / (2.0 * SQRT_3);
        assert!((w[2] - w[0] - rho_z).abs() < 1e-12);
        let ratio = volume_density(z) / ((2.0 * rho_z).exp() / 8.0);
        assert!((ratio - 1.0).abs() < 1e-3);
        assert!((rho_product(z) - (-rho_z).exp()).abs() < 1e-15 * (-rho_z).exp().max(1.0));
    }

    #[test]
    fn constants_are_harmonic() {
        let op = assemble_radial(ChamberGrid::with_radius(0.25, 12).unwrap());
        let u = vec![c(1.0); op.len()];
        let r = op.apply(&u);
        assert!(r.iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn commutes_with_reflection() {
        let op = assemble_radial(ChamberGrid::with_radius(0.3, 10).unwrap());
        let s = WeylElement::transposition(0, 1);
        let u: Vec<Complex64> = op
            .grid
            .sample(|z| Complex64::new((0.3 * z[0] + 0.7 * z[1]).sin(), (z[0] * z[1]).cos()));
        let lhs = op.grid.act(&s, &op.apply(&u));
        let rhs = op.apply(&op.grid.act(&s, &u));
        let num: f64 = lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = lhs.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert!(num / den < 1e-10, "commutator {}", num / den);
    }

    #[test]
    fn deep_corner_limit() {
        // exp(a p + b q) with p = log mu, q = log nu; the constant-coefficient
        // model gives (1/3)(-a^2 - b^2 + ab + a + b).
        let (a, b) = (0.4, -0.3);
        let symbol = (-a * a - b * b + a * b + a + b) / 3.0;
        let op = assemble_radial(ChamberGrid::with_radius(0.1, 320).unwrap());
        let u: Vec<Complex64> = op.grid.sample(|z| {
            let w = z_to_w(z);
            c((a * (w[0] - w[1]) + b * (w[1] - w[2])).exp())
        });
        let du = op.apply(&u);
        let err_at = |depth: f64| {
            let mut worst: f64 = 0.0;
            for k in 0..op.len() {
                let w = z_to_w(op.grid.z(k));
                let (p, q) = (w[0] - w[1], w[1] - w[2]);
                if (p + depth).abs() < 0.3 && (q + depth).abs() < 0.3 && !op.grid.is_boundary(k) {
                    worst = worst.max((du[k] / u[k] - symbol).norm());
                }
            }
            worst
        };
        let errs: Vec<f64> = [1.0, 3.0, 7.0].iter().map(|&d| err_at(d)).collect();
        assert!(errs.iter().all(|e| *e > 0.0), "{errs:?}");
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[2] < 2e-3, "{errs:?}");
    }

    #[test]
    fn self_adjoint_in_weighted_product() {
        let op = assemble_radial(ChamberGrid::with_radius(0.3, 30).unwrap());
        let bump = |c0: [f64; 2]| {
            move |z: [f64; 2]| {
                let r2 = (z[0] - c0[0]).powi(2) + (z[1] - c0[1]).powi(2);
                Complex64::new((-r2).exp(), 0.3 * (-2.0 * r2).exp())
            }
        };
        let u = op.grid.sample(bump([0.5, 0.2]));
        let v = op.grid.sample(bump([-0.4, 0.6]));
        let a = op.inner(&op.apply(&u), &v);
        let b = op.inner(&u, &op.apply(&v));
        assert!((a - b).norm() < 1e-12 * a.norm().max(1e-300));
    }
}
