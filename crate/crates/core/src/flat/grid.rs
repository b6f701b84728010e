//! Triangular lattice on the flat, truncated to a Weyl-symmetric hexagon.
//!
//! Node `(i, j)` sits at `z = h (i + j/2, j sqrt(3)/2)`. The three walls are
//! the lattice lines `j = 0`, `i = 0` and `i + j = 0`, and the closed positive
//! chamber is `i >= 0, j >= 0`.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::geometry::{WeylElement, SQRT_3};

/// Offsets of the six lattice neighbours, counterclockwise from angle 0.
pub const NEIGHBOR_OFFSETS: [[i32; 2]; 6] = [[1, 0], [0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1]];

/// Upper bound on the node count, about 5 GB of solver memory.
pub const NODE_BUDGET: usize = 4_000_000;

pub const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct ChamberGrid {
    pub h: f64,
    /// Hexagon radius in lattice steps; nodes at radius `n` carry the
    /// Dirichlet condition.
    pub n: i32,
    axial: Vec<[i32; 2]>,
    lookup: Vec<u32>,
}

/// Complex nodal values on a grid.
pub type GridFunction = Vec<Complex64>;

impl ChamberGrid {
    /// Smallest hexagon whose inscribed circle has radius at least `r_max`.
    pub fn new(h: f64, r_max: f64) -> Result<Self> {
        if !(h > 0.0 && r_max > 0.0 && h.is_finite() && r_max.is_finite()) {
            return invalid(format!(
                "grid needs h > 0 and R_max > 0, got h = {h}, R_max = {r_max}"
            ));
        }
        let n = (r_max / (h * SQRT_3 / 2.0) - 1e-9).ceil().max(2.0);
        Self::with_radius(h, n as i32)
    }

    pub fn with_radius(h: f64, n: i32) -> Result<Self> {
        if !(h > 0.0) || n < 2 {
            return invalid("grid needs h > 0 and at least two rings");
        }
        let count = 3 * (n as usize) * (n as usize + 1) + 1;
        if count > NODE_BUDGET {
            return invalid(format!(
                "grid of {count} nodes exceeds the budget of {NODE_BUDGET}"
            ));
        }
        let side = (2 * n + 1) as usize;
        let mut lookup = vec![NONE; side * side];
        let mut axial = Vec::with_capacity(count);
        for j in -n..=n {
            for i in -n..=n {
                if (i + j).abs() <= n {
                    lookup[(j + n) as usize * side + (i + n) as usize] = axial.len() as u32;
                    axial.push([i, j]);
                }
            }
        }
        Ok(Self {
            h,
            n,
            axial,
            lookup,
        })
    }

    pub fn len(&self) -> usize {
        self.axial.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axial.is_empty()
    }

    pub fn axial(&self, k: usize) -> [i32; 2] {
        self.axial[k]
    }

    pub fn index(&self, i: i32, j: i32) -> Option<usize> {
        let n = self.n;
        if i.abs() > n || j.abs() > n || (i + j).abs() > n {
            return None;
        }
        let side = (2 * n + 1) as usize;
        let v = self.lookup[(j + n) as usize * side + (i + n) as usize];
        (v != NONE).then_some(v as usize)
    }

    pub fn z(&self, k: usize) -> [f64; 2] {
        axial_to_z(self.h, self.axial[k])
    }

    pub fn radius(&self, k: usize) -> f64 {
        let z = self.z(k);
        z[0].hypot(z[1])
    }

    /// Hexagonal ring index `max(|i|, |j|, |i+j|)`.
    pub fn ring(&self, k: usize) -> i32 {
        let [i, j] = self.axial[k];
        i.abs().max(j.abs()).max((i + j).abs())
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.ring(k) == self.n
    }

    /// Radius of the inscribed circle of the truncation.
    pub fn inradius(&self) -> f64 {
        self.n as f64 * self.h * SQRT_3 / 2.0
    }

    pub fn neighbors(&self, k: usize) -> [Option<usize>; 6] {
        let [i, j] = self.axial[k];
        NEIGHBOR_OFFSETS.map(|[di, dj]| self.index(i + di, j + dj))
    }

    /// Number of walls through the node (0, 1, or 3 at the origin).
    pub fn wall_count(&self, k: usize) -> usize {
        let [i, j] = self.axial[k];
        [i == 0, j == 0, i + j == 0].iter().filter(|b| **b).count()
    }

    /// Node permutation induced by a Weyl element: `out[k]` is the node at `s z_k`.
    pub fn weyl_map(&self, s: &WeylElement) -> Vec<usize> {
        (0..self.len())
            .map(|k| {
                let a = z_to_axial(self.h, s.act_z(self.z(k)));
                self.index(a[0], a[1]).expect("hexagon is Weyl invariant")
            })
            .collect()
    }

    /// Node permutation `z -> -z`.
    pub fn negation_map(&self) -> Vec<usize> {
        (0..self.len())
            .map(|k| {
                let [i, j] = self.axial[k];
                self.index(-i, -j).expect("hexagon is symmetric")
            })
            .collect()
    }

    /// Representative of the node's Weyl orbit in the closed positive chamber.
    pub fn fold(&self, k: usize) -> usize {
        let [i, j] = fold_axial(self.axial[k]);
        self.index(i, j).expect("hexagon is Weyl invariant")
    }

    pub fn in_positive_chamber(&self, k: usize) -> bool {
        let [i, j] = self.axial[k];
        i >= 0 && j >= 0
    }

    /// Permute nodal values by a Weyl element: `(s f)(z) = f(s^{-1} z)`.
    pub fn act<T: Copy>(&self, s: &WeylElement, f: &[T]) -> Vec<T> {
        let map = self.weyl_map(s);
        let mut out = f.to_vec();
        for (k, &m) in map.iter().enumerate() {
            out[m] = f[k];
        }
        out
    }

    /// Sample a function of `z` at every node.
    pub fn sample<T>(&self, f: impl Fn([f64; 2]) -> T) -> Vec<T> {
        (0..self.len()).map(|k| f(self.z(k))).collect()
    }
}

pub fn axial_to_z(h: f64, a: [i32; 2]) -> [f64; 2] {
    let (i, j) = (a[0] as f64, a[1] as f64);
    [h * (i + 0.5 * j), h * j * SQRT_3 / 2.0]
}

pub fn z_to_axial(h: f64, z: [f64; 2]) -> [i32; 2] {
    let j = (z[1] / (h * SQRT_3 / 2.0)).round();
    let i = (z[0] / h - 0.5 * j).round();
    [i as i32, j as i32]
}

/// Reflect axial coordinates into `i >= 0, j >= 0`.
pub fn fold_axial(a: [i32; 2]) -> [i32; 2] {
    let [mut i, mut j] = a;
    loop {
        if j < 0 {
            // reflection in the wall j = 0
            i += j;
            j = -j;
        } else if i < 0 {
            // reflection in the wall i = 0
            j += i;
            i = -i;
        } else {
            return [i, j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_lookup() {
        let g = ChamberGrid::with_radius(0.5, 4).unwrap();
        assert_eq!(g.len(), 61);
        for k in 0..g.len() {
            let [i, j] = g.axial(k);
            assert_eq!(g.index(i, j), Some(k));
        }
        assert_eq!(g.index(5, 0), None);
        assert_eq!(g.index(3, 2), None);
        let g = ChamberGrid::new(0.1, 30.0).unwrap();
        assert!(g.inradius() >= 30.0);
        assert!(g.inradius() < 30.0 + 0.1);
    }

    #[test]
    fn walls_are_lattice_lines() {
        let g = ChamberGrid::with_radius(0.3, 6).unwrap();
        for k in 0..g.len() {
            let w = crate::geometry::z_to_w(g.z(k));
            let on_wall = (w[0] - w[1]).abs() < 1e-12
                || (w[1] - w[2]).abs() < 1e-12
                || (w[0] - w[2]).abs() < 1e-12;
            assert_eq!(on_wall, g.wall_count(k) > 0);
        }
    }

    #[test]
    fn weyl_maps_are_permutations() {
        let g = ChamberGrid::with_radius(0.2, 7).unwrap();
        for s in WeylElement::all() {
            let mut m = g.weyl_map(&s);
            m.sort_unstable();
            assert!(m.iter().enumerate().all(|(k, &v)| k == v));
        }
        let mut seen = vec![0usize; g.len()];
        for k in 0..g.len() {
            let r = g.fold(k);
            assert!(g.in_positive_chamber(r));
            assert!((g.radius(r) - g.radius(k)).abs() < 1e-12);
            seen[r] += 1;
        }
        for k in 0..g.len() {
            if g.in_positive_chamber(k) {
                let expect = match g.wall_count(k) {
                    0 => 6,
                    1 => 3,
                    _ => 1,
                };
                assert_eq!(seen[k], expect);
            }
        }
    }

    #[test]
    fn positive_chamber_matches_ordering() {
        let g = ChamberGrid::with_radius(0.3, 5).unwrap();
        for k in 0..g.len() {
            let w = crate::geometry::z_to_w(g.z(k));
            let ordered = w[0] <= w[1] + 1e-12 && w[1] <= w[2] + 1e-12;
            assert_eq!(ordered, g.in_positive_chamber(k));
        }
    }
}
