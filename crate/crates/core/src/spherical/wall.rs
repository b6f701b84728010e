//! Behaviour of the Weyl sum as the frequency reaches a wall.
//!
//! Normalise the transverse profile by its value on the wall. The two
//! coefficients paired by that wall are then `c(-nu)` and `c(nu)`, both with
//! a pole at `nu = 0` of opposite sign, while their combination is the
//! regular solution and stays bounded. On the wall itself the pair is
//! replaced by a threshold wave: the regular solution at energy `1/4` times
//! an exponential along the wall, an exact eigenfunction of the wedge model
//! `L_sharp = -d_a^2 + d_a - d_b^2 - coth(b/sqrt 3)/sqrt 3 d_b`.

use num_complex::Complex64;
use serde::Serialize;

use super::twobody::{regular_solution, two_body_fit, DEFAULT_FIT_POINT};
use super::weyl::{
    act_frequency, dot, fold_z, simple_reflection, Frequency, ROOT_NORM_SQ, SIMPLE_ROOTS,
};
use crate::error::{invalid, Result};
use crate::flat::operator::rho_product;
use crate::flat::spectral::SPECTRUM_BOTTOM;
use crate::geometry::SQRT_3;
use crate::product::model::ProductGrid;

type C = Complex64;

/// Tolerance on `|alpha . xi|` for a frequency to count as on the wall.
pub const ON_WALL_TOL: f64 = 1e-12;

/// Unit normal into the positive chamber and unit tangent of a simple wall,
/// the tangent pointing along the chamber's edge.
pub fn wall_frame(wall: usize) -> ([f64; 2], [f64; 2]) {
    let a = SIMPLE_ROOTS[wall];
    let n = [a[0] * SQRT_3, a[1] * SQRT_3];
    let t = [-n[1], n[0]];
    // The bisector (sqrt 3, 1) / 2 lies inside the chamber.
    if t[0] * SQRT_3 + t[1] < 0.0 {
        (n, [-t[0], -t[1]])
    } else {
        (n, t)
    }
}

fn check_wall(wall: usize, xi: Frequency) -> Result<C> {
    if wall > 1 {
        return invalid(format!("wall index {wall} is not a simple wall"));
    }
    let a = SIMPLE_ROOTS[wall];
    let t = xi[0] * a[0] + xi[1] * a[1];
    if t.norm() > ON_WALL_TOL {
        return invalid(format!(
            "xi is not parallel to wall {wall}: alpha . xi = {t}"
        ));
    }
    let (_, tau) = wall_frame(wall);
    Ok(dot(xi, tau))
}

/// Points across a wall: `along` units from the origin on the wall, offset
/// by `t` in `[-half_width, half_width]` along its normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WallWindow {
    pub along: f64,
    pub half_width: f64,
    pub points: usize,
}

impl WallWindow {
    pub fn points(&self, wall: usize) -> Vec<[f64; 2]> {
        let (n, tau) = wall_frame(wall);
        let m = self.points.max(2);
        (0..m)
            .map(|k| {
                let t = -self.half_width + 2.0 * self.half_width * k as f64 / (m - 1) as f64;
                [
                    self.along * tau[0] + t * n[0],
                    self.along * tau[1] + t * n[1],
                ]
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallUniformity {
    pub wall: usize,
    /// Transverse frequency `nu` at each path point.
    pub transverse: Vec<C>,
    /// Sup over the window of the wall-normalised matched pair.
    pub pair_sup: Vec<f64>,
    /// Sup over the window of its incident term alone.
    pub single_sup: Vec<f64>,
}

impl WallUniformity {
    pub fn pair_spread(&self) -> f64 {
        spread(&self.pair_sup)
    }

    pub fn single_spread(&self) -> f64 {
        spread(&self.single_sup)
    }
}

fn spread(v: &[f64]) -> f64 {
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

/// Follow `xi_k = xi_wall + step 2^{-k} n`, `k = 0..count`, towards a wall
/// and record the sup of the matched pair and of one of its terms.
pub fn wall_uniformity(
    wall: usize,
    xi_wall: Frequency,
    step: C,
    count: usize,
    window: &WallWindow,
) -> Result<WallUniformity> {
    check_wall(wall, xi_wall)?;
    if count == 0 || !(step.norm() > 0.0) {
        return invalid("the path needs a non-zero step and at least one point");
    }
    let (n, _) = wall_frame(wall);
    let s = simple_reflection(wall);
    let pts = window.points(wall);
    let mut out = WallUniformity {
        wall,
        transverse: Vec::new(),
        pair_sup: Vec::new(),
        single_sup: Vec::new(),
    };
    for k in 0..count {
        let e = step * 0.5f64.powi(k as i32);
        let xi = [xi_wall[0] + e * n[0], xi_wall[1] + e * n[1]];
        let a = SIMPLE_ROOTS[wall];
        let nu = (xi[0] * a[0] + xi[1] * a[1]) / ROOT_NORM_SQ;
        let fit = two_body_fit(nu, DEFAULT_FIT_POINT)?;
        let reflected_xi = act_frequency(&s, xi);
        let (mut pair, mut single) = (0.0f64, 0.0f64);
        for &z in &pts {
            let zf = fold_z(z);
            let rho = rho_product(zf);
            let inc = fit.incident * rho * (-C::i() * dot(xi, zf)).exp();
            let refl = fit.reflected * rho * (-C::i() * dot(reflected_xi, zf)).exp();
            pair = pair.max((inc + refl).norm());
            single = single.max(inc.norm());
        }
        out.transverse.push(nu);
        out.pair_sup.push(pair);
        out.single_sup.push(single);
    }
    Ok(out)
}

/// `e^{(1/2 - i zeta) a} u2(b / sqrt 3)` with `u2` the regular radial
/// solution of `(Delta_{H^2} - 1/4) u2 = 0`; in `s = e^{a/2}` this is
/// `s e^{-i (2 log s) zeta}`. Here `zeta = -xi . tau`, so that `a = c - x`
/// reproduces the oscillation `e^{-i xi . z}` along the wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdWave {
    pub wall: usize,
    pub zeta: C,
    pub lambda: C,
}

impl ThresholdWave {
    pub fn new(wall: usize, xi: Frequency) -> Result<Self> {
        let t = check_wall(wall, xi)?;
        Ok(Self {
            wall,
            zeta: -t,
            lambda: SPECTRUM_BOTTOM + t * t,
        })
    }

    pub fn along_wall(&self, a: f64) -> C {
        ((0.5 - C::i() * self.zeta) * a).exp()
    }

    /// The hyperbolic factor at ascending `b >= 0`.
    pub fn profile(&self, bs: &[f64]) -> Result<Vec<C>> {
        let ds: Vec<f64> = bs.iter().map(|b| b / SQRT_3).collect();
        Ok(regular_solution(C::new(0.0, 0.0), &ds)?
            .into_iter()
            .map(|(u, _)| u)
            .collect())
    }

    /// Values on a product grid, `a` fastest as in [`ProductGrid::index`].
    pub fn sample(&self, grid: &ProductGrid) -> Result<Vec<C>> {
        let prof = self.profile(&grid.b)?;
        Ok(grid.sample(|a, b| {
            let j = ((b - grid.b[0]) / grid.h_b).round() as usize;
            self.along_wall(a) * prof[j]
        }))
    }

    /// `max |(L_sharp - lambda) v| / max |v|` over the grid nodes at least two
    /// steps from the edges and the axis, with fourth-order differences.
    pub fn model_residual(&self, grid: &ProductGrid) -> Result<f64> {
        let (na, nb) = grid.shape();
        if na < 5 || nb < 5 {
            return invalid("grid too small for fourth-order differences");
        }
        let v = self.sample(grid)?;
        let (ha, hb) = (grid.h_a, grid.h_b);
        let d1 = |m2: C, m1: C, p1: C, p2: C, h: f64| (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        let d2 = |m2: C, m1: C, c: C, p1: C, p2: C, h: f64| {
            (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h)
        };
        let mut worst = 0.0f64;
        for i in 2..na - 2 {
            for j in 2..nb - 2 {
                let at = |di: isize, dj: isize| {
                    v[grid.index((i as isize + di) as usize, (j as isize + dj) as usize)]
                };
                let c = at(0, 0);
                let vaa = d2(at(-2, 0), at(-1, 0), c, at(1, 0), at(2, 0), ha);
                let va = d1(at(-2, 0), at(-1, 0), at(1, 0), at(2, 0), ha);
                let vbb = d2(at(0, -2), at(0, -1), c, at(0, 1), at(0, 2), hb);
                let vb = d1(at(0, -2), at(0, -1), at(0, 1), at(0, 2), hb);
                let b = grid.b[j];
                let coth = 1.0 / (b / SQRT_3).tanh();
                let r = -vaa + va - vbb - coth / SQRT_3 * vb - self.lambda * c;
                worst = worst.max(r.norm());
            }
        }
        let scale = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
        Ok(worst / scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames_are_orthonormal_and_inward() {
        for wall in 0..2 {
            let (n, t) = wall_frame(wall);
            assert!((n[0] * n[0] + n[1] * n[1] - 1.0).abs() < 1e-15);
            assert!((n[0] * t[0] + n[1] * t[1]).abs() < 1e-15);
            // The tangent stays on the wall; a small inward step enters the chamber.
            let a = SIMPLE_ROOTS[wall];
            assert!((a[0] * t[0] + a[1] * t[1]).abs() < 1e-15);
            let z = [5.0 * t[0] + 0.1 * n[0], 5.0 * t[1] + 0.1 * n[1]];
            let f = fold_z(z);
            assert!((f[0] - z[0]).abs() < 1e-12 && (f[1] - z[1]).abs() < 1e-12);
        }
    }

    fn path() -> WallUniformity {
        // Along the wall j = 0 with Im xi on it; the transverse part shrinks.
        let xi_wall = [C::new(0.3, 0.9), C::new(0.0, 0.0)];
        let w = WallWindow {
            along: 8.0,
            half_width: 3.0,
            points: 61,
        };
        wall_uniformity(0, xi_wall, C::new(0.2, 0.3), 10, &w).unwrap()
    }

    #[test]
    fn matched_pair_stays_bounded() {
        let u = path();
        assert!(u.pair_spread() < 1.5, "{:?}", u.pair_sup);
        assert!(u.single_spread() > 100.0, "{:?}", u.single_sup);
        assert!(u.transverse.iter().all(|nu| nu.norm() > 0.0));
    }

    #[test]
    fn threshold_factor_is_the_legendre_function() {
        // P_{-1/2}(cosh d) = 1 / (cosh(d/2) AGM(1, sech(d/2))).
        let agm = |mut a: f64, mut b: f64| {
            for _ in 0..60 {
                (a, b) = ((a + b) / 2.0, (a * b).sqrt());
            }
            a
        };
        let t = ThresholdWave::new(0, [C::new(0.4, 0.2), C::new(0.0, 0.0)]).unwrap();
        let bs = [0.0, 0.1, 1.0, 4.0, 12.0, 30.0];
        let prof = t.profile(&bs).unwrap();
        for (b, u) in bs.iter().zip(&prof) {
            let d = b / SQRT_3;
            let exact = 1.0 / ((d / 2.0).cosh() * agm(1.0, 1.0 / (d / 2.0).cosh()));
            assert!((u - exact).norm() < 1e-9 * exact, "{b}: {u} vs {exact}");
        }
    }

    #[test]
    fn threshold_wave_solves_the_model() {
        let t = ThresholdWave::new(0, [C::new(0.4, 0.2), C::new(0.0, 0.0)]).unwrap();
        assert!((t.lambda - (SPECTRUM_BOTTOM + C::new(0.4, 0.2).powi(2))).norm() < 1e-15);
        let g = ProductGrid::vertex_centred(4.0, 8.0, 159, 160).unwrap();
        let r = t.model_residual(&g).unwrap();
        assert!(r < 1e-6, "{r}");
        // Exactly s times an oscillation in log s.
        let (a0, a1) = (0.3, 1.7);
        let q = t.along_wall(a1) / t.along_wall(a0);
        let s = ((a1 - a0) / 2.0f64).exp();
        assert!((q - s * (-C::i() * t.zeta * (a1 - a0)).exp()).norm() < 1e-14);
        assert!(ThresholdWave::new(0, [C::new(0.4, 0.2), C::new(0.1, 0.0)]).is_err());
    }
}
