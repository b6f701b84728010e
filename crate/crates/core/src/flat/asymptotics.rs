//! Extraction of the front-face coefficient `g` in
//! `u = rho rho x^{1/2} exp(-i k / x) g`, with `x = 1/|z|`, and the fits that
//! test its decay and its behaviour at the walls.

use num_complex::Complex64;
use serde::Serialize;

use super::grid::ChamberGrid;
use super::operator::{rho_product, RadialOperator};
use super::spectral::SpectralParam;
use crate::error::{invalid, Error, Result};
use crate::fit::{complex_lstsq, line_fit, LineFit};
use crate::geometry::SQRT_3;
use crate::product::distance::smoothed;

/// `rho rho x^{1/2} exp(-i k/x)` at a flat point.
pub fn prefactor(z: [f64; 2], param: &SpectralParam) -> Complex64 {
    let r = z[0].hypot(z[1]);
    let phase = (-Complex64::i() * param.k * r).exp();
    phase * (rho_product(z) / r.sqrt())
}

/// `x_2 = smoothed(d) / smoothed(|z|)` with `d` the distance to the nearest wall.
pub fn wall_factor(z: [f64; 2]) -> f64 {
    smoothed(wall_distance(z)) / smoothed(z[0].hypot(z[1]))
}

/// Euclidean distance from `z` to the nearest wall line.
pub fn wall_distance(z: [f64; 2]) -> f64 {
    let theta = z[1].atan2(z[0]);
    let r = z[0].hypot(z[1]);
    let sector = std::f64::consts::FRAC_PI_3;
    let off = theta.rem_euclid(sector);
    r * off.min(sector - off).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontFaceSample {
    pub node: usize,
    pub r: f64,
    /// Angle on the front face, in `[0, 2 pi)`.
    pub theta: f64,
    pub g: Complex64,
    /// `g / x_2`, the coefficient after removing the first-order vanishing
    /// at the side faces.
    pub g_reduced: Complex64,
}

/// Front-face coefficient on the shell `r_lo <= |z| <= r_hi`.
pub fn extract_asymptotics(
    op: &RadialOperator,
    u: &[Complex64],
    param: &SpectralParam,
    r_lo: f64,
    r_hi: f64,
) -> Result<Vec<FrontFaceSample>> {
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return invalid(format!("shell needs 0 < r_lo < r_hi, got [{r_lo}, {r_hi}]"));
    }
    if r_hi > op.grid.inradius() {
        return invalid("shell extends past the truncation");
    }
    let mut out = Vec::new();
    for k in 0..op.len() {
        let z = op.grid.z(k);
        let r = z[0].hypot(z[1]);
        if r < r_lo || r > r_hi {
            continue;
        }
        let g = u[k] / prefactor(z, param);
        out.push(FrontFaceSample {
            node: k,
            r,
            theta: z[1].atan2(z[0]).rem_euclid(std::f64::consts::TAU),
            g,
            g_reduced: g / wall_factor(z),
        });
    }
    Ok(out)
}

/// Linear interpolation of nodal values on the lattice triangles.
pub fn interpolate(grid: &ChamberGrid, values: &[Complex64], z: [f64; 2]) -> Result<Complex64> {
    let h = grid.h;
    let jf = z[1] / (h * SQRT_3 / 2.0);
    let if_ = z[0] / h - 0.5 * jf;
    let (i0, j0) = (if_.floor(), jf.floor());
    let (a, b) = (if_ - i0, jf - j0);
    let (i0, j0) = (i0 as i32, j0 as i32);
    let corners = if a + b <= 1.0 {
        [
            ((i0, j0), 1.0 - a - b),
            ((i0 + 1, j0), a),
            ((i0, j0 + 1), b),
        ]
    } else {
        [
            ((i0 + 1, j0 + 1), a + b - 1.0),
            ((i0, j0 + 1), 1.0 - a),
            ((i0 + 1, j0), 1.0 - b),
        ]
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for ((i, j), w) in corners {
        let k = grid
            .index(i, j)
            .ok_or_else(|| Error::InvalidInput(format!("point {z:?} is outside the grid")))?;
        acc += values[k] * w;
    }
    Ok(acc)
}

/// Slope of `log |u / (rho rho x^{1/2})|` against `r` along the bisector of
/// the positive chamber, over `r_lo <= r <= r_hi`. The slope estimates `-kappa`.
pub fn bisector_decay_fit(
    op: &RadialOperator,
    u: &[Complex64],
    r_lo: f64,
    r_hi: f64,
) -> Result<LineFit> {
    let g = &op.grid;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for i in 0..=g.n {
        let Some(k) = g.index(i, i) else { break };
        let z = g.z(k);
        let r = z[0].hypot(z[1]);
        if r < r_lo || r > r_hi {
            continue;
        }
        let v = u[k].norm() * r.sqrt() / rho_product(z);
        if !(v > 0.0) {
            return Err(Error::Fit(format!("solution vanishes at r = {r}")));
        }
        xs.push(r);
        ys.push(v.ln());
    }
    line_fit(&xs, &ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VanishingOrder {
    /// Fitted exponent `p` in `|g_wall / g_mid| ~ C r^{-p} (1 + c/r)`.
    pub order: f64,
    /// Exponent from a bare power-law fit of `|g|` along the wall line.
    pub plain_order: f64,
    pub rms: f64,
    pub samples: usize,
}

/// Order of vanishing of `g` at the side face over the wall `j = 0`.
///
/// Along the wall-parallel node line `rows` lattice rows from the wall, the
/// side-face defining function is `~ d / r`, so `g` should fall like `1/r`.
/// Two things spoil a bare power fit at moderate `r`: the next term of the
/// radial expansion, and the small mismatch between the discrete and exact
/// decay rates, which enters `log g` linearly in `r`. Both are common to all
/// angles, so `g` is divided by its value on the bisector at the same radius,
/// and a `1/r` term is fitted alongside the power.
pub fn vanishing_order_fit(
    op: &RadialOperator,
    u: &[Complex64],
    param: &SpectralParam,
    rows: i32,
    r_lo: f64,
    r_hi: f64,
) -> Result<VanishingOrder> {
    let g = &op.grid;
    if rows < 0 || rows >= g.n {
        return invalid("row offset outside the grid");
    }
    if !(r_lo > 0.0 && r_hi > r_lo) || r_hi > g.inradius() {
        return invalid(format!(
            "window [{r_lo}, {r_hi}] must lie inside the truncation"
        ));
    }
    let mid = std::f64::consts::FRAC_PI_6;
    let (mut lr, mut ir, mut plain, mut rel) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..=g.n {
        let Some(k) = g.index(i, rows) else { break };
        let z = g.z(k);
        let r = z[0].hypot(z[1]);
        if r < r_lo || r > r_hi {
            continue;
        }
        let gw = (u[k] / prefactor(z, param)).norm();
        let zm = [r * mid.cos(), r * mid.sin()];
        let gm = (interpolate(g, u, zm)? / prefactor(zm, param)).norm();
        if !(gw > 0.0 && gm > 0.0) {
            return Err(Error::Fit(format!("coefficient vanishes at r = {r}")));
        }
        lr.push(r.ln());
        ir.push(1.0 / r);
        plain.push(gw.ln());
        rel.push((gw / gm).ln());
    }
    if lr.len() < 4 {
        return Err(Error::Fit(format!(
            "only {} samples in the window",
            lr.len()
        )));
    }
    let bare = line_fit(&lr, &plain)?;
    let design: Vec<Vec<Complex64>> = lr
        .iter()
        .zip(&ir)
        .map(|(&a, &b)| {
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(a, 0.0),
                Complex64::new(b, 0.0),
            ]
        })
        .collect();
    let y: Vec<Complex64> = rel.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let c = complex_lstsq(&design, &y)?;
    let rms = (design
        .iter()
        .zip(&rel)
        .map(|(row, &v)| (v - row.iter().zip(&c).map(|(a, b)| a.re * b.re).sum::<f64>()).powi(2))
        .sum::<f64>()
        / rel.len() as f64)
        .sqrt();
    Ok(VanishingOrder {
        order: -c[1].re,
        plain_order: -bare.slope,
        rms,
        samples: rel.len(),
    })
}

/// Difference quotients `(g(theta_{m+1}) - g(theta_m)) / d_theta` of the
/// front-face coefficient on the circle `|z| = r0`, at the angles
/// `wall_angle + (m - count) d_theta`, `m = 0..=2 count`, which straddle the wall.
pub fn wall_difference_quotients(
    op: &RadialOperator,
    u: &[Complex64],
    param: &SpectralParam,
    r0: f64,
    wall_angle: f64,
    d_theta: f64,
    count: usize,
) -> Result<Vec<Complex64>> {
    let g: Vec<Complex64> = (0..op.len())
        .map(|k| {
            let z = op.grid.z(k);
            if z == [0.0, 0.0] {
                Complex64::new(0.0, 0.0)
            } else {
                u[k] / prefactor(z, param)
            }
        })
        .collect();
    let samples: Result<Vec<Complex64>> = (0..=2 * count)
        .map(|m| {
            let th = wall_angle + (m as f64 - count as f64) * d_theta;
            interpolate(&op.grid, &g, [r0 * th.cos(), r0 * th.sin()])
        })
        .collect();
    let s = samples?;
    Ok(s.windows(2).map(|w| (w[1] - w[0]) / d_theta).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat::operator::assemble_radial;

    #[test]
    fn synthetic_round_trip() {
        let op = assemble_radial(ChamberGrid::with_radius(0.25, 40).unwrap());
        let p = SpectralParam::new(Complex64::new(-0.7, 0.4)).unwrap();
        let u: Vec<Complex64> = op.grid.sample(|z| {
            if z == [0.0, 0.0] {
                Complex64::new(0.0, 0.0)
            } else {
                prefactor(z, &p)
            }
        });
        let s = extract_asymptotics(&op, &u, &p, 2.0, 8.0).unwrap();
        assert!(!s.is_empty());
        assert!(s.iter().all(|x| (x.g - 1.0).norm() < 1e-10));
        assert!(extract_asymptotics(&op, &u, &p, 2.0, 100.0).is_err());
    }

    #[test]
    fn interpolation_is_exact_on_affine() {
        let grid = ChamberGrid::with_radius(0.3, 10).unwrap();
        let f = |z: [f64; 2]| Complex64::new(1.0 + 2.0 * z[0] - z[1], 0.5 * z[1]);
        let v = grid.sample(f);
        for z in [[0.11, 0.23], [-1.0, 0.77], [0.5, -1.3]] {
            assert!((interpolate(&grid, &v, z).unwrap() - f(z)).norm() < 1e-12);
        }
        assert!(interpolate(&grid, &v, [10.0, 0.0]).is_err());
    }

    #[test]
    fn wall_distance_examples() {
        assert!(wall_distance([5.0, 0.0]).abs() < 1e-15);
        let th = std::f64::consts::FRAC_PI_6;
        assert!((wall_distance([2.0 * th.cos(), 2.0 * th.sin()]) - 1.0).abs() < 1e-12);
        assert!((wall_distance([-3.0, 0.5]) - 0.5).abs() < 1e-12);
    }
}
