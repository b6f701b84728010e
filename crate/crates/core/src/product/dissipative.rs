//! Off-diagonal decay of the product resolvent between separated cones.
//!
//! For `w, w'` in the flat picture at angle at least `theta` apart, and
//! `alpha = kappa cos(theta0)`, the elementary estimate
//! `cos(theta0) |w'| <= |w - w'| + cos(theta + theta0) |w|` (or
//! `<= |w - w'| - |w|` once `theta + theta0 > pi`) bounds the growth rate of
//! the cut-off resolvent. [`dissipative_inequality_check`] samples it;
//! [`angular_decay_measure`] measures the rate it predicts.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::model::{product_resolvent, ProductGrid, ProductMethod};
use crate::error::{invalid, Error, Result};
use crate::fit::line_fit;
use crate::flat::spectral::SpectralParam;
use crate::geometry::SQRT_3;

type C = Complex64;

/// Relative slack allowed before a sample counts as a violation.
pub const INEQUALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityReport {
    pub theta: f64,
    pub theta0: f64,
    pub samples: usize,
    pub violations: usize,
    /// Largest value of `(lhs - rhs) / (|w| + |w'|)`; negative when every
    /// sample holds strictly.
    pub worst_excess: f64,
}

/// Right-hand coefficient of `|w|`: `cos(theta + theta0)`, or `-1` past `pi`.
pub fn rate_bound_factor(theta: f64, theta0: f64) -> f64 {
    if theta + theta0 <= PI {
        (theta + theta0).cos()
    } else {
        -1.0
    }
}

/// `lhs - rhs` of the inequality for one pair.
pub fn inequality_excess(w: [f64; 2], wp: [f64; 2], theta: f64, theta0: f64) -> f64 {
    let nw = w[0].hypot(w[1]);
    let nwp = wp[0].hypot(wp[1]);
    let diff = (w[0] - wp[0]).hypot(w[1] - wp[1]);
    theta0.cos() * nwp - diff - rate_bound_factor(theta, theta0) * nw
}

/// Sample pairs `w, w'` whose directions differ by at least `theta`, with
/// magnitudes spread log-uniformly over ten decades and occasional zeros.
pub fn dissipative_inequality_check(
    theta: f64,
    theta0: f64,
    samples: usize,
    seed: u64,
) -> Result<InequalityReport> {
    if !(theta > 0.0 && theta < PI / 2.0) {
        return invalid(format!("theta must lie in (0, pi/2), got {theta}"));
    }
    if !(0.0..=PI).contains(&theta0) {
        return invalid(format!("theta0 must lie in [0, pi], got {theta0}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let phi = rng.gen_range(0.0..2.0 * PI);
        let sep = theta + rng.gen::<f64>() * (PI - theta);
        let side = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let phip = phi + side * sep;
        let mag = |rng: &mut ChaCha8Rng| {
            if rng.gen::<f64>() < 0.01 {
                0.0
            } else {
                10f64.powf(rng.gen_range(-5.0..5.0))
            }
        };
        let (r, rp) = (mag(&mut rng), mag(&mut rng));
        let w = [r * phi.cos(), r * phi.sin()];
        let wp = [rp * phip.cos(), rp * phip.sin()];
        let scale = r + rp;
        let e = if scale > 0.0 {
            inequality_excess(w, wp, theta, theta0) / scale
        } else {
            0.0
        };
        worst = worst.max(e);
        if e > INEQUALITY_TOL {
            violations += 1;
        }
    }
    Ok(InequalityReport {
        theta,
        theta0,
        samples,
        violations,
        worst_excess: worst,
    })
}

/// Set-up of a decay measurement. Angles are measured in the flat half-plane
/// `(a, b)`, `b >= 0`, from the positive `a` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeSetup {
    /// Source cone `[phi_lo, phi_hi]`.
    pub source: (f64, f64),
    /// Radial extent of the source.
    pub source_radii: (f64, f64),
    /// Separation `theta`; the measured ray sits at `phi_lo - theta`.
    pub theta: f64,
    /// Input growth `alpha = kappa cos(theta0)`.
    pub theta0: f64,
    /// Fit window along the measured ray.
    pub fit_radii: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayMeasure {
    pub kappa: f64,
    pub alpha: f64,
    /// Fitted growth rate on the measured ray.
    pub beta: f64,
    /// `kappa cos(theta + theta0)`, or `-kappa` past `pi`.
    pub bound: f64,
    pub rms: f64,
}

/// A smooth step rising from 0 at `x <= 0` to 1 at `x >= 1`.
fn smooth_step(x: f64) -> f64 {
    let f = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let (a, b) = (f(x), f(1.0 - x));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Apply the product resolvent to `e^{alpha |w|}` cut off to the source cone
/// and fit the exponential rate of the output along the ray at angle `theta`
/// below the cone. The hyperbolic volume factor `e^{-b / (2 sqrt 3)}` is
/// divided out of both input and output, so rates are those of the flat
/// picture.
pub fn angular_decay_measure(
    grid: &ProductGrid,
    param: &SpectralParam,
    setup: &ConeSetup,
) -> Result<DecayMeasure> {
    let kappa = param.kappa();
    let alpha = kappa * setup.theta0.cos();
    let (lo, hi) = setup.source;
    let ray = lo - setup.theta;
    if !(0.0 <= ray && lo < hi && hi <= PI) {
        return invalid("cones must lie in the upper half-plane with the ray below the source");
    }
    let (r_in, r_out) = setup.source_radii;
    let (f_lo, f_hi) = setup.fit_radii;
    let reach = r_out.max(f_hi);
    if reach + 2.0 > grid.a_max.min(grid.b_max) {
        return invalid("cones do not fit inside the grid");
    }
    let edge = (hi - lo) / 4.0;
    let f = grid.sample(|a, b| {
        let r = a.hypot(b);
        let phi = b.atan2(a);
        let ang = smooth_step((phi - lo) / edge) * smooth_step((hi - phi) / edge);
        let rad = smooth_step(r - r_in) * smooth_step(r_out - r);
        C::new(
            ang * rad * (alpha * r).exp() * (-b / (2.0 * SQRT_3)).exp(),
            0.0,
        )
    });
    let u = product_resolvent(grid, param, &f, ProductMethod::Direct)?;
    // Bilinear interpolation of the output along the ray.
    let (na, nb) = grid.shape();
    let value = |a: f64, b: f64| -> Option<C> {
        let x = (a - grid.a[0]) / grid.h_a;
        let y = (b - grid.b[0]) / grid.h_b;
        let (i, j) = (x.floor(), y.floor());
        if i < 0.0 || j < 0.0 || i as usize + 1 >= na || j as usize + 1 >= nb {
            return None;
        }
        let (i, j, s, t) = (i as usize, j as usize, x - i, y - j);
        Some(
            u[grid.index(i, j)] * ((1.0 - s) * (1.0 - t))
                + u[grid.index(i + 1, j)] * (s * (1.0 - t))
                + u[grid.index(i, j + 1)] * ((1.0 - s) * t)
                + u[grid.index(i + 1, j + 1)] * (s * t),
        )
    };
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let n = ((f_hi - f_lo) / grid.h_a.min(grid.h_b)).ceil() as usize;
    for m in 0..=n {
        let r = f_lo + (f_hi - f_lo) * m as f64 / n as f64;
        let (a, b) = (r * ray.cos(), r * ray.sin());
        let v = value(a, b)
            .ok_or_else(|| Error::Fit(format!("ray point ({a}, {b}) outside the grid")))?;
        let v = v.norm() * (b / (2.0 * SQRT_3)).exp();
        if !(v > 0.0) {
            return Err(Error::Fit(format!("output vanishes at r = {r}")));
        }
        xs.push(r);
        ys.push(v.ln());
    }
    if xs.len() < 5 {
        return Err(Error::Fit("fit region too small".into()));
    }
    let fit = line_fit(&xs, &ys)?;
    Ok(DecayMeasure {
        kappa,
        alpha,
        beta: fit.slope,
        bound: kappa * rate_bound_factor(setup.theta, setup.theta0),
        rms: fit.rms,
    })
}
