//! Distances on the product model `R x H^2` and their smoothing near the
//! diagonal.

use serde::Serialize;

use crate::geometry::SQRT_3;

/// Width of the region where the raw distance is replaced.
pub const SMOOTHING_WIDTH: f64 = 3.0;

/// Product-model point: `log s` on the line and polar coordinates
/// `(d, theta)` on the hyperbolic plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductPoint {
    pub log_s: f64,
    pub d: f64,
    pub theta: f64,
}

impl ProductPoint {
    pub fn new(log_s: f64, d: f64, theta: f64) -> Self {
        Self { log_s, d, theta }
    }
}

/// `max(d, 1)`-like smoothing of a distance: equal to `d` for `d >= 3`, and on
/// `[0, 3]` the even polynomial `9/8 + d^2/4 - d^4/216`, which matches value,
/// slope and curvature at `3`. Evenness keeps the result smooth in the point
/// at coincidence.
pub fn smoothed(d: f64) -> f64 {
    let d = d.abs();
    if d >= SMOOTHING_WIDTH {
        d
    } else {
        let d2 = d * d;
        1.125 + 0.25 * d2 - d2 * d2 / 216.0
    }
}

/// Hyperbolic distance between two points in polar form.
pub fn h2_distance(d: f64, theta: f64, dp: f64, thetap: f64) -> f64 {
    let c = d.cosh() * dp.cosh() - d.sinh() * dp.sinh() * (theta - thetap).cos();
    // acosh of a value that may dip below 1 by rounding.
    let c = c.max(1.0);
    (c + (c * c - 1.0).sqrt()).ln()
}

/// Factor separations `(d1, d2)`: `d1 = 2 |log s - log s'|` and `d2` is
/// `sqrt(3)` times the hyperbolic distance.
pub fn factor_distances(a: &ProductPoint, b: &ProductPoint) -> (f64, f64) {
    (
        2.0 * (a.log_s - b.log_s).abs(),
        SQRT_3 * h2_distance(a.d, a.theta, b.d, b.theta),
    )
}

pub fn product_distance(a: &ProductPoint, b: &ProductPoint) -> f64 {
    let (d1, d2) = factor_distances(a, b);
    d1.hypot(d2)
}

pub fn smoothed_distance(a: &ProductPoint, b: &ProductPoint) -> f64 {
    smoothed(product_distance(a, b))
}

/// `δ̃(z, z'') / (δ̃(z, z') δ̃(z', z''))`, bounded by 4 for every triple.
pub fn triple_ratio(a: &ProductPoint, b: &ProductPoint, c: &ProductPoint) -> f64 {
    smoothed_distance(a, c) / (smoothed_distance(a, b) * smoothed_distance(b, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothing_properties() {
        assert_eq!(smoothed(5.0), 5.0);
        assert!((smoothed(0.0) - 1.125).abs() < 1e-15);
        let h = 1e-5;
        let left = |f: fn(f64) -> f64, x: f64| (f(x) - f(x - h)) / h;
        assert!((left(smoothed, 3.0) - 1.0).abs() < 1e-4);
        for k in 0..=300 {
            let d = k as f64 * 0.01;
            let s = smoothed(d);
            assert!(s >= d - 1e-15 && s <= d + 2.0 && s >= 1.0);
        }
    }

    #[test]
    fn h2_distance_examples() {
        assert!((h2_distance(1.0, 0.0, 3.0, 0.0) - 2.0).abs() < 1e-12);
        assert!((h2_distance(1.0, 0.0, 1.0, std::f64::consts::PI) - 2.0).abs() < 1e-12);
        assert_eq!(h2_distance(2.0, 0.5, 2.0, 0.5), 0.0);
    }
}
