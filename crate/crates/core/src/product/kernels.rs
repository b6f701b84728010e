//! Resolvent kernels of the two factors of the product model.
//!
//! The line factor is `-1/4 d^2/dw^2` in `w = log s`; the hyperbolic factor is
//! one third of the radial Laplacian on `H^2`, whose spectrum starts at `1/12`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::flat::spectral::sqrt_branch;
use crate::ode::{integrate_to, Tolerance};

type C = Complex64;

/// Bottom of the spectrum of the hyperbolic factor.
pub const H2_FACTOR_BOTTOM: f64 = 1.0 / 12.0;

fn off_half_line(z: C, bottom: f64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return invalid(format!("non-finite spectral parameter {z}"));
    }
    let scale = 1.0 + z.re.abs();
    if z.im.abs() <= 1e-14 * scale && z.re >= bottom - 1e-14 * scale {
        return Err(Error::OnSpectrum {
            re: z.re,
            im: z.im,
            bottom,
        });
    }
    Ok(())
}

/// Kernel of `(-1/4 d^2/dw^2 - sigma)^{-1}` on the line:
/// `(-i/k) exp(-2 i k |w - w'|)` with `k = sqrt(sigma)`, `Im k < 0`.
pub fn resolvent_1d_kernel(sigma: C, w: f64, wp: f64) -> Result<C> {
    off_half_line(sigma, 0.0)?;
    let k = sqrt_branch(sigma);
    Ok(-C::i() / k * (-2.0 * C::i() * k * (w - wp).abs()).exp())
}

/// Radial kernel of `(Delta_{H^2}/3 - zeta)^{-1}` as a function of the
/// hyperbolic distance.
///
/// With `s(1 - s) = 3 zeta`, `Re s > 1/2`, the kernel is `3/(2 pi)` times the
/// Legendre function of the second kind `Q_{s-1}(cosh d)`. It is computed
/// without special functions: the decaying solution is integrated inward from
/// large `d` in the form `y e^{-s d}`, and normalised through its Wronskian
/// with the regular solution, which is summed as a hypergeometric series near
/// the origin. That fixes the logarithmic singularity at `-3/(2 pi) log d`.
#[derive(Debug, Clone, Copy)]
pub struct H2RadialKernel {
    pub zeta: C,
    /// Indicial root `s`; the kernel decays like `e^{-s d}`.
    pub s: C,
}

/// Where the regular and decaying solutions are matched.
fn matching_point(s: C) -> f64 {
    (0.25 / s.norm()).min(0.25)
}

/// `2F1(a, b; c; z)` by its power series, for `|z|` well inside the unit disc.
pub(crate) fn hypergeometric(a: C, b: C, c: f64, z: f64) -> C {
    let mut term = C::new(1.0, 0.0);
    let mut sum = term;
    for n in 0..400 {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

impl H2RadialKernel {
    pub fn new(zeta: C) -> Result<Self> {
        off_half_line(zeta, H2_FACTOR_BOTTOM)?;
        // sqrt(1/4 - 3 zeta) with positive real part.
        let root = C::i() * sqrt_branch(3.0 * zeta - 0.25);
        Ok(Self {
            zeta,
            s: 0.5 + root,
        })
    }

    /// Exponential decay rate in `d`, the real part of the indicial root.
    pub fn indicial_rate(&self) -> f64 {
        self.s.re
    }

    /// Kernel values at the given positive distances.
    pub fn eval(&self, d: &[f64]) -> Result<Vec<C>> {
        if d.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return invalid("hyperbolic kernel needs finite positive distances");
        }
        if d.is_empty() {
            return Ok(Vec::new());
        }
        let s = self.s;
        let d0 = matching_point(s);
        let d_max = d.iter().cloned().fold(0.0, f64::max);
        let start = (d_max + 1.0).max(20.0);
        // y'' + (coth d - 2 s) y' + s (1 - coth d) y = 0 for q = y e^{-s d}.
        let rhs = move |t: f64, y: &[C], dy: &mut [C]| {
            let coth = 1.0 / t.tanh();
            dy[0] = y[1];
            dy[1] = -(coth - 2.0 * s) * y[1] - s * (1.0 - coth) * y[0];
        };
        let mut stops: Vec<(usize, f64)> = d.iter().cloned().enumerate().collect();
        stops.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut times: Vec<f64> = stops.iter().map(|x| x.1).collect();
        let at_match = times.iter().position(|&t| t < d0).unwrap_or(times.len());
        times.insert(at_match, d0);
        let tol = Tolerance {
            rtol: 1e-12,
            atol: 1e-13,
            ..Tolerance::default()
        };
        let ys = integrate_to(
            rhs,
            start,
            &[C::new(1.0, 0.0), C::new(0.0, 0.0)],
            &times,
            tol,
        )?;
        // Regular solution 2F1(1-s, s; 1; -sinh^2(d/2)) and its d-derivative.
        let z = -(d0 / 2.0).sinh().powi(2);
        let p = hypergeometric(1.0 - s, s, 1.0, z);
        let dp = s * (1.0 - s) * hypergeometric(2.0 - s, 1.0 + s, 2.0, z) * (-d0.sinh() / 2.0);
        let (y, dy) = (ys[at_match][0], ys[at_match][1]);
        // Wronskian sinh(d)(p q' - p' q) with the factor e^{-s d0} removed.
        let w = d0.sinh() * (p * (dy - s * y) - dp * y);
        if !(w.norm() > 0.0 && w.re.is_finite()) {
            return Err(Error::Solver(format!(
                "degenerate Wronskian at zeta = {}",
                self.zeta
            )));
        }
        let c = -3.0 / (2.0 * PI * w);
        let mut out = vec![C::new(0.0, 0.0); d.len()];
        for (m, &(orig, t)) in stops.iter().enumerate() {
            let row = if m < at_match { m } else { m + 1 };
            out[orig] = c * ys[row][0] * (-s * (t - d0)).exp();
        }
        Ok(out)
    }
}

/// Single evaluation of the hyperbolic radial kernel.
pub fn resolvent_h2_radial(zeta: C, d: f64) -> Result<C> {
    Ok(H2RadialKernel::new(zeta)?.eval(&[d])?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_kernel_examples() {
        let g = resolvent_1d_kernel(C::new(-1.0, 0.0), 0.3, -0.4).unwrap();
        assert!((g - C::new((-1.4f64).exp(), 0.0)).norm() < 1e-15);
        let s = C::new(0.7, -0.2);
        let a = resolvent_1d_kernel(s, 1.1, 0.2).unwrap();
        let b = resolvent_1d_kernel(s, 0.2, 1.1).unwrap();
        assert_eq!(a, b);
        assert!(resolvent_1d_kernel(C::new(0.5, 0.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn line_kernel_inverts_the_operator() {
        // int G(w, w') (-1/4 phi'' - sigma phi)(w') dw' = phi(w) for a Gaussian phi.
        let sigma = C::new(-0.3, 0.8);
        let phi = |x: f64| (-x * x).exp();
        let lphi = |x: f64| C::new(-0.25 * (4.0 * x * x - 2.0) * phi(x), 0.0) - sigma * phi(x);
        let w = 0.37;
        let h = 1e-3;
        let n = 12_000;
        let mut acc = C::new(0.0, 0.0);
        for i in 0..=n {
            let x = -6.0 + i as f64 * h;
            let wt = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += resolvent_1d_kernel(sigma, w, x).unwrap() * lphi(x) * (wt * h);
        }
        assert!((acc - phi(w)).norm() < 1e-6, "{acc}");
    }

    #[test]
    fn hyperbolic_kernel_closed_forms() {
        // zeta = 0: Q_0(x) = log coth(d/2).
        let k = H2RadialKernel::new(C::new(0.0, 0.0)).unwrap();
        let ds = [0.05, 0.5, 2.0, 7.0];
        let v = k.eval(&ds).unwrap();
        for (d, g) in ds.iter().zip(&v) {
            let exact = 3.0 / (2.0 * PI) * (1.0 / (d / 2.0).tanh()).ln();
            assert!(
                (g - exact).norm() < 1e-8 * exact.abs(),
                "{d}: {g} vs {exact}"
            );
        }
        // zeta = -2/3: s = 2, Q_1(x) = x/2 log((x+1)/(x-1)) - 1.
        let k = H2RadialKernel::new(C::new(-2.0 / 3.0, 0.0)).unwrap();
        for d in [0.1, 1.0, 3.0] {
            let x: f64 = f64::cosh(d);
            let exact = 3.0 / (2.0 * PI) * (x / 2.0 * ((x + 1.0) / (x - 1.0)).ln() - 1.0);
            let g = k.eval(&[d]).unwrap()[0];
            assert!(
                (g - exact).norm() < 1e-8 * exact.abs(),
                "{d}: {g} vs {exact}"
            );
        }
    }

    #[test]
    fn hyperbolic_kernel_decay_and_sign() {
        for zeta in [C::new(-0.5, 0.0), C::new(0.05, 0.0), C::new(0.2, -0.3)] {
            let k = H2RadialKernel::new(zeta).unwrap();
            let v = k.eval(&[30.0, 30.5]).unwrap();
            let rate = -(v[1] / v[0]).ln().re / 0.5;
            assert!((rate - k.indicial_rate()).abs() < 1e-4, "{rate}");
            if zeta.im == 0.0 {
                assert!(k
                    .eval(&[0.2, 1.0, 4.0])
                    .unwrap()
                    .iter()
                    .all(|g| g.re > 0.0 && g.im.abs() < 1e-12 * g.re));
            }
        }
        assert!(H2RadialKernel::new(C::new(0.1, 0.0)).is_err());
    }
}
