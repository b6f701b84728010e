//! The two-body problem at a wall: radial eigenfunctions of `Delta_{H^2}`.
//!
//! Transverse to a wall the spherical function is, up to an exponential
//! along the wall, the regular radial solution of
//! `u'' + coth(d) u' + (1/4 + nu^2) u = 0` with `u(0) = 1`. For large `d` it
//! is a combination `c(nu) Phi_nu + c(-nu) Phi_{-nu}` of the two solutions
//! `Phi_nu = e^{(i nu - 1/2) d} sum_k g_k e^{-2kd}`, whose series in the
//! boundary defining variable `e^{-d}` converges for every `d > 0`. The
//! coefficients are read off by integrating the regular solution outward and
//! matching value and slope against both series at the fit point.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::ode::{integrate_to, Tolerance};
use crate::product::kernels::hypergeometric;

type C = Complex64;

/// Default matching point for the coefficient fit.
pub const DEFAULT_FIT_POINT: f64 = 3.0;

/// Below this `|nu|` the two behaviours merge into `e^{-d/2}` and `d e^{-d/2}`.
pub const THRESHOLD_TOL: f64 = 1e-8;

/// Where the hypergeometric start hands over to the integrator.
const START: f64 = 0.25;

const SERIES_TERMS: usize = 200;

fn ode_tol() -> Tolerance {
    Tolerance {
        rtol: 1e-13,
        atol: 1e-300,
        ..Tolerance::default()
    }
}

/// Value and `d`-derivative of `Phi_nu` at `d > 0`.
pub fn jost_solution(nu: C, d: f64) -> Result<(C, C)> {
    if !(d > 0.0 && d.is_finite()) {
        return invalid(format!("characteristic solutions need d > 0, got {d}"));
    }
    let mu = C::i() * nu - 0.5;
    let q = (-2.0 * d).exp();
    let mut g: Vec<C> = vec![C::new(1.0, 0.0)];
    let (mut val, mut der) = (C::new(1.0, 0.0), mu);
    let mut qk = 1.0;
    for k in 1..SERIES_TERMS {
        let kf = k as f64;
        let denom = 4.0 * kf * (kf - C::i() * nu);
        if denom.norm() < 1e-12 {
            return Err(Error::Degenerate(format!(
                "characteristic series has a pole at nu = {nu}"
            )));
        }
        let mut s = C::new(0.0, 0.0);
        for m in 1..=k {
            s += (mu - 2.0 * (k - m) as f64) * g[k - m];
        }
        let gk = -2.0 * s / denom;
        g.push(gk);
        qk *= q;
        val += gk * qk;
        der += gk * (mu - 2.0 * kf) * qk;
        if (gk * qk).norm() < 1e-18 * val.norm() && k > 4 {
            break;
        }
    }
    let e = (mu * d).exp();
    Ok((val * e, der * e))
}

/// Regular solution `u(0) = 1` and its derivative at the requested points,
/// which must be positive and ascending.
pub fn regular_solution(nu: C, ds: &[f64]) -> Result<Vec<(C, C)>> {
    if ds.iter().any(|&d| !(d >= 0.0 && d.is_finite())) || ds.windows(2).any(|w| w[1] < w[0]) {
        return invalid("regular solution needs ascending non-negative points");
    }
    let energy = 0.25 + nu * nu;
    // 2F1(1/2 - i nu, 1/2 + i nu; 1; -sinh^2(d/2)) near the origin.
    let (a, b) = (0.5 - C::i() * nu, 0.5 + C::i() * nu);
    let series = |d: f64| -> (C, C) {
        let z = -(d / 2.0).sinh().powi(2);
        let u = hypergeometric(a, b, 1.0, z);
        let du = a * b * hypergeometric(a + 1.0, b + 1.0, 2.0, z) * (-d.sinh() / 2.0);
        (u, du)
    };
    let rhs = move |t: f64, y: &[C], dy: &mut [C]| {
        dy[0] = y[1];
        dy[1] = -y[1] / t.tanh() - energy * y[0];
    };
    let far: Vec<f64> = ds.iter().cloned().filter(|&d| d > START).collect();
    let (u0, du0) = series(START);
    let states = integrate_to(rhs, START, &[u0, du0], &far, ode_tol())?;
    let mut far_states = states.into_iter();
    Ok(ds
        .iter()
        .map(|&d| {
            if d > START {
                let y = far_states.next().expect("one state per far point");
                (y[0], y[1])
            } else {
                series(d)
            }
        })
        .collect())
}

/// Coefficients of the regular solution against the two characteristic
/// solutions: `u = reflected Phi_nu + incident Phi_{-nu}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoBodyFit {
    pub nu: C,
    pub fit_point: f64,
    /// Coefficient of `Phi_{-nu}`, the behaviour `e^{-i nu d}`.
    pub incident: C,
    /// Coefficient of `Phi_nu`, the behaviour `e^{i nu d}`.
    pub reflected: C,
}

impl TwoBodyFit {
    pub fn ratio(&self) -> C {
        self.reflected / self.incident
    }
}

fn check_frequency(nu: C) -> Result<()> {
    if !(nu.re.is_finite() && nu.im.is_finite()) {
        return invalid(format!("non-finite transverse frequency {nu}"));
    }
    if nu.norm() < THRESHOLD_TOL {
        return invalid(format!(
            "transverse frequency {nu} is at the two-body threshold"
        ));
    }
    Ok(())
}

pub fn two_body_fit(nu: C, fit_point: f64) -> Result<TwoBodyFit> {
    check_frequency(nu)?;
    if !(fit_point > START && fit_point.is_finite()) {
        return invalid(format!("fit point must exceed {START}, got {fit_point}"));
    }
    let (u, du) = regular_solution(nu, &[fit_point])?[0];
    let (p, dp) = jost_solution(nu, fit_point)?;
    let (m, dm) = jost_solution(-nu, fit_point)?;
    let det = p * dm - m * dp;
    if !(det.norm() > 0.0) {
        return Err(Error::Fit(format!(
            "characteristic solutions are dependent at nu = {nu}"
        )));
    }
    let reflected = (u * dm - m * du) / det;
    let incident = (p * du - u * dp) / det;
    if !(reflected.re.is_finite()
        && reflected.im.is_finite()
        && incident.norm() > 0.0
        && incident.re.is_finite())
    {
        return Err(Error::Fit(format!("coefficient fit failed at nu = {nu}")));
    }
    Ok(TwoBodyFit {
        nu,
        fit_point,
        incident,
        reflected,
    })
}

/// Reflection coefficient at one wall frequency together with its drift when
/// the fit window is doubled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoBodyCoeff {
    pub nu: C,
    pub value: C,
    pub drift: f64,
}

/// Fit drift above this is reported as a failure.
pub const FIT_DRIFT_TOL: f64 = 1e-4;

pub fn two_body_coeff(nu: C) -> Result<TwoBodyCoeff> {
    let a = two_body_fit(nu, DEFAULT_FIT_POINT)?.ratio();
    let b = two_body_fit(nu, 2.0 * DEFAULT_FIT_POINT)?.ratio();
    let drift = (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE);
    if !(drift < FIT_DRIFT_TOL) {
        return Err(Error::Fit(format!(
            "reflection coefficient drifts by {drift:.2e} at nu = {nu}"
        )));
    }
    Ok(TwoBodyCoeff {
        nu,
        value: a,
        drift,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Lanczos approximation of the complex Gamma function.
    pub(crate) fn gamma(z: C) -> C {
        const G: f64 = 7.0;
        const P: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        if z.re < 0.5 {
            return PI / ((PI * z).sin() * gamma(1.0 - z));
        }
        let z = z - 1.0;
        let mut x = C::new(P[0], 0.0);
        for (i, p) in P.iter().enumerate().skip(1) {
            x += *p / (z + i as f64);
        }
        let t = z + G + 0.5;
        (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
    }

    /// `Gamma(i nu) / (sqrt(pi) Gamma(1/2 + i nu))`.
    pub(crate) fn c_function(nu: C) -> C {
        gamma(C::i() * nu) / (PI.sqrt() * gamma(0.5 + C::i() * nu))
    }

    fn samples() -> Vec<C> {
        (0..20)
            .map(|m| {
                let t = m as f64 / 19.0;
                C::new(-2.0 + 4.0 * t, 0.05 + 1.3 * (3.0 * t).sin().abs())
            })
            .collect()
    }

    #[test]
    fn gamma_examples() {
        assert!((gamma(C::new(5.0, 0.0)) - 24.0).norm() < 1e-12);
        assert!((gamma(C::new(0.5, 0.0)) - PI.sqrt()).norm() < 1e-13);
        // |Gamma(iy)|^2 = pi / (y sinh(pi y)).
        let y = 0.7;
        assert!((gamma(C::new(0.0, y)).norm_sqr() - PI / (y * (PI * y).sinh())).abs() < 1e-12);
    }

    #[test]
    fn fit_matches_the_closed_form() {
        for nu in samples() {
            let f = two_body_fit(nu, DEFAULT_FIT_POINT).unwrap();
            let (cp, cm) = (c_function(nu), c_function(-nu));
            assert!(
                (f.reflected - cp).norm() < 1e-8 * cp.norm(),
                "{nu}: {} vs {cp}",
                f.reflected
            );
            assert!(
                (f.incident - cm).norm() < 1e-8 * cm.norm(),
                "{nu}: {} vs {cm}",
                f.incident
            );
        }
    }

    #[test]
    fn window_doubling_and_reciprocity() {
        for nu in samples() {
            let c = two_body_coeff(nu).unwrap();
            assert!(c.value.re.is_finite() && c.value.im.is_finite());
            assert!(c.drift < FIT_DRIFT_TOL, "{nu}: {}", c.drift);
            let m = two_body_coeff(-nu).unwrap();
            assert!((c.value * m.value - 1.0).norm() < 1e-6, "{nu}");
        }
        assert!(two_body_coeff(C::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn constant_solution_has_no_reflection() {
        // nu = i/2: energy zero, the regular solution is 1 = Phi_{-nu}.
        let f = two_body_fit(C::new(0.0, 0.5), DEFAULT_FIT_POINT).unwrap();
        assert_eq!(f.reflected, C::new(0.0, 0.0));
        assert!((f.incident - 1.0).norm() < 1e-15);
    }

    #[test]
    fn characteristic_series_solves_the_ode() {
        let nu = C::new(0.4, 0.3);
        let d = 0.6;
        let h = 1e-4;
        let (u, du) = jost_solution(nu, d).unwrap();
        let (up, dup) = jost_solution(nu, d + h).unwrap();
        let (um, dum) = jost_solution(nu, d - h).unwrap();
        assert!(((up - um) / (2.0 * h) - du).norm() < 1e-7 * du.norm());
        let d2 = (dup - dum) / (2.0 * h);
        let res = d2 + du / d.tanh() + (0.25 + nu * nu) * u;
        assert!(res.norm() < 1e-7 * u.norm(), "{res}");
    }
}
