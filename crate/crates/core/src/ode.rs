//! Adaptive Dormand-Prince 5(4) integration of complex ODE systems in a real
//! variable.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

fn axpy(out: &mut [C], y: &[C], h: f64, terms: &[(f64, &[C])]) {
    for i in 0..out.len() {
        let mut s = C::new(0.0, 0.0);
        for (c, k) in terms {
            s += k[i] * *c;
        }
        out[i] = y[i] + s * h;
    }
}

/// Integrate `y' = f(t, y)` from `t0` to each point of `stops` (monotone in
/// the direction of travel) and return the states there.
pub fn integrate_to<F>(
    f: F,
    t0: f64,
    y0: &[C],
    stops: &[f64],
    tol: Tolerance,
) -> Result<Vec<Vec<C>>>
where
    F: Fn(f64, &[C], &mut [C]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut out = Vec::with_capacity(stops.len());
    let mut k: Vec<Vec<C>> = vec![vec![C::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![C::new(0.0, 0.0); n];
    let mut ynew = vec![C::new(0.0, 0.0); n];
    let mut h_guess = match stops.first() {
        Some(&s) => ((s - t0).abs() * 1e-3).max(1e-6),
        None => return Ok(out),
    };
    let mut steps = 0usize;
    for &stop in stops {
        let dir = if stop >= t { 1.0 } else { -1.0 };
        while (stop - t) * dir > 1e-15 * (1.0 + t.abs()) {
            steps += 1;
            if steps > tol.max_steps {
                return Err(Error::Solver(format!("ODE step limit reached at t = {t}")));
            }
            let mut h = h_guess.min((stop - t).abs()) * dir;
            f(t, &y, &mut k[0]);
            loop {
                axpy(&mut tmp, &y, h, &[(A21, &k[0])]);
                let (k0, rest) = k.split_at_mut(1);
                f(t + h / 5.0, &tmp, &mut rest[0]);
                axpy(&mut tmp, &y, h, &[(A31, &k0[0]), (A32, &rest[0])]);
                f(t + 0.3 * h, &tmp, &mut rest[1]);
                axpy(
                    &mut tmp,
                    &y,
                    h,
                    &[(A41, &k0[0]), (A42, &rest[0]), (A43, &rest[1])],
                );
                f(t + 0.8 * h, &tmp, &mut rest[2]);
                axpy(
                    &mut tmp,
                    &y,
                    h,
                    &[
                        (A51, &k0[0]),
                        (A52, &rest[0]),
                        (A53, &rest[1]),
                        (A54, &rest[2]),
                    ],
                );
                f(t + 8.0 / 9.0 * h, &tmp, &mut rest[3]);
                axpy(
                    &mut tmp,
                    &y,
                    h,
                    &[
                        (A61, &k0[0]),
                        (A62, &rest[0]),
                        (A63, &rest[1]),
                        (A64, &rest[2]),
                        (A65, &rest[3]),
                    ],
                );
                f(t + h, &tmp, &mut rest[4]);
                axpy(
                    &mut ynew,
                    &y,
                    h,
                    &[
                        (B1, &k0[0]),
                        (B3, &rest[1]),
                        (B4, &rest[2]),
                        (B5, &rest[3]),
                        (B6, &rest[4]),
                    ],
                );
                f(t + h, &ynew, &mut rest[5]);
                let mut err: f64 = 0.0;
                for i in 0..n {
                    let e = (k0[0][i] * E1
                        + rest[1][i] * E3
                        + rest[2][i] * E4
                        + rest[3][i] * E5
                        + rest[4][i] * E6
                        + rest[5][i] * E7)
                        * h;
                    let sc = tol.atol + tol.rtol * y[i].norm().max(ynew[i].norm());
                    err = err.max(e.norm() / sc);
                }
                if !err.is_finite() {
                    return Err(Error::Solver(format!("non-finite ODE state near t = {t}")));
                }
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if err <= 1.0 {
                    t += h;
                    y.copy_from_slice(&ynew);
                    h_guess = (h * fac).abs();
                    break;
                }
                h *= fac;
                if h.abs() < 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::Solver(format!("ODE step size underflow at t = {t}")));
                }
            }
        }
        t = stop;
        out.push(y.clone());
    }
    Ok(out)
}

/// Integrate to a single end point.
pub fn integrate<F>(f: F, t0: f64, y0: &[C], t1: f64, tol: Tolerance) -> Result<Vec<C>>
where
    F: Fn(f64, &[C], &mut [C]),
{
    Ok(integrate_to(f, t0, y0, &[t1], tol)?.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let f = |_t: f64, y: &[C], d: &mut [C]| {
            d[0] = y[1];
            d[1] = -y[0];
        };
        let y = integrate(
            f,
            0.0,
            &[C::new(1.0, 0.0), C::new(0.0, 0.0)],
            10.0,
            Tolerance::default(),
        )
        .unwrap();
        assert!((y[0] - C::new(10f64.cos(), 0.0)).norm() < 1e-9);
    }

    #[test]
    fn complex_exponential_backwards() {
        let w = C::new(0.3, -1.2);
        let f = move |_t: f64, y: &[C], d: &mut [C]| d[0] = w * y[0];
        let ys = integrate_to(
            f,
            2.0,
            &[C::new(1.0, 0.0)],
            &[1.0, 0.0],
            Tolerance::default(),
        )
        .unwrap();
        assert!((ys[1][0] - (w * -2.0).exp()).norm() < 1e-9);
    }
}
