//! The spectral parameter and the branch of the square root.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Bottom of the continuous spectrum, `|rho|^2 = 1/3`.
pub const SPECTRUM_BOTTOM: f64 = 1.0 / 3.0;

/// Width of the hyperbolic factor's threshold shift, `1/4`.
pub const H2_BOTTOM: f64 = 0.25;

/// How close to the real axis a value counts as real.
const REAL_TOL: f64 = 1e-14;

/// A spectral parameter off `[1/3, inf)` together with `k = sqrt(lambda - 1/3)`
/// on the branch `Im k < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralParam {
    pub lambda: Complex64,
    pub k: Complex64,
}

impl SpectralParam {
    pub fn new(lambda: Complex64) -> Result<Self> {
        Self::with_bottom(lambda, SPECTRUM_BOTTOM)
    }

    /// Same construction relative to another bottom of spectrum.
    pub fn with_bottom(lambda: Complex64, bottom: f64) -> Result<Self> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite spectral parameter {lambda}"
            )));
        }
        let scale = 1.0 + lambda.re.abs();
        if lambda.im.abs() <= REAL_TOL * scale && lambda.re >= bottom - REAL_TOL * scale {
            return Err(Error::OnSpectrum {
                re: lambda.re,
                im: lambda.im,
                bottom,
            });
        }
        Ok(Self {
            lambda,
            k: sqrt_branch(lambda - bottom),
        })
    }

    pub fn real(lambda: f64) -> Result<Self> {
        Self::new(Complex64::new(lambda, 0.0))
    }

    /// Exponential decay rate `-Im k > 0`.
    pub fn kappa(&self) -> f64 {
        -self.k.im
    }
}

/// Square root with negative imaginary part; the negative reals map to the
/// negative imaginary axis.
pub fn sqrt_branch(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.im > 0.0 || (r.im == 0.0 && z.re < 0.0) {
        -r
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_examples() {
        let p = SpectralParam::real(-1.0).unwrap();
        assert!((p.k - Complex64::new(0.0, -2.0 / 3f64.sqrt())).norm() < 1e-15);
        assert!((p.kappa() - 1.154_700_538_379_251_5).abs() < 1e-15);
        let p = SpectralParam::new(Complex64::new(1.0 / 3.0 - 1.0, 1.0)).unwrap();
        assert!(p.k.im < 0.0);
        assert!((p.k * p.k - Complex64::new(-1.0, 1.0)).norm() < 1e-14);
        assert!(matches!(
            SpectralParam::real(0.5),
            Err(Error::OnSpectrum { .. })
        ));
        assert!(matches!(
            SpectralParam::real(1.0 / 3.0),
            Err(Error::OnSpectrum { .. })
        ));
        assert!(SpectralParam::new(Complex64::new(0.5, 1e-3)).is_ok());
    }
}
