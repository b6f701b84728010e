//! Plane waves on the flat and their wall-matched Weyl sums.
//!
//! Frequencies live in the same plane as the flat points `z`, paired by the
//! Euclidean dot product, so the Weyl group acts on them exactly as on `z`.
//! Each simple wall `alpha . z = 0` pairs the terms `sigma` and
//! `s_alpha sigma`; their ratio is the two-body reflection coefficient at the
//! transverse frequency `nu = alpha . (sigma xi) / |alpha|^2`.

use num_complex::Complex64;
use serde::Serialize;

use super::twobody::two_body_coeff;
use crate::error::{invalid, Error, Result};
use crate::flat::grid::ChamberGrid;
use crate::flat::operator::rho_product;
use crate::flat::spectral::{sqrt_branch, SPECTRUM_BOTTOM};
use crate::geometry::{fold_to_chamber, w_to_z, z_to_w, WeylElement, SQRT_3};

type C = Complex64;

/// A complex frequency, as `[xi_x, xi_y]` against `z = [x, y]`.
pub type Frequency = [C; 2];

/// Simple roots as covectors on `z`: `w_2 - w_1` and `w_3 - w_2`.
pub const SIMPLE_ROOTS: [[f64; 2]; 2] = [[0.0, 1.0 / SQRT_3], [0.5, -0.5 / SQRT_3]];

/// `|alpha|^2` for every root.
pub const ROOT_NORM_SQ: f64 = 1.0 / 3.0;

/// How far inside the chamber `Im xi` must sit, measured by `alpha . Im xi`.
pub const WALL_MARGIN: f64 = 1e-6;

pub fn dot(xi: Frequency, z: [f64; 2]) -> C {
    xi[0] * z[0] + xi[1] * z[1]
}

pub fn dot_c(a: Frequency, b: Frequency) -> C {
    a[0] * b[0] + a[1] * b[1]
}

/// The reflection `s_alpha` of a simple root, as a permutation.
pub fn simple_reflection(wall: usize) -> WeylElement {
    WeylElement::transposition(wall, wall + 1)
}

pub fn act_frequency(s: &WeylElement, xi: Frequency) -> Frequency {
    let re = s.act_z([xi[0].re, xi[1].re]);
    let im = s.act_z([xi[0].im, xi[1].im]);
    [C::new(re[0], im[0]), C::new(re[1], im[1])]
}

/// Representative of `z` in the closed positive chamber.
pub fn fold_z(z: [f64; 2]) -> [f64; 2] {
    w_to_z(fold_to_chamber(z_to_w(z)).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralVector {
    pub xi: Frequency,
    pub lambda: C,
}

impl SpectralVector {
    pub fn new(xi: Frequency) -> Result<Self> {
        if xi.iter().any(|x| !(x.re.is_finite() && x.im.is_finite())) {
            return invalid("non-finite frequency");
        }
        let im = [xi[0].im, xi[1].im];
        for (m, a) in SIMPLE_ROOTS.iter().enumerate() {
            let t = a[0] * im[0] + a[1] * im[1];
            if !(t > WALL_MARGIN) {
                return invalid(format!(
                    "Im xi = {im:?} is not inside the positive chamber (wall {m}: {t:.3e})"
                ));
            }
        }
        Ok(Self {
            xi,
            lambda: SPECTRUM_BOTTOM + dot_c(xi, xi),
        })
    }

    /// `xi = k (cos t, sin t)`; `Im k` must be positive for `Im xi` to point
    /// into the chamber.
    pub fn along(k: C, angle: f64) -> Result<Self> {
        Self::new([k * angle.cos(), k * angle.sin()])
    }

    pub fn im_part(&self) -> [f64; 2] {
        [self.xi[0].im, self.xi[1].im]
    }

    /// `-Im sqrt(lambda - 1/3)`.
    pub fn kappa(&self) -> f64 {
        -sqrt_branch(self.lambda - SPECTRUM_BOTTOM).im
    }
}

/// `rho_sharp rho^sharp e^{-i xi . z}`.
pub fn plane_wave(xi: Frequency, z: [f64; 2]) -> C {
    rho_product(z) * (-C::i() * dot(xi, z)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylSum {
    pub xi: SpectralVector,
    /// In the order of [`WeylElement::all`]; the identity comes first.
    #[serde(skip)]
    pub elements: [WeylElement; 6],
    pub coeffs: [C; 6],
    pub frequencies: [Frequency; 6],
    /// Relative disagreement of the two galleries to the longest element.
    pub gallery_residual: f64,
}

/// Gallery tolerance before the coefficients are rejected.
pub const GALLERY_TOL: f64 = 1e-6;

/// Coefficients this small are zeros of the reflection hit up to rounding.
const VANISHED: f64 = 1e-13;

fn slot(s: &WeylElement) -> usize {
    WeylElement::all()
        .iter()
        .position(|e| e == s)
        .expect("every permutation is listed")
}

/// Coefficients of the wall-matched Weyl sum, normalised by `c_1 = 1`.
pub fn weyl_sum_coeffs(xi: &SpectralVector) -> Result<WeylSum> {
    let elements = WeylElement::all();
    let frequencies = elements.map(|s| act_frequency(&s, xi.xi));
    let mut coeffs: [Option<C>; 6] = [None; 6];
    coeffs[0] = Some(C::new(1.0, 0.0));
    // Reduced words for the two galleries to the longest element.
    let routes = [[0usize, 1, 0], [1, 0, 1]];
    let mut ends = [C::new(0.0, 0.0); 2];
    for (r, word) in routes.iter().enumerate() {
        let mut sigma = WeylElement::IDENTITY;
        let mut c = C::new(1.0, 0.0);
        for &wall in word {
            let a = SIMPLE_ROOTS[wall];
            let f = act_frequency(&sigma, xi.xi);
            let nu = (f[0] * a[0] + f[1] * a[1]) / ROOT_NORM_SQ;
            // A vanished coefficient stays zero; the later frequency may sit
            // on a resonance of the characteristic series.
            if c.norm() > VANISHED {
                c *= two_body_coeff(nu)?.value;
                if c.norm() <= VANISHED {
                    c = C::new(0.0, 0.0);
                }
            }
            sigma = simple_reflection(wall).compose(&sigma);
            let k = slot(&sigma);
            if coeffs[k].is_none() || k == 5 {
                coeffs[k] = Some(c);
            }
        }
        ends[r] = c;
    }
    let gallery_residual =
        (ends[0] - ends[1]).norm() / ends[0].norm().max(ends[1].norm()).max(f64::MIN_POSITIVE);
    if !(gallery_residual < GALLERY_TOL) {
        return Err(Error::Fit(format!(
            "gallery routes disagree by {gallery_residual:.2e}"
        )));
    }
    coeffs[5] = Some((ends[0] + ends[1]) * 0.5);
    Ok(WeylSum {
        xi: *xi,
        elements,
        coeffs: coeffs.map(|c| c.expect("both galleries visit every element")),
        frequencies,
        gallery_residual,
    })
}

impl WeylSum {
    /// The six terms `rho_sharp rho^sharp c_sigma e^{-i (sigma xi) . z}` at
    /// the folded point.
    pub fn terms(&self, z: [f64; 2]) -> [C; 6] {
        let zf = fold_z(z);
        let rho = rho_product(zf);
        let mut out = [C::new(0.0, 0.0); 6];
        for m in 0..6 {
            out[m] = self.coeffs[m] * rho * (-C::i() * dot(self.frequencies[m], zf)).exp();
        }
        out
    }
}

/// `U(z) = rho_sharp rho^sharp sum_sigma c_sigma e^{-i (sigma xi) . z}`,
/// extended from the positive chamber by Weyl invariance.
pub fn spherical_eval(sum: &WeylSum, z: [f64; 2]) -> C {
    sum.terms(z).iter().sum()
}

pub fn spherical_on_grid(sum: &WeylSum, grid: &ChamberGrid) -> Vec<C> {
    grid.sample(|z| spherical_eval(sum, z))
}
