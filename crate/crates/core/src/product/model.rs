//! The product operator `L0 = 1/4 (s D_s)^2 + Delta_{H^2}/3 + 1/4` on
//! rotationally invariant functions, discretised on a tensor grid.
//!
//! Coordinates are metric ones: `a = 2 log s` and `b = sqrt(3) d` with `d`
//! the hyperbolic distance to the base point, so that `(a, b)` is the flat
//! picture of the product metric and `|(a, b)|` is the product distance. In
//! them `L0 = A + B + 1/4` with `A = -d^2/da^2` and
//! `B = -(1/sinh(b/sqrt 3)) d/db sinh(b/sqrt 3) d/db`, whose spectra start at
//! `0` and `1/12`.
//!
//! `A` uses the three-point stencil with Dirichlet ends; `B` is a finite-volume
//! scheme on cells `[j h, (j+1) h]` with the exact `sinh` weights, no flux
//! through the origin and Dirichlet data at `b_max`. Both factors are
//! tridiagonal, so the contour representation of `(L0 - lambda)^{-1}` costs
//! two sweeps of tridiagonal solves per quadrature node.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::kernels::H2_FACTOR_BOTTOM;
use crate::error::{invalid, Error, Result};
use crate::flat::spectral::{SpectralParam, SPECTRUM_BOTTOM};
use crate::geometry::SQRT_3;
use crate::sparse::{solve_tridiagonal, SparseLu};

type C = Complex64;

/// The constant term of `L0`.
pub const L0_SHIFT: f64 = 0.25;

#[derive(Debug, Clone, Serialize)]
pub struct ProductGrid {
    /// Interior nodes in `a`; the ends `+-a_max` carry Dirichlet data.
    pub a: Vec<f64>,
    /// Cell centres in `b`.
    pub b: Vec<f64>,
    pub h_a: f64,
    pub h_b: f64,
    pub a_max: f64,
    pub b_max: f64,
    pub b_layout: BLayout,
}

/// Placement of the `b` unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BLayout {
    /// Unknowns at the centres of the cells `[j h, (j+1) h]`.
    CellCentred,
    /// Unknowns at `j h`, `j = 0..nb`, each owning `[(j-1/2) h, (j+1/2) h]`
    /// clipped at the origin. The first one sits on the axis `b = 0`.
    VertexCentred,
}

/// One factor as a tridiagonal matrix `lower, diag, upper`.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[C]) -> Vec<C> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = x[i] * self.diag[i];
                if i > 0 {
                    v += x[i - 1] * self.lower[i];
                }
                if i + 1 < n {
                    v += x[i + 1] * self.upper[i];
                }
                v
            })
            .collect()
    }

    /// `(T - z)^{-1} r`.
    pub fn shifted_solve(&self, z: C, r: &[C]) -> Vec<C> {
        let lo: Vec<C> = self.lower.iter().map(|&v| C::new(v, 0.0)).collect();
        let up: Vec<C> = self.upper.iter().map(|&v| C::new(v, 0.0)).collect();
        let d: Vec<C> = self.diag.iter().map(|&v| v - z).collect();
        solve_tridiagonal(&lo, &d, &up, r)
    }

    /// Gershgorin bound on the spectrum.
    pub fn spectral_bound(&self) -> f64 {
        (0..self.len())
            .map(|i| self.diag[i] + self.lower[i].abs() + self.upper[i].abs())
            .fold(0.0, f64::max)
    }
}

impl ProductGrid {
    /// `na` interior nodes on `(-a_max, a_max)` and `nb` cells on `(0, b_max)`.
    pub fn new(a_max: f64, b_max: f64, na: usize, nb: usize) -> Result<Self> {
        if !(a_max > 0.0 && b_max > 0.0 && a_max.is_finite() && b_max.is_finite())
            || na < 3
            || nb < 3
        {
            return invalid(
                "product grid needs positive extents and at least three points per axis",
            );
        }
        let h_a = 2.0 * a_max / (na + 1) as f64;
        let h_b = b_max / nb as f64;
        Ok(Self {
            a: (0..na).map(|i| -a_max + (i + 1) as f64 * h_a).collect(),
            b: (0..nb).map(|j| (j as f64 + 0.5) * h_b).collect(),
            h_a,
            h_b,
            a_max,
            b_max,
            b_layout: BLayout::CellCentred,
        })
    }

    /// As [`ProductGrid::new`] but with vertex-centred `b` unknowns; the
    /// Dirichlet value sits at `b_max = nb h_b`.
    pub fn vertex_centred(a_max: f64, b_max: f64, na: usize, nb: usize) -> Result<Self> {
        let mut g = Self::new(a_max, b_max, na, nb)?;
        g.b = (0..nb).map(|j| j as f64 * g.h_b).collect();
        g.b_layout = BLayout::VertexCentred;
        Ok(g)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.a.len(), self.b.len())
    }

    pub fn len(&self) -> usize {
        self.a.len() * self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.b.len() + j
    }

    pub fn point(&self, k: usize) -> (f64, f64) {
        let nb = self.b.len();
        (self.a[k / nb], self.b[k % nb])
    }

    pub fn sample<T>(&self, f: impl Fn(f64, f64) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for &a in &self.a {
            for &b in &self.b {
                out.push(f(a, b));
            }
        }
        out
    }

    /// `int sinh(b / sqrt 3) db` over each cell: the `b` part of the measure.
    pub fn cell_volumes(&self) -> Vec<f64> {
        let h = self.h_b;
        let (off_lo, off_hi) = match self.b_layout {
            BLayout::CellCentred => (0.0, 1.0),
            BLayout::VertexCentred => (-0.5, 0.5),
        };
        (0..self.b.len())
            .map(|j| {
                let lo = ((j as f64 + off_lo) * h).max(0.0) / SQRT_3;
                let hi = (j as f64 + off_hi) * h / SQRT_3;
                // cosh(hi) - cosh(lo) without cancellation.
                2.0 * SQRT_3 * ((hi + lo) / 2.0).sinh() * ((hi - lo) / 2.0).sinh()
            })
            .collect()
    }

    /// Quadrature weights of the product measure at each node.
    pub fn weights(&self) -> Vec<f64> {
        let v = self.cell_volumes();
        let mut out = Vec::with_capacity(self.len());
        for _ in &self.a {
            out.extend(v.iter().map(|x| x * self.h_a));
        }
        out
    }

    /// `A = -d^2/da^2`.
    pub fn line_factor(&self) -> Tridiagonal {
        let n = self.a.len();
        let c = 1.0 / (self.h_a * self.h_a);
        Tridiagonal {
            lower: vec![-c; n],
            diag: vec![2.0 * c; n],
            upper: vec![-c; n],
        }
    }

    /// One third of the radial hyperbolic Laplacian in `b`.
    pub fn hyperbolic_factor(&self) -> Tridiagonal {
        let n = self.b.len();
        let h = self.h_b;
        let v = self.cell_volumes();
        // Face below unknown j, divided by the distance to the unknown below.
        let (face, last) = match self.b_layout {
            BLayout::CellCentred => (0.0, 2.0),
            BLayout::VertexCentred => (-0.5, 1.0),
        };
        let face = |j: usize| {
            if j == 0 {
                0.0
            } else {
                ((j as f64 + face) * h / SQRT_3).sinh() / h
            }
        };
        let mut t = Tridiagonal {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        };
        for j in 0..n {
            let below = face(j);
            // The last outer face sees the Dirichlet value; for cell centres it
            // is half a cell away.
            let above = if j + 1 < n {
                face(j + 1)
            } else {
                last * face(n)
            };
            t.diag[j] = (below + above) / v[j];
            if j > 0 {
                t.lower[j] = -below / v[j];
            }
            if j + 1 < n {
                t.upper[j] = -above / v[j];
            }
        }
        t
    }

    /// Apply `L0` (interior stencil; Dirichlet data zero outside).
    pub fn apply_l0(&self, u: &[C]) -> Vec<C> {
        let (na, nb) = self.shape();
        let ta = self.line_factor();
        let tb = self.hyperbolic_factor();
        let mut out: Vec<C> = u.iter().map(|x| x * L0_SHIFT).collect();
        for i in 0..na {
            let row = tb.apply(&u[i * nb..(i + 1) * nb]);
            for j in 0..nb {
                out[i * nb + j] += row[j];
            }
        }
        for j in 0..nb {
            let col: Vec<C> = (0..na).map(|i| u[i * nb + j]).collect();
            let r = ta.apply(&col);
            for i in 0..na {
                out[i * nb + j] += r[i];
            }
        }
        out
    }

    /// Product-measure `L^2` norm.
    pub fn norm(&self, u: &[C]) -> f64 {
        self.weights()
            .iter()
            .zip(u)
            .map(|(w, x)| w * x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Apply `(A - sigma)^{-1} (B - zeta)^{-1}` to a grid function.
fn factor_resolvents(
    grid: &ProductGrid,
    ta: &Tridiagonal,
    tb: &Tridiagonal,
    sigma: C,
    zeta: C,
    f: &[C],
) -> Vec<C> {
    let (na, nb) = grid.shape();
    let mut tmp = vec![C::new(0.0, 0.0); f.len()];
    for i in 0..na {
        let x = tb.shifted_solve(zeta, &f[i * nb..(i + 1) * nb]);
        tmp[i * nb..(i + 1) * nb].copy_from_slice(&x);
    }
    for j in 0..nb {
        let col: Vec<C> = (0..na).map(|i| tmp[i * nb + j]).collect();
        let x = ta.shifted_solve(sigma, &col);
        for i in 0..na {
            tmp[i * nb + j] = x[i];
        }
    }
    tmp
}

/// Quadrature on the contour `sigma = (sinh(tau) + i eps)^2`, which wraps the
/// spectrum `[0, inf)` of the line factor and leaves `lambda - 1/4 - sigma`
/// off the spectrum of the hyperbolic factor when `0 < eps < kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourRule {
    pub eps: f64,
    pub tau_max: f64,
    pub step: f64,
}

impl ContourRule {
    /// A rule resolving the discrete spectrum of `grid` to about 1e-12.
    pub fn for_grid(grid: &ProductGrid, param: &SpectralParam) -> Result<Self> {
        let kappa = model_kappa(param)?;
        let eps = 0.5 * kappa;
        let top = grid.line_factor().spectral_bound();
        // Poles of the line factor sit at distance ~ eps / sqrt(1 + top) from
        // the real tau axis; the hyperbolic ones at distance >= kappa - eps.
        let dist = (eps / (1.0 + top).sqrt()).min(kappa - eps);
        let step = (0.2 * dist).min(0.05);
        let tau_max = (2.0 * top.sqrt() + 1.0).asinh() + 14.0;
        Ok(Self { eps, tau_max, step })
    }

    pub fn nodes(&self) -> usize {
        2 * (self.tau_max / self.step).ceil() as usize + 1
    }

    /// The same rule with the step halved, for convergence checks.
    pub fn refined(&self) -> Self {
        Self {
            step: self.step / 2.0,
            ..*self
        }
    }
}

/// `kappa` relative to the bottom `1/3` of `L0`.
fn model_kappa(param: &SpectralParam) -> Result<f64> {
    let p = SpectralParam::new(param.lambda)?;
    Ok(p.kappa())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProductMethod {
    /// Contour composition of the factor resolvents.
    Contour,
    /// Sparse LU of the assembled two-dimensional operator.
    Direct,
    /// Exact eigen-expansion of the line factor in the discrete sine basis,
    /// leaving one tridiagonal solve in `b` per mode.
    Spectral,
}

/// `(L0 - lambda)^{-1} f` on the grid.
pub fn product_resolvent(
    grid: &ProductGrid,
    param: &SpectralParam,
    f: &[C],
    method: ProductMethod,
) -> Result<Vec<C>> {
    if f.len() != grid.len() {
        return invalid(format!(
            "grid function has {} values for {} nodes",
            f.len(),
            grid.len()
        ));
    }
    match method {
        ProductMethod::Contour => {
            contour_resolvent(grid, param, f, ContourRule::for_grid(grid, param)?)
        }
        ProductMethod::Direct => direct_resolvent(grid, param, f),
        ProductMethod::Spectral => spectral_resolvent(grid, param, f),
    }
}

/// Separation of variables through the eigenvectors
/// `sqrt(2/(n+1)) sin(pi m i/(n+1))` of the Dirichlet line factor.
pub fn spectral_resolvent(grid: &ProductGrid, param: &SpectralParam, f: &[C]) -> Result<Vec<C>> {
    model_kappa(param)?;
    let (na, nb) = grid.shape();
    let n1 = (na + 1) as f64;
    let norm = (2.0 / n1).sqrt();
    let basis = Mat::<f64>::from_fn(na, na, |m, i| {
        norm * (PI * ((m + 1) * (i + 1)) as f64 / n1).sin()
    });
    let part = |g: &dyn Fn(&C) -> f64| Mat::<f64>::from_fn(na, nb, |i, j| g(&f[i * nb + j]));
    let (fr, fi) = (&basis * part(&|x| x.re), &basis * part(&|x| x.im));
    let tb = grid.hyperbolic_factor();
    let mu = param.lambda - L0_SHIFT;
    let modes: Vec<Vec<C>> = (0..na)
        .into_par_iter()
        .map(|m| {
            let s = (PI * (m + 1) as f64 / (2.0 * n1)).sin();
            let eig = 4.0 * s * s / (grid.h_a * grid.h_a);
            let row: Vec<C> = (0..nb).map(|j| C::new(fr[(m, j)], fi[(m, j)])).collect();
            tb.shifted_solve(mu - eig, &row)
        })
        .collect();
    let vr = Mat::<f64>::from_fn(na, nb, |m, j| modes[m][j].re);
    let vi = Mat::<f64>::from_fn(na, nb, |m, j| modes[m][j].im);
    let (ur, ui) = (&basis * vr, &basis * vi);
    let u: Vec<C> = (0..na * nb)
        .map(|k| C::new(ur[(k / nb, k % nb)], ui[(k / nb, k % nb)]))
        .collect();
    if u.iter().any(|x| !(x.re.is_finite() && x.im.is_finite())) {
        return Err(Error::Solver(
            "spectral solve produced non-finite values".into(),
        ));
    }
    Ok(u)
}

/// Contour composition
/// `(L0 - lambda)^{-1} = (1/2 pi i) int (A - sigma)^{-1} (B - (lambda - 1/4 - sigma))^{-1} dsigma`
/// along the contour of `rule`, traversed with `Re tau` increasing.
pub fn contour_resolvent(
    grid: &ProductGrid,
    param: &SpectralParam,
    f: &[C],
    rule: ContourRule,
) -> Result<Vec<C>> {
    let kappa = model_kappa(param)?;
    if !(rule.eps > 0.0 && rule.eps < kappa && rule.step > 0.0 && rule.tau_max > 0.0) {
        return invalid(format!(
            "contour needs 0 < eps < kappa = {kappa}, got eps = {}",
            rule.eps
        ));
    }
    let ta = grid.line_factor();
    let tb = grid.hyperbolic_factor();
    let mu = param.lambda - L0_SHIFT;
    let m = (rule.tau_max / rule.step).ceil() as i64;
    let zero = vec![C::new(0.0, 0.0); f.len()];
    let sum = (-m..=m)
        .into_par_iter()
        .map(|n| {
            let tau = n as f64 * rule.step;
            let k = C::new(tau.sinh(), rule.eps);
            let sigma = k * k;
            let dsigma = 2.0 * k * tau.cosh();
            let u = factor_resolvents(grid, &ta, &tb, sigma, mu - sigma, f);
            let w = dsigma * rule.step / (2.0 * PI * C::i());
            u.into_iter().map(|x| x * w).collect::<Vec<C>>()
        })
        .reduce(
            || zero.clone(),
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    if sum.iter().any(|x| !(x.re.is_finite() && x.im.is_finite())) {
        return Err(Error::Solver(
            "contour quadrature produced non-finite values".into(),
        ));
    }
    Ok(sum)
}

/// Triplets of `L0` on the grid; `shift` is added to the diagonal.
fn l0_triplets(grid: &ProductGrid, shift: f64) -> Vec<(usize, usize, f64)> {
    let (na, nb) = grid.shape();
    let ta = grid.line_factor();
    let tb = grid.hyperbolic_factor();
    let mut t = Vec::with_capacity(5 * grid.len());
    for i in 0..na {
        for j in 0..nb {
            let k = grid.index(i, j);
            t.push((k, k, ta.diag[i] + tb.diag[j] + L0_SHIFT + shift));
            if i > 0 {
                t.push((k, grid.index(i - 1, j), ta.lower[i]));
            }
            if i + 1 < na {
                t.push((k, grid.index(i + 1, j), ta.upper[i]));
            }
            if j > 0 {
                t.push((k, grid.index(i, j - 1), tb.lower[j]));
            }
            if j + 1 < nb {
                t.push((k, grid.index(i, j + 1), tb.upper[j]));
            }
        }
    }
    t
}

/// Direct sparse solve of `(L0 - lambda) u = f`.
pub fn direct_resolvent(grid: &ProductGrid, param: &SpectralParam, f: &[C]) -> Result<Vec<C>> {
    model_kappa(param)?;
    let t: Vec<(usize, usize, C)> = l0_triplets(grid, 0.0)
        .into_iter()
        .map(|(i, j, v)| (i, j, C::new(v, 0.0)))
        .collect();
    let mut t = t;
    for k in 0..grid.len() {
        t.push((k, k, -param.lambda));
    }
    let lu = SparseLu::factor(grid.len(), &t)?;
    let u = lu.solve(f);
    if u.iter().any(|x| !(x.re.is_finite() && x.im.is_finite())) {
        return Err(Error::Solver(
            "direct solve produced non-finite values".into(),
        ));
    }
    Ok(u)
}

/// Relative `L^2` distance `|u - v| / |v|` in the product measure.
pub fn relative_l2(grid: &ProductGrid, u: &[C], v: &[C]) -> f64 {
    let d: Vec<C> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    grid.norm(&d) / grid.norm(v).max(f64::MIN_POSITIVE)
}

/// Bottom of the spectrum of the discretised `L0` and its split over the
/// factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelBottom {
    /// Rayleigh quotient of the converged ground state of the full operator.
    pub rayleigh: f64,
    /// Lowest eigenvalue of the line factor.
    pub line_part: f64,
    /// Lowest eigenvalue of the hyperbolic factor.
    pub hyperbolic_part: f64,
    pub shift: f64,
    pub iterations: usize,
}

/// Inverse iteration on a symmetric operator given by its LU and its
/// weights; returns `(rayleigh quotient, iterations)`.
fn inverse_iteration(
    solve: impl Fn(&[f64]) -> Vec<f64>,
    apply: impl Fn(&[f64]) -> Vec<f64>,
    weights: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(f64, usize)> {
    let n = weights.len();
    let inner = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .zip(weights)
            .map(|((a, b), w)| a * b * w)
            .sum::<f64>()
    };
    let mut x = vec![1.0; n];
    let mut q_old = f64::INFINITY;
    for it in 1..=max_iter {
        let y = solve(&x);
        let nrm = inner(&y, &y).sqrt();
        x = y.iter().map(|v| v / nrm).collect();
        let q = inner(&x, &apply(&x));
        if (q - q_old).abs() < tol {
            return Ok((q, it));
        }
        q_old = q;
    }
    Err(Error::NoContraction(q_old))
}

/// Lowest eigenvalue of the discretised `L0` by inverse iteration.
pub fn model_bottom(grid: &ProductGrid, tol: f64, max_iter: usize) -> Result<ModelBottom> {
    let w = grid.weights();
    let shift = SPECTRUM_BOTTOM - 0.05;
    let lu = SparseLu::factor(grid.len(), &l0_triplets(grid, -shift))?;
    let apply = |x: &[f64]| -> Vec<f64> {
        let u: Vec<C> = x.iter().map(|&v| C::new(v, 0.0)).collect();
        grid.apply_l0(&u).iter().map(|c| c.re).collect()
    };
    let (rayleigh, iterations) = inverse_iteration(|x| lu.solve(x), apply, &w, tol, max_iter)?;
    let factor_bottom = |t: &Tridiagonal, weights: &[f64], guess: f64| -> Result<f64> {
        let lo: Vec<f64> = t.lower.clone();
        let up: Vec<f64> = t.upper.clone();
        let d: Vec<f64> = t.diag.iter().map(|v| v - guess).collect();
        let apply = |x: &[f64]| {
            let c: Vec<C> = x.iter().map(|&v| C::new(v, 0.0)).collect();
            t.apply(&c).iter().map(|c| c.re).collect::<Vec<f64>>()
        };
        Ok(inverse_iteration(
            |x| solve_tridiagonal(&lo, &d, &up, x),
            apply,
            weights,
            tol,
            max_iter,
        )?
        .0)
    };
    let line_part = factor_bottom(&grid.line_factor(), &vec![grid.h_a; grid.a.len()], -0.05)?;
    let hyperbolic_part = factor_bottom(
        &grid.hyperbolic_factor(),
        &grid.cell_volumes(),
        H2_FACTOR_BOTTOM - 0.05,
    )?;
    Ok(ModelBottom {
        rayleigh,
        line_part,
        hyperbolic_part,
        shift: L0_SHIFT,
        iterations,
    })
}

/// Conjugation between `L0` and `L_sharp = s L0 s^{-1}`: multiply by
/// `s = e^{a/2}` (`forward`) or by `s^{-1}`.
pub fn conjugate_to_lsharp(grid: &ProductGrid, u: &[C], forward: bool) -> Vec<C> {
    let sign = if forward { 0.5 } else { -0.5 };
    let nb = grid.b.len();
    u.iter()
        .enumerate()
        .map(|(k, x)| x * (sign * grid.a[k / nb]).exp())
        .collect()
}

/// `L_sharp u = s L0 (s^{-1} u)` on the grid.
pub fn apply_lsharp(grid: &ProductGrid, u: &[C]) -> Vec<C> {
    conjugate_to_lsharp(
        grid,
        &grid.apply_l0(&conjugate_to_lsharp(grid, u, false)),
        true,
    )
}

/// `(L_sharp - lambda)^{-1} f = s (L0 - lambda)^{-1} (s^{-1} f)`.
pub fn lsharp_resolvent(
    grid: &ProductGrid,
    param: &SpectralParam,
    f: &[C],
    method: ProductMethod,
) -> Result<Vec<C>> {
    let g = conjugate_to_lsharp(grid, f, false);
    Ok(conjugate_to_lsharp(
        grid,
        &product_resolvent(grid, param, &g, method)?,
        true,
    ))
}

/// Leading-order profile `mu^{1/2} x_2 x^{1/2} exp(-i k / x)` with smoothed
/// distances: `mu^{1/2} = e^{-b / (2 sqrt 3)}`, `x = 1/smoothed(|(a, b)|)`,
/// `x_2 = smoothed(b) x`.
pub fn leading_profile(a: f64, b: f64, param: &SpectralParam) -> C {
    use super::distance::smoothed;
    let r = smoothed(a.hypot(b));
    let x2 = smoothed(b) / r;
    (-C::i() * param.k * r).exp() * ((-b / (2.0 * SQRT_3)).exp() * x2 / r.sqrt())
}
