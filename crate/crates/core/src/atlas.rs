//! Boundary-defining functions, the logarithmic blow-up of the corner, chart
//! transitions near the boundary and the fibration over the projective plane.

use nalgebra::{Matrix2, Vector3};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{eigen_coords, Gram5, Mat3, PointM, SQRT_3};
use crate::product::distance::{smoothed, ProductPoint};

/// Boundary-defining functions of a point with ascending eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BdfSet {
    pub mu: f64,
    pub nu: f64,
    pub s: f64,
    /// Inverse distance to the basepoint (`inf` at the basepoint).
    pub x: f64,
    pub x1: f64,
    pub x2: f64,
}

const ORDER_TOL: f64 = 1e-12;

pub fn bdf_from_eigen(lambda: [f64; 3]) -> Result<BdfSet> {
    if lambda.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return invalid("eigenvalues must be positive and finite");
    }
    if lambda[0] > lambda[1] * (1.0 + ORDER_TOL) || lambda[1] > lambda[2] * (1.0 + ORDER_TOL) {
        return invalid(format!("eigenvalues {lambda:?} are not in ascending order"));
    }
    let logdet: f64 = lambda.iter().map(|l| l.ln()).sum();
    if logdet.abs() > 1e-10 {
        return invalid(format!("eigenvalue product is {} not 1", logdet.exp()));
    }
    let mu = lambda[0] / lambda[1];
    let nu = lambda[1] / lambda[2];
    let s = lambda[2].powf(-1.5);
    let dist = (6.0 * lambda.iter().map(|l| l.ln().powi(2)).sum::<f64>()).sqrt();
    let (x, x1, x2) = if dist == 0.0 {
        (f64::INFINITY, 0.0, 0.0)
    } else {
        let x = 1.0 / dist;
        (x, 2.0 * s.ln().abs() * x, SQRT_3 * mu.ln().abs() * x)
    };
    Ok(BdfSet {
        mu,
        nu,
        s,
        x,
        x1,
        x2,
    })
}

pub fn bdf_of_point(v: &PointM) -> Result<BdfSet> {
    bdf_from_eigen(eigen_coords(v).lambda)
}

/// Polar coordinates `(r, alpha)` of the logarithmic blow-up at the corner.
pub fn log_blowup(mu: f64, nu: f64) -> Result<(f64, f64)> {
    if !(mu > 0.0 && mu < 1.0 && nu > 0.0 && nu < 1.0) {
        return invalid(format!(
            "log blow-up needs 0 < mu, nu < 1, got mu = {mu}, nu = {nu}"
        ));
    }
    let mb = -1.0 / mu.ln();
    let nb = -1.0 / nu.ln();
    let r = 0.5 * mb + nb;
    Ok((r, (0.5 * mb - nb) / r))
}

pub fn log_blowup_inverse(r: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && alpha.abs() < 1.0) {
        return invalid(format!(
            "need r > 0 and |alpha| < 1, got r = {r}, alpha = {alpha}"
        ));
    }
    let mb = r * (1.0 + alpha);
    let nb = 0.5 * r * (1.0 - alpha);
    Ok(((-1.0 / mb).exp(), (-1.0 / nb).exp()))
}

/// Transition from the corner blow-up `(r, alpha)` to the blow-up in the
/// face-adapted corner coordinates `(t, s̄) = (mu, mu^{1/2} nu)`.
pub fn ralpha_transition(r: f64, alpha: f64) -> (f64, f64) {
    (
        0.5 * r * (1.0 + alpha) * (3.0 - alpha),
        (1.0 + alpha) / (3.0 - alpha),
    )
}

/// The transition actually realised by `tau = -1/log t`, `sigma = -1/log s̄`
/// with `(t, s̄) = (mu, mu^{1/2} nu)`. Composing gives
/// `sigma = mu_bar nu_bar / (mu_bar + nu_bar/2)`, which differs from the
/// denominator `mu_bar/2 + nu_bar` behind [`ralpha_transition`]; both maps
/// are rational with denominators bounded away from zero on `[-1, 1]`.
pub fn ralpha_transition_composite(r: f64, alpha: f64) -> (f64, f64) {
    (
        r * (1.0 + alpha) * (7.0 + alpha) / (5.0 + 3.0 * alpha),
        (3.0 + 5.0 * alpha) / (7.0 + alpha),
    )
}

/// `(r', alpha')` of the face-adapted blow-up computed directly from `(mu, nu)`.
pub fn face_blowup(mu: f64, nu: f64) -> Result<(f64, f64)> {
    if !(mu > 0.0 && mu < 1.0 && nu > 0.0 && nu < 1.0) {
        return invalid(format!(
            "face blow-up needs 0 < mu, nu < 1, got mu = {mu}, nu = {nu}"
        ));
    }
    let (t, sb) = corner_face_transition(mu, nu);
    let tau = -1.0 / t.ln();
    let sigma = -1.0 / sb.ln();
    Ok((tau + sigma, (tau - sigma) / (tau + sigma)))
}

/// `(mu, nu) -> (t, s̄) = (mu, mu^{1/2} nu)`.
pub fn corner_face_transition(mu: f64, nu: f64) -> (f64, f64) {
    (mu, mu.sqrt() * nu)
}

pub fn face_corner_transition(t: f64, sb: f64) -> (f64, f64) {
    (t, sb / t.sqrt())
}

/// Maps whose regularity at the boundary is probed by difference quotients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransitionMap {
    RAlpha,
    RAlphaComposite,
    CornerToFace,
    /// The naive identification of `nu` with `s' = l_3^{-1}` at fixed `mu`,
    /// which is not smooth at `nu = 0`.
    NaiveNuToS,
    Linear([[f64; 2]; 2]),
}

impl TransitionMap {
    pub fn eval(&self, p: [f64; 2]) -> [f64; 2] {
        match *self {
            TransitionMap::RAlpha => {
                let (a, b) = ralpha_transition(p[0], p[1]);
                [a, b]
            }
            TransitionMap::RAlphaComposite => {
                let (a, b) = ralpha_transition_composite(p[0], p[1]);
                [a, b]
            }
            TransitionMap::CornerToFace => {
                let (a, b) = corner_face_transition(p[0], p[1]);
                [a, b]
            }
            TransitionMap::NaiveNuToS => [p[0], p[0].cbrt() * p[1].powf(2.0 / 3.0)],
            TransitionMap::Linear(m) => [
                m[0][0] * p[0] + m[0][1] * p[1],
                m[1][0] * p[0] + m[1][1] * p[1],
            ],
        }
    }

    fn domain_ok(&self, p: [f64; 2]) -> bool {
        match self {
            TransitionMap::RAlpha | TransitionMap::RAlphaComposite => {
                p[0] > 0.0 && p[1].abs() < 1.0
            }
            TransitionMap::CornerToFace | TransitionMap::NaiveNuToS => p[0] > 0.0 && p[1] > 0.0,
            TransitionMap::Linear(_) => true,
        }
    }
}

/// A path approaching the boundary: coordinate `axis` takes the values in
/// `scales` while the other coordinate stays at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproachPath {
    pub base: [f64; 2],
    pub axis: usize,
    pub scales: Vec<f64>,
}

impl ApproachPath {
    pub fn geometric(base: [f64; 2], axis: usize, start: f64, ratio: f64, levels: usize) -> Self {
        let scales = (0..levels).map(|k| start * ratio.powi(k as i32)).collect();
        Self { base, axis, scales }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub scale: f64,
    pub point: [f64; 2],
    /// Largest first difference quotient over all components and directions.
    pub first: f64,
    /// Largest second difference quotient.
    pub second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    /// Ratio of the finest to the coarsest first difference quotient.
    pub growth: f64,
}

impl ProbeReport {
    pub fn max_first(&self) -> f64 {
        self.rows.iter().map(|r| r.first).fold(0.0, f64::max)
    }
}

/// Difference quotients of a transition map at shrinking scales. The step at
/// scale `e` is `e/4`, so every stencil stays inside the domain.
pub fn smoothness_probe(map: TransitionMap, path: &ApproachPath) -> Result<ProbeReport> {
    if path.axis > 1 || path.scales.is_empty() {
        return invalid("probe path needs axis 0 or 1 and at least one scale");
    }
    let mut rows = Vec::with_capacity(path.scales.len());
    for &e in &path.scales {
        let mut p = path.base;
        p[path.axis] = e;
        let h = 0.25 * e.abs();
        if !(h > 0.0) {
            return invalid("probe scales must be nonzero");
        }
        let mut first: f64 = 0.0;
        let mut second: f64 = 0.0;
        for dir in 0..2 {
            let mut pp = p;
            let mut pm = p;
            pp[dir] += h;
            pm[dir] -= h;
            for q in [p, pp, pm] {
                if !map.domain_ok(q) {
                    return Err(Error::OutsideChart {
                        chart: "transition",
                        reason: format!("probe stencil point {q:?} leaves the domain"),
                    });
                }
            }
            let (f0, fp, fm) = (map.eval(p), map.eval(pp), map.eval(pm));
            for c in 0..2 {
                first = first.max(((fp[c] - fm[c]) / (2.0 * h)).abs());
                second = second.max(((fp[c] - 2.0 * f0[c] + fm[c]) / (h * h)).abs());
            }
        }
        rows.push(ProbeRow {
            scale: e,
            point: p,
            first,
            second,
        });
    }
    let growth = rows.last().unwrap().first / rows[0].first.max(f64::MIN_POSITIVE);
    Ok(ProbeReport { rows, growth })
}

/// Decomposition of a point over the projective plane: the base point is
/// the top eigenline, the fiber is a point of the hyperbolic plane.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberDecomposition {
    /// Unit vector spanning the top eigenline, sign fixed so the largest
    /// component is positive.
    pub base: Vector3<f64>,
    /// Orthonormal frame of the complementary plane.
    pub frame: [Vector3<f64>; 2],
    /// `l_3^{1/2}` times the restriction to the complementary plane.
    pub fiber: Matrix2<f64>,
    pub top_eigenvalue: f64,
}

const GAP_TOL: f64 = 1e-8;

pub fn fiber_decompose(v: &PointM) -> Result<FiberDecomposition> {
    let ec = eigen_coords(v);
    let [l1, l2, l3] = ec.lambda;
    let _ = l1;
    if l3 - l2 <= GAP_TOL * l3 {
        return Err(Error::Degenerate(format!(
            "top eigenvalue is not simple (l2 = {l2}, l3 = {l3}), the fibration is undefined"
        )));
    }
    let mut base: Vector3<f64> = ec.rotation.column(2).into();
    let imax = base.iamax();
    if base[imax] < 0.0 {
        base = -base;
    }
    // Gram-Schmidt of the standard basis vectors least aligned with the base.
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| base[a].abs().partial_cmp(&base[b].abs()).unwrap());
    let mut frame = Vec::with_capacity(2);
    for &k in order.iter().take(2) {
        let mut e = Vector3::zeros();
        e[k] = 1.0;
        e -= base * base.dot(&e);
        for f in &frame {
            let f: &Vector3<f64> = f;
            e -= f * f.dot(&e);
        }
        frame.push(e.normalize());
    }
    // Keep the original index order so a rotation about e_3 acts by conjugation.
    if order[0] > order[1] {
        frame.swap(0, 1);
    }
    let frame = [frame[0], frame[1]];
    let m = v.matrix();
    let mut fiber = Matrix2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            fiber[(i, j)] = l3.sqrt() * frame[i].dot(&(m * frame[j]));
        }
    }
    Ok(FiberDecomposition {
        base,
        frame,
        fiber,
        top_eigenvalue: l3,
    })
}

impl FiberDecomposition {
    pub fn reconstruct(&self) -> Mat3 {
        let mut out = self.base * self.base.transpose() * self.top_eigenvalue;
        let scale = self.top_eigenvalue.sqrt().recip();
        for i in 0..2 {
            for j in 0..2 {
                out += self.frame[i] * self.frame[j].transpose() * (scale * self.fiber[(i, j)]);
            }
        }
        out
    }

    /// Hyperbolic distance of the fiber point from the identity.
    pub fn fiber_distance(&self) -> f64 {
        let e = self.fiber.symmetric_eigenvalues();
        (e[0] / e[1]).ln().abs()
    }
}

/// Frame `mu d_mu, nu d_nu, mu d_c12, mu nu d_c13, nu d_c23` at a corner
/// chart point, written in the chart frame `(d log mu, d log nu, dc12, dc13, dc23)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EeFrame {
    pub vectors: Gram5,
    pub gram: Gram5,
    pub condition: f64,
}

pub fn ee_frame(mu: f64, nu: f64) -> Result<EeFrame> {
    use crate::geometry::{chart_metric, ChartId};
    let g = chart_metric(ChartId::MuNu, mu.ln(), nu.ln())?;
    let vectors = Gram5::from_diagonal(&[1.0, 1.0, mu, mu * nu, nu].into());
    let gram = vectors.transpose() * g * vectors;
    let e = gram.symmetric_eigenvalues();
    let (lo, hi) = e
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    Ok(EeFrame {
        vectors,
        gram,
        condition: hi / lo,
    })
}

/// A point of the corner chart: `(mu, nu, c12, c13, c23)`.
pub type CornerPoint = [f64; 5];

/// Projective coordinates on the double space near the diagonal corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubleSpaceCoords {
    pub s1: f64,
    pub s2: f64,
    pub c12: f64,
    pub c23: f64,
    pub c13: f64,
    /// Base coordinates `(mu', nu'/mu', c12', c13', c23')`.
    pub base: [f64; 5],
    /// Ratio of the hyperbolic to the line separation.
    pub ratio_s: f64,
    /// Inverse total separation (`inf` on the diagonal).
    pub inv_dist: f64,
}

impl DoubleSpaceCoords {
    fn as_array(&self) -> [f64; 10] {
        [
            self.s1,
            self.s2,
            self.c12,
            self.c23,
            self.c13,
            self.base[0],
            self.base[1],
            self.base[2],
            self.base[3],
            self.base[4],
        ]
    }
}

pub fn double_space_coords(z: CornerPoint, zp: CornerPoint) -> Result<DoubleSpaceCoords> {
    for p in [&z, &zp] {
        if !(p[0] > 0.0 && p[0] < 1.0 && p[1] > 0.0 && p[1] < 1.0) {
            return invalid(format!("corner point needs 0 < mu, nu < 1, got {p:?}"));
        }
    }
    let (mu, nu) = (z[0], z[1]);
    let (mup, nup) = (zp[0], zp[1]);
    let d1 = 2.0 * ((mu.sqrt() * nu).ln() - (mup.sqrt() * nup).ln()).abs();
    let d2 = SQRT_3 * (mu.ln() - mup.ln()).abs();
    let d = d1.hypot(d2);
    Ok(DoubleSpaceCoords {
        s1: nu / nup,
        s2: mu / mup,
        c12: (z[2] - zp[2]) / mup,
        c23: (z[4] - zp[4]) / nup,
        c13: (z[3] - zp[3]) / (mup * nup),
        base: [mup, nup / mup, zp[2], zp[3], zp[4]],
        ratio_s: if d1 == 0.0 { f64::INFINITY } else { d2 / d1 },
        inv_dist: if d == 0.0 { f64::INFINITY } else { 1.0 / d },
    })
}

/// `S = d2 / d1` from the two factor separations.
pub fn separation_ratio(d1: f64, d2: f64) -> f64 {
    d2 / d1
}

/// Largest discrepancy between the lifts (computed by finite differences in
/// the left point) of the five boundary vector fields and their expected
/// form `s2 d_s2, s1 d_s1, s2 d_C12, s1 s2 d_C13, s1 d_C23`.
pub fn lifted_field_residual(z: CornerPoint, zp: CornerPoint, step: f64) -> Result<f64> {
    let dc = double_space_coords(z, zp)?;
    let mut worst: f64 = 0.0;
    for field in 0..5 {
        // Each field is `coef * d/d(z[slot])` on the left factor.
        let (slot, coef) = match field {
            0 => (0, z[0]),
            1 => (1, z[1]),
            2 => (2, z[0]),
            3 => (3, z[0] * z[1]),
            _ => (4, z[1]),
        };
        let h = step * if slot < 2 { z[slot] } else { 1.0 };
        let mut zp1 = z;
        let mut zm1 = z;
        zp1[slot] += h;
        zm1[slot] -= h;
        let fp = double_space_coords(zp1, zp)?.as_array();
        let fm = double_space_coords(zm1, zp)?.as_array();
        let mut expected = [0.0; 10];
        match field {
            0 => expected[1] = dc.s2,
            1 => expected[0] = dc.s1,
            2 => expected[2] = dc.s2,
            3 => expected[4] = dc.s1 * dc.s2,
            _ => expected[3] = dc.s1,
        }
        for k in 0..10 {
            let got = coef * (fp[k] - fm[k]) / (2.0 * h);
            worst = worst.max((got - expected[k]).abs());
        }
    }
    Ok(worst)
}

/// Smoothed boundary-defining functions `x = 1/δ̃`, `x1 = δ̃1/δ̃`,
/// `x2 = δ̃2/δ̃` relative to the basepoint of the product model.
pub fn product_bdfs(p: &ProductPoint) -> (f64, f64, f64) {
    let d1 = 2.0 * p.log_s.abs();
    let d2 = SQRT_3 * p.d.abs();
    let dt = smoothed(d1.hypot(d2));
    (1.0 / dt, smoothed(d1) / dt, smoothed(d2) / dt)
}

/// Raw versions of [`product_bdfs`], without smoothing.
pub fn product_bdfs_raw(p: &ProductPoint) -> (f64, f64, f64) {
    let d1 = 2.0 * p.log_s.abs();
    let d2 = SQRT_3 * p.d.abs();
    let d = d1.hypot(d2);
    (1.0 / d, d1 / d, d2 / d)
}
