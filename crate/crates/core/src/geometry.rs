//! Linear-algebra layer for the symmetric space of positive definite 3x3
//! matrices of determinant one.
//!
//! A point is stored as the symmetric square root `V`; the group acts by
//! `B . V = (B V^2 B^t)^{1/2}`. The invariant metric is
//! `g = (3/2) Tr(P^{-1} dP P^{-1} dP)` with `P = V^2`, which at the identity
//! reads `g(A, A) = 6 Tr(A A^t)` and gives distance `sqrt(6 sum (log l_i)^2)`
//! to the basepoint, `l_i` the eigenvalues of `V`.
//!
//! Flat coordinates: `w = (log l_1, log l_2, log l_3)` with `sum w = 0`, and the
//! Euclidean coordinates `z = (3 w_3, sqrt(3) (w_2 - w_1))` in which the metric
//! restricted to the flat is `|dz|^2`. The chamber `w_1 < w_2 < w_3` is the
//! sector of angles `(0, pi/3)` in the `z` plane.

use nalgebra::{Matrix3, SMatrix, SymmetricEigen};

use crate::error::{invalid, Error, Result};

pub type Mat3 = Matrix3<f64>;
pub type Gram5 = SMatrix<f64, 5, 5>;

pub const SQRT_3: f64 = 1.732_050_807_568_877_2;
pub const DET_TOL: f64 = 1e-10;
pub const SYM_TOL: f64 = 1e-12;
/// Margin used when enforcing chart validity regions.
pub const CHART_MARGIN: f64 = 1e-6;

fn check_det_one(a: &Mat3) -> Result<()> {
    let det = a.determinant();
    if !det.is_finite() || det.abs() < 1e-300 {
        return Err(Error::Degenerate("singular matrix".into()));
    }
    if (det - 1.0).abs() > DET_TOL {
        return invalid(format!("determinant {det} differs from 1"));
    }
    Ok(())
}

fn sym_sqrt(p: &Mat3) -> Mat3 {
    let eig = SymmetricEigen::new(*p);
    let d = Mat3::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    let q = eig.eigenvectors;
    q * d * q.transpose()
}

/// A point of M: symmetric positive definite with unit determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointM {
    entries: Mat3,
}

impl PointM {
    pub fn new(entries: Mat3) -> Result<Self> {
        let scale = entries.norm().max(1.0);
        if (entries - entries.transpose()).norm() > SYM_TOL * scale {
            return invalid("matrix is not symmetric");
        }
        let sym = 0.5 * (entries + entries.transpose());
        let eig = SymmetricEigen::new(sym);
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return invalid("matrix is not positive definite");
        }
        let det: f64 = eig.eigenvalues.iter().product();
        if (det - 1.0).abs() > DET_TOL {
            return invalid(format!("determinant {det} differs from 1"));
        }
        Ok(Self { entries: sym })
    }

    pub fn identity() -> Self {
        Self {
            entries: Mat3::identity(),
        }
    }

    /// `O diag(lambda) O^t`; `lambda` must multiply to one.
    pub fn from_eigen(lambda: [f64; 3], o: &Mat3) -> Result<Self> {
        let d = Mat3::from_diagonal(&lambda.into());
        Self::new(o * d * o.transpose())
    }

    pub fn from_flat(w: &FlatVector) -> Self {
        let l = w.w.map(f64::exp);
        Self {
            entries: Mat3::from_diagonal(&l.into()),
        }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.entries
    }
}

/// `V = (A A^t)^{1/2}` from `A = V R`.
pub fn polar_point(a: &Mat3) -> Result<PointM> {
    check_det_one(a)?;
    PointM::new(sym_sqrt(&(a * a.transpose())))
}

/// Left action `(B V^2 B^t)^{1/2}`.
pub fn group_act(b: &Mat3, v: &PointM) -> Result<PointM> {
    check_det_one(b)?;
    let p = b * v.entries * v.entries * b.transpose();
    let root = sym_sqrt(&(0.5 * (p + p.transpose())));
    // The exact result has unit determinant; remove the rounding drift,
    // which grows with the condition number.
    let det = root.determinant();
    if !(det > 0.0) {
        return invalid("group action lost positivity");
    }
    PointM::new(root / det.cbrt())
}

/// Ascending eigenvalues and a rotation `O` with `V = O diag(l) O^t`.
///
/// `O` is only defined up to right multiplication by signed permutations
/// fixing the eigenvalue pattern; on walls only the eigenspaces are meaningful.
#[derive(Debug, Clone, Copy)]
pub struct EigenCoords {
    pub lambda: [f64; 3],
    pub rotation: Mat3,
}

pub fn eigen_coords(v: &PointM) -> EigenCoords {
    let eig = SymmetricEigen::new(v.entries);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut o = Mat3::zeros();
    let mut lambda = [0.0; 3];
    for (k, &i) in idx.iter().enumerate() {
        lambda[k] = eig.eigenvalues[i];
        o.set_column(k, &eig.eigenvectors.column(i));
    }
    if o.determinant() < 0.0 {
        let c = -o.column(2);
        o.set_column(2, &c);
    }
    EigenCoords {
        lambda,
        rotation: o,
    }
}

/// Element of the flat: logarithms of the eigenvalues, summing to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatVector {
    pub w: [f64; 3],
}

impl FlatVector {
    pub fn new(w: [f64; 3]) -> Result<Self> {
        let scale = w.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        if (w[0] + w[1] + w[2]).abs() > 1e-12 * scale {
            return invalid("flat vector does not sum to zero");
        }
        Ok(Self { w })
    }

    pub fn from_z(z: [f64; 2]) -> Self {
        Self { w: z_to_w(z) }
    }

    pub fn z(&self) -> [f64; 2] {
        w_to_z(self.w)
    }

    /// Flat coordinates of a point, eigenvalues in ascending order.
    pub fn of_point(v: &PointM) -> Self {
        let l = eigen_coords(v).lambda;
        let mut w = l.map(f64::ln);
        let mean = (w[0] + w[1] + w[2]) / 3.0;
        w.iter_mut().for_each(|x| *x -= mean);
        Self { w }
    }

    /// Riemannian length `sqrt(6 |w|^2)`.
    pub fn length(&self) -> f64 {
        (6.0 * self.w.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }
}

pub fn w_to_z(w: [f64; 3]) -> [f64; 2] {
    [3.0 * w[2], SQRT_3 * (w[1] - w[0])]
}

pub fn z_to_w(z: [f64; 2]) -> [f64; 3] {
    let a = -z[0] / 6.0;
    let b = z[1] / (2.0 * SQRT_3);
    [a - b, a + b, z[0] / 3.0]
}

/// Permutation of the three eigenvalue slots; `(s w)[perm[j]] = w[j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeylElement {
    pub perm: [usize; 3],
}

impl WeylElement {
    pub const IDENTITY: Self = Self { perm: [0, 1, 2] };

    pub fn new(perm: [usize; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &p in &perm {
            if p > 2 || seen[p] {
                return invalid("not a permutation of {0,1,2}");
            }
            seen[p] = true;
        }
        Ok(Self { perm })
    }

    /// The six elements; index 0 is the identity.
    pub fn all() -> [Self; 6] {
        [
            [0, 1, 2],
            [1, 0, 2],
            [0, 2, 1],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ]
        .map(|perm| Self { perm })
    }

    /// Transposition of slots `i` and `j`: reflection in the wall `w_i = w_j`.
    pub fn transposition(i: usize, j: usize) -> Self {
        let mut perm = [0, 1, 2];
        perm.swap(i, j);
        Self { perm }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            perm: other.perm.map(|j| self.perm[j]),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut perm = [0; 3];
        for (j, &p) in self.perm.iter().enumerate() {
            perm[p] = j;
        }
        Self { perm }
    }

    pub fn act_w(&self, w: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for j in 0..3 {
            out[self.perm[j]] = w[j];
        }
        out
    }

    pub fn act(&self, v: &FlatVector) -> FlatVector {
        FlatVector { w: self.act_w(v.w) }
    }

    pub fn act_z(&self, z: [f64; 2]) -> [f64; 2] {
        w_to_z(self.act_w(z_to_w(z)))
    }

    /// Permutation sign; reflections have sign -1.
    pub fn sign(&self) -> i32 {
        let p = self.perm;
        let inversions = (p[0] > p[1]) as i32 + (p[0] > p[2]) as i32 + (p[1] > p[2]) as i32;
        if inversions % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Sort `w` ascending: returns the representative in the chamber
/// `w_1 <= w_2 <= w_3` and the element `s` with `s(rep) = w`.
pub fn fold_to_chamber(w: [f64; 3]) -> ([f64; 3], WeylElement) {
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| w[i].total_cmp(&w[j]));
    let rep = idx.map(|i| w[i]);
    // rep[k] = w[idx[k]], so slot k of rep goes to slot idx[k].
    (rep, WeylElement { perm: idx })
}

/// All distinct permutations of `z`, deduplicated at tolerance `1e-12`.
pub fn weyl_orbit(z: &FlatVector) -> Vec<FlatVector> {
    let mut out: Vec<FlatVector> = Vec::with_capacity(6);
    let scale = z.w.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    for s in WeylElement::all() {
        let v = s.act(z);
        let dup = out.iter().any(|u| {
            u.w.iter()
                .zip(v.w.iter())
                .all(|(a, b)| (a - b).abs() <= 1e-12 * scale)
        });
        if !dup {
            out.push(v);
        }
    }
    out
}

/// Determinant-one signed permutation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignedPerm {
    pub m: [[i8; 3]; 3],
}

impl SignedPerm {
    pub fn matrix(&self) -> Mat3 {
        Mat3::from_fn(|i, j| self.m[i][j] as f64)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut m = [[0i8; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Self { m }
    }

    pub fn transpose(&self) -> Self {
        let mut m = [[0i8; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.m[j][i];
            }
        }
        Self { m }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| i == j || self.m[i][j] == 0))
    }
}

/// The normaliser of the diagonal subgroup in SO(3) (all determinant-one
/// signed permutations) and its centraliser (the diagonal sign matrices).
pub fn enumerate_signed_perms() -> (Vec<SignedPerm>, Vec<SignedPerm>) {
    let mut all = Vec::new();
    for s in WeylElement::all() {
        for signs in 0..8u8 {
            let mut m = [[0i8; 3]; 3];
            for j in 0..3 {
                let sg = if signs >> j & 1 == 1 { -1 } else { 1 };
                m[s.perm[j]][j] = sg;
            }
            let p = SignedPerm { m };
            if p.matrix().determinant() > 0.0 {
                all.push(p);
            }
        }
    }
    let diag = all
        .iter()
        .copied()
        .filter(SignedPerm::is_diagonal)
        .collect();
    (all, diag)
}

/// Number of left cosets `p P'` of the subgroup in the group.
pub fn coset_count(group: &[SignedPerm], sub: &[SignedPerm]) -> usize {
    let mut reps: Vec<SignedPerm> = Vec::new();
    for p in group {
        let known = reps.iter().any(|r| sub.contains(&r.transpose().mul(p)));
        if !known {
            reps.push(*p);
        }
    }
    reps.len()
}

/// Symmetric traceless matrix: a tangent vector at the basepoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentAtIdentity {
    entries: Mat3,
}

impl TangentAtIdentity {
    pub fn new(entries: Mat3) -> Result<Self> {
        let scale = entries.norm().max(1.0);
        if (entries - entries.transpose()).norm() > SYM_TOL * scale {
            return invalid("tangent vector is not symmetric");
        }
        if entries.trace().abs() > SYM_TOL * scale {
            return invalid("tangent vector is not traceless");
        }
        Ok(Self { entries })
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.entries
    }
}

/// Squared length `g(A, A) = 6 Tr(A A^t)`.
pub fn killing_norm(a: &TangentAtIdentity) -> f64 {
    6.0 * (a.entries * a.entries.transpose()).trace()
}

/// `sqrt(6 sum (log l_i)^2)`.
pub fn dist_to_base(v: &PointM) -> f64 {
    let l = eigen_coords(v).lambda;
    (6.0 * l.iter().map(|x| x.ln().powi(2)).sum::<f64>()).sqrt()
}

/// Coordinate systems on a neighbourhood of a diagonal point. Each chart uses
/// two flat coordinates `(p, q)` and the three skew coordinates
/// `(c12, c13, c23)` of the rotation factor; the Gram matrices are given in
/// the frame `(d p, d q, d c12, d c13, d c23)` at `c = 0`.
///
/// * `EigenBlock`: `p = log l_1`, `q = log l_2`.
/// * `MuS`: `p = log mu`, `q = log s` with `mu = l_1/l_2`, `s = l_3^{-3/2}`.
/// * `MuNu`: `p = log mu`, `q = log nu` with `nu = l_2/l_3`.
/// * `PolarR`: `p = r = log mu`, `q = log s`, and the angular coordinate
///   `2 c12` in place of `c12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartId {
    EigenBlock,
    MuS,
    MuNu,
    PolarR,
}

impl ChartId {
    pub const ALL: [ChartId; 4] = [
        ChartId::EigenBlock,
        ChartId::MuS,
        ChartId::MuNu,
        ChartId::PolarR,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ChartId::EigenBlock => "eigen-block",
            ChartId::MuS => "mu-s",
            ChartId::MuNu => "mu-nu",
            ChartId::PolarR => "polar-r",
        }
    }

    /// Eigenvalues (in slot order) at flat chart coordinates `(p, q)`.
    pub fn eigenvalues(&self, p: f64, q: f64) -> [f64; 3] {
        match self {
            ChartId::EigenBlock => [p.exp(), q.exp(), (-p - q).exp()],
            ChartId::MuS | ChartId::PolarR => {
                let (mu, s) = (p.exp(), q.exp());
                let l3 = s.powf(-2.0 / 3.0);
                [
                    mu.sqrt() * s.powf(1.0 / 3.0),
                    mu.powf(-0.5) * s.powf(1.0 / 3.0),
                    l3,
                ]
            }
            ChartId::MuNu => {
                let (mu, nu) = (p.exp(), q.exp());
                [
                    mu.powf(2.0 / 3.0) * nu.powf(1.0 / 3.0),
                    mu.powf(-1.0 / 3.0) * nu.powf(1.0 / 3.0),
                    mu.powf(-1.0 / 3.0) * nu.powf(-2.0 / 3.0),
                ]
            }
        }
    }

    /// Scale between the chart's angular coordinate and `c12`.
    pub fn c12_scale(&self) -> f64 {
        match self {
            ChartId::PolarR => 0.5,
            _ => 1.0,
        }
    }

    fn check_region(&self, p: f64, q: f64) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::OutsideChart {
                chart: self.name(),
                reason,
            })
        };
        if !(p.is_finite() && q.is_finite()) {
            return fail("non-finite coordinates".into());
        }
        match self {
            ChartId::EigenBlock => Ok(()),
            ChartId::MuS => {
                if p.abs() < CHART_MARGIN {
                    fail(format!(
                        "mu = {} is on the wall mu = 1 where the chart degenerates",
                        p.exp()
                    ))
                } else if q > -CHART_MARGIN {
                    fail(format!("s = {} must be below 1", q.exp()))
                } else {
                    Ok(())
                }
            }
            ChartId::MuNu => {
                if p > -CHART_MARGIN || q > -CHART_MARGIN {
                    fail(format!(
                        "mu = {}, nu = {} must both be below 1",
                        p.exp(),
                        q.exp()
                    ))
                } else {
                    Ok(())
                }
            }
            ChartId::PolarR => {
                if q > -CHART_MARGIN {
                    fail(format!("s = {} must be below 1", q.exp()))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Closed-form Gram matrix of the metric in a chart.
pub fn chart_metric(chart: ChartId, p: f64, q: f64) -> Result<Gram5> {
    chart.check_region(p, q)?;
    let mut g = Gram5::zeros();
    let flat: [[f64; 2]; 2] = match chart {
        ChartId::EigenBlock => [[12.0, 6.0], [6.0, 12.0]],
        ChartId::MuS | ChartId::PolarR => [[3.0, 0.0], [0.0, 4.0]],
        ChartId::MuNu => [[4.0, 2.0], [2.0, 4.0]],
    };
    for i in 0..2 {
        for j in 0..2 {
            g[(i, j)] = flat[i][j];
        }
    }
    let (c12, c13, c23) = match chart {
        ChartId::EigenBlock => {
            let l = chart.eigenvalues(p, q);
            let f = |a: f64, b: f64| 3.0 * (a / b - b / a).powi(2);
            (f(l[0], l[1]), f(l[0], l[2]), f(l[1], l[2]))
        }
        ChartId::MuS => {
            let (mu, s) = (p.exp(), q.exp());
            (
                3.0 * (mu - 1.0 / mu).powi(2),
                3.0 / (s * s) * (mu.sqrt() * s * s - mu.powf(-0.5)).powi(2),
                3.0 / (s * s) * (mu.powf(-0.5) * s * s - mu.sqrt()).powi(2),
            )
        }
        ChartId::PolarR => {
            let (r, s) = (p, q.exp());
            (
                3.0 * r.sinh().powi(2),
                4.0 / (s * s) * 0.75 * ((r / 2.0).exp() * s * s - (-r / 2.0).exp()).powi(2),
                4.0 / (s * s) * 0.75 * ((-r / 2.0).exp() * s * s - (r / 2.0).exp()).powi(2),
            )
        }
        ChartId::MuNu => {
            let (mu, nu) = (p.exp(), q.exp());
            (
                3.0 * (mu - 1.0 / mu).powi(2),
                3.0 * (mu * nu - 1.0 / (mu * nu)).powi(2),
                3.0 * (nu - 1.0 / nu).powi(2),
            )
        }
    };
    g[(2, 2)] = c12;
    g[(3, 3)] = c13;
    g[(4, 4)] = c23;
    Ok(g)
}

/// `V(p, q, c) = exp(C) diag(l(p, q)) exp(C)^t` for a chart.
pub fn chart_point(chart: ChartId, coords: [f64; 5]) -> Mat3 {
    let l = chart.eigenvalues(coords[0], coords[1]);
    let c12 = coords[2] * chart.c12_scale();
    let c = Mat3::new(
        0.0, c12, coords[3], -c12, 0.0, coords[4], -coords[3], -coords[4], 0.0,
    );
    let o = c.exp();
    o * Mat3::from_diagonal(&l.into()) * o.transpose()
}

/// Gram matrix of the pulled-back metric by central differences of the
/// parametrisation, using `g = (3/2) Tr(P^{-1} dP P^{-1} dP)`, `P = V^2`.
pub fn killing_pullback_fd(chart: ChartId, p: f64, q: f64, step: f64) -> Gram5 {
    let base = [p, q, 0.0, 0.0, 0.0];
    let v0 = chart_point(chart, base);
    let pinv = (v0 * v0).try_inverse().expect("positive definite");
    let mut dp = Vec::with_capacity(5);
    for k in 0..5 {
        let mut plus = base;
        let mut minus = base;
        plus[k] += step;
        minus[k] -= step;
        let vp = chart_point(chart, plus);
        let vm = chart_point(chart, minus);
        dp.push((vp * vp - vm * vm) / (2.0 * step));
    }
    Gram5::from_fn(|i, j| 1.5 * (pinv * dp[i] * pinv * dp[j]).trace())
}
