//! The composite parametrix
//! `R~ f = psi_sharp u_sharp + psi^sharp u^sharp + u_0`, its error operator
//! `F~ = (Delta - lambda) R~ - Id`, and the Neumann correction.
//!
//! `u_sharp = (L_sharp - lambda)^{-1} phi_sharp f` and likewise for the other
//! face; `u_0` solves `(Delta - lambda) u_0 = phi_0 f` on a smaller hexagon
//! whose margin lets it decay before its Dirichlet ring.
//!
//! The wedge models know nothing of the truncation of the flat. Residuals
//! they leave at the outer Dirichlet ring are of size `|u| / h^2` there and do
//! not contract under iteration, so data should sit some `10 / kappa` inside
//! the truncation.

use num_complex::Complex64;
use serde::Serialize;

use super::partition::{Face, PartitionOfUnity};
use super::wedge::WedgeSolver;
use crate::error::{invalid, Error, Result};
use crate::fit::line_fit;
use crate::flat::grid::ChamberGrid;
use crate::flat::operator::{assemble_radial, rho_product, RadialOperator};
use crate::flat::solve::{Reduction, ResolventSolver};
use crate::flat::spectral::SpectralParam;
use crate::geometry::SQRT_3;
use std::f64::consts::FRAC_PI_3;

type C = Complex64;

/// Decay lengths `1/kappa` of margin given to each local solve.
const MARGIN_DECAY_LENGTHS: f64 = 12.0;

/// Relative residual below which growth is rounding noise, not divergence.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;

pub struct CompositeParametrix<'a> {
    pub op: &'a RadialOperator,
    pub pou: PartitionOfUnity,
    pub param: SpectralParam,
    wedges: [WedgeSolver; 2],
    compact: RadialOperator,
}

/// The pieces of one application of the parametrix, on the main lattice.
#[derive(Debug, Clone)]
pub struct Pieces {
    /// Wedge solutions before the `psi` cutoff, sharp then supersharp.
    pub wedge: [Vec<C>; 2],
    pub compact: Vec<C>,
    pub total: Vec<C>,
}

/// Per-term decomposition of `F~ f`.
#[derive(Debug, Clone)]
pub struct ErrorTerms {
    pub total: Vec<C>,
    /// `(Delta - lambda) u_0 - phi_0 f`: the truncation defect of the compact solve.
    pub compact: Vec<C>,
    /// `Delta(psi u) - psi Delta u` summed over the faces.
    pub commutator: Vec<C>,
    /// `psi (Delta - L) u` summed over the faces, with the continuum
    /// first-order coefficients of `Delta - L` applied to lattice gradients.
    pub model: Vec<C>,
    /// The rest of `psi ((Delta - lambda) u - phi f)`: the difference between
    /// the lattice and product-grid stencils, `O(h^2)` relative.
    pub discretization: Vec<C>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorNorms {
    pub total: f64,
    pub compact: f64,
    pub commutator: f64,
    pub model: f64,
    pub discretization: f64,
}

/// Exponential rates along shells of `|v| / (rho rho)`: the input's, and that
/// of the continuum part `commutator + model` of its error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayGain {
    pub input_rate: f64,
    pub error_rate: f64,
    /// `input_rate - error_rate`.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeumannHistory {
    /// `|(Delta - lambda) u_j - f| / |f|` for `j = 0..=k`.
    pub residuals: Vec<f64>,
    /// Successive residual ratios, the first one being `|F~ f| / |f|`.
    pub factors: Vec<f64>,
}

fn axpy(a: &mut [C], b: &[C], s: f64) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y * s);
}

/// Gradient at a node from central differences along the three lattice
/// directions; exact on affine functions.
fn lattice_gradient(grid: &ChamberGrid, u: &[C], k: usize) -> [C; 2] {
    let nb = grid.neighbors(k);
    let mut g = [C::new(0.0, 0.0); 2];
    for d in 0..3 {
        if let (Some(fw), Some(bw)) = (nb[d], nb[d + 3]) {
            let t = d as f64 * FRAC_PI_3;
            let du = (u[fw] - u[bw]) / (2.0 * grid.h);
            g[0] += du * (2.0 / 3.0 * t.cos());
            g[1] += du * (2.0 / 3.0 * t.sin());
        }
    }
    g
}

/// `(Delta - L) u` at a node: `Delta - L_sharp = -grad log(J / J_sharp) . grad`
/// with `log(J / J_sharp) = sum log(1 - e^{-2t})` over `t = w3 - w2, w3 - w1`
/// in the face's local coordinates.
/// Evaluated at the positive-chamber representative of the node.
fn model_defect(grid: &ChamberGrid, face: Face, u: &[C], k: usize) -> C {
    let k = grid.fold(k);
    let z = grid.z(k);
    let [gx, gy] = lattice_gradient(grid, u, k);
    let (z, g) = match face {
        Face::Sharp => (z, [gx, gy]),
        // Reflection in the bisector, which is its own transpose.
        Face::Supersharp => {
            let r = |v: [f64; 2]| {
                [
                    0.5 * v[0] + 0.5 * SQRT_3 * v[1],
                    0.5 * SQRT_3 * v[0] - 0.5 * v[1],
                ]
            };
            (
                r(z),
                [
                    gx * 0.5 + gy * (0.5 * SQRT_3),
                    gx * (0.5 * SQRT_3) - gy * 0.5,
                ],
            )
        }
    };
    let mut out = C::new(0.0, 0.0);
    for sign in [-1.0, 1.0] {
        let t = 0.5 * z[0] + sign * z[1] / (2.0 * SQRT_3);
        debug_assert!(t > 0.0, "psi must vanish at the opposite wall");
        let c = 1.0 / t.tanh() - 1.0;
        out -= (g[0] * 0.5 + g[1] * (sign / (2.0 * SQRT_3))) * c;
    }
    out
}

impl<'a> CompositeParametrix<'a> {
    pub fn new(
        op: &'a RadialOperator,
        pou: PartitionOfUnity,
        param: SpectralParam,
    ) -> Result<Self> {
        let grid = &op.grid;
        if pou.phi_0.len() != grid.len() {
            return invalid("partition was built on a different grid");
        }
        let margin = MARGIN_DECAY_LENGTHS / param.kappa();
        let wedges = [
            WedgeSolver::new(grid, Face::Sharp, margin)?,
            WedgeSolver::new(grid, Face::Supersharp, margin)?,
        ];
        let rings = ((pou.outer + margin) / (grid.h * SQRT_3 / 2.0)).ceil() as i32;
        let compact = assemble_radial(ChamberGrid::with_radius(grid.h, rings.min(grid.n))?);
        Ok(Self {
            op,
            pou,
            param,
            wedges,
            compact,
        })
    }

    fn check(&self, f: &[C]) -> Result<()> {
        if f.len() != self.op.len() {
            return invalid(format!(
                "grid function has {} values for {} nodes",
                f.len(),
                self.op.len()
            ));
        }
        Ok(())
    }

    /// `(Delta - lambda)^{-1} phi_0 f` on the small hexagon, extended by zero.
    fn compact_solve(&self, f: &[C]) -> Result<Vec<C>> {
        let g = &self.op.grid;
        let small = &self.compact.grid;
        let index: Vec<usize> = (0..small.len())
            .map(|k| {
                let [i, j] = small.axial(k);
                g.index(i, j)
                    .expect("the small hexagon lies inside the grid")
            })
            .collect();
        let rhs: Vec<C> = index.iter().map(|&m| f[m] * self.pou.phi_0[m]).collect();
        let solver = ResolventSolver::new(&self.compact, self.param, Reduction::WeylInvariant)?;
        let u = solver.solve(&rhs)?;
        let mut out = vec![C::new(0.0, 0.0); g.len()];
        for (k, &m) in index.iter().enumerate() {
            out[m] = u[k];
        }
        Ok(out)
    }

    fn wedge_solve(&self, face: Face, f: &[C]) -> Result<Vec<C>> {
        let g = &self.op.grid;
        let phi = self.pou.phi(face);
        let local: Vec<C> = f.iter().zip(phi).map(|(x, p)| x * *p).collect();
        let mut u = self.wedges[face as usize].solve(g, &self.param, &local)?;
        for (k, x) in u.iter_mut().enumerate() {
            if g.is_boundary(k) {
                *x = C::new(0.0, 0.0);
            }
        }
        Ok(u)
    }

    /// The three local solves, run concurrently.
    pub fn pieces(&self, f: &[C]) -> Result<Pieces> {
        self.check(f)?;
        let ((sharp, supersharp), compact) = rayon::join(
            || {
                rayon::join(
                    || self.wedge_solve(Face::Sharp, f),
                    || self.wedge_solve(Face::Supersharp, f),
                )
            },
            || self.compact_solve(f),
        );
        let (sharp, supersharp, compact) = (sharp?, supersharp?, compact?);
        let mut total = compact.clone();
        for (face, u) in [(Face::Sharp, &sharp), (Face::Supersharp, &supersharp)] {
            for ((t, x), p) in total.iter_mut().zip(u).zip(self.pou.psi(face)) {
                *t += x * *p;
            }
        }
        Ok(Pieces {
            wedge: [sharp, supersharp],
            compact,
            total,
        })
    }

    /// `R~ f`.
    pub fn apply(&self, f: &[C]) -> Result<Vec<C>> {
        Ok(self.pieces(f)?.total)
    }

    /// `F~ f = (Delta - lambda) R~ f - f`, split into its sources.
    pub fn error_terms(&self, f: &[C]) -> Result<ErrorTerms> {
        let p = self.pieces(f)?;
        let op = self.op;
        let lambda = self.param.lambda;
        let phi0f: Vec<C> = f.iter().zip(&self.pou.phi_0).map(|(x, p)| x * *p).collect();
        let compact = op.residual(&p.compact, lambda, &phi0f);
        let zero = vec![C::new(0.0, 0.0); op.len()];
        let (mut commutator, mut model, mut discretization) = (zero.clone(), zero.clone(), zero);
        for face in Face::BOTH {
            let u = &p.wedge[face as usize];
            let psi = self.pou.psi(face);
            let psi_u: Vec<C> = u.iter().zip(psi).map(|(x, s)| x * *s).collect();
            let phif: Vec<C> = f
                .iter()
                .zip(self.pou.phi(face))
                .map(|(x, p)| x * *p)
                .collect();
            let lap_psi_u = op.apply(&psi_u);
            let lap_u = op.apply(u);
            let defect = op.residual(u, lambda, &phif);
            for k in 0..op.len() {
                if op.grid.is_boundary(k) || psi[k] == 0.0 {
                    commutator[k] += lap_psi_u[k] - lap_u[k] * psi[k];
                    continue;
                }
                let m = model_defect(&op.grid, face, u, k) * psi[k];
                commutator[k] += lap_psi_u[k] - lap_u[k] * psi[k];
                model[k] += m;
                discretization[k] += defect[k] * psi[k] - m;
            }
        }
        let total = op.residual(&p.total, lambda, f);
        Ok(ErrorTerms {
            total,
            compact,
            commutator,
            model,
            discretization,
        })
    }

    /// `F~ f` alone.
    pub fn error_operator(&self, f: &[C]) -> Result<Vec<C>> {
        self.check(f)?;
        let u = self.apply(f)?;
        Ok(self.op.residual(&u, self.param.lambda, f))
    }

    /// `u_k = R~ sum_{j <= k} (-F~)^j f`; `k = 0` is [`Self::apply`].
    ///
    /// Each step costs one application: with `g_0 = f`,
    /// `g_{j+1} = g_j - (Delta - lambda) R~ g_j`, and `-g_{k+1}` is the residual
    /// of `u_k`. A step whose residual does not shrink is reported as
    /// [`Error::NoContraction`] unless the residual is already at rounding level.
    pub fn neumann_correct(&self, f: &[C], k: usize) -> Result<(Vec<C>, NeumannHistory)> {
        let (mut iterates, hist) = self.neumann_iterates(f, k)?;
        Ok((iterates.pop().expect("at least one iterate"), hist))
    }

    /// As [`Self::neumann_correct`], keeping every `u_0, ..., u_k`.
    pub fn neumann_iterates(&self, f: &[C], k: usize) -> Result<(Vec<Vec<C>>, NeumannHistory)> {
        self.check(f)?;
        let op = self.op;
        let f_norm = op.norm(f);
        if f_norm == 0.0 {
            let zero = vec![C::new(0.0, 0.0); op.len()];
            return Ok((
                vec![zero; k + 1],
                NeumannHistory {
                    residuals: vec![0.0; k + 1],
                    factors: Vec::new(),
                },
            ));
        }
        let mut g = f.to_vec();
        let mut u = vec![C::new(0.0, 0.0); op.len()];
        let mut iterates = Vec::with_capacity(k + 1);
        let mut hist = NeumannHistory {
            residuals: Vec::new(),
            factors: Vec::new(),
        };
        let mut last = 1.0;
        for _ in 0..=k {
            let v = self.apply(&g)?;
            axpy(&mut u, &v, 1.0);
            let r = op.residual(&v, self.param.lambda, &g);
            // g - (Delta - lambda) v = -r.
            g = r.into_iter().map(|x| -x).collect();
            let rel = op.norm(&g) / f_norm;
            let factor = rel / last;
            hist.residuals.push(rel);
            hist.factors.push(factor);
            if factor >= 1.0 && rel > ROUNDOFF_FLOOR {
                return Err(Error::NoContraction(factor));
            }
            iterates.push(u.clone());
            last = rel;
        }
        Ok((iterates, hist))
    }

    /// Fit the growth rates of `f` and of the continuum error terms over the
    /// shells `r_lo <= |z| <= r_hi`, taking the largest `|v| / (rho rho)` on
    /// each shell of unit width.
    pub fn decay_gain(
        &self,
        f: &[C],
        terms: &ErrorTerms,
        r_lo: f64,
        r_hi: f64,
    ) -> Result<DecayGain> {
        let g = &self.op.grid;
        if !(r_lo > 0.0 && r_hi > r_lo + 2.0 && r_hi < g.inradius()) {
            return invalid(format!(
                "shell range [{r_lo}, {r_hi}] must lie inside the truncation"
            ));
        }
        let shells = (r_hi - r_lo).floor() as usize;
        let cont: Vec<C> = terms
            .commutator
            .iter()
            .zip(&terms.model)
            .map(|(a, b)| a + b)
            .collect();
        let profile = |v: &[C]| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut top = vec![0.0f64; shells];
            for k in 0..g.len() {
                let r = g.radius(k);
                let m = (r - r_lo).floor();
                if m >= 0.0 && (m as usize) < shells {
                    top[m as usize] = top[m as usize].max(v[k].norm() / rho_product(g.z(k)));
                }
            }
            if top.iter().any(|&t| !(t > 0.0)) {
                return Err(Error::Fit("a shell carries no signal".into()));
            }
            Ok((
                (0..shells).map(|m| r_lo + m as f64 + 0.5).collect(),
                top.iter().map(|t| t.ln()).collect(),
            ))
        };
        let (rs, lf) = profile(f)?;
        let (_, le) = profile(&cont)?;
        let input_rate = line_fit(&rs, &lf)?.slope;
        let error_rate = line_fit(&rs, &le)?.slope;
        Ok(DecayGain {
            input_rate,
            error_rate,
            gain: input_rate - error_rate,
        })
    }

    pub fn norms(&self, t: &ErrorTerms) -> ErrorNorms {
        let n = |v: &[C]| self.op.norm(v);
        ErrorNorms {
            total: n(&t.total),
            compact: n(&t.compact),
            commutator: n(&t.commutator),
            model: n(&t.model),
            discretization: n(&t.discretization),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> RadialOperator {
        assemble_radial(ChamberGrid::new(0.25, 24.0).unwrap())
    }

    fn ring(op: &RadialOperator, r0: f64) -> Vec<C> {
        op.grid
            .sample(|z| C::new((-(z[0].hypot(z[1]) - r0).powi(2)).exp(), 0.0))
    }

    fn rel(op: &RadialOperator, a: &[C], b: &[C]) -> f64 {
        let d: Vec<C> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        op.norm(&d) / op.norm(b)
    }

    #[test]
    fn terms_add_up_and_map_is_linear() {
        let op = setup();
        let p = SpectralParam::real(-1.0).unwrap();
        let cp = CompositeParametrix::new(&op, PartitionOfUnity::standard(&op.grid).unwrap(), p)
            .unwrap();
        let f = ring(&op, 7.0);
        let t = cp.error_terms(&f).unwrap();
        let sum: Vec<C> = (0..op.len())
            .map(|k| t.compact[k] + t.commutator[k] + t.model[k] + t.discretization[k])
            .collect();
        assert!(rel(&op, &sum, &t.total) < 1e-10);
        let g = ring(&op, 9.0);
        let c = C::new(0.3, -1.2);
        let mix: Vec<C> = f.iter().zip(&g).map(|(x, y)| x * c + y).collect();
        let lhs = cp.apply(&mix).unwrap();
        let (a, b) = (cp.apply(&f).unwrap(), cp.apply(&g).unwrap());
        let rhs: Vec<C> = a.iter().zip(&b).map(|(x, y)| x * c + y).collect();
        assert!(rel(&op, &lhs, &rhs) < 1e-12);
        let zero = vec![C::new(0.0, 0.0); op.len()];
        assert!(cp
            .error_operator(&zero)
            .unwrap()
            .iter()
            .all(|x| x.norm() == 0.0));
    }

    #[test]
    fn one_wedge_input_leaves_the_other_idle() {
        let op = setup();
        let p = SpectralParam::real(-1.0).unwrap();
        let cp = CompositeParametrix::new(&op, PartitionOfUnity::standard(&op.grid).unwrap(), p)
            .unwrap();
        // Weyl-invariant bump around angle pi/12, radius 10: only the sharp piece sees it.
        let f: Vec<C> = (0..op.len())
            .map(|k| {
                let z = op.grid.z(op.grid.fold(k));
                let c = [10.0 * (PI_12).cos(), 10.0 * (PI_12).sin()];
                let d2 = (z[0] - c[0]).powi(2) + (z[1] - c[1]).powi(2);
                C::new(
                    if d2 < 1.0 {
                        (-1.0 / (1.0 - d2)).exp()
                    } else {
                        0.0
                    },
                    0.0,
                )
            })
            .collect();
        let pieces = cp.pieces(&f).unwrap();
        assert!(pieces.wedge[1].iter().all(|x| x.norm() == 0.0));
        assert!(pieces.compact.iter().all(|x| x.norm() == 0.0));
        assert!(op.norm(&pieces.wedge[0]) > 0.0);
    }

    const PI_12: f64 = std::f64::consts::PI / 12.0;

    #[test]
    fn neumann_zero_steps_is_the_parametrix() {
        let op = setup();
        let p = SpectralParam::real(-1.0).unwrap();
        let cp = CompositeParametrix::new(&op, PartitionOfUnity::standard(&op.grid).unwrap(), p)
            .unwrap();
        let f = ring(&op, 7.0);
        let (u0, h) = cp.neumann_correct(&f, 0).unwrap();
        assert_eq!(u0, cp.apply(&f).unwrap());
        assert_eq!(h.residuals.len(), 1);
        let (u2, h) = cp.neumann_correct(&f, 2).unwrap();
        assert!(h.factors.iter().all(|&x| x < 0.5), "{h:?}");
        let direct =
            crate::flat::solve::solve_resolvent(&op, p, &f, Reduction::WeylInvariant).unwrap();
        assert!(rel(&op, &u2, &direct) < rel(&op, &u0, &direct));
    }
}
