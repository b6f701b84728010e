//! Discrete weighted Sobolev norms built from the boundary vector fields
//! `mu d_mu` and `nu d_nu` of the positive chamber.
//!
//! With `p = log mu`, `q = log nu` one has `d_p = -2 D_1` and `d_q = -2 D_0`,
//! where `D_d` is the derivative along lattice direction `d`; both are
//! approximated by centred differences.

use num_complex::Complex64;

use super::grid::NONE;
use super::operator::RadialOperator;
use crate::error::{invalid, Result};

pub const MAX_ORDER: usize = 4;

/// Apply `mu d_mu` (`field = 0`) or `nu d_nu` (`field = 1`). Nodes whose
/// stencil leaves `valid` become invalid.
fn apply_field(
    op: &RadialOperator,
    u: &[Complex64],
    valid: &[bool],
    field: usize,
) -> (Vec<Complex64>, Vec<bool>) {
    let (fwd, back) = if field == 0 { (1, 4) } else { (0, 3) };
    let h = op.grid.h;
    let mut out = vec![Complex64::new(0.0, 0.0); u.len()];
    let mut ok = vec![false; u.len()];
    for k in 0..u.len() {
        if !valid[k] {
            continue;
        }
        let (a, b) = (op.nbr[k][fwd], op.nbr[k][back]);
        if a == NONE || b == NONE || !valid[a as usize] || !valid[b as usize] {
            continue;
        }
        out[k] = (u[a as usize] - u[b as usize]) * (-2.0 / (2.0 * h));
        ok[k] = true;
    }
    (out, ok)
}

/// Seminorms `|u|_j = (sum over words V_I of length j of ||e^{-alpha r} V_I u||^2)^{1/2}`
/// for `j = 0..=m`, in the volume-weighted discrete `L^2` over nodes selected
/// by `region` (and whose stencils stay inside it).
pub fn ee_seminorms(
    op: &RadialOperator,
    u: &[Complex64],
    m: usize,
    alpha: f64,
    region: impl Fn(usize) -> bool,
) -> Result<Vec<f64>> {
    if m > MAX_ORDER {
        return invalid(format!("order {m} exceeds the stencil depth {MAX_ORDER}"));
    }
    let g = &op.grid;
    let valid0: Vec<bool> = (0..op.len())
        .map(|k| !g.is_boundary(k) && region(k))
        .collect();
    let weight: Vec<f64> = (0..op.len())
        .map(|k| (-2.0 * alpha * g.radius(k)).exp() * op.volume[k])
        .collect();
    // Every norm is evaluated on the nodes valid after m differentiations,
    // so all orders share the same quadrature region.
    let mut level = vec![(u.to_vec(), valid0)];
    let mut words_by_order = vec![level.clone()];
    for _ in 0..m {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (f, v) in &level {
            for field in 0..2 {
                next.push(apply_field(op, f, v, field));
            }
        }
        words_by_order.push(next.clone());
        level = next;
    }
    let final_valid: Vec<bool> = (0..op.len())
        .map(|k| level.iter().all(|(_, v)| v[k]))
        .collect();
    Ok(words_by_order
        .iter()
        .map(|words| {
            words
                .iter()
                .map(|(f, _)| {
                    (0..op.len())
                        .filter(|&k| final_valid[k])
                        .map(|k| f[k].norm_sqr() * weight[k])
                        .sum::<f64>()
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect())
}

/// Full norm `(sum_j |u|_j^2)^{1/2}`.
pub fn ee_sobolev_norm(op: &RadialOperator, u: &[Complex64], m: usize, alpha: f64) -> Result<f64> {
    let s = ee_seminorms(op, u, m, alpha, |_| true)?;
    Ok(s.iter().map(|x| x * x).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat::grid::ChamberGrid;
    use crate::flat::operator::assemble_radial;
    use crate::geometry::z_to_w;

    #[test]
    fn zero_has_zero_norm() {
        let op = assemble_radial(ChamberGrid::with_radius(0.3, 10).unwrap());
        let u = vec![Complex64::new(0.0, 0.0); op.len()];
        assert_eq!(ee_sobolev_norm(&op, &u, 2, 0.0).unwrap(), 0.0);
        assert!(ee_sobolev_norm(&op, &u, 5, 0.0).is_err());
    }

    #[test]
    fn power_of_mu_is_an_eigenfunction() {
        let op = assemble_radial(ChamberGrid::with_radius(0.1, 60).unwrap());
        let a = 0.7;
        let u = op.grid.sample(|z| {
            let w = z_to_w(z);
            Complex64::new((a * (w[0] - w[1])).exp(), 0.0)
        });
        let patch = |k: usize| {
            let w = z_to_w(op.grid.z(k));
            w[0] - w[1] < -0.5 && w[1] - w[2] < -0.5
        };
        let s = ee_seminorms(&op, &u, 2, 0.0, patch).unwrap();
        assert!((s[1] / s[0] - a).abs() < 1e-3, "{s:?}");
        assert!((s[2] / s[1] - a).abs() < 1e-3, "{s:?}");
    }
}
