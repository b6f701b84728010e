//! Least-squares helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
}

/// Ordinary least-squares line through `(x, y)`.
pub fn line_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Fit(format!(
            "need at least two paired samples, got {n}"
        )));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    if !(slope.is_finite() && intercept.is_finite()) {
        return Err(Error::Fit("non-finite fit".into()));
    }
    Ok(LineFit {
        slope,
        intercept,
        rms,
    })
}

/// Complex linear least squares `min || A c - y ||` by SVD. `rows[i]` is row
/// `i` of the design matrix.
pub fn complex_lstsq(rows: &[Vec<Complex64>], y: &[Complex64]) -> Result<Vec<Complex64>> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    if m < n || n == 0 || y.len() != m {
        return Err(Error::Fit(format!(
            "underdetermined fit: {m} rows, {n} unknowns"
        )));
    }
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let x = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Fit(e.to_string()))?;
    Ok(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = line_fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14 && (f.intercept - 2.0).abs() < 1e-14);
        assert!(line_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn complex_two_term() {
        let (a, b) = (Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.1));
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let rows: Vec<Vec<Complex64>> = xs
            .iter()
            .map(|&x| vec![Complex64::new(x.exp(), 0.0), Complex64::new(0.0, x).exp()])
            .collect();
        let y: Vec<Complex64> = rows.iter().map(|r| a * r[0] + b * r[1]).collect();
        let c = complex_lstsq(&rows, &y).unwrap();
        assert!((c[0] - a).norm() < 1e-10 && (c[1] - b).norm() < 1e-10);
    }
}
