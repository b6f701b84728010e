//! Thin wrapper over the sparse LU factorization.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::traits::ComplexField;
use faer::Mat;

use crate::error::{Error, Result};

/// Sparse LU factorization of a square matrix given by triplets (duplicates
/// are summed).
pub struct SparseLu<T: ComplexField> {
    lu: Lu<usize, T>,
    n: usize,
}

impl<T: ComplexField + Copy> SparseLu<T> {
    pub fn factor(n: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let t: Vec<Triplet<usize, usize, T>> = triplets
            .iter()
            .map(|&(i, j, v)| Triplet::new(i, j, v))
            .collect();
        let a = SparseColMat::<usize, T>::try_new_from_triplets(n, n, &t)
            .map_err(|e| Error::Solver(format!("matrix assembly: {e:?}")))?;
        let lu = a
            .sp_lu()
            .map_err(|e| Error::Solver(format!("sparse LU: {e:?}")))?;
        Ok(Self { lu, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n, "right-hand side length");
        let mut m = Mat::<T>::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(m.as_mut());
        (0..self.n).map(|i| m[(i, 0)]).collect()
    }
}

/// Dense tridiagonal solve (Thomas algorithm) without pivoting; the systems
/// it is used on are diagonally dominant or shifted off the real axis.
pub fn solve_tridiagonal<T>(lower: &[T], diag: &[T], upper: &[T], rhs: &[T]) -> Vec<T>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<Output = T> + std::ops::Div<Output = T>,
{
    let n = diag.len();
    let mut c = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    if n > 1 {
        c.push(upper[0] / diag[0]);
    }
    d.push(rhs[0] / diag[0]);
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        if i + 1 < n {
            c.push(upper[i] / m);
        }
        d.push((rhs[i] - lower[i] * d[i - 1]) / m);
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] = x[i] - c[i] * x[i + 1];
    }
    x
}
