//! Direct factorizations backed by faer.

use super::CoeffMatrix;
use crate::error::{Error, Result};
use faer::linalg::solvers::{Llt, PartialPivLu, Solve};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

/// A factorized square matrix ready for repeated solves.
pub enum Factorization {
    DenseCholesky(Llt<f64>),
    DenseLu(PartialPivLu<f64>),
    SparseCholesky(faer::sparse::linalg::solvers::Llt<usize, f64>),
    SparseLu(faer::sparse::linalg::solvers::Lu<usize, f64>),
}

fn check_square(a: &CoeffMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!("expected a square matrix, got {} x {}", a.nrows(), a.ncols())));
    }
    Ok(())
}

pub(crate) fn to_faer_dense(a: &CoeffMatrix) -> Mat<f64> {
    let mut m = Mat::<f64>::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplets() {
        m[(i, j)] = v;
    }
    m
}

fn to_faer_sparse(a: &CoeffMatrix) -> Result<SparseColMat<usize, f64>> {
    let trips: Vec<Triplet<usize, usize, f64>> = a.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    SparseColMat::try_new_from_triplets(a.nrows(), a.ncols(), &trips)
        .map_err(|e| Error::Internal(format!("sparse conversion failed: {e:?}")))
}

impl Factorization {
    /// Dense Cholesky, falling back to LU for matrices that are not positive definite.
    pub fn dense(a: &CoeffMatrix) -> Result<Self> {
        check_square(a)?;
        let m = to_faer_dense(a);
        Ok(match m.llt(Side::Lower) {
            Ok(llt) => Self::DenseCholesky(llt),
            Err(_) => Self::DenseLu(m.partial_piv_lu()),
        })
    }

    /// Sparse Cholesky, falling back to sparse LU.
    pub fn sparse(a: &CoeffMatrix) -> Result<Self> {
        check_square(a)?;
        let m = to_faer_sparse(a)?;
        if let Ok(llt) = m.sp_cholesky(Side::Lower) {
            return Ok(Self::SparseCholesky(llt));
        }
        m.sp_lu()
            .map(Self::SparseLu)
            .map_err(|e| Error::Solver { reason: format!("sparse LU failed: {e:?}"), residuals: Vec::new() })
    }

    pub fn is_cholesky(&self) -> bool {
        matches!(self, Self::DenseCholesky(_) | Self::SparseCholesky(_))
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        match self {
            Self::DenseCholesky(f) => f.solve_in_place(rhs.as_mut()),
            Self::DenseLu(f) => f.solve_in_place(rhs.as_mut()),
            Self::SparseCholesky(f) => f.solve_in_place(rhs.as_mut()),
            Self::SparseLu(f) => f.solve_in_place(rhs.as_mut()),
        }
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &CoeffMatrix) -> Result<Vec<f64>> {
    check_square(a)?;
    let mut ev = to_faer_dense(a)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Solver { reason: format!("eigenvalue iteration failed: {e:?}"), residuals: Vec::new() })?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigenvalues of a symmetric tridiagonal matrix, ascending.
pub(crate) fn tridiagonal_eigenvalues(alpha: &[f64], beta: &[f64]) -> Result<Vec<f64>> {
    let k = alpha.len();
    let mut m = Mat::<f64>::zeros(k, k);
    for i in 0..k {
        m[(i, i)] = alpha[i];
        if i + 1 < k {
            m[(i + 1, i)] = beta[i];
            m[(i, i + 1)] = beta[i];
        }
    }
    let mut ev = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Solver { reason: format!("eigenvalue iteration failed: {e:?}"), residuals: Vec::new() })?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> CoeffMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CoeffMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn dense_and_sparse_agree() {
        let a = laplacian(30);
        let b: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let d = Factorization::dense(&a).unwrap();
        let s = Factorization::sparse(&a).unwrap();
        assert!(d.is_cholesky() && s.is_cholesky());
        let (xd, xs) = (d.solve(&b), s.solve(&b));
        let r = a.matvec(&xd).unwrap();
        for i in 0..30 {
            assert!((r[i] - b[i]).abs() < 1e-12);
            assert!((xd[i] - xs[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn indefinite_falls_back_to_lu() {
        let a = CoeffMatrix::from_dense(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        for f in [Factorization::dense(&a).unwrap(), Factorization::sparse(&a).unwrap()] {
            assert!(!f.is_cholesky());
            let x = f.solve(&[3.0, 3.0]);
            assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn laplacian_spectrum() {
        let n = 12;
        let ev = symmetric_eigenvalues(&laplacian(n)).unwrap();
        for (k, &l) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((l - exact).abs() < 1e-12);
        }
    }
}
