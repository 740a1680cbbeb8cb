//! Jacobi-preconditioned conjugate gradients.

use super::CoeffMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual norms, starting with the initial one.
    pub residuals: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for SPD `A` to relative residual `tol`.
pub fn pcg_solve(a: &CoeffMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Dimension(format!("{} x {} system with right-hand side of length {n}", a.nrows(), a.ncols())));
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgOutcome { x, iterations: 0, residuals: vec![0.0] });
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut residuals = vec![1.0];
    for it in 1..=max_iter {
        let ap = a.matvec(&p)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver { reason: "matrix is not positive definite".into(), residuals });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = dot(&r, &r).sqrt() / bnorm;
        residuals.push(rel);
        if rel <= tol {
            return Ok(CgOutcome { x, iterations: it, residuals });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver { reason: format!("no convergence to {tol:e} in {max_iter} iterations"), residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Factorization;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_converges_in_one_step() {
        let b = [1.0, -2.0, 3.0];
        let out = pcg_solve(&CoeffMatrix::identity(3), &b, 1e-14, 10).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.x, b.to_vec());
    }

    #[test]
    fn two_by_two() {
        let a = CoeffMatrix::from_dense(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let out = pcg_solve(&a, &[1.0, 1.0], 1e-14, 10).unwrap();
        assert!((out.x[0] - 1.0 / 3.0).abs() < 1e-15 && (out.x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn random_spd_matches_dense_solve() {
        let n = 200;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let m: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| m[k * n + i] * m[k * n + j]).sum::<f64>() / n as f64;
            }
            a[i * n + i] += 1.0;
        }
        let a = CoeffMatrix::from_dense(n, n, &a);
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cg = pcg_solve(&a, &b, 1e-12, 1000).unwrap();
        let direct = Factorization::dense(&a).unwrap().solve(&b);
        for (c, d) in cg.x.iter().zip(&direct) {
            assert!((c - d).abs() < 1e-8);
        }
    }

    #[test]
    fn iteration_limit_reports_history() {
        let a = CoeffMatrix::from_dense(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        match pcg_solve(&a, &[1.0, 2.0, 3.0], 1e-15, 1) {
            Err(Error::Solver { residuals, .. }) => assert_eq!(residuals.len(), 2),
            other => panic!("expected a solver error, got {other:?}"),
        }
    }
}
