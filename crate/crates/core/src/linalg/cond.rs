//! Spectral condition numbers of symmetric matrices.

use super::factor::{symmetric_eigenvalues, tridiagonal_eigenvalues};
use super::{CoeffMatrix, Factorization};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preconditioning {
    None,
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CondMethod {
    Dense,
    Lanczos,
}

/// Largest matrix the dense eigenvalue path accepts.
pub const DENSE_CAP: usize = 6000;

/// `D^{-1/2} A D^{-1/2}` with `D = |diag(A)|` (zero diagonal entries are left unscaled).
pub fn diagonally_scaled(a: &CoeffMatrix) -> CoeffMatrix {
    let d: Vec<f64> = a.diagonal().iter().map(|&v| if v != 0.0 { 1.0 / v.abs().sqrt() } else { 1.0 }).collect();
    a.scale_symmetric(&d)
}

fn prepared(a: &CoeffMatrix, prec: Preconditioning) -> Result<std::borrow::Cow<'_, CoeffMatrix>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!("condition number of a {} x {} matrix", a.nrows(), a.ncols())));
    }
    Ok(match prec {
        Preconditioning::None => std::borrow::Cow::Borrowed(a),
        Preconditioning::Diagonal => std::borrow::Cow::Owned(diagonally_scaled(a)),
    })
}

fn ratio(max_abs: f64, min_abs: f64) -> f64 {
    if min_abs == 0.0 {
        f64::INFINITY
    } else {
        max_abs / min_abs
    }
}

/// `max |λ| / min |λ|` from a dense symmetric eigensolve; refuses matrices above [`DENSE_CAP`].
pub fn condition_number(a: &CoeffMatrix, prec: Preconditioning) -> Result<f64> {
    condition_number_with_cap(a, prec, DENSE_CAP)
}

pub fn condition_number_with_cap(a: &CoeffMatrix, prec: Preconditioning, cap: usize) -> Result<f64> {
    if a.nrows() > cap {
        return Err(Error::DenseCap { size: a.nrows(), cap });
    }
    let m = prepared(a, prec)?;
    if m.nrows() == 0 {
        return Ok(1.0);
    }
    let ev = symmetric_eigenvalues(&m)?;
    let max_abs = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min_abs = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    Ok(ratio(max_abs, min_abs))
}

/// Extreme Ritz values of a symmetric operator by Lanczos with full reorthogonalization.
pub fn lanczos_extremes(n: usize, op: impl Fn(&[f64]) -> Vec<f64>, seed: u64) -> Result<(f64, f64)> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let max_steps = n.min(500);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut last: Option<(f64, f64)> = None;
    for k in 0..max_steps {
        let mut w = op(&basis[k]);
        let a: f64 = w.iter().zip(&basis[k]).map(|(x, y)| x * y).sum();
        alpha.push(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for q in &basis {
                let c: f64 = w.iter().zip(q).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = alpha.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let exhausted = b <= 1e-13 * scale || k + 1 == max_steps;
        if (k + 1) % 10 == 0 || exhausted {
            let ev = tridiagonal_eigenvalues(&alpha, &beta)?;
            let cur = (ev[0], ev[ev.len() - 1]);
            if let Some(prev) = last {
                let tol = 1e-11 * cur.0.abs().max(cur.1.abs());
                if (cur.0 - prev.0).abs() <= tol && (cur.1 - prev.1).abs() <= tol {
                    return Ok(cur);
                }
            }
            if exhausted {
                return Ok(cur);
            }
            last = Some(cur);
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    unreachable!("the loop returns on its last step")
}

/// Condition number from Lanczos on `A` and on `A^{-1}` (via a sparse factorization).
pub fn condition_number_lanczos(a: &CoeffMatrix, prec: Preconditioning) -> Result<f64> {
    let m = prepared(a, prec)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(1.0);
    }
    let (lo, hi) = lanczos_extremes(n, |x| m.matvec(x).expect("square operator"), 1)?;
    let max_abs = lo.abs().max(hi.abs());
    let f = Factorization::sparse(&m)?;
    let (ilo, ihi) = lanczos_extremes(n, |x| f.solve(x), 2)?;
    let inv_max = ilo.abs().max(ihi.abs());
    Ok(max_abs * inv_max)
}

/// Dense eigenvalues up to `dense_limit`, Lanczos above it.
pub fn estimate_condition(a: &CoeffMatrix, prec: Preconditioning, dense_limit: usize) -> Result<(f64, CondMethod)> {
    if a.nrows() <= dense_limit.min(DENSE_CAP) {
        Ok((condition_number(a, prec)?, CondMethod::Dense))
    } else {
        Ok((condition_number_lanczos(a, prec)?, CondMethod::Lanczos))
    }
}
