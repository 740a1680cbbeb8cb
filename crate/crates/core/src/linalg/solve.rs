//! Linear solve policy for the assembled systems.

use super::{pcg_solve, CoeffMatrix, Factorization};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Systems at or below this size are factorized densely.
pub const DENSE_SOLVE_LIMIT: usize = 3000;
/// Relative residual every accepted solution must reach.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Dense up to [`DENSE_SOLVE_LIMIT`], sparse direct above.
    #[default]
    Auto,
    Dense,
    SparseDirect,
    Cg,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Vec<f64>,
    pub kind: SolverKind,
    pub relative_residual: f64,
}

fn relative_residual(a: &CoeffMatrix, x: &[f64], b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let ax = a.matvec(x)?;
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok((r, if bn == 0.0 { rn } else { rn / bn }))
}

pub fn solve(a: &CoeffMatrix, b: &[f64], kind: SolverKind) -> Result<Solution> {
    let n = b.len();
    let kind = match kind {
        SolverKind::Auto if n <= DENSE_SOLVE_LIMIT => SolverKind::Dense,
        SolverKind::Auto => SolverKind::SparseDirect,
        k => k,
    };
    if kind == SolverKind::Cg {
        let out = pcg_solve(a, b, 1e-12, 20 * n.max(50))?;
        let (_, rel) = relative_residual(a, &out.x, b)?;
        return Ok(Solution { x: out.x, kind, relative_residual: rel });
    }
    let f = if kind == SolverKind::Dense { Factorization::dense(a)? } else { Factorization::sparse(a)? };
    let mut x = f.solve(b);
    let (mut r, mut rel) = relative_residual(a, &x, b)?;
    let mut history = vec![rel];
    // A couple of refinement steps absorb the rounding of ill-conditioned systems.
    for _ in 0..3 {
        if rel <= SOLVE_TOLERANCE * 1e-2 {
            break;
        }
        let dx = f.solve(&r);
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(x, d)| x + d).collect();
        let (r2, rel2) = relative_residual(a, &candidate, b)?;
        history.push(rel2);
        if rel2 >= rel {
            break;
        }
        x = candidate;
        r = r2;
        rel = rel2;
    }
    if !(rel <= SOLVE_TOLERANCE) {
        return Err(Error::Solver { reason: format!("relative residual {rel:e} above {SOLVE_TOLERANCE:e}"), residuals: history });
    }
    Ok(Solution { x, kind, relative_residual: rel })
}
