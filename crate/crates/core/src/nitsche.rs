//! Symmetric Nitsche discretization of the Dirichlet problem for `-Δu = f`
//! on a trimmed domain, optionally on a parametrized surface.
//!
//! With metric `G` (the identity for flat domains) the forms are
//!
//! ```text
//! a(v, w) = (|G|^½ ∇v, G⁻¹∇w)_Ω − (|G|^½ n·G⁻¹∇v, w)_∂Ω − (|G|^½ v, n·G⁻¹∇w)_∂Ω + β/h (|G|^½ v, w)_∂Ω
//! l(w)    = (|G|^½ f, w)_Ω + (|G|^½ g, β/h w − n·G⁻¹∇w)_∂Ω
//! ```

use crate::active::Discretization;
use crate::error::{Error, Result};
use crate::extension::Extension;
use crate::geometry::{Metric, Point, SurfaceMap};
use crate::linalg::{solve, CoeffMatrix, SolverKind};
use crate::space::LocalValues;
use rand::{Rng, SeedableRng};

pub type ScalarField<'a> = &'a (dyn Fn(Point) -> f64 + Sync);

/// Default penalty `25 p^2`.
pub fn default_penalty(degree: usize) -> f64 {
    25.0 * (degree * degree) as f64
}

#[derive(Clone, Debug)]
pub struct NitscheSystem {
    /// Rows and columns are active dofs.
    pub matrix: CoeffMatrix,
    pub rhs: Vec<f64>,
    pub beta: f64,
}

fn metric_at(map: Option<&SurfaceMap>, x: Point) -> Result<Metric> {
    match map {
        None => Ok(Metric::IDENTITY),
        Some(m) => m.metric(x),
    }
}

/// Assembles the full (unreduced) system over all active dofs.
pub fn assemble(
    disc: &Discretization,
    f: ScalarField,
    g: ScalarField,
    beta: f64,
    map: Option<&SurfaceMap>,
) -> Result<NitscheSystem> {
    let active = &disc.active;
    let n = active.local_dim();
    let h = disc.h();
    let penalty = beta / h;
    let slots: Vec<usize> = (0..active.num_elements()).collect();
    let blocks = crate::par_map(&slots, |&k| -> Result<(Vec<f64>, Vec<f64>)> {
        let cell = disc.domain.cell(active.elements()[k]);
        let e = cell.element;
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n];
        let mut lv = LocalValues::default();
        let mut raised = vec![[0.0; 2]; n];
        for (x, w) in cell.volume.iter() {
            let m = metric_at(map, x)?;
            disc.space.eval_local(e, x, &mut lv);
            let wa = w * m.area;
            for i in 0..n {
                raised[i] = m.raise(lv.grads[i]);
            }
            for i in 0..n {
                let gi = lv.grads[i];
                for j in i..n {
                    a[i * n + j] += wa * (gi[0] * raised[j][0] + gi[1] * raised[j][1]);
                }
            }
            let fx = f(x);
            for i in 0..n {
                b[i] += wa * fx * lv.values[i];
            }
        }
        let rule = &cell.boundary;
        let mut q = vec![0.0; n];
        for ((&x, &w), &nrm) in rule.points.iter().zip(&rule.weights).zip(&rule.normals) {
            let m = metric_at(map, x)?;
            disc.space.eval_local(e, x, &mut lv);
            let wa = w * m.area;
            for i in 0..n {
                let r = m.raise(lv.grads[i]);
                q[i] = nrm.x * r[0] + nrm.y * r[1];
            }
            for i in 0..n {
                let vi = lv.values[i];
                for j in i..n {
                    let vj = lv.values[j];
                    a[i * n + j] += wa * (penalty * vi * vj - q[j] * vi - vj * q[i]);
                }
            }
            let gx = g(x);
            for i in 0..n {
                b[i] += wa * gx * (penalty * lv.values[i] - q[i]);
            }
        }
        for i in 0..n {
            for j in 0..i {
                a[i * n + j] = a[j * n + i];
            }
        }
        Ok((a, b))
    });
    let mut trips = Vec::with_capacity(active.num_elements() * n * n);
    let mut rhs = vec![0.0; active.num_dofs()];
    for (k, block) in blocks.into_iter().enumerate() {
        let (a, b) = block?;
        let dofs = active.element_dofs(k);
        for i in 0..n {
            rhs[dofs[i]] += b[i];
            for j in 0..n {
                trips.push((dofs[i], dofs[j], a[i * n + j]));
            }
        }
    }
    let matrix = CoeffMatrix::from_triplets(active.num_dofs(), active.num_dofs(), &trips)?;
    Ok(NitscheSystem { matrix, rhs, beta })
}

#[derive(Clone, Debug)]
pub struct ReducedSolution {
    /// `Eᵀ A E`
    pub matrix: CoeffMatrix,
    /// Coefficients of the large dofs.
    pub reduced: Vec<f64>,
    /// `E` applied to `reduced`: coefficients of all active dofs.
    pub full: Vec<f64>,
    pub relative_residual: f64,
    pub solver: SolverKind,
}

/// Reduced stiffness matrix `Eᵀ A E`.
pub fn reduced_matrix(sys: &NitscheSystem, eh: &CoeffMatrix) -> Result<CoeffMatrix> {
    CoeffMatrix::triple_product(eh, &sys.matrix)
}

/// Solves `(Eᵀ A E) u = Eᵀ b` and expands the result with `E`.
pub fn solve_reduced(sys: &NitscheSystem, eh: &CoeffMatrix, kind: SolverKind) -> Result<ReducedSolution> {
    let matrix = reduced_matrix(sys, eh)?;
    let rhs = eh.transpose_matvec(&sys.rhs)?;
    let sol = solve(&matrix, &rhs, kind)?;
    let full = eh.matvec(&sol.x)?;
    Ok(ReducedSolution { matrix, reduced: sol.x, full, relative_residual: sol.relative_residual, solver: sol.kind })
}

/// `(‖u − u_h‖_{L2(Ω)}, ‖∇(u − u_h)‖_{L2(Ω)})` in the reference domain.
pub fn error_norms(
    disc: &Discretization,
    coeffs: &[f64],
    exact: &(dyn Fn(Point) -> (f64, [f64; 2]) + Sync),
) -> (f64, f64) {
    let active = &disc.active;
    let n = active.local_dim();
    let slots: Vec<usize> = (0..active.num_elements()).collect();
    let parts = crate::par_map(&slots, |&k| {
        let cell = disc.domain.cell(active.elements()[k]);
        let dofs = active.element_dofs(k);
        let mut lv = LocalValues::default();
        let (mut l2, mut h1) = (0.0, 0.0);
        for (x, w) in cell.volume.iter() {
            disc.space.eval_local(cell.element, x, &mut lv);
            let (mut v, mut g) = (0.0, [0.0; 2]);
            for l in 0..n {
                let c = coeffs[dofs[l]];
                v += c * lv.values[l];
                g[0] += c * lv.grads[l][0];
                g[1] += c * lv.grads[l][1];
            }
            let (u, du) = exact(x);
            l2 += w * (u - v) * (u - v);
            h1 += w * ((du[0] - g[0]).powi(2) + (du[1] - g[1]).powi(2));
        }
        (l2, h1)
    });
    let (l2, h1) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    (l2.sqrt(), h1.sqrt())
}

/// `(h ‖∇_n v‖²_∂Ω, ‖∇v‖²_Ω)` for the spline with active coefficients `coeffs`.
pub fn normal_derivative_energy(disc: &Discretization, coeffs: &[f64], map: Option<&SurfaceMap>) -> Result<(f64, f64)> {
    let active = &disc.active;
    let n = active.local_dim();
    let mut lv = LocalValues::default();
    let (mut bnd, mut vol) = (0.0, 0.0);
    for k in 0..active.num_elements() {
        let cell = disc.domain.cell(active.elements()[k]);
        let dofs = active.element_dofs(k);
        let grad = |lv: &LocalValues| {
            let mut g = [0.0; 2];
            for l in 0..n {
                g[0] += coeffs[dofs[l]] * lv.grads[l][0];
                g[1] += coeffs[dofs[l]] * lv.grads[l][1];
            }
            g
        };
        for (x, w) in cell.volume.iter() {
            let m = metric_at(map, x)?;
            disc.space.eval_local(cell.element, x, &mut lv);
            let g = grad(&lv);
            let r = m.raise(g);
            vol += w * m.area * (g[0] * r[0] + g[1] * r[1]);
        }
        let rule = &cell.boundary;
        for ((&x, &w), &nrm) in rule.points.iter().zip(&rule.weights).zip(&rule.normals) {
            let m = metric_at(map, x)?;
            disc.space.eval_local(cell.element, x, &mut lv);
            let r = m.raise(grad(&lv));
            let dn = nrm.x * r[0] + nrm.y * r[1];
            bnd += w * m.area * dn * dn;
        }
    }
    Ok((disc.h() * bnd, vol))
}

/// Largest `h ‖∇_n v‖²_∂Ω / ‖∇v‖²_Ω` over `samples` random extended splines.
pub fn inverse_inequality_ratio(
    disc: &Discretization,
    ext: &Extension,
    map: Option<&SurfaceMap>,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let large: Vec<f64> = (0..ext.eh.ncols()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = ext.extend(&large)?;
        let (bnd, vol) = normal_derivative_energy(disc, &v, map)?;
        if vol <= 0.0 {
            return Err(Error::Internal("random spline has zero gradient energy".into()));
        }
        worst = worst.max(bnd / vol);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryCurve;
    use crate::interpolation::WeightMode;
    use crate::problems::{Benchmark, Polynomial, SmoothFunction};

    fn disc(center: Point, r: f64, h: f64, p: usize) -> Discretization {
        let poly = BoundaryCurve::circle(center, r).unwrap().polygon_for_mesh(h, 8, 400).unwrap();
        Discretization::new(poly, h, Point::new(0.29 * h, 0.53 * h), p, p + 2).unwrap()
    }

    fn solve_with(d: &Discretization, u: &dyn SmoothFunction, map: Option<&SurfaceMap>, gamma: f64) -> Vec<f64> {
        let f = |x: Point| u.source(x, map);
        let g = |x: Point| u.value(x);
        let sys = assemble(d, &f, &g, default_penalty(d.degree()), map).unwrap();
        let ext = Extension::new(d, gamma, WeightMode::CutArea, true).unwrap();
        solve_reduced(&sys, &ext.eh, SolverKind::Dense).unwrap().full
    }

    #[test]
    fn matrix_is_symmetric_and_zero_data_gives_zero_load() {
        let d = disc(Point::new(0.0, 0.0), 0.75, 0.125, 2);
        let zero = |_: Point| 0.0;
        let sys = assemble(&d, &zero, &zero, 100.0, None).unwrap();
        assert_eq!(sys.matrix.asymmetry(), 0.0);
        assert!(sys.rhs.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn polynomial_solutions_are_reproduced() {
        for p in 1..=3 {
            let d = disc(Point::new(0.0, 0.0), 0.75, 0.125, p);
            let u = Polynomial(vec![(0.5, 0, 0), (1.0, p as i32, 0), (-0.7, 0, p as i32), (0.3, 1, 1)]);
            let uh = solve_with(&d, &u, None, 0.5);
            let (l2, h1) = error_norms(&d, &uh, &|x| (u.value(x), u.gradient(x)));
            assert!(l2 < 1e-9 && h1 < 1e-8, "p={p}: {l2} {h1}");
        }
    }

    #[test]
    fn identity_map_matches_flat_assembly_bitwise() {
        let d = disc(Point::new(0.0, 0.0), 0.75, 0.125, 2);
        let u = Benchmark;
        let f = |x: Point| u.source(x, None);
        let g = |x: Point| u.value(x);
        let flat = assemble(&d, &f, &g, 100.0, None).unwrap();
        let mapped = assemble(&d, &f, &g, 100.0, Some(&SurfaceMap::identity())).unwrap();
        assert_eq!(flat.matrix, mapped.matrix);
        assert_eq!(flat.rhs, mapped.rhs);
    }

    #[test]
    fn constants_solve_exactly_on_the_cone() {
        let map = SurfaceMap::cone();
        let d = disc(Point::new(0.5, 0.5), 0.35, 0.0625, 2);
        let c = Polynomial(vec![(1.7, 0, 0)]);
        let uh = solve_with(&d, &c, Some(&map), 1.0);
        assert!(uh.iter().all(|&x| (x - 1.7).abs() < 1e-9));
    }

    #[test]
    fn inverse_ratio_is_scale_invariant() {
        let d = disc(Point::new(0.0, 0.0), 0.75, 0.125, 2);
        let ext = Extension::new(&d, 0.5, WeightMode::CutArea, true).unwrap();
        let v: Vec<f64> = (0..ext.eh.ncols()).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let full = ext.extend(&v).unwrap();
        let scaled: Vec<f64> = full.iter().map(|x| 10.0 * x).collect();
        let (b1, v1) = normal_derivative_energy(&d, &full, None).unwrap();
        let (b2, v2) = normal_derivative_energy(&d, &scaled, None).unwrap();
        assert!(((b1 / v1) - (b2 / v2)).abs() < 1e-12 * (b1 / v1));
        let r = inverse_inequality_ratio(&d, &ext, None, 10, 3).unwrap();
        assert!(r.is_finite() && r > 0.0);
    }
}
