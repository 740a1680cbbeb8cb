//! Maximal-regularity tensor-product B-spline space on a background mesh.
//!
//! Knots sit on the mesh lines and continue `p` spacings past each side of the
//! mesh rectangle, so every basis function is an untruncated uniform B-spline.
//! Basis `(bx, by)` is supported on elements `[bx - p, bx] x [by - p, by]`
//! and has the lexicographic index `by * (nx + p) + bx`.
//!
//! On element `(jx, jy)` the local function `(a, b)`, `0 <= a, b <= p`, is the
//! global function `(jx + a, jy + b)` and has local index `b * (p + 1) + a`.

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point};
use crate::linalg::small;
use crate::mesh::BackgroundMesh;
use crate::spline::{poly_deriv_eval, poly_eval, UniformBspline};

#[derive(Clone, Debug)]
pub struct SplineSpace {
    mesh: BackgroundMesh,
    degree: usize,
    spline: UniformBspline,
    nbx: usize,
    nby: usize,
    /// Row-major inverse of `L`, where `L[m][a]` is the `t^m` coefficient of local function `a`.
    monomial_to_local: Vec<f64>,
}

/// Values and gradients of all local functions at one point.
#[derive(Clone, Debug, Default)]
pub struct LocalValues {
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

impl SplineSpace {
    pub fn new(mesh: BackgroundMesh, degree: usize) -> Result<Self> {
        if !(1..=5).contains(&degree) {
            return Err(Error::Config(format!("polynomial degree must be in 1..=5, got {degree}")));
        }
        let spline = UniformBspline::new(degree);
        let n = degree + 1;
        let mut l = vec![0.0; n * n];
        for a in 0..n {
            for (m, &c) in spline.local(a).iter().enumerate() {
                l[m * n + a] = c;
            }
        }
        let monomial_to_local = small::invert(n, &l)
            .ok_or_else(|| Error::Internal("local B-spline pieces are linearly dependent".into()))?;
        let nbx = mesh.nx() + degree;
        let nby = mesh.ny() + degree;
        Ok(Self { mesh, degree, spline, nbx, nby, monomial_to_local })
    }

    pub fn mesh(&self) -> &BackgroundMesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn h(&self) -> f64 {
        self.mesh.h()
    }

    pub fn num_basis(&self) -> usize {
        self.nbx * self.nby
    }

    pub fn basis_grid(&self) -> (usize, usize) {
        (self.nbx, self.nby)
    }

    /// Number of local functions per element, `(p + 1)^2`.
    pub fn local_dim(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    pub fn basis_coords(&self, i: usize) -> (usize, usize) {
        (i % self.nbx, i / self.nbx)
    }

    pub fn basis_index(&self, bx: usize, by: usize) -> usize {
        by * self.nbx + bx
    }

    /// Global indices of the functions supported on element `e`, in local order.
    pub fn element_basis(&self, e: usize) -> Vec<usize> {
        let (jx, jy) = self.mesh.element_coords(e);
        let n = self.degree + 1;
        let mut out = Vec::with_capacity(n * n);
        for b in 0..n {
            for a in 0..n {
                out.push(self.basis_index(jx + a, jy + b));
            }
        }
        out
    }

    /// Local index of basis `i` on element `e`, if `e` lies in its support.
    pub fn local_position(&self, e: usize, i: usize) -> Option<usize> {
        let (jx, jy) = self.mesh.element_coords(e);
        let (bx, by) = self.basis_coords(i);
        let a = bx.checked_sub(jx)?;
        let b = by.checked_sub(jy)?;
        (a <= self.degree && b <= self.degree).then(|| b * (self.degree + 1) + a)
    }

    /// Elements of the background mesh inside the support of basis `i`.
    pub fn support_elements(&self, i: usize) -> Vec<usize> {
        let (bx, by) = self.basis_coords(i);
        let p = self.degree;
        let (x0, x1) = (bx.saturating_sub(p), bx.min(self.mesh.nx() - 1));
        let (y0, y1) = (by.saturating_sub(p), by.min(self.mesh.ny() - 1));
        let mut out = Vec::new();
        if x0 > x1 || y0 > y1 {
            return out;
        }
        for jy in y0..=y1 {
            for jx in x0..=x1 {
                out.push(self.mesh.element_index(jx, jy));
            }
        }
        out
    }

    /// Support rectangle of basis `i` (may extend past the mesh rectangle).
    pub fn support_box(&self, i: usize) -> BoundingBox {
        let (bx, by) = self.basis_coords(i);
        let h = self.h();
        let o = self.mesh.origin();
        let p = self.degree as f64;
        let min = Point::new(o.x + (bx as f64 - p) * h, o.y + (by as f64 - p) * h);
        BoundingBox { min, max: Point::new(min.x + (p + 1.0) * h, min.y + (p + 1.0) * h) }
    }

    /// Value and gradient of basis function `i` at `x`.
    pub fn eval_basis(&self, i: usize, x: Point) -> Result<(f64, [f64; 2])> {
        if i >= self.num_basis() {
            return Err(Error::IndexOutOfRange { index: i, len: self.num_basis() });
        }
        let h = self.h();
        let o = self.mesh.origin();
        let (bx, by) = self.basis_coords(i);
        let p = self.degree as f64;
        let u = (x.x - o.x) / h - (bx as f64 - p);
        let v = (x.y - o.y) / h - (by as f64 - p);
        let (fu, dfu) = (self.spline.eval(u), self.spline.eval_deriv(u, 1));
        let (fv, dfv) = (self.spline.eval(v), self.spline.eval_deriv(v, 1));
        Ok((fu * fv, [dfu * fv / h, fu * dfv / h]))
    }

    /// Local coordinates of `x` relative to element `e` (in `[0, 1]^2` when inside).
    pub fn local_coords(&self, e: usize, x: Point) -> (f64, f64) {
        let m = self.mesh.element_min(e);
        let h = self.h();
        ((x.x - m.x) / h, (x.y - m.y) / h)
    }

    /// Values and physical gradients of all local functions of `e` at `x`.
    /// `x` may lie outside `e`, in which case the element polynomials are extended.
    pub fn eval_local(&self, e: usize, x: Point, out: &mut LocalValues) {
        let (t, s) = self.local_coords(e, x);
        self.eval_local_ref(t, s, out);
    }

    /// As [`eval_local`](Self::eval_local) but in reference coordinates.
    pub fn eval_local_ref(&self, t: f64, s: f64, out: &mut LocalValues) {
        let n = self.degree + 1;
        let inv_h = 1.0 / self.h();
        let mut vx = [0.0; 6];
        let mut dx = [0.0; 6];
        let mut vy = [0.0; 6];
        let mut dy = [0.0; 6];
        for a in 0..n {
            let c = self.spline.local(a);
            vx[a] = poly_eval(c, t);
            dx[a] = poly_deriv_eval(c, t, 1) * inv_h;
            vy[a] = poly_eval(c, s);
            dy[a] = poly_deriv_eval(c, s, 1) * inv_h;
        }
        out.values.clear();
        out.grads.clear();
        for b in 0..n {
            for a in 0..n {
                out.values.push(vx[a] * vy[b]);
                out.grads.push([dx[a] * vy[b], vx[a] * dy[b]]);
            }
        }
    }

    /// Mixed partial `d^alpha/dx^alpha d^beta/dy^beta` of every local function
    /// at reference point `(t, s)`, in physical scaling.
    pub fn local_partials(&self, t: f64, s: f64, alpha: usize, beta: usize) -> Vec<f64> {
        let n = self.degree + 1;
        let h = self.h();
        let scale = h.powi(-((alpha + beta) as i32));
        let mut out = Vec::with_capacity(n * n);
        for b in 0..n {
            let fy = poly_deriv_eval(self.spline.local(b), s, beta);
            for a in 0..n {
                out.push(poly_deriv_eval(self.spline.local(a), t, alpha) * fy * scale);
            }
        }
        out
    }

    /// Monomial coefficients (in the reference coordinate) of local function `a`.
    pub fn local_poly(&self, a: usize) -> &[f64] {
        self.spline.local(a)
    }

    /// Coefficients in the local 1D basis of the polynomial with monomial coefficients `q`.
    pub fn monomial_to_local(&self, q: &[f64]) -> Vec<f64> {
        let n = self.degree + 1;
        let mut padded = vec![0.0; n];
        padded[..q.len()].copy_from_slice(q);
        small::mat_vec(n, n, &self.monomial_to_local, &padded)
    }

    pub fn univariate(&self) -> &UniformBspline {
        &self.spline
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(p: usize) -> SplineSpace {
        let mesh = BackgroundMesh::new(Point::new(0.0, 0.0), 0.25, 8, 8).unwrap();
        SplineSpace::new(mesh, p).unwrap()
    }

    #[test]
    fn element_index_sets() {
        for p in 1..=3 {
            let sp = space(p);
            let e = sp.mesh().element_index(3, 4);
            let ids = sp.element_basis(e);
            assert_eq!(ids.len(), (p + 1) * (p + 1));
            for (l, &i) in ids.iter().enumerate() {
                assert_eq!(sp.local_position(e, i), Some(l));
                assert!(sp.support_elements(i).contains(&e));
            }
        }
    }

    #[test]
    fn hat_peak_at_support_center() {
        let sp = space(1);
        let i = sp.basis_index(3, 3);
        let b = sp.support_box(i);
        let c = Point::new(0.5 * (b.min.x + b.max.x), 0.5 * (b.min.y + b.max.y));
        let (v, g) = sp.eval_basis(i, c).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        assert!(g[0].abs() < 1e-12 || (g[0].abs() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn local_matches_global_evaluation() {
        let sp = space(3);
        let e = sp.mesh().element_index(4, 2);
        let x = Point::new(sp.mesh().element_min(e).x + 0.07, sp.mesh().element_min(e).y + 0.19);
        let mut lv = LocalValues::default();
        sp.eval_local(e, x, &mut lv);
        for (l, &i) in sp.element_basis(e).iter().enumerate() {
            let (v, g) = sp.eval_basis(i, x).unwrap();
            assert!((v - lv.values[l]).abs() < 1e-14);
            assert!((g[0] - lv.grads[l][0]).abs() < 1e-12);
            assert!((g[1] - lv.grads[l][1]).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_index_is_an_error() {
        let sp = space(2);
        assert!(matches!(
            sp.eval_basis(sp.num_basis(), Point::new(0.5, 0.5)),
            Err(Error::IndexOutOfRange { .. })
        ));
    }
}
