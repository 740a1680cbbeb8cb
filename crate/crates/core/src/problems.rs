//! Manufactured solutions and built-in domains.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, Point, SurfaceMap};

/// Smooth function with its first and second partials.
pub trait SmoothFunction: Sync {
    fn value(&self, x: Point) -> f64;
    fn gradient(&self, x: Point) -> [f64; 2];
    /// `[u_xx, u_xy, u_yy]`
    fn hessian(&self, x: Point) -> [f64; 3];

    /// `-Δu`, or `-Δ_Γ u` in reference coordinates when a map is given.
    fn source(&self, x: Point, map: Option<&SurfaceMap>) -> f64 {
        let d2 = self.hessian(x);
        match map {
            None => -(d2[0] + d2[2]),
            Some(m) => -m.laplace_beltrami(x, self.gradient(x), d2),
        }
    }
}

/// `(sin 2x + x cos 3y) / 10`
#[derive(Clone, Copy, Debug, Default)]
pub struct Benchmark;

impl SmoothFunction for Benchmark {
    fn value(&self, x: Point) -> f64 {
        ((2.0 * x.x).sin() + x.x * (3.0 * x.y).cos()) / 10.0
    }

    fn gradient(&self, x: Point) -> [f64; 2] {
        [(2.0 * (2.0 * x.x).cos() + (3.0 * x.y).cos()) / 10.0, -3.0 * x.x * (3.0 * x.y).sin() / 10.0]
    }

    fn hessian(&self, x: Point) -> [f64; 3] {
        [-4.0 * (2.0 * x.x).sin() / 10.0, -3.0 * (3.0 * x.y).sin() / 10.0, -9.0 * x.x * (3.0 * x.y).cos() / 10.0]
    }
}

/// `c0 + c1 x + c2 y + ...`: a polynomial given by `(coefficient, power of x, power of y)` terms.
#[derive(Clone, Debug)]
pub struct Polynomial(pub Vec<(f64, i32, i32)>);

impl SmoothFunction for Polynomial {
    fn value(&self, x: Point) -> f64 {
        self.0.iter().map(|&(c, a, b)| c * x.x.powi(a) * x.y.powi(b)).sum()
    }

    fn gradient(&self, x: Point) -> [f64; 2] {
        let mut g = [0.0; 2];
        for &(c, a, b) in &self.0 {
            if a > 0 {
                g[0] += c * a as f64 * x.x.powi(a - 1) * x.y.powi(b);
            }
            if b > 0 {
                g[1] += c * b as f64 * x.x.powi(a) * x.y.powi(b - 1);
            }
        }
        g
    }

    fn hessian(&self, x: Point) -> [f64; 3] {
        let mut d = [0.0; 3];
        for &(c, a, b) in &self.0 {
            let (af, bf) = (a as f64, b as f64);
            if a > 1 {
                d[0] += c * af * (af - 1.0) * x.x.powi(a - 2) * x.y.powi(b);
            }
            if a > 0 && b > 0 {
                d[1] += c * af * bf * x.x.powi(a - 1) * x.y.powi(b - 1);
            }
            if b > 1 {
                d[2] += c * bf * (bf - 1.0) * x.x.powi(a) * x.y.powi(b - 2);
            }
        }
        d
    }
}

/// A named built-in domain: boundary curve and optional surface map.
#[derive(Clone, Debug)]
pub struct NamedDomain {
    pub curve: BoundaryCurve,
    pub map: Option<SurfaceMap>,
}

/// `bean`, `circle` or `cone-circle`.
pub fn named_domain(name: &str) -> Result<NamedDomain> {
    match name {
        "bean" => Ok(NamedDomain { curve: BoundaryCurve::bean(), map: None }),
        "circle" => Ok(NamedDomain { curve: BoundaryCurve::circle(Point::new(0.0, 0.0), 0.75)?, map: None }),
        "cone-circle" => Ok(NamedDomain {
            curve: BoundaryCurve::circle(Point::new(0.5, 0.5), 0.35)?,
            map: Some(SurfaceMap::cone()),
        }),
        other => Err(Error::Config(format!("unknown domain '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_derivatives_match_differences() {
        let u = Benchmark;
        let e = 1e-5;
        for &(x, y) in &[(0.3, -0.2), (-0.7, 0.5), (1.1, 0.05)] {
            let p = Point::new(x, y);
            let g = u.gradient(p);
            let dx = (u.value(Point::new(x + e, y)) - u.value(Point::new(x - e, y))) / (2.0 * e);
            let dy = (u.value(Point::new(x, y + e)) - u.value(Point::new(x, y - e))) / (2.0 * e);
            assert!((g[0] - dx).abs() < 1e-9 && (g[1] - dy).abs() < 1e-9);
            let h = u.hessian(p);
            let dxx = (u.gradient(Point::new(x + e, y))[0] - u.gradient(Point::new(x - e, y))[0]) / (2.0 * e);
            let dxy = (u.gradient(Point::new(x, y + e))[0] - u.gradient(Point::new(x, y - e))[0]) / (2.0 * e);
            let dyy = (u.gradient(Point::new(x, y + e))[1] - u.gradient(Point::new(x, y - e))[1]) / (2.0 * e);
            assert!((h[0] - dxx).abs() < 1e-9 && (h[1] - dxy).abs() < 1e-9 && (h[2] - dyy).abs() < 1e-9);
        }
    }

    #[test]
    fn cone_laplacian_matches_divergence_form() {
        // Δ_Γ u = |G|^-½ div(|G|^½ G⁻¹ ∇u), evaluated by central differences.
        let map = SurfaceMap::cone();
        let u = Benchmark;
        let flux = |p: Point| {
            let m = map.metric(p).unwrap();
            let r = m.raise(u.gradient(p));
            [m.area * r[0], m.area * r[1]]
        };
        let e = 1e-5;
        for &(x, y) in &[(0.4, 0.5), (0.6, 0.3), (0.5, 0.75)] {
            let p = Point::new(x, y);
            let div = (flux(Point::new(x + e, y))[0] - flux(Point::new(x - e, y))[0]) / (2.0 * e)
                + (flux(Point::new(x, y + e))[1] - flux(Point::new(x, y - e))[1]) / (2.0 * e);
            let lb = div / map.metric(p).unwrap().area;
            assert!((lb + u.source(p, Some(&map))).abs() < 1e-7);
        }
    }
}
