//! Parametrized surfaces over a planar reference domain.

use super::Point;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// First fundamental form at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metric {
    pub g: [[f64; 2]; 2],
    pub inv: [[f64; 2]; 2],
    /// `sqrt(det g)`
    pub area: f64,
}

impl Metric {
    pub const IDENTITY: Metric = Metric { g: [[1.0, 0.0], [0.0, 1.0]], inv: [[1.0, 0.0], [0.0, 1.0]], area: 1.0 };

    pub fn from_jacobian(j: &[[f64; 2]; 3]) -> Result<Self> {
        let mut g = [[0.0; 2]; 2];
        for (a, row) in g.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| j[k][a] * j[k][b]).sum();
            }
        }
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        if !(det > 0.0 && det.is_finite()) {
            return Err(Error::Geometry(format!("surface metric is not positive definite (det = {det})")));
        }
        let inv = [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]];
        Ok(Self { g, inv, area: det.sqrt() })
    }

    /// `inv * v`
    pub fn raise(&self, v: [f64; 2]) -> [f64; 2] {
        [self.inv[0][0] * v[0] + self.inv[0][1] * v[1], self.inv[1][0] * v[0] + self.inv[1][1] * v[1]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Identity,
    /// Cone with apex at the origin and axis `-z`. Reference `x` is the
    /// angular coordinate (scaled by `sweep`), reference `y` the distance
    /// from the apex minus `offset`.
    Cone { half_angle: f64, sweep: f64, offset: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceMap {
    kind: Kind,
}

impl SurfaceMap {
    pub fn identity() -> Self {
        Self { kind: Kind::Identity }
    }

    /// Half of a cone with opening half-angle 30 degrees over the unit square.
    pub fn cone() -> Self {
        Self { kind: Kind::Cone { half_angle: PI / 6.0, sweep: PI, offset: 0.5 } }
    }

    pub fn is_identity(&self) -> bool {
        self.kind == Kind::Identity
    }

    pub fn eval(&self, x: Point) -> [f64; 3] {
        match self.kind {
            Kind::Identity => [x.x, x.y, 0.0],
            Kind::Cone { half_angle, sweep, offset } => {
                let s = offset + x.y;
                let (sp, cp) = half_angle.sin_cos();
                let (sa, ca) = (sweep * x.x).sin_cos();
                [s * sp * ca, s * sp * sa, -s * cp]
            }
        }
    }

    /// Rows are the 3D components, columns the reference directions.
    pub fn jacobian(&self, x: Point) -> [[f64; 2]; 3] {
        match self.kind {
            Kind::Identity => [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
            Kind::Cone { half_angle, sweep, offset } => {
                let s = offset + x.y;
                let (sp, cp) = half_angle.sin_cos();
                let (sa, ca) = (sweep * x.x).sin_cos();
                [[-s * sp * sweep * sa, sp * ca], [s * sp * sweep * ca, sp * sa], [0.0, -cp]]
            }
        }
    }

    pub fn metric(&self, x: Point) -> Result<Metric> {
        match self.kind {
            Kind::Identity => Ok(Metric::IDENTITY),
            Kind::Cone { .. } => Metric::from_jacobian(&self.jacobian(x)).map_err(|e| match e {
                Error::Geometry(msg) => Error::Geometry(format!("{msg} at ({}, {})", x.x, x.y)),
                other => other,
            }),
        }
    }

    /// Laplace-Beltrami operator of `u` in reference coordinates, given the
    /// value of its first and second partials `[u_x, u_y]`, `[u_xx, u_xy, u_yy]`.
    pub fn laplace_beltrami(&self, x: Point, du: [f64; 2], d2u: [f64; 3]) -> f64 {
        match self.kind {
            Kind::Identity => d2u[0] + d2u[2],
            Kind::Cone { half_angle, sweep, offset } => {
                let s = offset + x.y;
                let c = sweep * half_angle.sin();
                d2u[0] / (c * c * s * s) + du[1] / s + d2u[2]
            }
        }
    }
}
