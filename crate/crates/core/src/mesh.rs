//! Uniform background mesh of square elements.

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point};

/// Element `(jx, jy)` occupies `[origin + (jx, jy) h, origin + (jx + 1, jy + 1) h]`.
/// Elements are numbered `jy * nx + jx`.
#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundMesh {
    origin: Point,
    h: f64,
    nx: usize,
    ny: usize,
    shift: Point,
}

impl BackgroundMesh {
    pub fn new(origin: Point, h: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Config(format!("mesh size must be positive, got {h}")));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::Config("mesh needs at least one element per axis".into()));
        }
        Ok(Self { origin, h, nx, ny, shift: Point::default() })
    }

    /// Smallest mesh aligned to the lattice `shift + h Z^2` that contains `bbox`
    /// with `margin` extra element layers on every side.
    pub fn covering(bbox: BoundingBox, h: f64, shift: Point, margin: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Config(format!("mesh size must be positive, got {h}")));
        }
        if !(0.0..h).contains(&shift.x) || !(0.0..h).contains(&shift.y) {
            return Err(Error::Config(format!(
                "shift ({}, {}) must lie in [0, h)^2 with h = {h}",
                shift.x, shift.y
            )));
        }
        let m = margin as f64;
        let kx = ((bbox.min.x - shift.x) / h).floor() - m;
        let ky = ((bbox.min.y - shift.y) / h).floor() - m;
        let origin = Point::new(shift.x + kx * h, shift.y + ky * h);
        let nx = ((bbox.max.x - origin.x) / h).ceil() as usize + margin;
        let ny = ((bbox.max.y - origin.y) / h).ceil() as usize + margin;
        Ok(Self { origin, h, nx: nx.max(1), ny: ny.max(1), shift })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn shift(&self) -> Point {
        self.shift
    }

    pub fn num_elements(&self) -> usize {
        self.nx * self.ny
    }

    pub fn element_index(&self, jx: usize, jy: usize) -> usize {
        jy * self.nx + jx
    }

    pub fn element_coords(&self, e: usize) -> (usize, usize) {
        (e % self.nx, e / self.nx)
    }

    pub fn element_min(&self, e: usize) -> Point {
        let (jx, jy) = self.element_coords(e);
        Point::new(self.origin.x + jx as f64 * self.h, self.origin.y + jy as f64 * self.h)
    }

    pub fn element_max(&self, e: usize) -> Point {
        let m = self.element_min(e);
        Point::new(m.x + self.h, m.y + self.h)
    }

    pub fn element_center(&self, e: usize) -> Point {
        let m = self.element_min(e);
        Point::new(m.x + 0.5 * self.h, m.y + 0.5 * self.h)
    }

    pub fn bounding_box(&self) -> BoundingBox {
        BoundingBox {
            min: self.origin,
            max: Point::new(
                self.origin.x + self.nx as f64 * self.h,
                self.origin.y + self.ny as f64 * self.h,
            ),
        }
    }

    /// Element containing `x`; points on a shared edge go to the upper/right element.
    pub fn locate(&self, x: Point) -> Option<(usize, usize)> {
        let fx = ((x.x - self.origin.x) / self.h).floor();
        let fy = ((x.y - self.origin.y) / self.h).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    /// Like [`locate`](Self::locate) but clamps points on the far boundary inward.
    pub fn locate_clamped(&self, x: Point) -> Option<(usize, usize)> {
        let fx = ((x.x - self.origin.x) / self.h).floor();
        let fy = ((x.y - self.origin.y) / self.h).floor();
        let tol = 1e-12 * (self.nx.max(self.ny) as f64);
        let clamp = |f: f64, n: usize, raw: f64| -> Option<usize> {
            if f >= 0.0 && f < n as f64 {
                Some(f as usize)
            } else if f == n as f64 && raw <= n as f64 + tol {
                Some(n - 1)
            } else if f == -1.0 && raw >= -tol {
                Some(0)
            } else {
                None
            }
        };
        let rx = (x.x - self.origin.x) / self.h;
        let ry = (x.y - self.origin.y) / self.h;
        Some((clamp(fx, self.nx, rx)?, clamp(fy, self.ny, ry)?))
    }

    /// Same mesh translated by `delta`.
    pub fn translated(&self, delta: Point) -> Self {
        Self { origin: self.origin + delta, ..self.clone() }
    }
}
