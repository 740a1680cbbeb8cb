//! Closed parametric boundary curves and their polygonal flattening.

use super::{Point, Polygon};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Periodic C2 cubic spline through `(t_i, y_i)` with period `period`.
#[derive(Clone, Debug)]
struct PeriodicCubic {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    moments: Vec<f64>,
    period: f64,
}

impl PeriodicCubic {
    fn new(knots: &[f64], values: &[f64], period: f64) -> Result<Self> {
        let n = knots.len();
        let step = |i: usize| {
            if i + 1 < n {
                knots[i + 1] - knots[i]
            } else {
                knots[0] + period - knots[n - 1]
            }
        };
        let y = |i: usize| values[i % n];
        let mut a = vec![0.0; n * n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let (hp, hi) = (step(prev), step(i));
            a[i * n + prev] += hp;
            a[i * n + i] += 2.0 * (hp + hi);
            a[i * n + (i + 1) % n] += hi;
            rhs[i] = 6.0 * ((y(i + 1) - y(i)) / hi - (y(i) - y(prev)) / hp);
        }
        let inv = crate::linalg::small::invert(n, &a)
            .ok_or_else(|| Error::Geometry("periodic spline system is singular".into()))?;
        let moments = crate::linalg::small::mat_vec(n, n, &inv, &rhs);
        Ok(Self { knots: knots.to_vec(), values: values.to_vec(), moments, period })
    }

    /// Interval index and local offsets `(i, a, b, h)` with `a = t_{i+1} - t`, `b = t - t_i`.
    fn locate(&self, t: f64) -> (usize, f64, f64, f64) {
        let n = self.knots.len();
        let t0 = self.knots[0];
        let t = t0 + (t - t0).rem_euclid(self.period);
        let i = match self.knots.partition_point(|&k| k <= t) {
            0 => n - 1,
            k => k - 1,
        };
        let next = if i + 1 < n { self.knots[i + 1] } else { t0 + self.period };
        (i, next - t, t - self.knots[i], next - self.knots[i])
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.knots.len();
        let (i, a, b, h) = self.locate(t);
        let j = (i + 1) % n;
        let (mi, mj) = (self.moments[i], self.moments[j]);
        let ci = self.values[i] / h - mi * h / 6.0;
        let cj = self.values[j] / h - mj * h / 6.0;
        let v = mi * a * a * a / (6.0 * h) + mj * b * b * b / (6.0 * h) + ci * a + cj * b;
        let d = -mi * a * a / (2.0 * h) + mj * b * b / (2.0 * h) - ci + cj;
        (v, d)
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Spline { x: PeriodicCubic, y: PeriodicCubic },
    Circle { center: Point, radius: f64 },
}

/// Closed curve `[start, start + period) -> R^2`. Orientation is detected at
/// construction so that [`outward_normal`](Self::outward_normal) and
/// [`polygon`](Self::polygon) are correct for either traversal direction.
#[derive(Clone, Debug)]
pub struct BoundaryCurve {
    shape: Shape,
    start: f64,
    period: f64,
    counter_clockwise: bool,
}

/// Segments used for the orientation and simplicity checks.
const CHECK_SEGMENTS: usize = 4000;

impl BoundaryCurve {
    /// Periodic cubic spline through `(theta, x, y)` records with period `2 pi`.
    /// Parameters are reduced modulo `2 pi`; repeated parameters must repeat the point.
    pub fn from_records(records: &[(f64, f64, f64)]) -> Result<Self> {
        let period = 2.0 * PI;
        let mut data: Vec<(f64, Point)> = Vec::with_capacity(records.len());
        for &(t, x, y) in records {
            if !(t.is_finite() && x.is_finite() && y.is_finite()) {
                return Err(Error::Geometry("boundary records must be finite".into()));
            }
            data.push((t.rem_euclid(period), Point::new(x, y)));
        }
        data.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut unique: Vec<(f64, Point)> = Vec::with_capacity(data.len());
        for (t, p) in data {
            let same = unique.last().map(|&(s, _)| (t - s).abs() < 1e-12);
            let wraps = unique.first().map(|&(s, _)| (s + period - t).abs() < 1e-12);
            let prev = if same == Some(true) {
                unique.last().copied()
            } else if wraps == Some(true) {
                unique.first().copied()
            } else {
                None
            };
            match prev {
                Some((_, q)) if q.dist(p) > 1e-12 => {
                    return Err(Error::Geometry(format!(
                        "parameter {t} is given two different points ({}, {}) and ({}, {})",
                        q.x, q.y, p.x, p.y
                    )))
                }
                Some(_) => {}
                None => unique.push((t, p)),
            }
        }
        if unique.len() < 3 {
            return Err(Error::Geometry("a closed spline boundary needs at least three distinct records".into()));
        }
        let knots: Vec<f64> = unique.iter().map(|r| r.0).collect();
        let xs: Vec<f64> = unique.iter().map(|r| r.1.x).collect();
        let ys: Vec<f64> = unique.iter().map(|r| r.1.y).collect();
        let shape = Shape::Spline {
            x: PeriodicCubic::new(&knots, &xs, period)?,
            y: PeriodicCubic::new(&knots, &ys, period)?,
        };
        let curve = Self::oriented(shape, knots[0], period)?;
        if !curve.polygon(CHECK_SEGMENTS)?.is_simple() {
            return Err(Error::Geometry("boundary curve intersects itself".into()));
        }
        Ok(curve)
    }

    /// The bean-shaped benchmark boundary.
    pub fn bean() -> Self {
        let records = [
            (0.0, 1.0, 0.0),
            (-PI / 2.0, 0.0, -0.8),
            (PI / 20.0, 0.7, -0.1),
            (PI / 4.0, 0.1, 0.1),
            (PI / 2.0, -0.3, 0.7),
            (PI, -0.8, 0.0),
            (3.0 * PI / 2.0, 0.0, -0.8),
            (0.0, 1.0, 0.0),
        ];
        Self::from_records(&records).expect("built-in boundary data is valid")
    }

    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Geometry(format!("circle radius must be positive, got {radius}")));
        }
        Ok(Self { shape: Shape::Circle { center, radius }, start: 0.0, period: 2.0 * PI, counter_clockwise: true })
    }

    fn oriented(shape: Shape, start: f64, period: f64) -> Result<Self> {
        let mut curve = Self { shape, start, period, counter_clockwise: true };
        let pts: Vec<Point> = (0..CHECK_SEGMENTS).map(|k| curve.point(curve.param(k, CHECK_SEGMENTS))).collect();
        let area = super::polygon::signed_area(&pts);
        if area == 0.0 || !area.is_finite() {
            return Err(Error::Geometry("boundary curve encloses no area".into()));
        }
        curve.counter_clockwise = area > 0.0;
        Ok(curve)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn is_counter_clockwise(&self) -> bool {
        self.counter_clockwise
    }

    fn param(&self, k: usize, n: usize) -> f64 {
        self.start + self.period * k as f64 / n as f64
    }

    pub fn point(&self, t: f64) -> Point {
        match &self.shape {
            Shape::Spline { x, y } => Point::new(x.eval(t).0, y.eval(t).0),
            Shape::Circle { center, radius } => *center + Point::new(t.cos(), t.sin()) * *radius,
        }
    }

    /// Derivative with respect to the curve parameter.
    pub fn tangent(&self, t: f64) -> Point {
        match &self.shape {
            Shape::Spline { x, y } => Point::new(x.eval(t).1, y.eval(t).1),
            Shape::Circle { radius, .. } => Point::new(-t.sin(), t.cos()) * *radius,
        }
    }

    pub fn outward_normal(&self, t: f64) -> Point {
        let d = self.tangent(t);
        let n = Point::new(d.y, -d.x) * (1.0 / d.norm());
        if self.counter_clockwise {
            n
        } else {
            -n
        }
    }

    /// Counter-clockwise polygon through `segments` points equally spaced in the parameter.
    pub fn polygon(&self, segments: usize) -> Result<Polygon> {
        let pts: Vec<Point> = (0..segments).map(|k| self.point(self.param(k, segments))).collect();
        Polygon::new_ccw(pts)
    }

    /// Flattening with segments no longer than `h / per_h` (and at least `min_segments`).
    pub fn polygon_for_mesh(&self, h: f64, per_h: usize, min_segments: usize) -> Result<Polygon> {
        if !(h > 0.0) || per_h == 0 {
            return Err(Error::Config("boundary resolution needs h > 0 and at least one segment per element".into()));
        }
        let speed = (0..CHECK_SEGMENTS)
            .map(|k| self.tangent(self.param(k, CHECK_SEGMENTS)).norm())
            .fold(0.0, f64::max);
        let target = h / per_h as f64;
        let n = ((1.05 * speed * self.period / target).ceil() as usize).max(min_segments);
        self.polygon(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bean_interpolates_data() {
        let bean = BoundaryCurve::bean();
        for (t, x, y) in [(0.0, 1.0, 0.0), (PI, -0.8, 0.0), (PI / 20.0, 0.7, -0.1), (-PI / 2.0, 0.0, -0.8)] {
            let p = bean.point(t);
            assert!((p.x - x).abs() < 1e-13 && (p.y - y).abs() < 1e-13, "{t}: {p:?}");
        }
        let a = bean.point(bean.start());
        let b = bean.point(bean.start() + bean.period());
        assert!(a.dist(b) < 1e-12);
    }

    #[test]
    fn spline_derivative_matches_difference_quotient() {
        let bean = BoundaryCurve::bean();
        for k in 0..50 {
            let t = 0.1257 * k as f64;
            let eps = 1e-6;
            let fd = (bean.point(t + eps) - bean.point(t - eps)) * (0.5 / eps);
            assert!(fd.dist(bean.tangent(t)) < 1e-7);
        }
    }

    #[test]
    fn periodic_spline_is_c2_at_knots() {
        let s = PeriodicCubic::new(&[0.0, 1.0, 2.5, 4.0], &[1.0, -1.0, 0.5, 2.0], 5.0).unwrap();
        let e = 1e-7;
        for &t in &[1.0, 2.5, 4.0, 5.0] {
            let (l, r) = (s.eval(t - e), s.eval(t + e));
            assert!((l.0 - r.0).abs() < 1e-6 && (l.1 - r.1).abs() < 1e-5);
        }
    }

    #[test]
    fn rejects_conflicting_records() {
        let r = [(0.0, 1.0, 0.0), (2.0, 0.0, 1.0), (4.0, -1.0, 0.0), (2.0 * PI, 0.5, 0.0)];
        assert!(BoundaryCurve::from_records(&r).is_err());
    }

    #[test]
    fn circle_normal_points_outward() {
        let c = BoundaryCurve::circle(Point::new(1.0, 2.0), 0.5).unwrap();
        let n = c.outward_normal(0.3);
        let radial = c.point(0.3) - Point::new(1.0, 2.0);
        assert!((n.dot(radial) - 0.5).abs() < 1e-14);
    }
}
