//! Closed polygons, rectangle clipping and polygon quadrature.

use super::{BoundingBox, Point};
use crate::error::{Error, Result};
use crate::quadrature::{GaussRule, QuadRule2d};

/// Closed polygon; the closing edge from the last vertex back to the first is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() >= 2 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        vertices.dedup();
        if vertices.len() < 3 {
            return Err(Error::Geometry("a polygon needs at least three distinct vertices".into()));
        }
        Ok(Self { vertices })
    }

    /// Counter-clockwise copy of `vertices`, reversing them if needed.
    pub fn new_ccw(vertices: Vec<Point>) -> Result<Self> {
        let mut poly = Self::new(vertices)?;
        if poly.signed_area() < 0.0 {
            poly.vertices.reverse();
        }
        Ok(poly)
    }

    pub fn rectangle(min: Point, max: Point) -> Self {
        Self {
            vertices: vec![min, Point::new(max.x, min.y), max, Point::new(min.x, max.y)],
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn bounding_box(&self) -> BoundingBox {
        BoundingBox::of_points(&self.vertices)
    }

    /// Even-odd point-in-polygon test.
    pub fn contains(&self, x: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > x.y) != (b.y > x.y) {
                let xc = a.x + (x.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if x.x < xc {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn translated(&self, delta: Point) -> Self {
        Self { vertices: self.vertices.iter().map(|&v| v + delta).collect() }
    }

    /// True when no two non-adjacent edges intersect.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        let edges: Vec<(Point, Point)> = self.edges().collect();
        let boxes: Vec<BoundingBox> = edges.iter().map(|(a, b)| BoundingBox::of_points([a, b])).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| boxes[i].min.x.total_cmp(&boxes[j].min.x));
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                if boxes[j].min.x > boxes[i].max.x {
                    break;
                }
                let adjacent = (i + 1) % n == j || (j + 1) % n == i;
                if adjacent || boxes[j].min.y > boxes[i].max.y || boxes[i].min.y > boxes[j].max.y {
                    continue;
                }
                if segments_intersect(edges[i].0, edges[i].1, edges[j].0, edges[j].1) {
                    return false;
                }
            }
        }
        true
    }
}

pub fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

/// Area centroid of a polygon given by its vertices.
pub fn centroid(v: &[Point]) -> Point {
    let n = v.len();
    let mut a = 0.0;
    let mut c = Point::default();
    for i in 0..n {
        let (p, q) = (v[i], v[(i + 1) % n]);
        let w = p.cross(q);
        a += w;
        c = c + (p + q) * w;
    }
    if a == 0.0 {
        return v.iter().fold(Point::default(), |s, &p| s + p) * (1.0 / n as f64);
    }
    c * (1.0 / (3.0 * a))
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = (p2 - p1).cross(q1 - p1);
    let d2 = (p2 - p1).cross(q2 - p1);
    let d3 = (q2 - q1).cross(p1 - q1);
    let d4 = (q2 - q1).cross(p2 - q1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Point, b: Point, c: Point, d: f64| {
        d == 0.0 && c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
    };
    on(p1, p2, q1, d1) || on(p1, p2, q2, d2) || on(q1, q2, p1, d3) || on(q1, q2, p2, d4)
}

/// Sutherland-Hodgman clip of `subject` against the rectangle `[min, max]`.
/// For non-convex subjects the result may contain zero-width connecting
/// edges along the rectangle boundary; they carry no area.
pub fn clip_to_rect(subject: &[Point], min: Point, max: Point) -> Vec<Point> {
    let mut out = subject.to_vec();
    // (axis, bound, keep-greater)
    let planes = [(0, min.x, true), (0, max.x, false), (1, min.y, true), (1, max.y, false)];
    for (axis, bound, greater) in planes {
        if out.is_empty() {
            break;
        }
        let coord = |p: &Point| if axis == 0 { p.x } else { p.y };
        let inside = |p: &Point| if greater { coord(p) >= bound } else { coord(p) <= bound };
        let input = std::mem::take(&mut out);
        let n = input.len();
        for i in 0..n {
            let cur = input[i];
            let prev = input[(i + n - 1) % n];
            let (ci, pi) = (inside(&cur), inside(&prev));
            if ci != pi {
                let t = (bound - coord(&prev)) / (coord(&cur) - coord(&prev));
                let mut x = prev.lerp(cur, t);
                if axis == 0 {
                    x.x = bound;
                } else {
                    x.y = bound;
                }
                out.push(x);
            }
            if ci {
                out.push(cur);
            }
        }
        out.dedup();
        if out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
    }
    if out.len() < 3 {
        out.clear();
    }
    out
}

/// Quadrature on the region enclosed by `poly` (even-odd rule) by splitting it
/// into vertical slabs at every vertex abscissa. Inside a slab the region is
/// a union of trapezoids with straight top and bottom, each integrated by a
/// tensor Gauss rule in `(x, y)`. All weights are positive and every point lies
/// inside the region. With `n` points per direction the rule is exact for
/// polynomials of total degree `2n - 2`.
pub fn slab_rule(poly: &[Point], rule: &GaussRule) -> QuadRule2d {
    let mut out = QuadRule2d::default();
    let n = poly.len();
    if n < 3 {
        return out;
    }
    let mut xs: Vec<f64> = poly.iter().map(|p| p.x).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let span = xs[xs.len() - 1] - xs[0];
    let min_width = 1e-14 * span.max(f64::MIN_POSITIVE);

    let mut crossings: Vec<(f64, f64, f64)> = Vec::new();
    for w in xs.windows(2) {
        let (xa, xb) = (w[0], w[1]);
        let width = xb - xa;
        if width <= min_width {
            continue;
        }
        crossings.clear();
        for i in 0..n {
            let (mut p, mut q) = (poly[i], poly[(i + 1) % n]);
            if p.x == q.x {
                continue;
            }
            if p.x > q.x {
                std::mem::swap(&mut p, &mut q);
            }
            if p.x <= xa && q.x >= xb {
                let slope = (q.y - p.y) / (q.x - p.x);
                let ya = p.y + slope * (xa - p.x);
                let yb = p.y + slope * (xb - p.x);
                crossings.push((0.5 * (ya + yb), ya, yb));
            }
        }
        crossings.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in crossings.chunks_exact(2) {
            let (lo, hi) = (pair[0], pair[1]);
            if hi.0 - lo.0 <= 0.0 {
                continue;
            }
            for (tx, wx) in rule.iter() {
                let x = xa + tx * width;
                let ylo = lo.1 + tx * (lo.2 - lo.1);
                let yhi = hi.1 + tx * (hi.2 - hi.1);
                let height = yhi - ylo;
                if height <= 0.0 {
                    continue;
                }
                for (ty, wy) in rule.iter() {
                    out.points.push(Point::new(x, ylo + ty * height));
                    out.weights.push(wx * width * wy * height);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_half_square() {
        let subject = [Point::new(-1.0, -1.0), Point::new(0.5, -1.0), Point::new(0.5, 2.0), Point::new(-1.0, 2.0)];
        let clipped = clip_to_rect(&subject, Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        assert!((signed_area(&clipped) - 0.5).abs() < 1e-15);
        let c = centroid(&clipped);
        assert!((c.x - 0.25).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clip_disjoint_is_empty() {
        let subject = [Point::new(2.0, 2.0), Point::new(3.0, 2.0), Point::new(3.0, 3.0)];
        assert!(clip_to_rect(&subject, Point::new(0.0, 0.0), Point::new(1.0, 1.0)).is_empty());
    }

    #[test]
    fn slab_rule_on_non_convex_clip() {
        // An arch whose crown lies above the clip window: the clip has two
        // components joined by zero-width edges along the top.
        let arch = [
            Point::new(0.2, 0.0),
            Point::new(0.4, 0.0),
            Point::new(0.4, 1.5),
            Point::new(0.6, 1.5),
            Point::new(0.6, 0.0),
            Point::new(0.8, 0.0),
            Point::new(0.8, 2.0),
            Point::new(0.2, 2.0),
        ];
        let clipped = clip_to_rect(&arch, Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        let rule = slab_rule(&clipped, &GaussRule::new(3));
        assert!((rule.total_weight() - 0.4).abs() < 1e-14);
        assert!((signed_area(&clipped).abs() - 0.4).abs() < 1e-14);
        let poly = Polygon::new(arch.to_vec()).unwrap();
        assert!(rule.points.iter().all(|&x| poly.contains(x)));
        // x^2 y over both legs
        let exact = 2.0 * 0.5 * ((0.4f64.powi(3) - 0.2f64.powi(3)) + (0.8f64.powi(3) - 0.6f64.powi(3))) / 3.0 * 0.5;
        let approx = rule.integrate(|p| p.x * p.x * p.y);
        assert!((approx - exact).abs() < 1e-14, "{approx} vs {exact}");
    }

    #[test]
    fn simplicity_check() {
        let square = Polygon::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        assert!(square.is_simple());
        let bowtie = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        assert!(!bowtie.is_simple());
    }
}
