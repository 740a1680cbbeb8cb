//! Gauss-Legendre rules on the unit interval and tensor rules on rectangles.

use crate::geometry::Point;

/// A one-dimensional quadrature rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point Gauss-Legendre rule mapped to `[0, 1]`, exact for degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one point");
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Newton iteration on P_n starting from the Chebyshev-like guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = 0.5 * (1.0 - x);
            points[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Points and weights of a two-dimensional rule.
#[derive(Clone, Debug, Default)]
pub struct QuadRule2d {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadRule2d {
    /// Tensor Gauss rule on the axis-aligned rectangle `[min, max]`.
    pub fn tensor(rule: &GaussRule, min: Point, max: Point) -> Self {
        let (dx, dy) = (max.x - min.x, max.y - min.y);
        let mut out = Self::default();
        for (ty, wy) in rule.iter() {
            for (tx, wx) in rule.iter() {
                out.points.push(Point::new(min.x + tx * dx, min.y + ty * dy));
                out.weights.push(wx * wy * dx * dy);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_degree_2n_minus_1() {
        for n in 1..=10 {
            let rule = GaussRule::new(n);
            for deg in 0..2 * n {
                let approx: f64 = rule.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = 1.0 / (deg as f64 + 1.0);
                assert!((approx - exact).abs() < 1e-14, "n={n} deg={deg}: {approx} vs {exact}");
            }
        }
    }

    #[test]
    fn points_are_sorted_and_interior() {
        let rule = GaussRule::new(7);
        assert!(rule.points.windows(2).all(|w| w[0] < w[1]));
        assert!(rule.points.iter().all(|&x| x > 0.0 && x < 1.0));
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
