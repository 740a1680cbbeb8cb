//! Uniform univariate B-splines stored piece by piece.
//!
//! The cardinal B-spline of degree `p` lives on `[0, p + 1]`. Piece `r` is its
//! restriction to `[r, r + 1]`, written as a polynomial in the local coordinate
//! `t = u - r` with monomial coefficients (`coeffs[m]` multiplies `t^m`).

/// Monomial coefficients, lowest degree first.
pub type Poly = Vec<f64>;

pub fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

/// `k`-th derivative of the polynomial `c` at `t`.
pub fn poly_deriv_eval(c: &[f64], t: f64, k: usize) -> f64 {
    if k >= c.len() {
        return 0.0;
    }
    let mut acc = 0.0;
    for m in (k..c.len()).rev() {
        let falling: f64 = ((m - k + 1)..=m).map(|j| j as f64).product();
        acc = acc * t + c[m] * falling;
    }
    acc
}

/// Coefficients of `q(t + d)` given those of `q(t)`.
pub fn poly_shift(c: &[f64], d: f64) -> Poly {
    let n = c.len();
    let mut out = vec![0.0; n];
    for (m, &cm) in c.iter().enumerate() {
        // (t + d)^m = sum_j binom(m, j) t^j d^(m - j)
        let mut binom = 1.0;
        for j in 0..=m {
            out[j] += cm * binom * d.powi((m - j) as i32);
            binom = binom * (m - j) as f64 / (j + 1) as f64;
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct UniformBspline {
    degree: usize,
    pieces: Vec<Poly>,
}

impl UniformBspline {
    pub fn new(degree: usize) -> Self {
        let mut pieces: Vec<Poly> = vec![vec![1.0]];
        for k in 1..=degree {
            let kf = k as f64;
            let mut next = Vec::with_capacity(k + 1);
            for r in 0..=k {
                let rf = r as f64;
                let mut poly = vec![0.0; k + 1];
                // (r + t) / k * N_{k-1}[r]
                if r < k {
                    for (m, &c) in pieces[r].iter().enumerate() {
                        poly[m] += c * rf / kf;
                        poly[m + 1] += c / kf;
                    }
                }
                // (k + 1 - r - t) / k * N_{k-1}[r - 1]
                if r >= 1 {
                    for (m, &c) in pieces[r - 1].iter().enumerate() {
                        poly[m] += c * (kf + 1.0 - rf) / kf;
                        poly[m + 1] -= c / kf;
                    }
                }
                next.push(poly);
            }
            pieces = next;
        }
        Self { degree, pieces }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn piece(&self, r: usize) -> &[f64] {
        &self.pieces[r]
    }

    /// Value of the cardinal B-spline at `u` (zero outside `[0, p + 1)`).
    pub fn eval(&self, u: f64) -> f64 {
        self.eval_deriv(u, 0)
    }

    pub fn eval_deriv(&self, u: f64, k: usize) -> f64 {
        if !(0.0..=(self.degree + 1) as f64).contains(&u) {
            return 0.0;
        }
        let r = (u.floor() as usize).min(self.degree);
        poly_deriv_eval(&self.pieces[r], u - r as f64, k)
    }

    /// Polynomial of local function `a` on an element: the spline whose
    /// support starts `p - a` elements to the left, i.e. piece `p - a`.
    pub fn local(&self, a: usize) -> &[f64] {
        &self.pieces[self.degree - a]
    }
}

/// Textbook Cox-de Boor recursion on an arbitrary knot vector. Kept separate
/// from the piecewise representation so tests can cross-check the two.
pub fn cox_de_boor(knots: &[f64], i: usize, p: usize, u: f64) -> f64 {
    if p == 0 {
        return if knots[i] <= u && u < knots[i + 1] { 1.0 } else { 0.0 };
    }
    let mut value = 0.0;
    let left = knots[i + p] - knots[i];
    if left > 0.0 {
        value += (u - knots[i]) / left * cox_de_boor(knots, i, p - 1, u);
    }
    let right = knots[i + p + 1] - knots[i + 1];
    if right > 0.0 {
        value += (knots[i + p + 1] - u) / right * cox_de_boor(knots, i + 1, p - 1, u);
    }
    value
}
