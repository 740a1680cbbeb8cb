//! Element-wise L2 projection, the averaged spline interpolant and the face
//! jump seminorm of discontinuous functions.
//!
//! Discontinuous functions live on the active mesh: the `k`-th active element
//! carries dofs `k * n .. (k + 1) * n` in the local order of
//! [`SplineSpace::element_basis`], `n = (p + 1)^2`.

use crate::active::Discretization;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linalg::CoeffMatrix;
use crate::quadrature::GaussRule;
use crate::space::SplineSpace;
use serde::{Deserialize, Serialize};

/// L2 projection onto the local polynomials of one full element.
///
/// The projection is computed in an orthonormal Legendre basis and converted
/// to the local B-spline basis one direction at a time, which avoids solving
/// with the badly conditioned tensor Gram matrix.
#[derive(Clone, Debug)]
pub struct LocalProjector {
    /// 1D reference points in `[0, 1]`.
    nodes: Vec<f64>,
    /// Row `a`: the dual functional of local function `a` as weights on `nodes`.
    dual: Vec<f64>,
    n1: usize,
}

/// Monomial coefficients of the orthonormal Legendre polynomial of degree `k` on `[0, 1]`.
fn legendre01(k: usize) -> Vec<f64> {
    let scale = ((2 * k + 1) as f64).sqrt();
    (0..=k)
        .map(|j| {
            let sign = if (k + j) % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(k, j) * binomial(k + j, j) * scale
        })
        .collect()
}

impl LocalProjector {
    /// `order` Gauss points per direction; at least `p + 1` are needed for exactness on the space.
    pub fn new(space: &SplineSpace, order: usize) -> Result<Self> {
        let n1 = space.degree() + 1;
        let rule = GaussRule::new(order.max(n1));
        let nodes: Vec<f64> = rule.iter().map(|(t, _)| t).collect();
        let nq = nodes.len();
        let mut dual = vec![0.0; n1 * nq];
        for k in 0..n1 {
            let leg = legendre01(k);
            let coeffs = space.monomial_to_local(&leg);
            if coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::Internal("local basis change failed".into()));
            }
            for (q, (t, w)) in rule.iter().enumerate() {
                let lk = crate::spline::poly_eval(&leg, t) * w;
                for a in 0..n1 {
                    dual[a * nq + q] += coeffs[a] * lk;
                }
            }
        }
        Ok(Self { nodes, dual, n1 })
    }

    /// Coefficients of the projection of `f` onto element `e`, in local order.
    pub fn project(&self, space: &SplineSpace, e: usize, f: &(impl Fn(Point) -> f64 + ?Sized)) -> Vec<f64> {
        let min = space.mesh().element_min(e);
        let h = space.h();
        let nq = self.nodes.len();
        let n1 = self.n1;
        // values[qs][qt]
        let mut values = vec![0.0; nq * nq];
        for (qs, &s) in self.nodes.iter().enumerate() {
            for (qt, &t) in self.nodes.iter().enumerate() {
                values[qs * nq + qt] = f(Point::new(min.x + t * h, min.y + s * h));
            }
        }
        // Contract x first, then y.
        let mut half = vec![0.0; nq * n1];
        for qs in 0..nq {
            for a in 0..n1 {
                half[qs * n1 + a] =
                    (0..nq).map(|qt| self.dual[a * nq + qt] * values[qs * nq + qt]).sum();
            }
        }
        let mut out = vec![0.0; n1 * n1];
        for b in 0..n1 {
            for a in 0..n1 {
                out[b * n1 + a] = (0..nq).map(|qs| self.dual[b * nq + qs] * half[qs * n1 + a]).sum();
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// Proportional to `|T ∩ Ω|`.
    #[default]
    CutArea,
    Uniform,
    /// All weight on the element with the largest cut area.
    Single,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cut-area" => Ok(Self::CutArea),
            "uniform" => Ok(Self::Uniform),
            "single" => Ok(Self::Single),
            other => Err(Error::Config(format!("unknown weight mode '{other}'"))),
        }
    }
}

/// Quantum of the stored weights. Multiples of it add up exactly, so every
/// dof's weights sum to exactly one.
const WEIGHT_QUANTUM: f64 = 1.0 / (1u64 << 40) as f64;

/// Convex averaging weights, one per dG dof `(T, local function of i)`.
#[derive(Clone, Debug)]
pub struct Weights {
    kappa: Vec<f64>,
    mode: WeightMode,
    restricted: bool,
}

impl Weights {
    /// With `large = Some(flags)` (one per active element), dofs supported on
    /// a large element get zero weight on every small element.
    pub fn new(disc: &Discretization, mode: WeightMode, large: Option<&[bool]>) -> Result<Self> {
        let active = &disc.active;
        let n = active.local_dim();
        if let Some(flags) = large {
            if flags.len() != active.num_elements() {
                return Err(Error::Dimension("one large/small flag per active element expected".into()));
            }
        }
        let mut entries: Vec<Vec<(usize, usize)>> = vec![Vec::new(); active.num_dofs()];
        for k in 0..active.num_elements() {
            for (l, &i) in active.element_dofs(k).iter().enumerate() {
                entries[i].push((k, l));
            }
        }
        let area = |k: usize| disc.domain.cell(active.elements()[k]).area;
        let mut kappa = vec![0.0; active.num_dg()];
        for (i, list) in entries.iter().enumerate() {
            let allowed: Vec<bool> = match large {
                Some(flags) if list.iter().any(|&(k, _)| flags[k]) => list.iter().map(|&(k, _)| flags[k]).collect(),
                _ => vec![true; list.len()],
            };
            let mut raw: Vec<f64> = list
                .iter()
                .zip(&allowed)
                .map(|(&(k, _), &ok)| match (ok, mode) {
                    (false, _) => 0.0,
                    (true, WeightMode::CutArea) => area(k),
                    (true, WeightMode::Uniform | WeightMode::Single) => 1.0,
                })
                .collect();
            if mode == WeightMode::Single {
                let best = (0..list.len())
                    .filter(|&m| allowed[m])
                    .max_by(|&a, &b| area(list[a].0).total_cmp(&area(list[b].0)).then(b.cmp(&a)))
                    .ok_or_else(|| Error::Internal(format!("dof {i} has no admissible element")))?;
                raw.iter_mut().enumerate().for_each(|(m, r)| *r = if m == best { 1.0 } else { 0.0 });
            }
            let total: f64 = raw.iter().sum();
            if !(total > 0.0) {
                return Err(Error::Internal(format!("dof {i} has no positive weight")));
            }
            let mut q: Vec<f64> =
                raw.iter().map(|r| (r / total / WEIGHT_QUANTUM).round() * WEIGHT_QUANTUM).collect();
            let sum: f64 = q.iter().sum();
            let top = (0..q.len()).max_by(|&a, &b| q[a].total_cmp(&q[b]).then(b.cmp(&a))).unwrap_or(0);
            q[top] += 1.0 - sum;
            for (&(k, l), v) in list.iter().zip(q) {
                kappa[k * n + l] = v;
            }
        }
        Ok(Self { kappa, mode, restricted: large.is_some() })
    }

    /// Weight of local function `l` of the `k`-th active element.
    pub fn get(&self, n: usize, k: usize, l: usize) -> f64 {
        self.kappa[k * n + l]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.kappa
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn is_restricted(&self) -> bool {
        self.restricted
    }
}

/// Element-wise projections of `f`, as a dG coefficient vector.
pub fn project_dg(disc: &Discretization, proj: &LocalProjector, f: &(impl Fn(Point) -> f64 + Sync)) -> Vec<f64> {
    let blocks = crate::par_map(disc.active.elements(), |&e| proj.project(&disc.space, e, f));
    blocks.concat()
}

/// Spline coefficients (over active dofs) of the averaged interpolant of `f`.
pub fn interpolate(
    disc: &Discretization,
    proj: &LocalProjector,
    weights: &Weights,
    f: &(impl Fn(Point) -> f64 + Sync),
) -> Vec<f64> {
    average(disc, weights, &project_dg(disc, proj, f))
}

/// Applies the averaging `Î_h` to a dG vector.
pub fn average(disc: &Discretization, weights: &Weights, dg: &[f64]) -> Vec<f64> {
    let active = &disc.active;
    let n = active.local_dim();
    let mut v = vec![0.0; active.num_dofs()];
    for k in 0..active.num_elements() {
        for (l, &i) in active.element_dofs(k).iter().enumerate() {
            v[i] += weights.get(n, k, l) * dg[k * n + l];
        }
    }
    v
}

/// `Î_h`: rows are active dofs, columns dG dofs.
pub fn assemble_ih(disc: &Discretization, weights: &Weights) -> Result<CoeffMatrix> {
    let active = &disc.active;
    let n = active.local_dim();
    let mut trips = Vec::with_capacity(active.num_dg());
    for k in 0..active.num_elements() {
        for (l, &i) in active.element_dofs(k).iter().enumerate() {
            trips.push((i, k * n + l, weights.get(n, k, l)));
        }
    }
    CoeffMatrix::from_triplets(active.num_dofs(), active.num_dg(), &trips)
}

/// dG coefficients of a spline given by active coefficients.
pub fn spline_to_dg(disc: &Discretization, v: &[f64]) -> Vec<f64> {
    let active = &disc.active;
    (0..active.num_elements()).flat_map(|k| active.element_dofs(k).iter().map(|&i| v[i])).collect()
}

/// Matrix form of [`spline_to_dg`].
pub fn restriction_matrix(disc: &Discretization) -> Result<CoeffMatrix> {
    let active = &disc.active;
    let n = active.local_dim();
    let mut trips = Vec::with_capacity(active.num_dg());
    for k in 0..active.num_elements() {
        for (l, &i) in active.element_dofs(k).iter().enumerate() {
            trips.push((k * n + l, i, 1.0));
        }
    }
    CoeffMatrix::from_triplets(active.num_dg(), active.num_dofs(), &trips)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Tabulated derivative data on the two sides of a face.
struct FaceTable {
    /// `(scale, minus-side partials, plus-side partials)` per (order, multi-index, point).
    rows: Vec<(f64, Vec<f64>, Vec<f64>)>,
}

impl FaceTable {
    /// `vertical`: face between `(jx, jy)` (minus) and `(jx + 1, jy)` (plus);
    /// otherwise between `(jx, jy)` and `(jx, jy + 1)`.
    fn new(space: &SplineSpace, vertical: bool) -> Self {
        let p = space.degree();
        let h = space.h();
        let rule = GaussRule::new(p + 1);
        let mut rows = Vec::new();
        for l in 0..=p {
            for alpha in 0..=l {
                let beta = l - alpha;
                let scale = binomial(l, alpha) * h.powi(2 * l as i32 + 1);
                for (sigma, w) in rule.iter() {
                    let (minus, plus) = if vertical {
                        (space.local_partials(1.0, sigma, alpha, beta), space.local_partials(0.0, sigma, alpha, beta))
                    } else {
                        (space.local_partials(sigma, 1.0, alpha, beta), space.local_partials(sigma, 0.0, alpha, beta))
                    };
                    rows.push((scale * w * h, minus, plus));
                }
            }
        }
        Self { rows }
    }

    fn jump_squared(&self, minus: &[f64], plus: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|(s, dm, dp)| {
                let jm: f64 = dm.iter().zip(minus).map(|(a, b)| a * b).sum();
                let jp: f64 = dp.iter().zip(plus).map(|(a, b)| a * b).sum();
                s * (jp - jm) * (jp - jm)
            })
            .sum()
    }
}

/// `sum_l h^{2l+1} ||[∇^l w]||^2` over faces shared by two active elements,
/// with the full derivative tensor measured in the Frobenius norm.
pub fn jump_norm_squared(disc: &Discretization, w: &[f64]) -> f64 {
    let mesh = disc.mesh();
    let active = &disc.active;
    let n = active.local_dim();
    let tables = [FaceTable::new(&disc.space, true), FaceTable::new(&disc.space, false)];
    let mut total = 0.0;
    for (k, &e) in active.elements().iter().enumerate() {
        let (jx, jy) = mesh.element_coords(e);
        let neighbors = [(jx + 1, jy), (jx, jy + 1)];
        for (table, (nx, ny)) in tables.iter().zip(neighbors) {
            if nx >= mesh.nx() || ny >= mesh.ny() {
                continue;
            }
            if let Some(m) = active.element_slot(mesh.element_index(nx, ny)) {
                total += table.jump_squared(&w[k * n..(k + 1) * n], &w[m * n..(m + 1) * n]);
            }
        }
    }
    total
}

pub fn jump_norm(disc: &Discretization, w: &[f64]) -> f64 {
    jump_norm_squared(disc, w).sqrt()
}
