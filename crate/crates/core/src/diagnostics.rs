//! Measured constants of the stability and norm-equivalence estimates.
//!
//! Random spline inputs are supported near the boundary: coefficients are
//! drawn only for dofs of cut elements, so the global ratios probe the cut
//! region at every mesh size instead of averaging it away against the
//! interior. Random dG inputs fill every active element; the ratios they
//! enter are element-local or involve every element equally.

use crate::active::Discretization;
use crate::error::Result;
use crate::extension::Extension;
use crate::geometry::CellKind;
use crate::interpolation::{average, jump_norm, spline_to_dg};
use crate::quadrature::GaussRule;
use crate::space::LocalValues;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorConstants {
    /// `(Σ_T ‖π_h w‖²_T / Σ_T ‖w‖²_{ω_T})^½` over cut elements `T`, for dG `w`.
    pub interp_stability: f64,
    /// `‖w − π_h w‖_{Ω_h} / ‖w‖_{j_h}` for dG `w`.
    pub oswald: f64,
    /// `‖B_h v‖_{j_h} / ‖v‖_Ω`
    pub jump_l2: f64,
    /// `‖B_h v‖_{j_h} / (h ‖∇v‖_Ω)`
    pub jump_h1: f64,
    /// `‖E_h v‖_{Ω_h} / ‖v‖_Ω`
    pub ext_stability_l2: f64,
    /// `‖∇E_h v‖_{Ω_h} / ‖∇v‖_Ω`
    pub ext_stability_h1: f64,
    /// Extremes of `‖v‖²_Ω / (h² |v̂|²)` over extended splines.
    pub dof_lower: f64,
    pub dof_upper: f64,
    /// Largest number of extended basis functions whose supports overlap one.
    pub overlap: usize,
    /// Largest extended-support bounding-box diagonal over `h`.
    pub support_diameter: f64,
    /// Largest coefficient of an extended basis function; bounds its sup norm.
    pub basis_coefficient: f64,
}

impl OperatorConstants {
    /// Worst case of two measurements.
    pub fn worst(&self, other: &Self) -> Self {
        Self {
            interp_stability: self.interp_stability.max(other.interp_stability),
            oswald: self.oswald.max(other.oswald),
            jump_l2: self.jump_l2.max(other.jump_l2),
            jump_h1: self.jump_h1.max(other.jump_h1),
            ext_stability_l2: self.ext_stability_l2.max(other.ext_stability_l2),
            ext_stability_h1: self.ext_stability_h1.max(other.ext_stability_h1),
            dof_lower: self.dof_lower.min(other.dof_lower),
            dof_upper: self.dof_upper.max(other.dof_upper),
            overlap: self.overlap.max(other.overlap),
            support_diameter: self.support_diameter.max(other.support_diameter),
            basis_coefficient: self.basis_coefficient.max(other.basis_coefficient),
        }
    }

    /// `(name, value)` pairs in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("interp_stability", self.interp_stability),
            ("oswald", self.oswald),
            ("jump_l2", self.jump_l2),
            ("jump_h1", self.jump_h1),
            ("ext_stability_l2", self.ext_stability_l2),
            ("ext_stability_h1", self.ext_stability_h1),
            ("dof_lower", self.dof_lower),
            ("dof_upper", self.dof_upper),
            ("overlap", self.overlap as f64),
            ("support_diameter", self.support_diameter),
            ("basis_coefficient", self.basis_coefficient),
        ]
    }
}

/// Local mass and stiffness matrices of a full element (identical for all
/// elements of a uniform mesh).
struct ElementMatrices {
    mass: Vec<f64>,
    stiffness: Vec<f64>,
}

impl ElementMatrices {
    fn new(disc: &Discretization) -> Self {
        let n = disc.active.local_dim();
        let h = disc.h();
        let rule = GaussRule::new(disc.degree() + 1);
        let mut mass = vec![0.0; n * n];
        let mut stiffness = vec![0.0; n * n];
        let mut lv = LocalValues::default();
        for (s, ws) in rule.iter() {
            for (t, wt) in rule.iter() {
                disc.space.eval_local_ref(t, s, &mut lv);
                let w = wt * ws * h * h;
                for i in 0..n {
                    for j in 0..n {
                        mass[i * n + j] += w * lv.values[i] * lv.values[j];
                        let (gi, gj) = (lv.grads[i], lv.grads[j]);
                        stiffness[i * n + j] += w * (gi[0] * gj[0] + gi[1] * gj[1]);
                    }
                }
            }
        }
        Self { mass, stiffness }
    }

    fn quadratic(m: &[f64], c: &[f64]) -> f64 {
        let n = c.len();
        (0..n).map(|i| c[i] * (0..n).map(|j| m[i * n + j] * c[j]).sum::<f64>()).sum()
    }

    /// Squared element norms of a dG vector: `(L2, H1 seminorm)` per element.
    fn element_norms(&self, n: usize, dg: &[f64]) -> Vec<(f64, f64)> {
        dg.chunks(n).map(|c| (Self::quadratic(&self.mass, c), Self::quadratic(&self.stiffness, c))).collect()
    }
}

fn cut_element_slots(disc: &Discretization) -> Vec<usize> {
    let active = &disc.active;
    (0..active.num_elements())
        .filter(|&k| disc.domain.cell(active.elements()[k]).kind == CellKind::Cut)
        .collect()
}

fn random_band_spline(disc: &Discretization, band: &[usize], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v = vec![0.0; disc.active.num_dofs()];
    for &k in band {
        for &i in disc.active.element_dofs(k) {
            if v[i] == 0.0 {
                v[i] = rng.random_range(-1.0..1.0);
            }
        }
    }
    v
}

fn random_dg(disc: &Discretization, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..disc.active.num_dg()).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// `(‖v‖²_Ω, ‖∇v‖²_Ω)` integrated only over elements where `v` has a nonzero coefficient.
fn cut_norms_squared(disc: &Discretization, v: &[f64]) -> (f64, f64) {
    let active = &disc.active;
    let n = active.local_dim();
    let mut lv = LocalValues::default();
    let (mut l2, mut h1) = (0.0, 0.0);
    for k in 0..active.num_elements() {
        let dofs = active.element_dofs(k);
        if dofs.iter().all(|&i| v[i] == 0.0) {
            continue;
        }
        let cell = disc.domain.cell(active.elements()[k]);
        for (x, w) in cell.volume.iter() {
            disc.space.eval_local(cell.element, x, &mut lv);
            let (mut val, mut g) = (0.0, [0.0; 2]);
            for l in 0..n {
                let c = v[dofs[l]];
                val += c * lv.values[l];
                g[0] += c * lv.grads[l][0];
                g[1] += c * lv.grads[l][1];
            }
            l2 += w * val * val;
            h1 += w * (g[0] * g[0] + g[1] * g[1]);
        }
    }
    (l2, h1)
}

/// Active element slots within `p` elements of slot `k` (the patch `ω_T`).
fn patch(disc: &Discretization, k: usize) -> Vec<usize> {
    let mesh = disc.mesh();
    let p = disc.degree();
    let (jx, jy) = mesh.element_coords(disc.active.elements()[k]);
    let mut out = Vec::new();
    for y in jy.saturating_sub(p)..=(jy + p).min(mesh.ny() - 1) {
        for x in jx.saturating_sub(p)..=(jx + p).min(mesh.nx() - 1) {
            if let Some(m) = disc.active.element_slot(mesh.element_index(x, y)) {
                out.push(m);
            }
        }
    }
    out
}

/// Measures all constants over `samples` random inputs.
pub fn measure(disc: &Discretization, ext: &Extension, samples: usize, seed: u64) -> Result<OperatorConstants> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = disc.active.local_dim();
    let h = disc.h();
    let mats = ElementMatrices::new(disc);
    let band = cut_element_slots(disc);
    let large = ext.partition.large_dofs();
    let patches: Vec<Vec<usize>> = (0..disc.active.num_elements()).map(|k| patch(disc, k)).collect();

    let mut c = OperatorConstants {
        interp_stability: 0.0,
        oswald: 0.0,
        jump_l2: 0.0,
        jump_h1: 0.0,
        ext_stability_l2: 0.0,
        ext_stability_h1: 0.0,
        dof_lower: f64::INFINITY,
        dof_upper: 0.0,
        overlap: 0,
        support_diameter: 0.0,
        basis_coefficient: 0.0,
    };

    for _ in 0..samples {
        // dG inputs: interpolation stability and the Oswald-type bound.
        let w = random_dg(disc, &mut rng);
        let pw = spline_to_dg(disc, &average(disc, &ext.weights, &w));
        let wn = mats.element_norms(n, &w);
        let pn = mats.element_norms(n, &pw);
        let (mut num, mut den) = (0.0, 0.0);
        for &k in &band {
            num += pn[k].0;
            den += patches[k].iter().map(|&m| wn[m].0).sum::<f64>();
        }
        if den > 0.0 {
            c.interp_stability = c.interp_stability.max((num / den).sqrt());
        }
        let diff: Vec<f64> = w.iter().zip(&pw).map(|(a, b)| a - b).collect();
        let diff_l2: f64 = mats.element_norms(n, &diff).iter().map(|x| x.0).sum::<f64>().sqrt();
        let j = jump_norm(disc, &w);
        if j > 0.0 {
            c.oswald = c.oswald.max(diff_l2 / j);
        }

        // Spline inputs: jump estimate and extension stability.
        let v = random_band_spline(disc, &band, &mut rng);
        let (v_l2, v_h1) = cut_norms_squared(disc, &v);
        let (v_l2, v_h1) = (v_l2.sqrt(), v_h1.sqrt());
        let bv = ext.bh.matvec(&v)?;
        let jb = jump_norm(disc, &bv);
        let vl: Vec<f64> = large.iter().map(|&i| v[i]).collect();
        let ev = spline_to_dg(disc, &ext.extend(&vl)?);
        let en = mats.element_norms(n, &ev);
        let (e_l2, e_h1) = en.iter().fold((0.0, 0.0), |a, x| (a.0 + x.0, a.1 + x.1));
        if v_l2 > 0.0 {
            c.jump_l2 = c.jump_l2.max(jb / v_l2);
            c.ext_stability_l2 = c.ext_stability_l2.max(e_l2.sqrt() / v_l2);
        }
        if v_h1 > 0.0 {
            c.jump_h1 = c.jump_h1.max(jb / (h * v_h1));
            c.ext_stability_h1 = c.ext_stability_h1.max(e_h1.sqrt() / v_h1);
        }

        // Extended-space inputs: equivalence with the coefficient norm.
        let mut u = vec![0.0; large.len()];
        for (slot, &i) in large.iter().enumerate() {
            if v[i] != 0.0 {
                u[slot] = rng.random_range(-1.0..1.0);
            }
        }
        let uu: f64 = u.iter().map(|x| x * x).sum();
        if uu > 0.0 {
            let (ul2, _) = cut_norms_squared(disc, &ext.extend(&u)?);
            let r = ul2 / (h * h * uu);
            c.dof_lower = c.dof_lower.min(r);
            c.dof_upper = c.dof_upper.max(r);
        }
    }

    let (overlap, diameter, coefficient) = extended_basis_metrics(disc, ext);
    c.overlap = overlap;
    c.support_diameter = diameter;
    c.basis_coefficient = coefficient;
    Ok(c)
}

/// Active element slots in the support of every extended basis function.
pub fn extended_supports(disc: &Discretization, ext: &Extension) -> Vec<Vec<usize>> {
    let active = &disc.active;
    let mut dof_elements: Vec<Vec<usize>> = vec![Vec::new(); active.num_dofs()];
    for k in 0..active.num_elements() {
        for &i in active.element_dofs(k) {
            dof_elements[i].push(k);
        }
    }
    let et = ext.eh.transpose();
    (0..et.nrows())
        .map(|c| {
            let mut els: Vec<usize> = et.row(c).0.iter().flat_map(|&i| dof_elements[i].iter().copied()).collect();
            els.sort_unstable();
            els.dedup();
            els
        })
        .collect()
}

/// `(max overlap count, max support diagonal / h, max coefficient)`.
pub fn extended_basis_metrics(disc: &Discretization, ext: &Extension) -> (usize, f64, f64) {
    let mesh = disc.mesh();
    let els = disc.active.elements();
    let supports = extended_supports(disc, ext);
    let mut by_element: Vec<Vec<usize>> = vec![Vec::new(); disc.active.num_elements()];
    for (c, s) in supports.iter().enumerate() {
        for &k in s {
            by_element[k].push(c);
        }
    }
    let mut overlap = 0;
    let mut diameter: f64 = 0.0;
    let mut seen = vec![usize::MAX; supports.len()];
    for (c, s) in supports.iter().enumerate() {
        let mut count = 0;
        for &k in s {
            for &d in &by_element[k] {
                if seen[d] != c {
                    seen[d] = c;
                    count += 1;
                }
            }
        }
        overlap = overlap.max(count);
        let coords: Vec<(usize, usize)> = s.iter().map(|&k| mesh.element_coords(els[k])).collect();
        let span = |f: fn(&(usize, usize)) -> usize| {
            let lo = coords.iter().map(f).min().unwrap_or(0);
            let hi = coords.iter().map(f).max().unwrap_or(0);
            (hi - lo + 1) as f64
        };
        diameter = diameter.max(span(|c| c.0).hypot(span(|c| c.1)));
    }
    let coefficient = ext.eh.triplets().fold(0.0f64, |m, t| m.max(t.2.abs()));
    (overlap, diameter, coefficient)
}
