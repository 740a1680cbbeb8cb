//! Large/small element partition and the discrete extension matrices.
//!
//! Small elements (cut area below `γ h^2`) borrow the polynomials of a nearby
//! large element. `B̂` maps large-dof coefficients to dG coefficients by
//! extending those polynomials; `Ê = Î B̂` averages the result back into the
//! spline space.

use crate::active::Discretization;
use crate::error::{Error, Result};
use crate::interpolation::{assemble_ih, WeightMode, Weights};
use crate::linalg::CoeffMatrix;
use crate::spline::poly_shift;

const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct ExtensionPartition {
    gamma: f64,
    /// Per active element.
    large: Vec<bool>,
    /// Per active element: the active element whose polynomials it uses
    /// (itself when large). `NONE` until [`build_sh`] has run.
    target: Vec<usize>,
    /// Per active dof.
    large_dof: Vec<bool>,
    large_dofs: Vec<usize>,
}

/// Classifies active elements by `γ h^2 <= |T ∩ Ω|` and dofs by whether any
/// element of their support is large. The small-to-large map is left empty.
pub fn partition(disc: &Discretization, gamma: f64) -> Result<ExtensionPartition> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::Config(format!("threshold must be non-negative, got {gamma}")));
    }
    let h = disc.h();
    let active = &disc.active;
    let large: Vec<bool> =
        active.elements().iter().map(|&e| gamma * h * h <= disc.domain.cell(e).area).collect();
    if !large.iter().any(|&l| l) {
        return Err(Error::Config(format!("no element meets the threshold {gamma}; use a smaller value")));
    }
    let mut large_dof = vec![false; active.num_dofs()];
    for (k, _) in large.iter().enumerate().filter(|(_, &l)| l) {
        for &i in active.element_dofs(k) {
            large_dof[i] = true;
        }
    }
    let large_dofs = (0..large_dof.len()).filter(|&i| large_dof[i]).collect();
    let target = large.iter().enumerate().map(|(k, &l)| if l { k } else { NONE }).collect();
    Ok(ExtensionPartition { gamma, large, target, large_dof, large_dofs })
}

/// Maps every small element to the large element whose cut centroid is
/// nearest to its own, searching a `(2p + 3)^2` block first and the whole
/// mesh if the block holds no large element. Ties go to the lower index.
pub fn build_sh(part: &mut ExtensionPartition, disc: &Discretization) {
    let mesh = disc.mesh();
    let active = &disc.active;
    let reach = disc.degree() + 1;
    let centroid = |k: usize| disc.domain.cell(active.elements()[k]).centroid;
    let best_of = |k: usize, candidates: &mut dyn Iterator<Item = usize>| {
        let c = centroid(k);
        let mut best: Option<(f64, usize)> = None;
        for m in candidates {
            let d = centroid(m) - c;
            let d2 = d.dot(d);
            if best.is_none_or(|(bd, bm)| d2 < bd || (d2 == bd && m < bm)) {
                best = Some((d2, m));
            }
        }
        best.map(|b| b.1)
    };
    for k in 0..part.large.len() {
        if part.large[k] {
            continue;
        }
        let (jx, jy) = mesh.element_coords(active.elements()[k]);
        let (x0, x1) = (jx.saturating_sub(reach), (jx + reach).min(mesh.nx() - 1));
        let (y0, y1) = (jy.saturating_sub(reach), (jy + reach).min(mesh.ny() - 1));
        let large = &part.large;
        let mut near = (y0..=y1)
            .flat_map(|y| (x0..=x1).map(move |x| (x, y)))
            .filter_map(|(x, y)| active.element_slot(mesh.element_index(x, y)))
            .filter(|&m| large[m]);
        let choice = best_of(k, &mut near)
            .or_else(|| best_of(k, &mut (0..large.len()).filter(|&m| large[m])))
            .expect("partition guarantees a large element");
        part.target[k] = choice;
    }
}

impl ExtensionPartition {
    /// Partition with the small-to-large map built.
    pub fn new(disc: &Discretization, gamma: f64) -> Result<Self> {
        let mut part = partition(disc, gamma)?;
        build_sh(&mut part, disc);
        Ok(part)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Large flags per active element.
    pub fn large_elements(&self) -> &[bool] {
        &self.large
    }

    pub fn is_large(&self, k: usize) -> bool {
        self.large[k]
    }

    pub fn num_small(&self) -> usize {
        self.large.iter().filter(|&&l| !l).count()
    }

    /// Active element supplying the polynomials of active element `k`.
    pub fn target(&self, k: usize) -> Option<usize> {
        Some(self.target[k]).filter(|&t| t != NONE)
    }

    pub fn is_large_dof(&self, i: usize) -> bool {
        self.large_dof[i]
    }

    /// Active dof indices with a large element in their support, increasing.
    pub fn large_dofs(&self) -> &[usize] {
        &self.large_dofs
    }

    /// Macro element of every large element: itself followed by the small
    /// elements mapped to it, by active element index.
    pub fn macro_elements(&self) -> Vec<(usize, Vec<usize>)> {
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); self.large.len()];
        for (k, &t) in self.target.iter().enumerate() {
            if t != NONE && t != k {
                groups[t].push(k);
            }
        }
        (0..self.large.len()).filter(|&k| self.large[k]).map(|k| (k, std::mem::take(&mut groups[k]))).collect()
    }

    /// Largest `diam(T ∪ S_h(T)) / h` over all active elements.
    pub fn sh_diameter_ratio(&self, disc: &Discretization) -> f64 {
        let mesh = disc.mesh();
        let els = disc.active.elements();
        let mut worst = std::f64::consts::SQRT_2;
        for (k, &t) in self.target.iter().enumerate() {
            if t == NONE {
                continue;
            }
            let (ax, ay) = mesh.element_coords(els[k]);
            let (bx, by) = mesh.element_coords(els[t]);
            let dx = ax.abs_diff(bx) as f64 + 1.0;
            let dy = ay.abs_diff(by) as f64 + 1.0;
            worst = worst.max(dx.hypot(dy));
        }
        worst
    }
}

/// Matrix taking the local coefficients of the polynomials of element `from`
/// to the local coefficients of their canonical extensions on element `to`.
/// Both are background element ids.
pub fn extension_block(disc: &Discretization, from: usize, to: usize) -> Vec<f64> {
    let space = &disc.space;
    let p = space.degree();
    let n1 = p + 1;
    let (fx, fy) = space.mesh().element_coords(from);
    let (tx, ty) = space.mesh().element_coords(to);
    // On `to`, the reference coordinate of `from` is t + d.
    let one_d = |d: f64| {
        let mut x = vec![0.0; n1 * n1];
        for a in 0..n1 {
            let shifted = poly_shift(space.local_poly(a), d);
            for (b, c) in space.monomial_to_local(&shifted).into_iter().enumerate() {
                x[b * n1 + a] = c;
            }
        }
        x
    };
    let xs = one_d(tx as f64 - fx as f64);
    let ys = one_d(ty as f64 - fy as f64);
    crate::linalg::small::kron(n1, &ys, n1, &xs)
}

/// `B̂`: rows dG dofs, columns active dofs, with all small-dof columns empty.
pub fn assemble_bh(part: &ExtensionPartition, disc: &Discretization) -> Result<CoeffMatrix> {
    let active = &disc.active;
    let n = active.local_dim();
    let els = active.elements();
    let blocks = crate::par_map(&(0..active.num_elements()).collect::<Vec<_>>(), |&k| {
        let mut trips = Vec::new();
        if part.large[k] {
            for (l, &i) in active.element_dofs(k).iter().enumerate() {
                trips.push((k * n + l, i, 1.0));
            }
            return Ok(trips);
        }
        let t = part.target(k).ok_or_else(|| Error::Internal("small element without a target".into()))?;
        let block = extension_block(disc, els[t], els[k]);
        for (a, &j) in active.element_dofs(t).iter().enumerate() {
            if !part.large_dof[j] {
                continue;
            }
            for l in 0..n {
                let v = block[l * n + a];
                if v != 0.0 {
                    trips.push((k * n + l, j, v));
                }
            }
        }
        Ok(trips)
    });
    let mut trips = Vec::new();
    for b in blocks {
        trips.extend(b?);
    }
    CoeffMatrix::from_triplets(active.num_dg(), active.num_dofs(), &trips)
}

/// `Ê = Î B̂` restricted to the large-dof columns.
pub fn assemble_eh(part: &ExtensionPartition, disc: &Discretization, weights: &Weights) -> Result<CoeffMatrix> {
    let ih = assemble_ih(disc, weights)?;
    let bh = assemble_bh(part, disc)?;
    ih.matmul(&bh)?.select_columns(&part.large_dofs)
}

/// Partition, weights and matrices of one extension.
#[derive(Clone, Debug)]
pub struct Extension {
    pub partition: ExtensionPartition,
    pub weights: Weights,
    pub ih: CoeffMatrix,
    pub bh: CoeffMatrix,
    pub eh: CoeffMatrix,
}

impl Extension {
    /// `restrict` zeroes the weights of large dofs on small elements.
    pub fn new(disc: &Discretization, gamma: f64, mode: WeightMode, restrict: bool) -> Result<Self> {
        let partition = ExtensionPartition::new(disc, gamma)?;
        let weights = Weights::new(disc, mode, restrict.then_some(partition.large_elements()))?;
        let ih = assemble_ih(disc, &weights)?;
        let bh = assemble_bh(&partition, disc)?;
        let eh = ih.matmul(&bh)?.select_columns(partition.large_dofs())?;
        Ok(Self { partition, weights, ih, bh, eh })
    }

    /// Full active-dof coefficients of the extension of large-dof coefficients.
    pub fn extend(&self, large: &[f64]) -> Result<Vec<f64>> {
        self.eh.matvec(large)
    }
}
