//! Active elements and basis functions of a trimmed spline space.

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon, TrimmedDomain};
use crate::mesh::BackgroundMesh;
use crate::space::SplineSpace;

const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct ActiveMesh {
    elements: Vec<usize>,
    element_slot: Vec<usize>,
    dofs: Vec<usize>,
    dof_slot: Vec<usize>,
    local_dim: usize,
    /// Active dof index of every local function, per active element.
    element_dofs: Vec<usize>,
}

impl ActiveMesh {
    /// Elements with `|T ∩ Ω| > 0` and the basis functions supported on them.
    /// Fails when an active element lies within `p` layers of the mesh boundary.
    pub fn new(space: &SplineSpace, domain: &TrimmedDomain) -> Result<Self> {
        let mesh = space.mesh();
        if mesh != domain.mesh() {
            return Err(Error::Config("spline space and domain use different meshes".into()));
        }
        let p = space.degree();
        let elements = domain.active_elements();
        if elements.is_empty() {
            return Err(Error::Geometry("the domain does not intersect the mesh".into()));
        }
        for &e in &elements {
            let (jx, jy) = mesh.element_coords(e);
            if jx < p || jy < p || jx + p >= mesh.nx() || jy + p >= mesh.ny() {
                return Err(Error::Config(format!(
                    "active element ({jx}, {jy}) is closer than {p} layers to the mesh boundary"
                )));
            }
        }
        let mut element_slot = vec![NONE; mesh.num_elements()];
        for (k, &e) in elements.iter().enumerate() {
            element_slot[e] = k;
        }
        let mut used = vec![false; space.num_basis()];
        for &e in &elements {
            for i in space.element_basis(e) {
                used[i] = true;
            }
        }
        let dofs: Vec<usize> = (0..used.len()).filter(|&i| used[i]).collect();
        let mut dof_slot = vec![NONE; space.num_basis()];
        for (k, &i) in dofs.iter().enumerate() {
            dof_slot[i] = k;
        }
        let local_dim = space.local_dim();
        let element_dofs = elements
            .iter()
            .flat_map(|&e| space.element_basis(e).into_iter().map(|i| dof_slot[i]).collect::<Vec<_>>())
            .collect();
        Ok(Self { elements, element_slot, dofs, dof_slot, local_dim, element_dofs })
    }

    /// Background ids of the active elements, increasing.
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Position of background element `e` among the active elements.
    pub fn element_slot(&self, e: usize) -> Option<usize> {
        self.element_slot.get(e).copied().filter(|&k| k != NONE)
    }

    /// Global basis ids of the active dofs, increasing.
    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    pub fn num_dofs(&self) -> usize {
        self.dofs.len()
    }

    /// Active dof index of global basis `i`.
    pub fn dof_slot(&self, i: usize) -> Option<usize> {
        self.dof_slot.get(i).copied().filter(|&k| k != NONE)
    }

    /// Active dof indices of the local functions of the `k`-th active element.
    pub fn element_dofs(&self, k: usize) -> &[usize] {
        &self.element_dofs[k * self.local_dim..(k + 1) * self.local_dim]
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    /// Dimension of the discontinuous space on the active mesh.
    pub fn num_dg(&self) -> usize {
        self.elements.len() * self.local_dim
    }
}

/// Spline space, cut geometry and active sets for one mesh.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub space: SplineSpace,
    pub domain: TrimmedDomain,
    pub active: ActiveMesh,
}

impl Discretization {
    /// Mesh of size `h` on the lattice `shift + h Z^2` covering `polygon` with
    /// `p + 1` spare layers.
    pub fn new(polygon: Polygon, h: f64, shift: Point, degree: usize, quad_order: usize) -> Result<Self> {
        let mesh = BackgroundMesh::covering(polygon.bounding_box(), h, shift, degree + 1)?;
        Self::on_mesh(polygon, mesh, degree, quad_order)
    }

    pub fn on_mesh(polygon: Polygon, mesh: BackgroundMesh, degree: usize, quad_order: usize) -> Result<Self> {
        let space = SplineSpace::new(mesh.clone(), degree)?;
        let domain = TrimmedDomain::new(polygon, mesh, quad_order)?;
        let active = ActiveMesh::new(&space, &domain)?;
        Ok(Self { space, domain, active })
    }

    pub fn h(&self) -> f64 {
        self.space.h()
    }

    pub fn degree(&self) -> usize {
        self.space.degree()
    }

    pub fn mesh(&self) -> &BackgroundMesh {
        self.space.mesh()
    }

    /// Value and gradient of the spline with active coefficients `coeffs` at `x`.
    pub fn eval(&self, coeffs: &[f64], x: Point) -> Option<(f64, [f64; 2])> {
        let (jx, jy) = self.mesh().locate_clamped(x)?;
        let e = self.mesh().element_index(jx, jy);
        let mut lv = crate::space::LocalValues::default();
        self.space.eval_local(e, x, &mut lv);
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for (l, i) in self.space.element_basis(e).into_iter().enumerate() {
            if let Some(k) = self.active.dof_slot(i) {
                v += coeffs[k] * lv.values[l];
                g[0] += coeffs[k] * lv.grads[l][0];
                g[1] += coeffs[k] * lv.grads[l][1];
            }
        }
        Some((v, g))
    }
}
