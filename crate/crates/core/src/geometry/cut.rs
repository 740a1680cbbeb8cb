//! Classification of background elements against a polygonal domain and
//! construction of cut-cell quadrature.

use super::polygon::{centroid, clip_to_rect, signed_area, slab_rule};
use super::{BoundingBox, Point, Polygon};
use crate::error::{Error, Result};
use crate::mesh::BackgroundMesh;
use crate::quadrature::{GaussRule, QuadRule2d};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellKind {
    Inside,
    Outside,
    Cut,
}

/// Quadrature on the part of the domain boundary inside one element.
#[derive(Clone, Debug, Default)]
pub struct BoundaryRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Unit normals pointing out of the domain.
    pub normals: Vec<Point>,
}

impl BoundaryRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Clone, Debug)]
pub struct CutCell {
    pub element: usize,
    pub kind: CellKind,
    /// `|T ∩ Ω|`, kept even when it falls below the area floor.
    pub area: f64,
    /// Center of mass of `T ∩ Ω` (element center for uncut cells).
    pub centroid: Point,
    /// Clipped polygon; empty for uncut cells.
    pub clip: Vec<Point>,
    pub volume: QuadRule2d,
    pub boundary: BoundaryRule,
}

impl CutCell {
    pub fn is_active(&self) -> bool {
        self.kind != CellKind::Outside
    }
}

/// Relative area below which a clip counts as empty.
pub const AREA_FLOOR: f64 = 1e-14;

/// A polygonal domain immersed in a background mesh.
#[derive(Clone, Debug)]
pub struct TrimmedDomain {
    polygon: Polygon,
    mesh: BackgroundMesh,
    cells: Vec<CutCell>,
    quad_order: usize,
}

impl TrimmedDomain {
    /// `polygon` must be counter-clockwise and lie strictly inside the mesh rectangle.
    pub fn new(polygon: Polygon, mesh: BackgroundMesh, quad_order: usize) -> Result<Self> {
        let cells = classify_and_clip(&polygon, &mesh, quad_order)?;
        Ok(Self { polygon, mesh, cells, quad_order })
    }

    pub fn polygon(&self) -> &Polygon {
        &self.polygon
    }

    pub fn mesh(&self) -> &BackgroundMesh {
        &self.mesh
    }

    pub fn cells(&self) -> &[CutCell] {
        &self.cells
    }

    pub fn cell(&self, e: usize) -> &CutCell {
        &self.cells[e]
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    /// Sum of all cell areas.
    pub fn area(&self) -> f64 {
        self.cells.iter().filter(|c| c.is_active()).map(|c| c.area).sum()
    }

    /// Elements with `|T ∩ Ω| > 0`, in increasing order.
    pub fn active_elements(&self) -> Vec<usize> {
        self.cells.iter().filter(|c| c.is_active()).map(|c| c.element).collect()
    }

    /// Largest `|∂Ω ∩ T| / h` over all elements.
    pub fn max_boundary_length_ratio(&self) -> f64 {
        let h = self.mesh.h();
        self.cells.iter().map(|c| c.boundary.length() / h).fold(0.0, f64::max)
    }

    pub fn bounding_box(&self) -> BoundingBox {
        self.polygon.bounding_box()
    }
}

/// A piece of a polygon edge lying in one element.
struct Piece {
    a: Point,
    b: Point,
}

/// Splits every polygon edge at the mesh lines and assigns each piece to the
/// element on the inner side of its midpoint.
fn boundary_pieces(polygon: &Polygon, mesh: &BackgroundMesh) -> Result<Vec<Vec<Piece>>> {
    let h = mesh.h();
    let o = mesh.origin();
    let mut out: Vec<Vec<Piece>> = (0..mesh.num_elements()).map(|_| Vec::new()).collect();
    let mut ts: Vec<f64> = Vec::new();
    for (p, q) in polygon.edges() {
        ts.clear();
        ts.push(0.0);
        ts.push(1.0);
        for (pc, qc, oc) in [(p.x, q.x, o.x), (p.y, q.y, o.y)] {
            if pc == qc {
                continue;
            }
            let (lo, hi) = ((pc.min(qc) - oc) / h, (pc.max(qc) - oc) / h);
            let mut k = lo.ceil();
            while k <= hi {
                let t = (oc + k * h - pc) / (qc - pc);
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
                k += 1.0;
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let d = q - p;
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let inward = Point::new(-d.y, d.x) * (1.0 / len);
        for w in ts.windows(2) {
            let (a, b) = (p.lerp(q, w[0]), p.lerp(q, w[1]));
            if a == b {
                continue;
            }
            let mid = a.lerp(b, 0.5) + inward * (1e-9 * h);
            let (jx, jy) = mesh.locate(mid).ok_or_else(|| {
                Error::Geometry(format!("domain boundary point ({}, {}) lies outside the background mesh", mid.x, mid.y))
            })?;
            out[mesh.element_index(jx, jy)].push(Piece { a, b });
        }
    }
    Ok(out)
}

/// Inside/outside flag of every element center by even-odd scanlines; only
/// meaningful for elements the boundary does not enter.
fn center_parity(polygon: &Polygon, mesh: &BackgroundMesh) -> Vec<bool> {
    let mut inside = vec![false; mesh.num_elements()];
    let mut xs: Vec<f64> = Vec::new();
    for jy in 0..mesh.ny() {
        let y = mesh.element_center(mesh.element_index(0, jy)).y;
        xs.clear();
        for (a, b) in polygon.edges() {
            if (a.y > y) != (b.y > y) {
                xs.push(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
            }
        }
        xs.sort_by(f64::total_cmp);
        for jx in 0..mesh.nx() {
            let e = mesh.element_index(jx, jy);
            let x = mesh.element_center(e).x;
            inside[e] = xs.partition_point(|&c| c <= x) % 2 == 1;
        }
    }
    inside
}

/// Classifies every element of `mesh` and builds its quadrature rules.
/// `quad_order` is the number of Gauss points per direction.
pub fn classify_and_clip(polygon: &Polygon, mesh: &BackgroundMesh, quad_order: usize) -> Result<Vec<CutCell>> {
    if quad_order == 0 {
        return Err(Error::Config("quadrature order must be at least 1".into()));
    }
    let mut pieces = boundary_pieces(polygon, mesh)?;
    let parity = center_parity(polygon, mesh);
    let rule = GaussRule::new(quad_order);
    let h = mesh.h();
    let full = h * h;
    let elements: Vec<(usize, Vec<Piece>)> =
        pieces.iter_mut().map(std::mem::take).enumerate().collect();
    let cells = crate::par_map(&elements, |(e, pcs)| {
        let e = *e;
        let (min, max) = (mesh.element_min(e), mesh.element_max(e));
        if pcs.is_empty() {
            return if parity[e] {
                CutCell {
                    element: e,
                    kind: CellKind::Inside,
                    area: full,
                    centroid: mesh.element_center(e),
                    clip: Vec::new(),
                    volume: QuadRule2d::tensor(&rule, min, max),
                    boundary: BoundaryRule::default(),
                }
            } else {
                CutCell {
                    element: e,
                    kind: CellKind::Outside,
                    area: 0.0,
                    centroid: mesh.element_center(e),
                    clip: Vec::new(),
                    volume: QuadRule2d::default(),
                    boundary: BoundaryRule::default(),
                }
            };
        }
        let clip = clip_to_rect(polygon.vertices(), min, max);
        let area = signed_area(&clip).max(0.0);
        let mut boundary = BoundaryRule::default();
        for piece in pcs {
            let d = piece.b - piece.a;
            let len = d.norm();
            let normal = Point::new(d.y, -d.x) * (1.0 / len);
            for (t, w) in rule.iter() {
                boundary.points.push(piece.a.lerp(piece.b, t));
                boundary.weights.push(w * len);
                boundary.normals.push(normal);
            }
        }
        let (kind, volume, clip) = if area < AREA_FLOOR * full {
            (CellKind::Outside, QuadRule2d::default(), clip)
        } else if full - area <= 1e-13 * full {
            (CellKind::Inside, QuadRule2d::tensor(&rule, min, max), Vec::new())
        } else {
            let volume = slab_rule(&clip, &rule);
            (CellKind::Cut, volume, clip)
        };
        let centroid = if kind == CellKind::Cut { centroid(&clip) } else { mesh.element_center(e) };
        let area = if kind == CellKind::Inside { full } else { area };
        CutCell { element: e, kind, area, centroid, clip, volume, boundary }
    });
    Ok(cells)
}
