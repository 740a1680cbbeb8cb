//! Debug drawings of the active mesh as standalone SVG documents.

use crate::active::Discretization;
use crate::diagnostics::extended_supports;
use crate::extension::{Extension, ExtensionPartition};
use crate::geometry::{BoundingBox, Point};
use std::fmt::Write;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// World-to-pixel transform with `y` pointing up.
struct Canvas {
    bbox: BoundingBox,
    scale: f64,
    pad: f64,
    width: f64,
    height: f64,
}

impl Canvas {
    fn new(bbox: BoundingBox, width: f64) -> Self {
        let pad = 10.0;
        let w = bbox.max.x - bbox.min.x;
        let h = bbox.max.y - bbox.min.y;
        let scale = (width - 2.0 * pad) / w;
        Self { bbox, scale, pad, width, height: h * scale + 2.0 * pad }
    }

    fn px(&self, p: Point) -> (f64, f64) {
        (self.pad + (p.x - self.bbox.min.x) * self.scale, self.pad + (self.bbox.max.y - p.y) * self.scale)
    }

    fn open(&self, out: &mut String) {
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.0} {:.0}">"#,
            self.width, self.height, self.width, self.height
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    }

    fn rect(&self, out: &mut String, lo: Point, hi: Point, style: &str) {
        let (x0, y1) = self.px(lo);
        let (x1, y0) = self.px(hi);
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" {style}/>"#,
            x1 - x0,
            y1 - y0
        );
    }

    fn polygon(&self, out: &mut String, pts: &[Point], style: &str) {
        let coords: Vec<String> = pts.iter().map(|&p| self.px(p)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(out, r#"<polygon points="{}" {style}/>"#, coords.join(" "));
    }
}

fn active_box(disc: &Discretization) -> BoundingBox {
    let mesh = disc.mesh();
    let mut b = disc.domain.polygon().bounding_box();
    for &e in disc.active.elements() {
        let (lo, hi) = (mesh.element_min(e), mesh.element_max(e));
        b.min = Point::new(b.min.x.min(lo.x), b.min.y.min(lo.y));
        b.max = Point::new(b.max.x.max(hi.x), b.max.y.max(hi.y));
    }
    b
}

/// Active elements coloured large/small, the boundary polygon, and an arrow
/// from every small element to the large element it borrows from.
pub fn partition_svg(disc: &Discretization, part: &ExtensionPartition, width: f64) -> String {
    let c = Canvas::new(active_box(disc), width);
    let mesh = disc.mesh();
    let els = disc.active.elements();
    let mut out = String::new();
    c.open(&mut out);
    let _ = writeln!(
        out,
        r##"<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z" fill="#333"/></marker></defs>"##
    );
    for (k, &e) in els.iter().enumerate() {
        let fill = if part.is_large(k) { "#cfe3f7" } else { "#f9c78b" };
        c.rect(&mut out, mesh.element_min(e), mesh.element_max(e), &format!(r##"fill="{fill}" stroke="#888" stroke-width="0.5""##));
    }
    c.polygon(&mut out, disc.domain.polygon().vertices(), r##"fill="none" stroke="black" stroke-width="1.5""##);
    for k in 0..els.len() {
        let Some(t) = part.target(k) else { continue };
        if t == k {
            continue;
        }
        let (x0, y0) = c.px(mesh.element_center(els[k]));
        let (x1, y1) = c.px(mesh.element_center(els[t]));
        let _ = writeln!(
            out,
            r##"<line class="sh" x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="#333" stroke-width="1" marker-end="url(#arrow)"/>"##
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Large-dof columns whose extended support reaches a small element, those
/// with the largest supports first.
pub fn extended_columns(disc: &Discretization, ext: &Extension, count: usize) -> Vec<usize> {
    let supports = extended_supports(disc, ext);
    let mut cols: Vec<(usize, usize)> = supports
        .iter()
        .enumerate()
        .filter(|(_, s)| s.iter().any(|&k| !ext.partition.is_large(k)))
        .map(|(c, s)| (s.len(), c))
        .collect();
    cols.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    cols.into_iter().take(count).map(|(_, c)| c).collect()
}

/// Supports of the extended basis functions `columns` over the active mesh.
pub fn supports_svg(disc: &Discretization, ext: &Extension, columns: &[usize], width: f64) -> String {
    let c = Canvas::new(active_box(disc), width);
    let mesh = disc.mesh();
    let els = disc.active.elements();
    let supports = extended_supports(disc, ext);
    let mut out = String::new();
    c.open(&mut out);
    for (k, &e) in els.iter().enumerate() {
        let fill = if ext.partition.is_large(k) { "#f4f4f4" } else { "#fde7cc" };
        c.rect(&mut out, mesh.element_min(e), mesh.element_max(e), &format!(r##"fill="{fill}" stroke="#bbb" stroke-width="0.5""##));
    }
    for (n, &col) in columns.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let _ = writeln!(out, r#"<g class="support" data-column="{col}">"#);
        for &k in supports.get(col).map(Vec::as_slice).unwrap_or(&[]) {
            let e = els[k];
            c.rect(&mut out, mesh.element_min(e), mesh.element_max(e), &format!(r#"fill="{color}" fill-opacity="0.3" stroke="{color}""#));
        }
        out.push_str("</g>\n");
    }
    c.polygon(&mut out, disc.domain.polygon().vertices(), r##"fill="none" stroke="black" stroke-width="1.5""##);
    out.push_str("</svg>\n");
    out
}

/// Piecewise-constant heat map of the spline with active coefficients
/// `coeffs`, sampled `per_element` times per direction on each active element.
pub fn field_svg(disc: &Discretization, coeffs: &[f64], per_element: usize, width: f64) -> String {
    let c = Canvas::new(active_box(disc), width);
    let mesh = disc.mesh();
    let poly = disc.domain.polygon();
    let step = disc.h() / per_element as f64;
    let mut samples = Vec::new();
    for &e in disc.active.elements() {
        let lo = mesh.element_min(e);
        for j in 0..per_element {
            for i in 0..per_element {
                let x = Point::new(lo.x + (i as f64 + 0.5) * step, lo.y + (j as f64 + 0.5) * step);
                if poly.contains(x) {
                    if let Some((v, _)) = disc.eval(coeffs, x) {
                        samples.push((x, v));
                    }
                }
            }
        }
    }
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.1), b.max(s.1)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = String::new();
    c.open(&mut out);
    let half = Point::new(step / 2.0, step / 2.0);
    for (x, v) in samples {
        let t = (v - lo) / span;
        let (r, g, b) = ramp(t);
        c.rect(&mut out, x - half, x + half, &format!(r#"fill="rgb({r},{g},{b})""#));
    }
    c.polygon(&mut out, poly.vertices(), r##"fill="none" stroke="black" stroke-width="1.5""##);
    let _ = writeln!(out, r#"<text x="12" y="{:.0}" font-size="12" font-family="sans-serif">min {lo:.4e}  max {hi:.4e}</text>"#, c.height - 2.0);
    out.push_str("</svg>\n");
    out
}

/// Blue to red through white.
fn ramp(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64, s: f64| (a + (b - a) * s).round() as u8;
    if t < 0.5 {
        let s = t / 0.5;
        (lerp(49.0, 247.0, s), lerp(54.0, 247.0, s), lerp(149.0, 247.0, s))
    } else {
        let s = (t - 0.5) / 0.5;
        (lerp(247.0, 165.0, s), lerp(247.0, 0.0, s), lerp(247.0, 38.0, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryCurve;
    use crate::interpolation::WeightMode;

    fn setup() -> (Discretization, Extension) {
        let poly = BoundaryCurve::bean().polygon_for_mesh(0.125, 8, 400).unwrap();
        let disc = Discretization::new(poly, 0.125, Point::new(0.03, 0.07), 2, 4).unwrap();
        let ext = Extension::new(&disc, 1.0, WeightMode::CutArea, true).unwrap();
        (disc, ext)
    }

    #[test]
    fn partition_draws_one_arrow_per_small_element() {
        let (disc, ext) = setup();
        let svg = partition_svg(&disc, &ext.partition, 600.0);
        assert_eq!(svg.matches(r#"class="sh""#).count(), ext.partition.num_small());
        assert_eq!(svg.matches("<rect ").count(), disc.active.num_elements() + 1);
    }

    #[test]
    fn supports_reach_small_elements() {
        let (disc, ext) = setup();
        let cols = extended_columns(&disc, &ext, 3);
        assert_eq!(cols.len(), 3);
        let svg = supports_svg(&disc, &ext, &cols, 600.0);
        assert_eq!(svg.matches(r#"class="support""#).count(), 3);
    }

    #[test]
    fn heat_map_reports_the_field_range() {
        let (disc, _) = setup();
        let ones = vec![1.0; disc.active.num_dofs()];
        let svg = field_svg(&disc, &ones, 2, 400.0);
        assert!(svg.contains("min 1.0000e0  max 1.0000e0"), "{}", &svg[svg.len() - 200..]);
    }
}
