//! Browser bindings: each call builds a discretization of a named domain and
//! returns an SVG string.

use trimext::active::Discretization;
use trimext::draw;
use trimext::extension::Extension;
use trimext::geometry::Point;
use trimext::interpolation::WeightMode;
use trimext::linalg::SolverKind;
use trimext::nitsche::{assemble, default_penalty, error_norms, solve_reduced};
use trimext::problems::{named_domain, Benchmark, SmoothFunction};
use wasm_bindgen::prelude::*;

const WIDTH: f64 = 560.0;

fn js(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// `n` elements per unit length; the shift is a fraction of one element.
fn setup(domain: &str, p: usize, n: usize, gamma: f64, sx: f64, sy: f64) -> Result<(Discretization, Extension), JsValue> {
    if !(1..=3).contains(&p) {
        return Err(js("degree must be 1, 2 or 3"));
    }
    if !(4..=64).contains(&n) {
        return Err(js("elements per unit must be between 4 and 64"));
    }
    let dom = named_domain(domain).map_err(js)?;
    let h = 1.0 / n as f64;
    let poly = dom.curve.polygon_for_mesh(h, 8, 400).map_err(js)?;
    let disc = Discretization::new(poly, h, Point::new(sx * h, sy * h), p, p + 2).map_err(js)?;
    let ext = Extension::new(&disc, gamma, WeightMode::CutArea, true).map_err(js)?;
    Ok((disc, ext))
}

/// Large and small elements with arrows to the element each small one borrows from.
#[wasm_bindgen]
pub fn partition(domain: &str, p: usize, n: usize, gamma: f64, sx: f64, sy: f64) -> Result<String, JsValue> {
    let (disc, ext) = setup(domain, p, n, gamma, sx, sy)?;
    Ok(draw::partition_svg(&disc, &ext.partition, WIDTH))
}

/// Supports of up to `count` extended basis functions that reach small elements.
#[wasm_bindgen]
pub fn supports(domain: &str, p: usize, n: usize, gamma: f64, sx: f64, sy: f64, count: usize) -> Result<String, JsValue> {
    let (disc, ext) = setup(domain, p, n, gamma, sx, sy)?;
    let cols = draw::extended_columns(&disc, &ext, count);
    Ok(draw::supports_svg(&disc, &ext, &cols, WIDTH))
}

/// Solves the benchmark Poisson problem and returns the heatmap; the errors
/// are appended as an SVG comment `<!-- l2 h1 -->`.
#[wasm_bindgen]
pub fn solve(domain: &str, p: usize, n: usize, gamma: f64, sx: f64, sy: f64) -> Result<String, JsValue> {
    let (disc, ext) = setup(domain, p, n, gamma, sx, sy)?;
    let u = Benchmark;
    let sys = assemble(&disc, &|x| u.source(x, None), &|x| u.value(x), default_penalty(p), None).map_err(js)?;
    let sol = solve_reduced(&sys, &ext.eh, SolverKind::Auto).map_err(js)?;
    let (l2, h1) = error_norms(&disc, &sol.full, &|x| (u.value(x), u.gradient(x)));
    let mut svg = draw::field_svg(&disc, &sol.full, 4, WIDTH);
    svg.push_str(&format!("<!-- {l2:e} {h1:e} -->"));
    Ok(svg)
}
