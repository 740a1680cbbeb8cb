//! Log-log SVG figures with reference-slope guide lines.

use crate::error::{Result, StudyError};
use crate::records::{StudyRecord, WORST};
use std::fmt::Write;

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    /// `(h, value)` with both positive.
    pub points: Vec<(f64, f64)>,
}

/// Line of slope `slope` through the finest point of series `series`.
#[derive(Clone, Debug)]
pub struct Guide {
    pub slope: f64,
    pub series: usize,
}

#[derive(Clone, Debug)]
pub struct Figure {
    pub title: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub guides: Vec<Guide>,
}

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

/// Log-log axes over `[x0, x1] × [y0, y1]` (decimal logarithms).
#[derive(Clone, Copy, Debug)]
pub struct Axes {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Axes {
    pub fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let u = (x.log10() - self.x0) / (self.x1 - self.x0);
        let v = (y.log10() - self.y0) / (self.y1 - self.y0);
        (LEFT + u * (WIDTH - LEFT - RIGHT), HEIGHT - BOTTOM - v * (HEIGHT - TOP - BOTTOM))
    }
}

fn guide_ends(fig: &Figure, g: &Guide) -> Option<[(f64, f64); 2]> {
    let pts = &fig.series.get(g.series)?.points;
    let finest = pts.iter().min_by(|a, b| a.0.total_cmp(&b.0))?;
    let coarsest = pts.iter().max_by(|a, b| a.0.total_cmp(&b.0))?;
    let y = |x: f64| finest.1 * (x / finest.0).powf(g.slope);
    Some([(finest.0, y(finest.0)), (coarsest.0, y(coarsest.0))])
}

pub fn axes(fig: &Figure) -> Result<Axes> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in &fig.series {
        for &(x, y) in &s.points {
            xs.push(x.log10());
            ys.push(y.log10());
        }
    }
    for g in &fig.guides {
        if let Some(ends) = guide_ends(fig, g) {
            ys.extend(ends.iter().map(|e| e.1.log10()));
        }
    }
    if xs.is_empty() {
        return Err(StudyError::EmptyPlot(fig.title.clone()));
    }
    let range = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pad = ((hi - lo) * 0.05).max(0.05);
        (lo - pad, hi + pad)
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    Ok(Axes { x0, x1, y0, y1 })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn label(e: f64) -> String {
    let r = e.round();
    if (e - r).abs() < 1e-9 {
        format!("1e{}", r as i64)
    } else {
        format!("{:.2e}", 10f64.powf(e))
    }
}

pub fn render(fig: &Figure) -> Result<String> {
    if fig.series.iter().any(|s| s.points.iter().any(|p| !(p.0 > 0.0 && p.1 > 0.0 && p.0.is_finite() && p.1.is_finite()))) {
        return Err(StudyError::EmptyPlot(format!("{}: non-positive values cannot go on log axes", fig.title)));
    }
    let ax = axes(fig)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(out, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, (l + r) / 2.0, escape(&fig.title));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">h</text>"#, (l + r) / 2.0, HEIGHT - 16.0);
    let _ = writeln!(
        out,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        (t + b) / 2.0,
        escape(&fig.y_label)
    );
    let mut ticks = |lo: f64, hi: f64, vertical: bool| {
        let mut ks: Vec<f64> = ((lo.ceil() as i64)..=(hi.floor() as i64)).map(|k| k as f64).collect();
        if ks.is_empty() {
            ks = vec![lo, hi];
        }
        for k in ks {
            let v = 10f64.powf(k);
            if vertical {
                let (x, _) = ax.px(v, 10f64.powf(ax.y0));
                let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{t}" x2="{x:.2}" y2="{b}" stroke="#ddd"/>"##);
                let _ = writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, b + 16.0, label(k));
            } else {
                let (_, y) = ax.px(10f64.powf(ax.x0), v);
                let _ = writeln!(out, r##"<line x1="{l}" y1="{y:.2}" x2="{r}" y2="{y:.2}" stroke="#ddd"/>"##);
                let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, l - 4.0, y + 4.0, label(k));
            }
        }
    };
    ticks(ax.x0, ax.x1, true);
    ticks(ax.y0, ax.y1, false);
    for (n, s) in fig.series.iter().enumerate() {
        let color = COLORS[n % COLORS.len()];
        let mut pts = s.points.clone();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let coords: Vec<String> = pts.iter().map(|&(x, y)| ax.px(x, y)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(out, r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, coords.join(" "));
        for &(x, y) in &pts {
            let (x, y) = ax.px(x, y);
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
        }
        let ly = t + 16.0 + 18.0 * n as f64;
        let _ = writeln!(out, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"/>"#, r + 10.0, r + 30.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, r + 36.0, ly + 4.0, escape(&s.label));
    }
    for g in &fig.guides {
        let Some([a, c]) = guide_ends(fig, g) else { continue };
        let (x0, y0) = ax.px(a.0, a.1);
        let (x1, y1) = ax.px(c.0, c.1);
        let _ = writeln!(
            out,
            r##"<line class="guide" x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="#555" stroke-dasharray="5,4"/>"##
        );
        let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" fill="#555">slope {}</text>"##, x1 + 4.0, y1, g.slope);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Figures for the worst-case rows of a study table, keyed by file stem.
pub fn figures(rows: &[StudyRecord]) -> Vec<(String, Figure)> {
    type Column = (&'static str, &'static str, fn(&StudyRecord) -> Option<f64>, fn(usize) -> f64);
    let columns: [Column; 4] = [
        ("errL2", "worst L2 error", |r| r.err_l2, |p| (p + 1) as f64),
        ("errH1", "worst H1 seminorm error", |r| r.err_h1, |p| p as f64),
        ("cond_raw", "worst condition number", |r| r.cond_raw, |_| -2.0),
        ("cond_diag", "worst condition number, diagonal scaling", |r| r.cond_diag, |_| -2.0),
    ];
    let mut studies: Vec<&str> = Vec::new();
    for r in rows {
        if !studies.contains(&r.study.as_str()) {
            studies.push(&r.study);
        }
    }
    let mut out = Vec::new();
    for study in studies {
        for (name, y_label, get, slope) in columns {
            let mut series: Vec<Series> = Vec::new();
            let mut degrees = Vec::new();
            for r in rows.iter().filter(|r| r.study == study && r.shift_id == WORST) {
                let (Some(h), Some(v)) = (r.h, get(r)) else { continue };
                if !(v > 0.0) {
                    continue;
                }
                let label = format!("p={} γ={}", r.p, r.gamma);
                match series.iter_mut().find(|s| s.label == label) {
                    Some(s) => s.points.push((h, v)),
                    None => {
                        series.push(Series { label, points: vec![(h, v)] });
                        degrees.push(r.p);
                    }
                }
            }
            if series.is_empty() {
                continue;
            }
            let mut guides = Vec::new();
            let mut seen = Vec::new();
            for (i, &p) in degrees.iter().enumerate() {
                let s = slope(p);
                if !seen.contains(&s) && series[i].points.len() > 1 {
                    seen.push(s);
                    guides.push(Guide { slope: s, series: i });
                }
            }
            out.push((format!("{study}_{name}"), Figure { title: format!("{study}: {y_label}"), y_label: y_label.into(), series, guides }));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numbers(s: &str) -> Vec<f64> {
        s.split([' ', ',']).filter(|t| !t.is_empty()).map(|t| t.parse().unwrap()).collect()
    }

    fn attr<'a>(elem: &'a str, name: &str) -> &'a str {
        let key = format!(r#" {name}=""#);
        let start = elem.find(&key).unwrap() + key.len();
        &elem[start..start + elem[start..].find('"').unwrap()]
    }

    #[test]
    fn empty_figure_is_an_error() {
        let fig = Figure { title: "t".into(), y_label: "y".into(), series: vec![], guides: vec![] };
        assert!(matches!(render(&fig), Err(StudyError::EmptyPlot(_))));
    }

    #[test]
    fn single_series_gives_one_polyline_with_labels() {
        let fig = Figure {
            title: "errors".into(),
            y_label: "L2".into(),
            series: vec![Series { label: "p=2".into(), points: vec![(0.5, 1e-2), (0.25, 1e-3)] }],
            guides: vec![],
        };
        let svg = render(&fig).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains(">h</text>") && svg.contains(">L2</text>"));
    }

    #[test]
    fn slope_two_guide_lies_on_a_quadratic_series() {
        let pts: Vec<(f64, f64)> = (0..6).map(|k| 0.5f64.powi(k)).map(|x| (x, x * x)).collect();
        let fig = Figure {
            title: "y = x^2".into(),
            y_label: "y".into(),
            series: vec![Series { label: "x^2".into(), points: pts }],
            guides: vec![Guide { slope: 2.0, series: 0 }],
        };
        let svg = render(&fig).unwrap();
        let poly = svg.lines().find(|l| l.contains("<polyline")).unwrap();
        let p = numbers(attr(poly, "points"));
        let (first, last) = ((p[0], p[1]), (p[p.len() - 2], p[p.len() - 1]));
        let guide = svg.lines().find(|l| l.contains(r#"class="guide""#)).unwrap();
        let g: Vec<f64> = ["x1", "y1", "x2", "y2"].iter().map(|k| attr(guide, k).parse().unwrap()).collect();
        let close = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1) < 1.0;
        assert!(close((g[0], g[1]), first) && close((g[2], g[3]), last), "{g:?} vs {first:?} {last:?}");
        // Every polyline vertex sits on the guide segment.
        for v in p.chunks(2) {
            let t = (v[0] - g[0]) / (g[2] - g[0]);
            let y = g[1] + t * (g[3] - g[1]);
            assert!((y - v[1]).abs() < 1.0);
        }
    }

    #[test]
    fn figures_follow_worst_rows() {
        let mk = |h: f64, id: &str, v: f64| StudyRecord {
            study: "convergence".into(),
            p: 2,
            gamma: 1.0,
            h: Some(h),
            shift_id: id.into(),
            err_l2: Some(v),
            status: "ok".into(),
            ..Default::default()
        };
        let rows = vec![mk(0.25, "0", 1.0), mk(0.25, WORST, 2.0), mk(0.125, "0", 0.1), mk(0.125, WORST, 0.2)];
        let figs = figures(&rows);
        assert_eq!(figs.len(), 1);
        assert_eq!(figs[0].0, "convergence_errL2");
        assert_eq!(figs[0].1.series[0].points, vec![(0.25, 2.0), (0.125, 0.2)]);
        assert_eq!(figs[0].1.guides[0].slope, 3.0);
    }
}
