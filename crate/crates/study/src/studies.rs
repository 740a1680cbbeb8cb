//! The convergence, condition, surface and diagnostics studies.
//!
//! Every study walks `(p, gamma, h)` in config order and solves one case per
//! mesh shift. Shifts of one mesh size run in parallel; results are collected
//! by index, so output order and values do not depend on scheduling.

use crate::config::{shift_fractions, StudyConfig};
use crate::error::{io_err, Result};
use crate::records::{aggregate, StudyRecord};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;
use trimext::active::Discretization;
use trimext::diagnostics::{measure, OperatorConstants};
use trimext::extension::Extension;
use trimext::geometry::{Point, SurfaceMap};
use trimext::linalg::{estimate_condition, Preconditioning, SolverKind};
use trimext::nitsche::{assemble, error_norms, reduced_matrix, solve_reduced, NitscheSystem};
use trimext::problems::{Benchmark, NamedDomain, SmoothFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Convergence,
    Condition,
    Surface,
    Diagnostics,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Convergence => "convergence",
            Self::Condition => "condition",
            Self::Surface => "surface",
            Self::Diagnostics => "diagnostics",
        }
    }
}

/// One mesh of the sweep.
#[derive(Clone, Copy, Debug)]
pub struct Case {
    pub p: usize,
    pub gamma: f64,
    pub h: f64,
    pub shift_id: usize,
    pub shift: Point,
}

impl Case {
    pub fn discretize(&self, cfg: &StudyConfig, domain: &NamedDomain) -> Result<Discretization> {
        let poly = domain.curve.polygon_for_mesh(self.h, 8, 400)?;
        Ok(Discretization::new(poly, self.h, self.shift, self.p, cfg.quad_order(self.p))?)
    }

    pub fn extension(&self, cfg: &StudyConfig, disc: &Discretization) -> Result<Extension> {
        Ok(Extension::new(disc, self.gamma, cfg.weights, true)?)
    }

    fn record(&self, study: StudyKind) -> StudyRecord {
        StudyRecord {
            study: study.name().into(),
            p: self.p,
            gamma: self.gamma,
            h: Some(self.h),
            shift_id: self.shift_id.to_string(),
            shift_x: Some(self.shift.x),
            shift_y: Some(self.shift.y),
            status: "ok".into(),
            ..Default::default()
        }
    }
}

/// Cases grouped by `(p, gamma, h)`, shifts innermost.
pub fn case_groups(cfg: &StudyConfig) -> Vec<Vec<Case>> {
    let fractions = shift_fractions(cfg.seed, cfg.shifts);
    let mut groups = Vec::new();
    for &p in &cfg.p {
        for &gamma in &cfg.gamma {
            for &h in &cfg.h {
                groups.push(
                    fractions
                        .iter()
                        .enumerate()
                        .map(|(shift_id, &(u, v))| Case { p, gamma, h, shift_id, shift: Point::new(u * h, v * h) })
                        .collect(),
                );
            }
        }
    }
    groups
}

/// Runs `f` on every case and returns the per-shift records with their
/// extra outputs. A failing case keeps its row with the error as status.
fn sweep<T: Send>(
    cfg: &StudyConfig,
    study: StudyKind,
    f: impl Fn(&Case, &mut StudyRecord) -> Result<T> + Sync,
) -> Vec<(StudyRecord, Option<T>)> {
    let mut out = Vec::new();
    for group in case_groups(cfg) {
        let results: Vec<(StudyRecord, Option<T>)> = group
            .par_iter()
            .map(|case| {
                let mut rec = case.record(study);
                let start = Instant::now();
                let extra = match f(case, &mut rec) {
                    Ok(t) => Some(t),
                    Err(e) => {
                        rec = StudyRecord { status: format!("failed: {e}"), ..case.record(study) };
                        None
                    }
                };
                rec.walltime_s = Some(if cfg.no_timing { 0.0 } else { start.elapsed().as_secs_f64() });
                (rec, extra)
            })
            .collect();
        out.extend(results);
    }
    out
}

fn fill_sizes(rec: &mut StudyRecord, disc: &Discretization, ext: &Extension) {
    rec.dofs_full = Some(disc.active.num_dofs());
    rec.dofs_large = Some(ext.partition.large_dofs().len());
    rec.sh_diam_ratio = Some(ext.partition.sh_diameter_ratio(disc));
}

/// Nitsche system for the benchmark solution on `disc`.
pub fn benchmark_system(disc: &Discretization, beta: f64, map: Option<&SurfaceMap>) -> Result<NitscheSystem> {
    let u = Benchmark;
    Ok(assemble(disc, &|x| u.source(x, map), &|x| u.value(x), beta, map)?)
}

fn exact(x: Point) -> (f64, [f64; 2]) {
    (Benchmark.value(x), Benchmark.gradient(x))
}

/// Solves one case and returns the discretization, extension and full coefficients.
pub fn solve_case(
    cfg: &StudyConfig,
    domain: &NamedDomain,
    case: &Case,
    map: Option<&SurfaceMap>,
) -> Result<(Discretization, Extension, Vec<f64>)> {
    let disc = case.discretize(cfg, domain)?;
    let ext = case.extension(cfg, &disc)?;
    let sys = benchmark_system(&disc, cfg.beta(case.p), map)?;
    let sol = solve_reduced(&sys, &ext.eh, SolverKind::Auto)?;
    Ok((disc, ext, sol.full))
}

/// Worst-case L2 and H1-seminorm errors of the benchmark solution.
pub fn run_convergence(cfg: &StudyConfig, domain: &NamedDomain) -> Result<Vec<StudyRecord>> {
    cfg.validate()?;
    let rows = sweep(cfg, StudyKind::Convergence, |case, rec| {
        let (disc, ext, u) = solve_case(cfg, domain, case, domain.map.as_ref())?;
        fill_sizes(rec, &disc, &ext);
        let (l2, h1) = error_norms(&disc, &u, &exact);
        rec.err_l2 = Some(l2);
        rec.err_h1 = Some(h1);
        Ok(())
    });
    Ok(aggregate(&rows.into_iter().map(|r| r.0).collect::<Vec<_>>()))
}

/// Worst-case condition numbers of the reduced stiffness matrix, without
/// and with diagonal scaling. With `dump` set, the matrix of shift 0 on the
/// finest mesh of every `(p, gamma)` is written there in MatrixMarket format.
pub fn run_condition(cfg: &StudyConfig, domain: &NamedDomain, dump: Option<&Path>) -> Result<(Vec<StudyRecord>, Vec<PathBuf>)> {
    cfg.validate()?;
    let finest = *cfg.h.last().expect("validated");
    let rows = sweep(cfg, StudyKind::Condition, |case, rec| {
        let disc = case.discretize(cfg, domain)?;
        let ext = case.extension(cfg, &disc)?;
        fill_sizes(rec, &disc, &ext);
        let sys = benchmark_system(&disc, cfg.beta(case.p), domain.map.as_ref())?;
        let a = reduced_matrix(&sys, &ext.eh)?;
        rec.cond_raw = Some(estimate_condition(&a, Preconditioning::None, cfg.dense_limit)?.0);
        rec.cond_diag = Some(estimate_condition(&a, Preconditioning::Diagonal, cfg.dense_limit)?.0);
        let mut written = None;
        if let Some(dir) = dump {
            if case.shift_id == 0 && case.h == finest {
                let path = dir.join(format!("condition_p{}_gamma{}_h{}.mtx", case.p, case.gamma, (1.0 / case.h).round()));
                let file = std::fs::File::create(&path).map_err(io_err(&path))?;
                a.write_matrix_market(std::io::BufWriter::new(file)).map_err(io_err(&path))?;
                written = Some(path);
            }
        }
        Ok(written)
    });
    let files = rows.iter().filter_map(|r| r.1.clone().flatten()).collect();
    Ok((aggregate(&rows.into_iter().map(|r| r.0).collect::<Vec<_>>()), files))
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryResidual {
    pub p: usize,
    pub gamma: f64,
    pub h: f64,
    pub shift_id: usize,
    /// `max |u_h − g|` over boundary quadrature points.
    pub max_abs: f64,
}

#[derive(Clone, Debug)]
pub struct SurfaceOutput {
    pub rows: Vec<StudyRecord>,
    pub boundary: Vec<BoundaryResidual>,
    /// `(p, gamma, [x, y, z, u] samples)` of shift 0 on the finest mesh.
    pub fields: Vec<(usize, f64, Vec<[f64; 4]>)>,
}

/// `max |u_h − g|` over the boundary quadrature points.
pub fn boundary_residual(disc: &Discretization, coeffs: &[f64], g: &dyn Fn(Point) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, &e) in disc.active.elements().iter().enumerate() {
        let cell = disc.domain.cell(e);
        let dofs = disc.active.element_dofs(k);
        let mut lv = trimext::space::LocalValues::default();
        for &x in &cell.boundary.points {
            disc.space.eval_local(e, x, &mut lv);
            let v: f64 = dofs.iter().zip(&lv.values).map(|(&i, b)| coeffs[i] * b).sum();
            worst = worst.max((v - g(x)).abs());
        }
    }
    worst
}

/// Lifted samples `(Φ(x), u_h(x))` on a grid over the trimmed domain and at
/// the boundary quadrature points.
pub fn lifted_samples(disc: &Discretization, coeffs: &[f64], map: &SurfaceMap, grid: usize) -> Vec<[f64; 4]> {
    let poly = disc.domain.polygon();
    let b = poly.bounding_box();
    let mut pts = Vec::new();
    for j in 0..grid {
        for i in 0..grid {
            let x = Point::new(
                b.min.x + (i as f64 + 0.5) / grid as f64 * (b.max.x - b.min.x),
                b.min.y + (j as f64 + 0.5) / grid as f64 * (b.max.y - b.min.y),
            );
            if poly.contains(x) {
                pts.push(x);
            }
        }
    }
    for &e in disc.active.elements() {
        pts.extend(disc.domain.cell(e).boundary.points.iter().copied());
    }
    pts.into_iter()
        .filter_map(|x| {
            let (u, _) = disc.eval(coeffs, x)?;
            let y = map.eval(x);
            Some([y[0], y[1], y[2], u])
        })
        .collect()
}

/// Benchmark solution on a mapped surface (the domain's map, or the identity).
pub fn run_surface(cfg: &StudyConfig, domain: &NamedDomain) -> Result<SurfaceOutput> {
    cfg.validate()?;
    let map = domain.map.unwrap_or_else(SurfaceMap::identity);
    let finest = *cfg.h.last().expect("validated");
    let rows = sweep(cfg, StudyKind::Surface, |case, rec| {
        let (disc, ext, u) = solve_case(cfg, domain, case, Some(&map))?;
        fill_sizes(rec, &disc, &ext);
        let (l2, h1) = error_norms(&disc, &u, &exact);
        rec.err_l2 = Some(l2);
        rec.err_h1 = Some(h1);
        let residual = BoundaryResidual {
            p: case.p,
            gamma: case.gamma,
            h: case.h,
            shift_id: case.shift_id,
            max_abs: boundary_residual(&disc, &u, &|x| Benchmark.value(x)),
        };
        let field = (case.shift_id == 0 && case.h == finest).then(|| lifted_samples(&disc, &u, &map, 60));
        Ok((residual, field))
    });
    let mut boundary = Vec::new();
    let mut fields = Vec::new();
    for (rec, extra) in &rows {
        if let Some((res, field)) = extra {
            boundary.push(res.clone());
            if let Some(f) = field {
                fields.push((rec.p, rec.gamma, f.clone()));
            }
        }
    }
    Ok(SurfaceOutput { rows: aggregate(&rows.into_iter().map(|r| r.0).collect::<Vec<_>>()), boundary, fields })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsRow {
    pub p: usize,
    pub gamma: f64,
    pub h: f64,
    /// Worst case over the successful shifts.
    pub constants: OperatorConstants,
}

#[derive(Clone, Debug)]
pub struct DiagnosticsOutput {
    pub rows: Vec<StudyRecord>,
    pub constants: Vec<ConstantsRow>,
    /// `(file stem, svg)` debug drawings of shift 0 on every mesh.
    pub drawings: Vec<(String, String)>,
}

/// Measured stability and norm-equivalence constants, worst over shifts.
pub fn run_diagnostics(cfg: &StudyConfig, domain: &NamedDomain, draw: bool) -> Result<DiagnosticsOutput> {
    cfg.validate()?;
    let rows = sweep(cfg, StudyKind::Diagnostics, |case, rec| {
        let disc = case.discretize(cfg, domain)?;
        let ext = case.extension(cfg, &disc)?;
        fill_sizes(rec, &disc, &ext);
        let c = measure(&disc, &ext, cfg.samples, cfg.seed.wrapping_add(case.shift_id as u64))?;
        let drawings = (draw && case.shift_id == 0).then(|| {
            let tag = format!("p{}_gamma{}_h{}", case.p, case.gamma, (1.0 / case.h).round());
            let cols = trimext::draw::extended_columns(&disc, &ext, 4);
            vec![
                (format!("partition_{tag}"), trimext::draw::partition_svg(&disc, &ext.partition, 800.0)),
                (format!("supports_{tag}"), trimext::draw::supports_svg(&disc, &ext, &cols, 800.0)),
            ]
        });
        Ok((c, drawings))
    });
    let mut constants: Vec<ConstantsRow> = Vec::new();
    let mut drawings = Vec::new();
    for (rec, extra) in &rows {
        let Some((c, d)) = extra else { continue };
        drawings.extend(d.iter().flatten().cloned());
        let h = rec.h.expect("shift rows carry h");
        match constants.iter_mut().find(|r| r.p == rec.p && r.gamma == rec.gamma && r.h == h) {
            Some(r) => r.constants = r.constants.worst(c),
            None => constants.push(ConstantsRow { p: rec.p, gamma: rec.gamma, h, constants: c.clone() }),
        }
    }
    Ok(DiagnosticsOutput { rows: aggregate(&rows.into_iter().map(|r| r.0).collect::<Vec<_>>()), constants, drawings })
}

/// Largest relative change of each constant between consecutive mesh sizes
/// of every `(p, gamma)` series.
pub fn constant_drift(rows: &[ConstantsRow]) -> Vec<(usize, f64, &'static str, f64)> {
    let mut out = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        let Some(b) = rows[i + 1..].iter().find(|b| b.p == a.p && b.gamma == a.gamma) else { continue };
        for ((name, x), (_, y)) in a.constants.entries().into_iter().zip(b.constants.entries()) {
            out.push((a.p, a.gamma, name, (y - x).abs() / x.abs().max(f64::MIN_POSITIVE)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use trimext::problems::named_domain;

    fn small_cfg() -> StudyConfig {
        StudyConfig { p: vec![1], h: vec![0.25, 0.125], shifts: 2, no_timing: true, ..Default::default() }
    }

    #[test]
    fn cases_enumerate_shifts_innermost() {
        let cfg = StudyConfig { p: vec![1, 2], gamma: vec![0.5, 1.0], h: vec![0.5, 0.25], shifts: 3, ..Default::default() };
        let groups = case_groups(&cfg);
        assert_eq!(groups.len(), 8);
        assert!(groups.iter().all(|g| g.len() == 3));
        assert_eq!((groups[1][0].p, groups[1][0].gamma, groups[1][0].h), (1, 0.5, 0.25));
        for g in &groups {
            for c in g {
                assert!(c.shift.x >= 0.0 && c.shift.x < c.h && c.shift.y >= 0.0 && c.shift.y < c.h);
            }
        }
    }

    #[test]
    fn convergence_rows_have_the_expected_shape() {
        let rows = run_convergence(&small_cfg(), &named_domain("bean").unwrap()).unwrap();
        assert_eq!(rows.len(), 2 * 3 + 1);
        assert!(rows.iter().all(|r| r.status == "ok"));
        let worst: Vec<_> = rows.iter().filter(|r| r.shift_id == "worst").collect();
        assert!(worst[1].err_l2.unwrap() < worst[0].err_l2.unwrap());
    }

    #[test]
    fn failing_cases_are_recorded_and_the_study_continues() {
        // No element of a coarse circle mesh meets a threshold of one full element.
        let cfg = StudyConfig { p: vec![1], h: vec![1.0, 0.5], shifts: 1, no_timing: true, domain: "circle".into(), ..Default::default() };
        let rows = run_convergence(&cfg, &named_domain("circle").unwrap()).unwrap();
        assert_eq!(rows.len(), 2 * 2 + 1);
        let shifts: Vec<_> = rows.iter().filter(|r| r.is_shift()).collect();
        assert!(shifts[0].status.starts_with("failed: configuration error"));
        assert_eq!(shifts[0].err_l2, None);
        assert_eq!(shifts[1].status, "ok");
        assert_eq!(rows[1].status, "failed 1/1");
    }

    #[test]
    fn gamma_zero_convergence_run_completes() {
        let cfg = StudyConfig { gamma: vec![0.0], ..small_cfg() };
        let rows = run_convergence(&cfg, &named_domain("bean").unwrap()).unwrap();
        assert!(rows.iter().filter(|r| r.is_shift()).all(|r| r.status == "ok"));
        assert!(rows.iter().filter(|r| r.is_shift()).all(|r| r.dofs_full == r.dofs_large));
    }

    #[test]
    fn condition_rows_carry_both_numbers_and_dump_one_matrix() {
        let dir = std::env::temp_dir().join(format!("trimext-cond-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let (rows, files) = run_condition(&small_cfg(), &named_domain("bean").unwrap(), Some(&dir)).unwrap();
        for r in rows.iter().filter(|r| r.is_shift()) {
            assert!(r.cond_raw.unwrap() >= 1.0 && r.cond_diag.unwrap() >= 1.0);
        }
        assert_eq!(files.len(), 1);
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real"));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
