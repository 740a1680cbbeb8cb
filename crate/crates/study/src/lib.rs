//! Study harness: worst-case-over-shifts sweeps of the trimmed spline
//! discretization, with CSV tables, SVG figures and a run manifest.

pub mod config;
pub mod error;
pub mod plot;
pub mod records;
pub mod studies;

use crate::config::{load_domain, StudyConfig};
use crate::error::{io_err, Result};
use crate::records::{write_csv, StudyRecord};
use crate::studies::StudyKind;
use serde::Serialize;
use std::path::{Path, PathBuf};

pub use error::StudyError;

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    versions: Versions,
    study: &'a str,
    config_hash: String,
    config: &'a StudyConfig,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct Versions {
    trimext_study: &'static str,
    trimext: &'static str,
    target: String,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(io_err(path))
}

/// SVG figure per column present in `rows`; returns the written paths.
pub fn write_figures(rows: &[StudyRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    let rendered = plot::figures(rows)
        .into_iter()
        .map(|(stem, fig)| Ok((dir.join(format!("{stem}.svg")), plot::render(&fig)?)))
        .collect::<Result<Vec<_>>>()?;
    for (path, svg) in &rendered {
        write(path, svg)?;
    }
    Ok(rendered.into_iter().map(|r| r.0).collect())
}

/// Runs a study and writes its table, figures, extra outputs and manifest
/// into `cfg.out`. Returns the aggregated rows.
pub fn execute(kind: StudyKind, cfg: &StudyConfig) -> Result<Vec<StudyRecord>> {
    cfg.validate()?;
    let domain = load_domain(&cfg.domain)?;
    let dir = &cfg.out;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files: Vec<PathBuf> = Vec::new();
    let rows = match kind {
        StudyKind::Convergence => studies::run_convergence(cfg, &domain)?,
        StudyKind::Condition => {
            let (rows, mtx) = studies::run_condition(cfg, &domain, Some(dir))?;
            files.extend(mtx);
            rows
        }
        StudyKind::Surface => {
            let out = studies::run_surface(cfg, &domain)?;
            let path = dir.join("surface_boundary.json");
            write(&path, &serde_json::to_string_pretty(&out.boundary).expect("plain data"))?;
            files.push(path);
            for (p, gamma, samples) in &out.fields {
                let path = dir.join(format!("surface_p{p}_gamma{gamma}.csv"));
                let mut w = csv::Writer::from_path(&path).map_err(|e| StudyError::Parse {
                    path: path.display().to_string(),
                    line: 0,
                    message: e.to_string(),
                })?;
                let mut rows: Vec<[String; 4]> = vec![["x".into(), "y".into(), "z".into(), "u".into()]];
                rows.extend(samples.iter().map(|s| s.map(|v| v.to_string())));
                for r in rows {
                    w.write_record(&r).map_err(|e| StudyError::Parse { path: path.display().to_string(), line: 0, message: e.to_string() })?;
                }
                w.flush().map_err(io_err(&path))?;
                files.push(path);
            }
            out.rows
        }
        StudyKind::Diagnostics => {
            let out = studies::run_diagnostics(cfg, &domain, true)?;
            let path = dir.join("diagnostics_constants.json");
            write(&path, &serde_json::to_string_pretty(&out.constants).expect("plain data"))?;
            files.push(path);
            for (stem, svg) in &out.drawings {
                let path = dir.join(format!("{stem}.svg"));
                write(&path, svg)?;
                files.push(path);
            }
            out.rows
        }
    };
    let csv_path = dir.join(format!("{}.csv", kind.name()));
    write_csv(&csv_path, &rows)?;
    files.insert(0, csv_path);
    files.extend(write_figures(&rows, dir)?);
    write_manifest(kind.name(), cfg, &files)?;
    Ok(rows)
}

fn write_manifest(study: &str, cfg: &StudyConfig, files: &[PathBuf]) -> Result<()> {
    let manifest = Manifest {
        tool: "trimext",
        versions: Versions {
            trimext_study: env!("CARGO_PKG_VERSION"),
            trimext: trimext::VERSION,
            target: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
        },
        study,
        config_hash: cfg.hash()?,
        config: cfg,
        outputs: files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect(),
    };
    let path = cfg.out.join(format!("{study}_manifest.json"));
    write(&path, &serde_json::to_string_pretty(&manifest).expect("plain data"))
}

/// Renders the figures of an existing study table into `out`.
pub fn plot_csv(csv: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let rows = records::read_csv(csv)?;
    let figs = plot::figures(&rows);
    if figs.is_empty() {
        return Err(StudyError::EmptyPlot(format!("{} has no worst-case rows to plot", csv.display())));
    }
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    write_figures(&rows, out)
}
