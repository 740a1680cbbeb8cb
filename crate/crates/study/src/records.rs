use crate::error::{io_err, Result, StudyError};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One CSV row. Per-shift rows carry a numeric `shift_id`; aggregated rows
/// use `worst` (max over shifts) and `slope` (log-log fit over the finest
/// three mesh sizes, stored in the value columns).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub study: String,
    pub p: usize,
    pub gamma: f64,
    pub h: Option<f64>,
    pub shift_id: String,
    pub shift_x: Option<f64>,
    pub shift_y: Option<f64>,
    pub dofs_full: Option<usize>,
    pub dofs_large: Option<usize>,
    #[serde(rename = "errL2")]
    pub err_l2: Option<f64>,
    #[serde(rename = "errH1")]
    pub err_h1: Option<f64>,
    pub cond_raw: Option<f64>,
    pub cond_diag: Option<f64>,
    pub sh_diam_ratio: Option<f64>,
    pub status: String,
    pub walltime_s: Option<f64>,
}

pub const HEADER: &str =
    "study,p,gamma,h,shift_id,shift_x,shift_y,dofs_full,dofs_large,errL2,errH1,cond_raw,cond_diag,sh_diam_ratio,status,walltime_s";

pub const WORST: &str = "worst";
pub const SLOPE: &str = "slope";

impl StudyRecord {
    pub fn is_shift(&self) -> bool {
        self.shift_id != WORST && self.shift_id != SLOPE
    }

    fn values(&self) -> [Option<f64>; 5] {
        [self.err_l2, self.err_h1, self.cond_raw, self.cond_diag, self.sh_diam_ratio]
    }

    fn set_values(&mut self, v: [Option<f64>; 5]) {
        [self.err_l2, self.err_h1, self.cond_raw, self.cond_diag, self.sh_diam_ratio] = v;
    }
}

fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Least-squares slope of `log y` against `log h` over the three smallest `h`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> =
        points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|&(h, y)| (h.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.truncate(3);
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Appends a `worst` row after each `(study, p, gamma, h)` group of shift
/// rows and a `slope` row after each `(study, p, gamma)` series.
pub fn aggregate(rows: &[StudyRecord]) -> Vec<StudyRecord> {
    let mut out = Vec::with_capacity(rows.len() * 2);
    let mut i = 0;
    while i < rows.len() {
        let series = (&rows[i].study, rows[i].p, rows[i].gamma);
        let mut worst_rows = Vec::new();
        while i < rows.len() && (&rows[i].study, rows[i].p, rows[i].gamma) == series {
            let h = rows[i].h;
            let mut worst = StudyRecord {
                study: rows[i].study.clone(),
                p: rows[i].p,
                gamma: rows[i].gamma,
                h,
                shift_id: WORST.into(),
                ..Default::default()
            };
            let (mut failed, mut total, mut time) = (0, 0, 0.0);
            let mut vals = [None; 5];
            while i < rows.len() && (&rows[i].study, rows[i].p, rows[i].gamma) == series && rows[i].h == h {
                let r = &rows[i];
                out.push(r.clone());
                total += 1;
                if r.status == "ok" {
                    for (v, x) in vals.iter_mut().zip(r.values()) {
                        *v = max_opt(*v, x);
                    }
                } else {
                    failed += 1;
                }
                time += r.walltime_s.unwrap_or(0.0);
                i += 1;
            }
            worst.set_values(vals);
            worst.walltime_s = Some(time);
            worst.status = if failed == 0 { "ok".into() } else { format!("failed {failed}/{total}") };
            out.push(worst.clone());
            worst_rows.push(worst);
        }
        let first = &worst_rows[0];
        let mut slope =
            StudyRecord { study: first.study.clone(), p: first.p, gamma: first.gamma, shift_id: SLOPE.into(), ..Default::default() };
        let column = |f: fn(&StudyRecord) -> Option<f64>| {
            let pts: Vec<(f64, f64)> = worst_rows.iter().filter_map(|r| Some((r.h?, f(r)?))).collect();
            fit_slope(&pts)
        };
        slope.set_values([
            column(|r| r.err_l2),
            column(|r| r.err_h1),
            column(|r| r.cond_raw),
            column(|r| r.cond_diag),
            column(|r| r.sh_diam_ratio),
        ]);
        slope.status = if slope.values().iter().any(Option::is_some) { "ok" } else { "n/a" }.into();
        out.push(slope);
    }
    out
}

pub fn write_csv(path: &Path, rows: &[StudyRecord]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let csv_err = |e: csv::Error| StudyError::Parse { path: path.display().to_string(), line: 0, message: e.to_string() };
    if rows.is_empty() {
        w.write_record(HEADER.split(',')).map_err(csv_err)?;
    }
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<StudyRecord>> {
    let name = path.display().to_string();
    let mut r = csv::Reader::from_path(path).map_err(|e| StudyError::Parse { path: name.clone(), line: 0, message: e.to_string() })?;
    let header = r.headers().map_err(|e| StudyError::Parse { path: name.clone(), line: 1, message: e.to_string() })?;
    if header.iter().collect::<Vec<_>>().join(",") != HEADER {
        return Err(StudyError::Parse { path: name, line: 1, message: format!("expected header '{HEADER}'") });
    }
    let mut rows = Vec::new();
    for (k, rec) in r.deserialize::<StudyRecord>().enumerate() {
        let rec = rec.map_err(|e| StudyError::Parse {
            path: name.clone(),
            line: e.position().map(|p| p.line()).unwrap_or(k as u64 + 2),
            message: e.to_string(),
        })?;
        rows.push(rec);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(h: f64, shift: usize, l2: f64, status: &str) -> StudyRecord {
        StudyRecord {
            study: "convergence".into(),
            p: 2,
            gamma: 1.0,
            h: Some(h),
            shift_id: shift.to_string(),
            err_l2: Some(l2),
            status: status.into(),
            ..Default::default()
        }
    }

    #[test]
    fn slope_of_a_power_law_is_its_exponent() {
        let pts: Vec<(f64, f64)> = [0.5, 0.25, 0.125, 0.0625].iter().map(|&h: &f64| (h, 3.0 * h.powi(3))).collect();
        assert!((fit_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn slope_uses_the_finest_three_sizes() {
        let pts = [(0.5, 100.0), (0.25, 0.25 * 0.25), (0.125, 0.125 * 0.125), (0.0625, 0.0625 * 0.0625)];
        assert!((fit_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn worst_row_is_the_column_maximum_of_successful_shifts() {
        let rows = vec![
            row(0.25, 0, 1.0, "ok"),
            row(0.25, 1, 3.0, "ok"),
            row(0.25, 2, 9.0, "failed: singular"),
            row(0.125, 0, 0.5, "ok"),
        ];
        let agg = aggregate(&rows);
        let worst: Vec<&StudyRecord> = agg.iter().filter(|r| r.shift_id == WORST).collect();
        assert_eq!(worst.len(), 2);
        assert_eq!(worst[0].err_l2, Some(3.0));
        assert_eq!(worst[0].status, "failed 1/3");
        assert_eq!(worst[1].err_l2, Some(0.5));
        assert_eq!(worst[0].err_h1, None);
        let slope = agg.last().unwrap();
        assert_eq!(slope.shift_id, SLOPE);
        assert!((slope.err_l2.unwrap() - (6.0f64).log2()).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trips_with_the_exact_header() {
        let dir = std::env::temp_dir().join(format!("trimext-records-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        let rows = aggregate(&[row(0.25, 0, 1.5e-3, "ok"), row(0.125, 0, 2e-4, "ok")]);
        write_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), HEADER);
        assert_eq!(read_csv(&path).unwrap(), rows);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn malformed_rows_report_their_line() {
        let dir = std::env::temp_dir().join(format!("trimext-records-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, format!("{HEADER}\nconvergence,2,1,0.125,0,,,,,1e-3,,,,,ok,\nconvergence,two,1,,,,,,,,,,,,ok,\n")).unwrap();
        match read_csv(&path) {
            Err(StudyError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
