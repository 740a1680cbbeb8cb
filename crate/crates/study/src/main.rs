use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use trimext::interpolation::WeightMode;
use trimext_study::config::{parse_mesh_size, Overrides, StudyConfig};
use trimext_study::records::{StudyRecord, SLOPE};
use trimext_study::studies::StudyKind;

#[derive(Parser)]
#[command(name = "trimext", version, about = "Worst-case studies of extended trimmed spline discretizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Worst-case L2 and H1 errors of the benchmark solution.
    Convergence(StudyArgs),
    /// Worst-case condition numbers, raw and diagonally scaled.
    Condition(StudyArgs),
    /// Benchmark solution on a parametrized surface.
    Surface(StudyArgs),
    /// Measured stability constants and debug drawings.
    Diagnostics(StudyArgs),
    /// SVG figures from a study CSV.
    Plot {
        csv: PathBuf,
        #[arg(long, default_value = "plots")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct StudyArgs {
    /// JSON file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Spline degree (repeatable).
    #[arg(long = "p")]
    p: Vec<usize>,
    /// Large-element threshold (repeatable).
    #[arg(long)]
    gamma: Vec<f64>,
    /// Mesh size such as 0.125 or 1/8 (repeatable, decreasing).
    #[arg(long, value_parser = parse_mesh_size)]
    h: Vec<f64>,
    #[arg(long)]
    shifts: Option<usize>,
    /// Nitsche penalty; defaults to 25 p^2.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_parser = ["cut-area", "uniform", "single"])]
    weights: Option<String>,
    #[arg(long)]
    quad_order: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// bean, circle, cone-circle or a JSON file of (theta, x, y) records.
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest matrix whose condition number uses dense eigenvalues.
    #[arg(long)]
    dense_limit: Option<usize>,
    /// Random inputs per shift for diagnostics.
    #[arg(long)]
    samples: Option<usize>,
    /// Write 0 as wall time so repeated runs give identical files.
    #[arg(long)]
    no_timing: bool,
}

impl StudyArgs {
    fn resolve(self) -> Result<StudyConfig, trimext_study::StudyError> {
        let mut cfg = match &self.config {
            Some(path) => StudyConfig::from_file(path)?,
            None => StudyConfig::default(),
        };
        cfg.apply(Overrides {
            domain: self.domain,
            p: self.p,
            gamma: self.gamma,
            h: self.h,
            shifts: self.shifts,
            beta: self.beta,
            weights: self.weights.map(|w| w.parse::<WeightMode>().expect("restricted by clap")),
            quad_order: self.quad_order,
            seed: self.seed,
            out: self.out,
            dense_limit: self.dense_limit,
            samples: self.samples,
            no_timing: self.no_timing,
        });
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_slopes(rows: &[StudyRecord]) {
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
    for r in rows.iter().filter(|r| r.shift_id == SLOPE) {
        println!(
            "{} p={} gamma={}: slope errL2 {} errH1 {} cond_raw {} cond_diag {}",
            r.study,
            r.p,
            r.gamma,
            fmt(r.err_l2),
            fmt(r.err_h1),
            fmt(r.cond_raw),
            fmt(r.cond_diag)
        );
    }
}

fn run(cli: Cli) -> Result<(), trimext_study::StudyError> {
    let (kind, args) = match cli.command {
        Command::Convergence(a) => (StudyKind::Convergence, a),
        Command::Condition(a) => (StudyKind::Condition, a),
        Command::Surface(a) => (StudyKind::Surface, a),
        Command::Diagnostics(a) => (StudyKind::Diagnostics, a),
        Command::Plot { csv, out } => {
            for f in trimext_study::plot_csv(&csv, &out)? {
                println!("{}", f.display());
            }
            return Ok(());
        }
    };
    let cfg = args.resolve()?;
    let rows = trimext_study::execute(kind, &cfg)?;
    let failed = rows.iter().filter(|r| r.is_shift() && r.status != "ok").count();
    print_slopes(&rows);
    if failed > 0 {
        eprintln!("{failed} case(s) failed; see the status column");
    }
    println!("wrote {}", cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
