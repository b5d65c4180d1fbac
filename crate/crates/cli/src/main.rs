//! `sasakit`: goodness checks, CY data, topology, Reeb minimization and
//! potential diagnostics for toric diagrams stored as JSON.

mod commands;
mod error;
mod report;
mod svg;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sasakit::families::FamilyId;

use commands::{AnalyzeOptions, FamilyParams, PairKind};
use error::CliError;
use report::{ErrorInfo, RunReport};

#[derive(Parser)]
#[command(name = "sasakit", version, about = "Toric Sasaki geometry toolkit")]
struct Cli {
    /// More log output on stderr (repeat for debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a diagram and decide whether its cone is good
    Check {
        /// Diagram JSON file
        path: PathBuf,
    },
    /// Run the requested analysis stages on a good diagram
    Analyze {
        /// Diagram JSON file
        path: PathBuf,
        /// Solve for gamma, the height and the height normalization
        #[arg(long)]
        cy: bool,
        /// Fundamental group, b2 and the area invariant
        #[arg(long)]
        topo: bool,
        /// Minimize the volume over the Reeb cone slice
        #[arg(long)]
        reeb: bool,
        /// Number of interior sample points for the potential CSV
        #[arg(long, value_name = "N", requires = "grid_out")]
        potential_grid: Option<usize>,
        /// Where to write the potential CSV
        #[arg(long, value_name = "PATH")]
        grid_out: Option<PathBuf>,
        /// Direction for a volume profile through the minimizer, comma separated (repeatable)
        #[arg(long = "ray", value_name = "V1,V2,..", requires_all = ["reeb", "ray_out"])]
        rays: Vec<String>,
        /// Where to write the volume profile CSV
        #[arg(long, value_name = "PATH")]
        ray_out: Option<PathBuf>,
        /// Write the (p, q) polygon of the height-normalized diagram as SVG
        #[arg(long, value_name = "PATH")]
        emit_svg: Option<PathBuf>,
        /// Add per-stage wall-clock times (makes the output nondeterministic)
        #[arg(long)]
        timing: bool,
        /// Extra random starting points for the minimizer, run in parallel
        #[arg(long, value_name = "K", default_value_t = 0)]
        starts: usize,
    },
    /// Print a generated diagram as JSON
    Family {
        /// lens, non-cy, z5-lens, main4-even or main4-odd
        id: String,
        #[arg(long, allow_negative_numbers = true)]
        l: Option<i64>,
        #[arg(long, allow_negative_numbers = true)]
        r: Option<i64>,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0)]
        s: i64,
    },
    /// Geodesic-equation and Reeb-invariance residuals for a pair of potentials
    GeodesicTest {
        /// Diagram JSON file
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = PairKind::Ratio)]
        pair: PairKind,
        /// Number of random interior points
        #[arg(long, default_value_t = 5)]
        points: usize,
        /// Segment parameter
        #[arg(long, default_value_t = 0.5)]
        t: f64,
    },
}

fn parse_ray(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad ray component {s:?} in {text:?}")))
        })
        .collect()
}

fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
}

fn finish(mut report: RunReport, result: Result<(), CliError>) -> ExitCode {
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            report.error = Some(ErrorInfo {
                exit_code: e.exit_code(),
                message: e.to_string(),
            });
            e.exit_code()
        }
    };
    emit(&report.to_json());
    ExitCode::from(code as u8)
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match cli.command {
        Command::Check { path } => {
            let mut report = RunReport::new("check");
            let result = commands::check(&path, &mut report);
            finish(report, result)
        }
        Command::Analyze {
            path,
            cy,
            topo,
            reeb,
            potential_grid,
            grid_out,
            rays,
            ray_out,
            emit_svg,
            timing,
            starts,
        } => {
            let mut report = RunReport::new("analyze");
            let rays = match rays.iter().map(|r| parse_ray(r)).collect::<Result<Vec<_>, _>>() {
                Ok(r) => r,
                Err(e) => return finish(report, Err(e)),
            };
            let opts = AnalyzeOptions {
                cy,
                topo,
                reeb,
                potential_grid,
                grid_out,
                rays,
                ray_out,
                emit_svg,
                timing,
                starts,
            };
            let result = commands::analyze(&path, &opts, &mut report);
            finish(report, result)
        }
        Command::Family { id, l, r, s } => {
            let result = id
                .parse::<FamilyId>()
                .map_err(CliError::from)
                .and_then(|id| commands::family(id, &FamilyParams { l, r, s }));
            match result {
                Ok(json) => {
                    emit(&json);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::GeodesicTest {
            path,
            pair,
            points,
            t,
        } => match commands::geodesic_test(&path, pair, points, t) {
            Ok(report) => {
                emit(&report.to_json());
                if report.passed {
                    ExitCode::SUCCESS
                } else {
                    eprintln!("error: geodesic residual suite failed");
                    ExitCode::from(4)
                }
            }
            Err(e) => fail(e),
        },
    }
}
