mod error;
mod jobs;
mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use slewind::sle_mc::McConfig;
use slewind::{BoundaryFrame, HalfPlanePoint, Kappa};

use error::CliError;
use jobs::{GridQuantity, MethodArg, Suite};
use output::{Format, Report};

/// Winding probabilities and Green's functions of chordal SLE(8/3).
#[derive(Debug, Parser)]
#[command(name = "slewind", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "WINDING_THREADS")]
    threads: Option<usize>,
    /// Write results here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Output format; `grid` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probabilities of every winding pattern of the given points.
    Prob {
        /// Marked points as a+bi with b > 0, space or comma separated; write
        /// --points=-1+1i when the first one starts with a minus.
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true, value_parser = parse::point)]
        points: Vec<HalfPlanePoint>,
        #[arg(long, default_value = "0,inf", value_parser = parse::frame, allow_hyphen_values = true)]
        frame: BoundaryFrame,
        #[arg(long, default_value = "8/3", value_parser = parse::kappa)]
        kappa: Kappa,
        /// Gauss nodes per contour piece.
        #[arg(long, default_value_t = 16)]
        order: usize,
        /// Probability of passing between consecutive pairs of points instead.
        #[arg(long)]
        between: bool,
    },
    /// One- or two-point SLE(8/3) Green's function.
    Green {
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true, value_parser = parse::point)]
        points: Vec<HalfPlanePoint>,
        #[arg(long, default_value = "0,inf", value_parser = parse::frame, allow_hyphen_values = true)]
        frame: BoundaryFrame,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[arg(long, default_value_t = 16)]
        order: usize,
        /// Direction along which point pairs are split in the extrapolation.
        #[arg(long, default_value = "1", value_parser = parse::complex, allow_hyphen_values = true)]
        direction: Complex64,
    },
    /// Monte Carlo estimate from sampled Loewner traces.
    Mc {
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true, value_parser = parse::point)]
        points: Vec<HalfPlanePoint>,
        #[arg(long, default_value = "8/3", value_parser = parse::kappa)]
        kappa: Kappa,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fixed Loewner time step.
        #[arg(long)]
        dt: Option<f64>,
        /// Scale of the adaptive step dt ∝ min|Z|².
        #[arg(long)]
        dt_scale: Option<f64>,
        /// Near-passage radii; switches to estimating P(trace within ε of the point).
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        eps: Vec<f64>,
    },
    /// Check the numerics against closed forms and Monte Carlo.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::Closedform)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 16)]
        order: usize,
    },
    /// Tabulate a one-point quantity over a rectangle.
    Grid {
        #[arg(long, value_enum)]
        command: GridQuantity,
        #[arg(long, default_value = "0,inf", value_parser = parse::frame, allow_hyphen_values = true)]
        frame: BoundaryFrame,
        #[arg(long, allow_hyphen_values = true)]
        xmin: f64,
        #[arg(long, allow_hyphen_values = true)]
        xmax: f64,
        #[arg(long)]
        ymin: f64,
        #[arg(long)]
        ymax: f64,
        #[arg(long, default_value_t = 11)]
        nx: usize,
        #[arg(long, default_value_t = 11)]
        ny: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[arg(long, default_value_t = 16)]
        order: usize,
    },
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot start {n} threads: {e}")))?;
    }
    match &cli.command {
        Command::Prob { points, frame, kappa, order, between } => jobs::prob(&jobs::ProbJob {
            points: points.clone(),
            frame: *frame,
            kappa: *kappa,
            order: *order,
            between: *between,
        }),
        Command::Green { points, frame, method, order, direction } => jobs::green(&jobs::GreenJob {
            points: points.clone(),
            frame: *frame,
            method: *method,
            order: *order,
            direction: *direction,
        }),
        Command::Mc { points, kappa, samples, seed, dt, dt_scale, eps } => {
            let config = McConfig {
                kappa: *kappa,
                n_samples: *samples,
                seed: *seed,
                dt: jobs::time_step(*dt, *dt_scale)?,
                ..McConfig::default()
            };
            jobs::mc(&jobs::McJob { points: points.clone(), kappa: *kappa, config, eps: eps.clone() })
        }
        Command::Verify { suite, seed, samples, order } => jobs::verify(*suite, *seed, *samples, *order),
        Command::Grid { command, frame, xmin, xmax, ymin, ymax, nx, ny, method, order } => jobs::grid(&jobs::GridJob {
            quantity: *command,
            frame: *frame,
            x: (*xmin, *xmax, *nx),
            y: (*ymin, *ymax, *ny),
            method: *method,
            order: *order,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format.unwrap_or(match cli.command {
        Command::Grid { .. } => Format::Csv,
        _ => Format::Json,
    });
    let outcome = run(&cli).and_then(|report| {
        report.write(format, cli.output.as_deref())?;
        let failed = report.table_failures();
        if failed > 0 {
            return Err(CliError::Verification(failed));
        }
        Ok(())
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let CliError::NotImplemented { report, .. } = &e {
                if let Err(w) = report.write(format, cli.output.as_deref()) {
                    eprintln!("slewind: {w}");
                }
            }
            eprintln!("slewind: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
