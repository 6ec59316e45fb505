//! Command-line front end: basic-flow | critical | bifurcation | simulate
//! | render.
//!
//! Every physical/config key can come from a `key = value` file
//! (`--config`) or be overridden by the flag of the same name. All file
//! outputs land under `out_dir` together with a `run.txt` manifest echoing
//! the resolved configuration. Exit codes: 0 ok, 2 invalid geometry,
//! 3 degenerate critical point, 4 non-positive bifurcation coefficient,
//! 5 integration blow-up, 1 anything else.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "deanflow",
    version,
    about = "Stability and bifurcation of pressure-driven flow in a narrow curved channel"
)]
struct Cli {
    /// Config file with `key = value` lines (# starts a comment).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Inner cylinder radius.
    #[arg(long = "R1", global = true, value_name = "LEN")]
    r1: Option<f64>,
    /// Outer cylinder radius.
    #[arg(long = "R2", global = true, value_name = "LEN")]
    r2: Option<f64>,
    /// Fluid density.
    #[arg(long = "rho", global = true, value_name = "RHO")]
    rho: Option<f64>,
    /// Kinematic viscosity.
    #[arg(long = "nu", global = true, value_name = "NU")]
    nu: Option<f64>,
    /// Constant azimuthal pressure derivative driving the flow.
    #[arg(long = "dp_dtheta0", global = true, value_name = "DP")]
    dp_dtheta0: Option<f64>,
    /// Axial period of the computational box (gap units).
    #[arg(long = "L", global = true, value_name = "LEN")]
    length: Option<f64>,
    /// Axial truncation (default 2*m0 + 6).
    #[arg(long = "M", global = true, value_name = "INT")]
    max_m: Option<u32>,
    /// Radial truncation (default 8).
    #[arg(long = "N", global = true, value_name = "INT")]
    max_n: Option<u32>,
    /// Time step (default: scheme-dependent).
    #[arg(long = "dt", global = true, value_name = "T")]
    dt: Option<f64>,
    /// Integration horizon.
    #[arg(long = "t_end", global = true, value_name = "T")]
    t_end: Option<f64>,
    /// Time scheme: imex_exp | rk4.
    #[arg(long = "scheme", global = true, value_name = "NAME")]
    scheme: Option<String>,
    /// Seed for random initial fields.
    #[arg(long = "seed", global = true, value_name = "INT")]
    seed: Option<u64>,
    /// Relative steady-state tolerance.
    #[arg(long = "steady_tol", global = true, value_name = "TOL")]
    steady_tol: Option<f64>,
    /// Output directory (created if missing).
    #[arg(long = "out_dir", global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Emit machine-readable JSON instead of the human report.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Swirl profile constants, wall checks, coupling coefficients, lambda.
    BasicFlow,
    /// Critical curve, its minimiser, degeneracy and the sign pattern.
    Critical,
    /// Bifurcation coefficient, predicted vs simulated amplitudes, CSV.
    Bifurcation {
        /// Also dump the interaction tensor as a text triple list.
        #[arg(long)]
        dump_tensor: bool,
    },
    /// Integrate from a random initial field and export the trajectory.
    Simulate,
    /// Integrate, then render the final streamfunction (CSV + SVG).
    Render {
        /// Radial samples of the rendered grid.
        #[arg(long, default_value_t = 65)]
        nr: usize,
        /// Axial samples of the rendered grid.
        #[arg(long, default_value_t = 129)]
        nz: usize,
    },
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    use deanflow::Error;
    match err.downcast_ref::<Error>() {
        Some(Error::Geometry(_)) | Some(Error::OutOfAnnulus { .. }) => 2,
        Some(Error::DegenerateCritical { .. }) => 3,
        Some(Error::NonPositiveGamma { .. }) => 4,
        Some(Error::BlowUp { .. }) => 5,
        _ => 1,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            std::process::exit(1);
        }
        Err(e) => {
            // --help / --version land here.
            print!("{e}");
            std::process::exit(0);
        }
    };

    let flags = config::Overrides {
        r1: cli.r1,
        r2: cli.r2,
        rho: cli.rho,
        nu: cli.nu,
        dp_dtheta0: cli.dp_dtheta0,
        length: cli.length,
        max_m: cli.max_m,
        max_n: cli.max_n,
        dt: cli.dt,
        t_end: cli.t_end,
        scheme: cli.scheme.clone(),
        seed: cli.seed,
        steady_tol: cli.steady_tol,
        out_dir: cli.out_dir.clone(),
    };

    let outcome = config::resolve(cli.config.as_deref(), &flags).and_then(|run| match cli.command {
        Command::BasicFlow => commands::basic_flow(&run, cli.json),
        Command::Critical => commands::critical(&run, cli.json),
        Command::Bifurcation { dump_tensor } => commands::bifurcation(&run, cli.json, dump_tensor),
        Command::Simulate => commands::simulate(&run, cli.json),
        Command::Render { nr, nz } => commands::render(&run, cli.json, nr, nz),
    });

    if let Err(err) = outcome {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code_for(&err));
    }
}
