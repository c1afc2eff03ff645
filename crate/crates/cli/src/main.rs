//! Command-line driver: train a neural Zubov certificate and policy,
//! certify the largest verified level set, compare against the LQR
//! baseline, and emit plot-ready data.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zubov_core::dynamics::SystemKind;

use commands::{CmdError, CmdResult};

#[derive(Parser)]
#[command(
    name = "zubov",
    about = "Neural Zubov control: actor-critic training with certified regions of attraction",
    version
)]
struct Cli {
    /// JSON run configuration (flags override file values).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Benchmark system: double-integrator, van-der-pol,
    /// inverted-pendulum, or bicycle-tracking.
    #[arg(long, global = true, value_parser = parse_system)]
    system: Option<SystemKind>,
    /// Training / sampling seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for simulation and branch-and-bound.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the certificate and policy networks.
    Train,
    /// Certify the trained networks (bisect for the largest level unless
    /// the config fixes one).
    Verify {
        /// Directory with w_theta.json / pi_gamma.json (default: the
        /// config's weights_out).
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// LQR baseline: Riccati solution and largest certified ellipse.
    Lqr,
    /// Roll out one closed-loop trajectory.
    Simulate {
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Initial state, comma separated (e.g. "1.0,-0.5").
        #[arg(long)]
        x0: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo area of the sublevel set {W < c}.
    Area {
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 200_000)]
        samples: u64,
    },
    /// Emit surface grid, vector field, level-set polyline, and sample
    /// trajectories as CSV.
    PlotData {
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 201)]
        grid_n: usize,
    },
    /// Export the three certification conditions as SMT-LIB 2 queries.
    ExportSmt {
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        c: f64,
    },
}

fn parse_system(s: &str) -> Result<SystemKind, String> {
    SystemKind::ALL
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| {
            format!(
                "unknown system '{s}' (expected one of: {})",
                SystemKind::ALL.map(|k| k.name()).join(", ")
            )
        })
}

fn run(cli: &Cli) -> CmdResult {
    let file = match &cli.config {
        Some(path) => Some(config::load_file(path).map_err(CmdError::Usage)?),
        None => None,
    };
    let resolved = config::resolve(file.as_ref(), cli.system, cli.seed).map_err(CmdError::Usage)?;

    match &cli.command {
        Command::Train => commands::cmd_train(&resolved),
        Command::Verify { weights } => commands::cmd_verify(&resolved, weights.as_deref()),
        Command::Lqr => commands::cmd_lqr(&resolved),
        Command::Simulate { weights, x0, out } => {
            let parsed: Result<Vec<f64>, _> =
                x0.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let x0 = parsed.map_err(|e| CmdError::Usage(format!("invalid --x0: {e}")))?;
            commands::cmd_simulate(&resolved, weights.as_deref(), &x0, out.as_deref())
        }
        Command::Area {
            weights,
            c,
            samples,
        } => commands::cmd_area(&resolved, weights.as_deref(), *c, *samples),
        Command::PlotData { weights, c, grid_n } => {
            commands::cmd_plot_data(&resolved, weights.as_deref(), *c, *grid_n)
        }
        Command::ExportSmt { weights, c } => {
            commands::cmd_export_smt(&resolved, weights.as_deref(), *c)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("ZUBOV_LOG")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("could not configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
