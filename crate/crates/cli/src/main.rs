//! `laxoleinik`: scenario runner for the Lax–Oleĭnik solver.

mod checks;
mod commands;
mod output;
mod pipeline;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::parse_list;
use scenario::SchemaError;

#[derive(Parser)]
#[command(name = "laxoleinik", version, about = "Entropy solutions of convex scalar conservation laws via the Lax-Oleinik formula")]
struct Cli {
    /// Worker threads (default: logical cores); LAXOLEINIK_JOBS overrides.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conjugate a flux, dump it, or check the biconjugate.
    Transform {
        /// Flux spec as inline JSON or a path to a JSON file.
        #[arg(long)]
        flux: Option<String>,
        /// Take the flux from a scenario instead.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        qmin: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        qmax: Option<f64>,
        #[arg(long)]
        nq: Option<usize>,
        /// CSV of (q, f*(q)).
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of (p, f(p), f'(p-), f'(p+)).
        #[arg(long)]
        dump_flux: Option<PathBuf>,
        #[arg(long)]
        check_biconjugate: bool,
    },
    /// Solve a scenario and write per-time profiles.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated times overriding the scenario's.
        #[arg(long)]
        times: Option<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        emit_gnuplot: bool,
    },
    /// Godunov finite-volume reference solution.
    Oracle {
        #[arg(long)]
        scenario: PathBuf,
        /// Cells (default: the scenario grid).
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long, default_value_t = 0.9)]
        cfl: f64,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// L1 gap between two output directories at common times.
    Crosscheck {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// `lo,hi`.
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification checks; exits 1 if any check misses its expectation.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated: l1,comparison,oleinik,weak,entropy,trace,dpp,mass.
        #[arg(long)]
        checks: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Refinement study against the Godunov oracle.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated increasing cell counts.
        #[arg(long)]
        nx: String,
        #[arg(long, default_value_t = 0.9)]
        cfl: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve, verify and write all artifacts for a scenario.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        emit_gnuplot: bool,
    },
}

fn configure_pool(flag: Option<usize>) -> anyhow::Result<()> {
    let env = match std::env::var("LAXOLEINIK_JOBS") {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| SchemaError(format!("LAXOLEINIK_JOBS must be a positive integer, got {v:?}")))?),
        Err(_) => None,
    };
    if let Some(n) = env.or(flag) {
        if n == 0 {
            return Err(SchemaError("--jobs must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn window(text: &str) -> anyhow::Result<(f64, f64)> {
    let v: Vec<f64> = parse_list(text, "window")?;
    match v[..] {
        [lo, hi] if lo < hi => Ok((lo, hi)),
        _ => Err(SchemaError(format!("window must be lo,hi with lo < hi, got {text:?}")).into()),
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    configure_pool(cli.jobs)?;
    match cli.command {
        Command::Transform { flux, scenario, qmin, qmax, nq, out, dump_flux, check_biconjugate } => {
            let q_range = match (qmin, qmax, nq) {
                (Some(a), Some(b), Some(n)) => Some((a, b, n)),
                (None, None, None) => None,
                _ => return Err(SchemaError("--qmin, --qmax and --nq go together".into()).into()),
            };
            commands::transform(commands::TransformArgs { flux, scenario, q_range, out, dump_flux, check_biconjugate })
        }
        Command::Solve { scenario, times, out_dir, emit_gnuplot } => commands::solve(commands::SolveArgs { scenario, times, out_dir, emit_gnuplot }),
        Command::Oracle { scenario, nx, cfl, out } => commands::oracle(commands::OracleArgs { scenario, nx, cfl, out }),
        Command::Crosscheck { a, b, window: w, out } => commands::crosscheck(&a, &b, window(&w)?, out.as_deref()),
        Command::Verify { scenario, checks, seed, report } => commands::verify(commands::VerifyArgs { scenario, checks, seed, report }),
        Command::Sweep { scenario, nx, cfl, out } => commands::sweep(&scenario, &parse_list(&nx, "nx")?, cfl, out.as_deref()),
        Command::Run { scenario, out_dir, seed, emit_gnuplot } => commands::run(commands::RunArgs { scenario, out_dir, seed, emit_gnuplot }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<SchemaError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
