use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polycond::harness::{self, commands::to_json, ProblemSpec};
use polycond::solvers::Algorithm;
use polycond::{Error, Result};

#[derive(Parser)]
#[command(name = "polycond", version, about = "Condition numbers relative to a polytope")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem JSON file.
    #[arg(long, global = true)]
    problem: Option<PathBuf>,
    /// simplex(m), l1ball(m), flat_direction or random_quadratic(m,n,seed,cond).
    #[arg(long, global = true)]
    builtin: Option<String>,
    #[arg(long, global = true, default_value = "fw-away")]
    algo: Algorithm,
    #[arg(long, global = true, default_value_t = 500)]
    iters: usize,
    #[arg(long, global = true, default_value_t = 1000)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Target FW gap for `solve` and `verify`.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Facial distance and its minimizing face, as JSON.
    Phi,
    /// Relative constants and the certified growth bound, as JSON.
    Constants,
    /// Run a solver and write its trace CSV.
    Solve,
    /// Check a trace against its rate bound; writes the per-k verdict CSV.
    Verify {
        /// Trace CSV; solves with --algo when absent.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Sampled relative constants and growth constant, as JSON.
    Estimate {
        /// Sample the growth constant on the grid of this step.
        #[arg(long)]
        grid: Option<f64>,
    },
}

fn load(cli: &Cli) -> Result<ProblemSpec> {
    match (&cli.problem, &cli.builtin) {
        (Some(p), None) => harness::load_problem(p),
        (None, Some(b)) => harness::builtin(b),
        _ => Err(Error::InvalidField {
            field: "problem".into(),
            message: "give exactly one of --problem and --builtin".into(),
        }),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let spec = load(cli)?;
    match &cli.command {
        Command::Phi => emit(cli, &to_json(&harness::cmd_phi(&spec)?))?,
        Command::Constants => emit(cli, &to_json(&harness::cmd_constants(&spec)?))?,
        Command::Solve => {
            let trace = harness::cmd_solve(&spec, cli.algo, cli.iters, cli.tol)?;
            emit(cli, &harness::trace_io::trace_to_string(&trace))?;
        }
        Command::Verify { trace } => {
            let trace = match trace {
                Some(path) => harness::read_trace(fs::File::open(path)?)?,
                None => harness::cmd_solve(&spec, cli.algo, cli.iters, cli.tol)?,
            };
            let report = harness::cmd_verify(&spec, &trace)?;
            let mut csv = Vec::new();
            harness::write_verdict(&report.verdict, &mut csv)?;
            emit(cli, &String::from_utf8(csv).expect("csv is utf-8"))?;
            let v = &report.verdict;
            eprintln!(
                "{}: L = {:e}, mu* >= {:e}, bound rate {:.6}, empirical rate {}, first violation {}",
                if report.verified { "verified" } else { "FAILED" },
                report.lipschitz,
                report.mu_star,
                v.bound_rate,
                v.empirical_rate.map_or("n/a".into(), |r| format!("{r:.6}")),
                v.first_violation.map_or("none".into(), |k| k.to_string()),
            );
            return Ok(report.verified);
        }
        Command::Estimate { grid } => {
            emit(cli, &to_json(&harness::cmd_estimate(&spec, cli.samples, cli.seed, *grid)?))?
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("POLYCOND_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().ok();
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
