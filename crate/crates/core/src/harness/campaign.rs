//! Rate-verification campaigns over independent `(problem, seed)` cells.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditioning::{estimate_relative_constants, ConditionReport, RelativeEstimate};
use crate::error::Result;
use crate::solvers::{verify_linear_rate, Algorithm, RateVerdict, SolveTrace, StepType};

use super::commands::{cmd_constants, cmd_solve, step_constant, to_json};
use super::problem::ProblemSpec;
use super::trace_io::{trace_to_string, write_verdict};

#[derive(Clone, Debug)]
pub struct Cell {
    pub problem: ProblemSpec,
    pub seed: u64,
    pub iters: usize,
    /// Dirichlet pairs for the quotient estimate; 0 skips it.
    pub samples: usize,
}

impl Cell {
    /// `{name}-s{seed}` with every character outside `[A-Za-z0-9_.-]`
    /// replaced by `_`.
    pub fn key(&self) -> String {
        let name = self.problem.name.as_deref().unwrap_or("problem");
        let clean: String = name
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || "_.-".contains(c) { c } else { '_' })
            .collect();
        format!("{clean}-s{}", self.seed)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub lipschitz: f64,
    #[serde(skip)]
    pub trace: Option<SolveTrace>,
    pub iterations: usize,
    pub final_value: f64,
    pub verdict: RateVerdict,
    pub drop_steps: usize,
    pub regular_steps: usize,
    pub solve_seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub key: String,
    pub seed: u64,
    pub report: ConditionReport,
    pub f_star: f64,
    pub estimate: Option<RelativeEstimate>,
    pub runs: Vec<RunResult>,
    pub constants_seconds: f64,
    pub estimate_seconds: f64,
}

fn run_one(spec: &ProblemSpec, algorithm: Algorithm, iters: usize, report: &ConditionReport, f_star: f64) -> Result<RunResult> {
    let start = Instant::now();
    let trace = cmd_solve(spec, algorithm, iters, 0.0)?;
    let solve_seconds = start.elapsed().as_secs_f64();
    let lipschitz = step_constant(report, algorithm);
    let mu = report.mu_star_lb.unwrap_or(report.mu_rel);
    let verdict = verify_linear_rate(&trace, f_star, lipschitz, mu, algorithm)?;
    Ok(RunResult {
        algorithm,
        lipschitz,
        iterations: trace.iterations(),
        final_value: trace.final_value(),
        drop_steps: trace.count(StepType::Drop),
        regular_steps: trace.count(StepType::Regular),
        trace: Some(trace),
        verdict,
        solve_seconds,
    })
}

/// Constants, both solvers and their rate verdicts for one cell.
pub fn run_cell(cell: &Cell) -> Result<ExperimentResult> {
    let start = Instant::now();
    let c = cmd_constants(&cell.problem)?;
    let constants_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let estimate = if cell.samples > 0 {
        let f = cell.problem.objective()?;
        Some(estimate_relative_constants(&f, &cell.problem.atoms, cell.samples, cell.seed)?)
    } else {
        None
    };
    let estimate_seconds = start.elapsed().as_secs_f64();
    let runs = [Algorithm::FwAway, Algorithm::ProjGrad]
        .into_iter()
        .map(|a| run_one(&cell.problem, a, cell.iters, &c.report, c.f_star))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        key: cell.key(),
        seed: cell.seed,
        report: c.report,
        f_star: c.f_star,
        estimate,
        runs,
        constants_seconds,
        estimate_seconds,
    })
}

/// Runs every cell in parallel. With `out_dir`, writes `{key}.json`,
/// `{key}.{algo}.trace.csv` and `{key}.{algo}.verdict.csv` per cell.
pub fn run_campaign(cells: &[Cell], out_dir: Option<&Path>) -> Vec<Result<ExperimentResult>> {
    let results: Vec<Result<ExperimentResult>> = cells.par_iter().map(run_cell).collect();
    if let Some(dir) = out_dir {
        for r in results.iter().flatten() {
            if let Err(e) = write_result(r, dir) {
                eprintln!("writing {}: {e}", r.key);
            }
        }
    }
    results
}

pub fn write_result(r: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{}.json", r.key)), to_json(r))?;
    for run in &r.runs {
        if let Some(t) = &run.trace {
            fs::write(dir.join(format!("{}.{}.trace.csv", r.key, run.algorithm)), trace_to_string(t))?;
        }
        let file = fs::File::create(dir.join(format!("{}.{}.verdict.csv", r.key, run.algorithm)))?;
        write_verdict(&run.verdict, file)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::problem::builtin;

    #[test]
    fn cells_verify_and_write_files() {
        let cells: Vec<Cell> = [("simplex(3)", 0), ("random_quadratic(2,4,1,5)", 1)]
            .iter()
            .map(|(n, s)| Cell {
                problem: builtin(n).unwrap(),
                seed: *s,
                iters: 60,
                samples: 20,
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let out = run_campaign(&cells, Some(dir.path()));
        for r in out {
            let r = r.unwrap();
            assert!(r.runs.iter().all(|run| run.verdict.all_hold), "{}", r.key);
        }
        assert!(dir.path().join("simplex_3_-s0.json").exists());
        assert!(dir.path().join("random_quadratic_2_4_1_5_-s1.pg.trace.csv").exists());
    }
}
