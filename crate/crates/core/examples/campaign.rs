//! A small rate-verification campaign: each `(problem, seed)` cell runs in
//! parallel and writes its own files.
//!
//! ```bash
//! cargo run -p polycond --release --example campaign -- /tmp/polycond-out
//! ```

use std::path::PathBuf;

use polycond::harness::{builtin, run_campaign, Cell};

fn main() -> polycond::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let mut cells = Vec::new();
    for seed in 0..4u64 {
        cells.push(Cell {
            problem: builtin(&format!("random_quadratic(3,6,{seed},10)"))?,
            seed,
            iters: 300,
            samples: 2000,
        });
    }
    cells.push(Cell { problem: builtin("simplex(4)")?, seed: 0, iters: 300, samples: 2000 });

    for r in run_campaign(&cells, out.as_deref()) {
        let r = r?;
        let verdicts: Vec<String> = r
            .runs
            .iter()
            .map(|run| format!("{} {}", run.algorithm, if run.verdict.all_hold { "ok" } else { "VIOLATED" }))
            .collect();
        println!(
            "{:<28} kappa {:>9.3}  mu* >= {:.4}  {}",
            r.key,
            r.report.kappa_rel,
            r.report.mu_star_lb.unwrap_or(f64::NAN),
            verdicts.join(", ")
        );
    }
    if let Some(dir) = out {
        println!("files in {}", dir.display());
    }
    Ok(())
}
