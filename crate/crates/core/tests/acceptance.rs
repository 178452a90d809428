//! Acceptance suite. Runs without the test harness so that each criterion
//! prints one PASS/FAIL line in the normal `cargo test` output.

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polycond::conditioning::{
    estimate_mu_star, mu_star_lower_bound_quadratic, quadratic_relative_constants,
    sample_relative_quotients, MinimizerSet, MuStarSampling, ObjectiveOracle,
};
use polycond::geometry::{facial_distance, polytope_pair_distance};
use polycond::harness::commands::{cmd_constants, step_constant};
use polycond::harness::problem::{flat_direction_problem, simplex_problem};
use polycond::harness::{builtin, write_problem, ProblemSpec};
use polycond::lp::{fiber_distance, project_simplex, solve_lp, LinearProgram, LpStatus};
use polycond::solvers::{
    solve_fw_away, solve_proj_grad, verify_linear_rate, Algorithm, SolveConfig,
    SolveTrace, StepType,
};
use polycond::{AtomMatrix, DenseMatrix, Norm, SimplexPoint};

const RATE_ITERS: usize = 500;
const SLACK: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn random_instances() -> Vec<ProblemSpec> {
    (0..10)
        .map(|seed| builtin(&format!("random_quadratic(3,6,{seed},10)")).unwrap())
        .collect()
}

fn rate_instances() -> Vec<ProblemSpec> {
    let mut v = random_instances();
    v.push(simplex_problem(3).unwrap());
    v.push(simplex_problem(4).unwrap());
    v
}

fn dirichlet(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn matvec(a: &DenseMatrix, x: &[f64]) -> Vec<f64> {
    (0..a.rows()).map(|r| (0..a.cols()).map(|c| a[(r, c)] * x[c]).sum()).collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for m in 2..=6 {
        let mf = m as f64;
        let exact = if m % 2 == 0 { 2.0 / mf.sqrt() } else { 2.0 / (mf - 1.0 / mf).sqrt() };
        let phi = facial_distance(&AtomMatrix::simplex(m), Norm::L2).unwrap();
        worst = worst.max((phi - exact).abs());
    }
    for m in 2..=4 {
        let exact = 1.0 / (m as f64 - 1.0).sqrt();
        let phi = facial_distance(&AtomMatrix::l1_ball(m), Norm::L2).unwrap();
        worst = worst.max((phi - exact).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-6 && secs < 30.0, format!("max error {worst:.2e}, {secs:.2}s"))
}

fn criterion_2() -> Outcome {
    let mut ok = true;
    let mut total = 0usize;
    let mut worst_low = f64::INFINITY;
    let mut worst_high = f64::INFINITY;
    let mut worst_attain = 0.0f64;
    for (i, spec) in random_instances().iter().enumerate() {
        let f = spec.objective().unwrap();
        let r = quadratic_relative_constants(&f, &spec.atoms).unwrap();
        // Independent diameter of Q^{1/2}A over atom pairs.
        let qa = f.sqrt_q().matmul(spec.atoms.matrix()).unwrap();
        let mut diam = 0.0f64;
        for a in 0..qa.cols() {
            for b in 0..qa.cols() {
                let d: Vec<f64> = (0..qa.rows()).map(|k| qa[(k, a)] - qa[(k, b)]).collect();
                diam = diam.max(norm2(&d));
            }
        }
        ok &= r.kappa_rel == (r.diam * r.diam) / (r.phi * r.phi);
        ok &= (diam - r.diam).abs() <= 1e-12 * diam;
        ok &= r.mu_rel > 0.0;
        let qs = sample_relative_quotients(&f, &spec.atoms, 10_000, 100 + i as u64).unwrap();
        let random = qs.iter().filter(|q| !q.vertex_pair).count();
        ok &= random + 100 >= 10_000;
        total += random;
        for q in &qs {
            worst_low = worst_low.min(q.quotient - (r.mu_rel - 1e-8));
            worst_high = worst_high.min(r.l_rel + 1e-8 - q.quotient);
        }
        let vmax = qs
            .iter()
            .filter(|q| q.vertex_pair)
            .map(|q| q.quotient)
            .fold(f64::NEG_INFINITY, f64::max);
        worst_attain = worst_attain.max((vmax - r.l_rel).abs());
    }
    ok &= worst_low >= 0.0 && worst_high >= 0.0 && worst_attain <= 1e-6;
    outcome(
        ok,
        format!(
            "{total} random quotients; margins below {worst_low:.2e}, above {worst_high:.2e}; vertex max off L_rel by {worst_attain:.2e}"
        ),
    )
}

struct RateRun {
    name: String,
    trace: SolveTrace,
    f_star: f64,
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_polycond")
}

fn criterion_rate(algorithm: Algorithm, runs: &mut Vec<RateRun>) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut failures = Vec::new();
    let mut worst_margin = f64::INFINITY;
    for (i, spec) in rate_instances().iter().enumerate() {
        let name = spec.name.clone().unwrap_or_default();
        let c = cmd_constants(spec).unwrap();
        let l = step_constant(&c.report, algorithm);
        let mu = c.report.mu_star_lb.unwrap();
        let f = spec.objective().unwrap();
        let cfg = match algorithm {
            Algorithm::FwAway => SolveConfig::fw_away(l),
            Algorithm::ProjGrad => SolveConfig::proj_grad(l),
        }
        .with_max_iters(RATE_ITERS)
        .with_target_gap(0.0);
        let trace = match algorithm {
            Algorithm::FwAway => solve_fw_away(&f, &spec.atoms, &cfg),
            Algorithm::ProjGrad => solve_proj_grad(&f, &spec.atoms, &cfg),
        }
        .unwrap();
        let v = verify_linear_rate(&trace, c.f_star, l, mu, algorithm).unwrap();
        for chk in &v.checks {
            worst_margin = worst_margin.min(chk.bound + SLACK - chk.gap);
        }
        let empirical_ok = v.empirical_rate.is_none_or(|e| e <= v.bound_rate);
        if !(v.all_hold && empirical_ok) {
            ok = false;
            failures.push(name.clone());
        }

        // The same check through the command-line tool.
        let problem = dir.path().join(format!("p{i}.json"));
        let trace_file = dir.path().join(format!("p{i}.{algorithm}.csv"));
        write_problem(spec, &problem).unwrap();
        let solve = Command::new(bin())
            .args(["solve", "--algo", &algorithm.to_string(), "--iters", "500", "--tol", "0"])
            .arg("--problem")
            .arg(&problem)
            .arg("--out")
            .arg(&trace_file)
            .status()
            .unwrap();
        let verify = Command::new(bin())
            .arg("verify")
            .arg("--problem")
            .arg(&problem)
            .arg("--trace")
            .arg(&trace_file)
            .output()
            .unwrap();
        if !(solve.success() && verify.status.code() == Some(0)) {
            ok = false;
            failures.push(format!("{name} (cli exit {:?})", verify.status.code()));
        }
        runs.push(RateRun { name, trace, f_star: c.f_star });
    }
    outcome(
        ok,
        format!(
            "{} instances, k <= {RATE_ITERS}, smallest margin {worst_margin:.2e}{}",
            rate_instances().len(),
            if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
        ),
    )
}

fn criterion_5(runs: &mut Vec<RateRun>) -> Outcome {
    let spec = flat_direction_problem();
    let f = spec.objective().unwrap();
    let a = spec.atoms.matrix();
    let r = quadratic_relative_constants(&f, &spec.atoms).unwrap();

    // u = A(½, ½, 0) and x = e₃.
    let u = matvec(a, &[0.5, 0.5, 0.0]);
    let x = [0.0, 0.0, 1.0];
    let ax = matvec(a, &x);
    let g = f.gradient(&u);
    let bregman = f.value(&ax) - f.value(&u) - (0..2).map(|k| g[k] * (ax[k] - u[k])).sum::<f64>();
    let dist = fiber_distance(&x, &u, a).unwrap();
    let witness = bregman == 0.0 && dist > 0.5;

    let lb = mu_star_lower_bound_quadratic(&f, &spec.atoms, &[0.0, 0.0]).unwrap();
    let basis = MinimizerSet::Basis(vec![SimplexPoint::new(vec![0.5, 0.5, 0.0]).unwrap()]);
    let grid = estimate_mu_star(&f, &spec.atoms, 0.0, &basis, MuStarSampling::Grid { step: 0.01 }).unwrap();

    let cfg = SolveConfig::fw_away(r.l_rel).with_max_iters(200).with_target_gap(0.0);
    let trace = solve_fw_away(&f, &spec.atoms, &cfg).unwrap();
    let reached = trace.records.iter().find(|rec| rec.f.abs() <= 1e-8).map(|rec| rec.k);
    let ok = r.mu_rel == 0.0
        && witness
        && (lb - 0.5).abs() <= 1e-9
        && (0.45..=0.55).contains(&grid.estimate)
        && reached.is_some_and(|k| k <= 200);
    runs.push(RateRun { name: "flat_direction".into(), trace, f_star: 0.0 });
    outcome(
        ok,
        format!(
            "mu_rel {}, witness quotient {}, mu* lb {lb:.12}, grid {:.4}, f* reached at k = {reached:?}",
            r.mu_rel,
            2.0 * bregman / (dist * dist),
            grid.estimate
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for spec in random_instances() {
        let a = spec.atoms.matrix();
        let phi = facial_distance(&spec.atoms, Norm::L2).unwrap();
        for _ in 0..1000 {
            let x = dirichlet(a.cols(), &mut rng);
            let y = dirichlet(a.cols(), &mut rng);
            let u = matvec(a, &y);
            let ax = matvec(a, &x);
            let d: Vec<f64> = ax.iter().zip(&u).map(|(p, q)| p - q).collect();
            let lhs = fiber_distance(&x, &u, a).unwrap();
            let rhs = 2.0 * norm2(&d) / phi + 1e-8;
            worst = worst.min(rhs - lhs);
            if lhs > rhs {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("10000 pairs, {violations} violations, smallest margin {worst:.2e}"))
}

/// Projection by trying every support: on support `S` the projection is
/// `y_S − τ` with `τ` fixing the sum; the closest nonnegative candidate wins.
fn brute_projection(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let tau = (idx.iter().map(|&i| y[i]).sum::<f64>() - 1.0) / idx.len() as f64;
        let mut x = vec![0.0; n];
        for &i in &idx {
            x[i] = y[i] - tau;
        }
        if x.iter().any(|&v| v < -1e-15) {
            continue;
        }
        let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, x));
        }
    }
    best.unwrap().1
}

/// Minimum of `cᵀx` over basic feasible solutions: every choice of `rows`
/// columns with a nonsingular basis and nonnegative solution.
fn brute_lp(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let m = a.len();
    let n = c.len();
    let mut best: Option<f64> = None;
    let mut combo: Vec<usize> = (0..m).collect();
    loop {
        // Gaussian elimination with partial pivoting on the chosen columns.
        let mut mat: Vec<Vec<f64>> = (0..m)
            .map(|r| {
                let mut row: Vec<f64> = combo.iter().map(|&j| a[r][j]).collect();
                row.push(b[r]);
                row
            })
            .collect();
        let mut singular = false;
        for col in 0..m {
            let p = (col..m).max_by(|&i, &j| mat[i][col].abs().total_cmp(&mat[j][col].abs())).unwrap();
            if mat[p][col].abs() < 1e-10 {
                singular = true;
                break;
            }
            mat.swap(col, p);
            for r in 0..m {
                if r != col {
                    let factor = mat[r][col] / mat[col][col];
                    for k in col..=m {
                        mat[r][k] -= factor * mat[col][k];
                    }
                }
            }
        }
        if !singular {
            let xb: Vec<f64> = (0..m).map(|r| mat[r][m] / mat[r][r]).collect();
            if xb.iter().all(|&v| v >= -1e-10) {
                let val: f64 = combo.iter().zip(&xb).map(|(&j, v)| c[j] * v).sum();
                best = Some(best.map_or(val, |b: f64| b.min(val)));
            }
        }
        // Next combination in lexicographic order.
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if combo[i] < n - m + i {
                combo[i] += 1;
                for k in i + 1..m {
                    combo[k] = combo[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let mut proj_err = 0.0f64;
    for s in 0..1000 {
        let n = 1 + s % 4;
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let fast = project_simplex(&y);
        let slow = brute_projection(&y);
        for (a, b) in fast.iter().zip(&slow) {
            proj_err = proj_err.max((a - b).abs());
        }
    }

    let mut lp_err = 0.0f64;
    let mut lp_mismatch = 0;
    for _ in 0..200 {
        // Two random rows plus a bounding row over 5 structural variables
        // and one slack: 6 variables in total.
        let nv = 5;
        let x0: Vec<f64> = (0..nv).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut rhs = Vec::new();
        for _ in 0..2 {
            let mut row: Vec<f64> = (0..nv).map(|_| rng.random_range(-1.0..1.0)).collect();
            rhs.push(row.iter().zip(&x0).map(|(a, b)| a * b).sum());
            row.push(0.0);
            rows.push(row);
        }
        let mut bound = vec![1.0; nv];
        bound.push(1.0);
        rhs.push(x0.iter().sum::<f64>() + 1.0);
        rows.push(bound);
        let c: Vec<f64> = (0..=nv).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lp = LinearProgram::new(c.clone(), DenseMatrix::from_rows(&rows).unwrap(), rhs.clone()).unwrap();
        let sol = solve_lp(&lp).unwrap();
        match (sol.status, brute_lp(&c, &rows, &rhs)) {
            (LpStatus::Optimal, Some(v)) => lp_err = lp_err.max((sol.value - v).abs()),
            _ => lp_mismatch += 1,
        }
    }

    // Segment against segment in the plane, compared with a 1001×1001 grid
    // over both parameters. Segment lengths stay below 1, so the grid is
    // within 1e-3 of the true distance.
    let mut dist_err = 0.0f64;
    for _ in 0..10 {
        let cols: Vec<Vec<f64>> = (0..4)
            .map(|i| {
                let off = if i < 2 { 0.0 } else { rng.random_range(-1.0..1.0) };
                vec![off + rng.random_range(0.0..0.7), rng.random_range(0.0..0.7)]
            })
            .collect();
        let atoms = AtomMatrix::new(DenseMatrix::from_columns(&cols).unwrap()).unwrap();
        let d = polytope_pair_distance(&atoms, &[0, 1], &[2, 3], Norm::L2).unwrap().distance;
        let steps = 1000;
        let mut grid = f64::INFINITY;
        for i in 0..=steps {
            let s = i as f64 / steps as f64;
            let p = [cols[0][0] * (1.0 - s) + cols[1][0] * s, cols[0][1] * (1.0 - s) + cols[1][1] * s];
            for j in 0..=steps {
                let t = j as f64 / steps as f64;
                let q = [cols[2][0] * (1.0 - t) + cols[3][0] * t, cols[2][1] * (1.0 - t) + cols[3][1] * t];
                grid = grid.min(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        dist_err = dist_err.max((grid - d).abs());
    }
    let ok = proj_err <= 1e-8 && lp_err <= 1e-8 && lp_mismatch == 0 && dist_err <= 1e-3;
    outcome(
        ok,
        format!(
            "projection {proj_err:.1e}, LP {lp_err:.1e} ({lp_mismatch} status mismatches), pair distance {dist_err:.1e}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut worst_rel = 0.0f64;
    let mut worst_kappa = 0.0f64;
    let mut specs = random_instances();
    specs.push(simplex_problem(4).unwrap());
    specs.push(flat_direction_problem());
    for spec in &specs {
        let base = cmd_constants(spec).unwrap().report;
        for lambda in [0.5, 2.0, 10.0] {
            let s = cmd_constants(&spec.scaled(lambda)).unwrap().report;
            let pairs = [
                (base.l_rel, s.l_rel),
                (base.mu_rel, s.mu_rel),
                (base.mu_star_lb.unwrap(), s.mu_star_lb.unwrap()),
                (base.l_rel_euclidean.unwrap(), s.l_rel_euclidean.unwrap()),
            ];
            for (a, b) in pairs {
                let rel = if a == 0.0 { b.abs() } else { (b - lambda * a).abs() / (lambda * a).abs() };
                worst_rel = worst_rel.max(rel);
            }
            let k = if base.kappa_rel.is_infinite() {
                if s.kappa_rel.is_infinite() { 0.0 } else { f64::INFINITY }
            } else {
                (s.kappa_rel - base.kappa_rel).abs() / base.kappa_rel
            };
            worst_kappa = worst_kappa.max(k);
        }
    }
    outcome(
        worst_rel <= 1e-9 && worst_kappa <= 1e-12,
        format!("constants off by {worst_rel:.1e} relative, kappa by {worst_kappa:.1e} relative"),
    )
}

fn criterion_9(runs: &[RateRun]) -> Outcome {
    let mut descent = 0;
    let mut drops = 0;
    let mut gap = 0;
    let mut offenders = Vec::new();
    for run in runs {
        let before = descent + drops + gap;
        let recs = &run.trace.records;
        for w in recs.windows(2) {
            if w[1].f > w[0].f + SLACK {
                descent += 1;
            }
        }
        let (mut regular, mut dropped) = (0, 0);
        for r in recs {
            match r.step_type {
                StepType::Regular => regular += 1,
                StepType::Drop => dropped += 1,
                _ => {}
            }
            if dropped > regular {
                drops += 1;
            }
            if r.gap + SLACK < r.f - run.f_star {
                gap += 1;
            }
        }
        if descent + drops + gap > before {
            offenders.push(format!("{} ({})", run.name, run.trace.algorithm));
        }
    }
    outcome(
        descent + drops + gap == 0,
        format!(
            "{} traces: {descent} ascents, {drops} drop-count violations, {gap} gap violations{}",
            runs.len(),
            if offenders.is_empty() { String::new() } else { format!(" in {}", offenders.join(", ")) }
        ),
    )
}

fn main() {
    let mut runs = Vec::new();
    let results = vec![
        ("1 closed-form facial distances", criterion_1()),
        ("2 relative condition number identity", criterion_2()),
        ("3 FW-away rate", criterion_rate(Algorithm::FwAway, &mut runs)),
        ("4 projected gradient rate", criterion_rate(Algorithm::ProjGrad, &mut runs)),
        ("5 growth without relative strong convexity", criterion_5(&mut runs)),
        ("6 error bound", criterion_6()),
        ("7 oracle equivalences", criterion_7()),
        ("8 scaling invariance", criterion_8()),
        ("9 structural trace properties", criterion_9(&runs)),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
