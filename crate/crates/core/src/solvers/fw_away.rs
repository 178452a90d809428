use crate::conditioning::ObjectiveOracle;
use crate::error::{Error, Result};
use crate::geometry::AtomMatrix;
use crate::linalg::{dot, DenseMatrix};
use crate::lp::SimplexPoint;

use super::{
    clean_weights, finite_or_err, resolve_start, support_of, Algorithm, IterationRecord,
    LipschitzMode, SolveConfig, SolveTrace, StepType, MAX_DOUBLINGS,
};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Direction {
    /// `w = e_j − x`
    Toward(usize),
    /// `w = x − e_ℓ`
    AwayFrom(usize),
}

struct Probe {
    u: Vec<f64>,
    f: f64,
    direction: Direction,
    /// `⟨∇f(u), v⟩` with `v = A w`.
    slope: f64,
    alpha_max: f64,
    support_size: usize,
}

fn probe(obj: &dyn ObjectiveOracle, a: &DenseMatrix, x: &[f64]) -> Result<Probe> {
    let u = a.matvec(x);
    let f = obj.value(&u);
    let g = obj.gradient(&u);
    finite_or_err(&[f], "objective value")?;
    finite_or_err(&g, "gradient")?;
    let scores = a.tr_matvec(&g);
    let gu = dot(&g, &u);
    let support = support_of(x);

    let mut j = 0;
    for i in 1..scores.len() {
        if scores[i] < scores[j] {
            j = i;
        }
    }
    let mut l = support[0];
    for &i in &support[1..] {
        if scores[i] > scores[l] {
            l = i;
        }
    }
    let toward = scores[j] - gu;
    let away = gu - scores[l];
    let (direction, slope, alpha_max) = if toward < away || support.len() == 1 {
        (Direction::Toward(j), toward, 1.0)
    } else {
        (Direction::AwayFrom(l), away, x[l] / (1.0 - x[l]))
    };
    Ok(Probe {
        u,
        f,
        direction,
        slope,
        alpha_max,
        support_size: support.len(),
    })
}

fn moved(x: &[f64], direction: Direction, alpha: f64, alpha_max: f64) -> Vec<f64> {
    let mut y: Vec<f64>;
    match direction {
        Direction::Toward(j) => {
            if alpha >= 1.0 {
                y = vec![0.0; x.len()];
                y[j] = 1.0;
                return y;
            }
            y = x.iter().map(|v| (1.0 - alpha) * v).collect();
            y[j] += alpha;
        }
        Direction::AwayFrom(l) => {
            y = x.iter().map(|v| (1.0 + alpha) * v).collect();
            y[l] -= alpha;
            if alpha >= alpha_max {
                y[l] = 0.0;
            }
        }
    }
    clean_weights(&mut y);
    y
}

fn step_type(direction: Direction, alpha: f64, alpha_max: f64) -> StepType {
    match direction {
        Direction::Toward(_) => StepType::Regular,
        Direction::AwayFrom(_) if alpha >= alpha_max && alpha_max < 1.0 => StepType::Drop,
        Direction::AwayFrom(_) => StepType::Away,
    }
}

fn direction_in_range(a: &DenseMatrix, u: &[f64], direction: Direction) -> Vec<f64> {
    match direction {
        Direction::Toward(j) => (0..a.rows()).map(|r| a[(r, j)] - u[r]).collect(),
        Direction::AwayFrom(l) => (0..a.rows()).map(|r| u[r] - a[(r, l)]).collect(),
    }
}

/// Step length under the chosen rule, plus the constant it used.
fn choose_alpha(
    obj: &dyn ObjectiveOracle,
    a: &DenseMatrix,
    x: &[f64],
    p: &Probe,
    lipschitz: &mut f64,
    mode: LipschitzMode,
    exact: bool,
) -> Result<f64> {
    if p.slope >= 0.0 {
        return Ok(0.0);
    }
    if exact {
        let v = direction_in_range(a, &p.u, p.direction);
        let c = obj.curvature(&v).ok_or_else(|| {
            Error::field("exact_line_search", "objective has no constant curvature")
        })?;
        return Ok(if c > 0.0 {
            (-p.slope / c).clamp(0.0, p.alpha_max)
        } else {
            p.alpha_max
        });
    }
    let LipschitzMode::Backtracking { growth, .. } = mode else {
        return Ok(p.alpha_max.min(-p.slope / (4.0 * *lipschitz)));
    };
    for _ in 0..=MAX_DOUBLINGS {
        let alpha = p.alpha_max.min(-p.slope / (4.0 * *lipschitz));
        let trial = moved(x, p.direction, alpha, p.alpha_max);
        let ft = obj.value(&a.matvec(&trial));
        let tol = 4.0 * f64::EPSILON * p.f.abs().max(ft.abs());
        if ft <= p.f + alpha * p.slope + 2.0 * *lipschitz * alpha * alpha + tol {
            return Ok(alpha);
        }
        *lipschitz *= growth;
    }
    Err(Error::LipschitzExplosion {
        lipschitz: *lipschitz,
    })
}

/// One iteration of Frank-Wolfe with away steps from `x`.
///
/// The step is `min{α_max, −⟨∇f, v⟩/(4L)}`, or the exact minimizer along
/// `v` clipped to `[0, α_max]` when `exact_ls` is set.
pub fn fw_away_step(
    obj: &dyn ObjectiveOracle,
    atoms: &AtomMatrix,
    x: &SimplexPoint,
    lipschitz: f64,
    exact_ls: bool,
) -> Result<(SimplexPoint, IterationRecord)> {
    if !(lipschitz > 0.0) {
        return Err(Error::field("lipschitz", "must be positive"));
    }
    let a = atoms.matrix();
    check_dims(obj, a, x.dim())?;
    let p = probe(obj, a, x)?;
    let mut l = lipschitz;
    let alpha = choose_alpha(obj, a, x, &p, &mut l, LipschitzMode::Given(lipschitz), exact_ls)?;
    let next = moved(x, p.direction, alpha, p.alpha_max);
    let record = IterationRecord {
        k: 0,
        x: Some(x.clone()),
        f: p.f,
        gap: -p.slope,
        step_type: step_type(p.direction, alpha, p.alpha_max),
        alpha,
        alpha_max: p.alpha_max,
        support_size: p.support_size,
        lipschitz: l,
    };
    Ok((SimplexPoint::from_raw(next), record))
}

fn check_dims(obj: &dyn ObjectiveOracle, a: &DenseMatrix, n: usize) -> Result<()> {
    if obj.dim() != a.rows() {
        return Err(Error::Dimension(format!(
            "objective acts on R^{} but atoms live in R^{}",
            obj.dim(),
            a.rows()
        )));
    }
    if n != a.cols() {
        return Err(Error::Dimension(format!(
            "{} weights for {} atoms",
            n,
            a.cols()
        )));
    }
    Ok(())
}

/// Runs Frank-Wolfe with away steps until the gap of the chosen direction
/// drops to `target_gap` or `max_iters` steps have been taken.
pub fn solve_fw_away(
    obj: &dyn ObjectiveOracle,
    atoms: &AtomMatrix,
    cfg: &SolveConfig,
) -> Result<SolveTrace> {
    run_fw_away(obj, atoms.matrix(), cfg)
}

pub(crate) fn run_fw_away(
    obj: &dyn ObjectiveOracle,
    a: &DenseMatrix,
    cfg: &SolveConfig,
) -> Result<SolveTrace> {
    cfg.validate()?;
    let mut x = resolve_start(&cfg.x0, a.cols(), cfg.seed)?;
    check_dims(obj, a, x.len())?;
    let floor = cfg.lipschitz.initial();
    let mut lipschitz = floor;
    let mut records = Vec::new();
    let mut converged = false;
    for k in 0..=cfg.max_iters {
        let p = probe(obj, a, &x)?;
        let gap = -p.slope;
        let stored = cfg.store_iterates.then(|| SimplexPoint::from_raw(x.clone()));
        if gap <= cfg.target_gap || k == cfg.max_iters {
            converged = gap <= cfg.target_gap;
            records.push(IterationRecord {
                k,
                x: stored,
                f: p.f,
                gap,
                step_type: StepType::Stop,
                alpha: 0.0,
                alpha_max: p.alpha_max,
                support_size: p.support_size,
                lipschitz,
            });
            break;
        }
        let alpha = choose_alpha(
            obj,
            a,
            &x,
            &p,
            &mut lipschitz,
            cfg.lipschitz,
            cfg.exact_line_search,
        )?;
        records.push(IterationRecord {
            k,
            x: stored,
            f: p.f,
            gap,
            step_type: step_type(p.direction, alpha, p.alpha_max),
            alpha,
            alpha_max: p.alpha_max,
            support_size: p.support_size,
            lipschitz,
        });
        x = moved(&x, p.direction, alpha, p.alpha_max);
        if let LipschitzMode::Backtracking { shrink, .. } = cfg.lipschitz {
            lipschitz = (lipschitz * shrink).max(floor);
        }
    }
    Ok(SolveTrace {
        algorithm: Algorithm::FwAway,
        lipschitz_mode: Some(cfg.lipschitz),
        exact_line_search: cfg.exact_line_search,
        records,
        final_point: Some(SimplexPoint::from_raw(x)),
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditioning::QuadraticObjective;
    use crate::solvers::StartPoint;

    fn identity_atoms(n: usize) -> AtomMatrix {
        AtomMatrix::simplex(n)
    }

    #[test]
    fn linear_objective_regular_step_to_best_vertex() {
        let f = QuadraticObjective::linear(vec![3.0, 1.0, 2.0]).unwrap();
        let atoms = identity_atoms(3);
        let (next, rec) = fw_away_step(&f, &atoms, &SimplexPoint::vertex(3, 0), 1.0, true).unwrap();
        assert_eq!(rec.step_type, StepType::Regular);
        assert_eq!(rec.alpha_max, 1.0);
        assert_eq!(next.as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn stationary_at_linear_minimizer() {
        let f = QuadraticObjective::linear(vec![3.0, 1.0, 2.0]).unwrap();
        let atoms = identity_atoms(3);
        let x = SimplexPoint::vertex(3, 1);
        let (next, rec) = fw_away_step(&f, &atoms, &x, 1.0, false).unwrap();
        assert!(rec.gap <= 0.0);
        assert_eq!(rec.alpha, 0.0);
        assert_eq!(next, x);
    }

    #[test]
    fn exact_line_search_on_two_atoms() {
        let f = QuadraticObjective::half_squared_norm(2);
        let atoms = identity_atoms(2);
        let (next, rec) = fw_away_step(&f, &atoms, &SimplexPoint::vertex(2, 0), 1.0, true).unwrap();
        assert_eq!(rec.step_type, StepType::Regular);
        assert!((rec.alpha - 0.5).abs() < 1e-15);
        assert!((next[0] - 0.5).abs() < 1e-15 && (next[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn simplex_quadratic_reaches_one_eighth() {
        let f = QuadraticObjective::half_squared_norm(4);
        let cfg = SolveConfig::fw_away(0.5).with_max_iters(2000).with_target_gap(1e-10);
        let trace = solve_fw_away(&f, &identity_atoms(4), &cfg).unwrap();
        assert!((trace.final_value() - 0.125).abs() < 1e-9);
        for w in trace.records.windows(2) {
            assert!(w[1].f <= w[0].f + 1e-12);
        }
    }

    #[test]
    fn backtracking_recovers_from_small_initial_constant() {
        let f = QuadraticObjective::half_squared_norm(4);
        let cfg = SolveConfig::fw_away(1.0)
            .with_lipschitz(LipschitzMode::backtracking(1e-6))
            .with_max_iters(3000)
            .with_target_gap(1e-6)
            .with_start(StartPoint::Vertex(2));
        let trace = solve_fw_away(&f, &identity_atoms(4), &cfg).unwrap();
        assert!(trace.converged);
        assert!((trace.final_value() - 0.125).abs() < 1e-11);
    }

    #[test]
    fn away_step_from_interior_point() {
        // Mass on the worst vertex is removed by an away step.
        let f = QuadraticObjective::linear(vec![0.0, 1.0, 0.5]).unwrap();
        let atoms = identity_atoms(3);
        let x = SimplexPoint::new(vec![0.5, 0.25, 0.25]).unwrap();
        let (next, rec) = fw_away_step(&f, &atoms, &x, 1e-9, false).unwrap();
        // toward gap ⟨g,u⟩ − 0 = 0.375; away gap 1 − 0.375 = 0.625
        assert_eq!(rec.step_type, StepType::Drop);
        assert!((rec.alpha_max - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(next[1], 0.0);
        assert!((next[0] - 2.0 / 3.0).abs() < 1e-15);
    }
}
