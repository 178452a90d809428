use crate::conditioning::ObjectiveOracle;
use crate::error::{Error, Result};
use crate::geometry::AtomMatrix;
use crate::linalg::dot;
use crate::lp::{project_simplex, SimplexPoint};

use super::{
    finite_or_err, resolve_start, support_of, Algorithm, IterationRecord, LipschitzMode,
    SolveConfig, SolveTrace, StepType, MAX_DOUBLINGS,
};

/// Projected gradient in weight space:
/// `x_{k+1} = Π_Δ(x_k − (1/L)·Aᵀ∇f(Ax_k))`.
///
/// `gap` in each record is the regular Frank-Wolfe gap at `x_k`, which
/// upper-bounds `f(Ax_k) − f★`.
pub fn solve_proj_grad(
    obj: &dyn ObjectiveOracle,
    atoms: &AtomMatrix,
    cfg: &SolveConfig,
) -> Result<SolveTrace> {
    cfg.validate()?;
    let a = atoms.matrix();
    if obj.dim() != a.rows() {
        return Err(Error::Dimension(format!(
            "objective acts on R^{} but atoms live in R^{}",
            obj.dim(),
            a.rows()
        )));
    }
    let mut x = resolve_start(&cfg.x0, a.cols(), cfg.seed)?;
    let floor = cfg.lipschitz.initial();
    let mut lipschitz = floor;
    let mut records = Vec::new();
    let mut converged = false;

    for k in 0..=cfg.max_iters {
        let u = a.matvec(&x);
        let f = obj.value(&u);
        let g = obj.gradient(&u);
        finite_or_err(&[f], "objective value")?;
        finite_or_err(&g, "gradient")?;
        let grad_x = a.tr_matvec(&g);
        let best = grad_x.iter().copied().fold(f64::INFINITY, f64::min);
        let gap = dot(&g, &u) - best;
        let support_size = support_of(&x).len();
        let stored = cfg.store_iterates.then(|| SimplexPoint::from_raw(x.clone()));

        if gap <= cfg.target_gap || k == cfg.max_iters {
            converged = gap <= cfg.target_gap;
            records.push(IterationRecord {
                k,
                x: stored,
                f,
                gap,
                step_type: StepType::Stop,
                alpha: 0.0,
                alpha_max: 1.0 / lipschitz,
                support_size,
                lipschitz,
            });
            break;
        }

        let step = |l: f64| -> SimplexPoint {
            let y: Vec<f64> = x.iter().zip(&grad_x).map(|(xi, gi)| xi - gi / l).collect();
            project_simplex(&y)
        };
        let next = match cfg.lipschitz {
            LipschitzMode::Given(_) => step(lipschitz),
            LipschitzMode::Backtracking { growth, .. } => {
                let mut accepted = None;
                for _ in 0..=MAX_DOUBLINGS {
                    let trial = step(lipschitz);
                    let d: Vec<f64> = trial.iter().zip(&x).map(|(t, xi)| t - xi).collect();
                    let model = f + dot(&grad_x, &d) + 0.5 * lipschitz * dot(&d, &d);
                    let ft = obj.value(&a.matvec(&trial));
                    if ft <= model + 4.0 * f64::EPSILON * f.abs().max(ft.abs()) {
                        accepted = Some(trial);
                        break;
                    }
                    lipschitz *= growth;
                }
                accepted.ok_or(Error::LipschitzExplosion { lipschitz })?
            }
        };
        records.push(IterationRecord {
            k,
            x: stored,
            f,
            gap,
            step_type: StepType::Projection,
            alpha: 1.0 / lipschitz,
            alpha_max: 1.0 / lipschitz,
            support_size,
            lipschitz,
        });
        x = next.into_inner();
        if let LipschitzMode::Backtracking { shrink, .. } = cfg.lipschitz {
            lipschitz = (lipschitz * shrink).max(floor);
        }
    }

    Ok(SolveTrace {
        algorithm: Algorithm::ProjGrad,
        lipschitz_mode: Some(cfg.lipschitz),
        exact_line_search: false,
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

    #[test]
    fn optimal_start_is_fixed_point_for_linear() {
        let f = QuadraticObjective::linear(vec![2.0, 0.0, 1.0]).unwrap();
        let cfg = SolveConfig::proj_grad(1.0).with_start(StartPoint::Vertex(1)).with_max_iters(5);
        let trace = solve_proj_grad(&f, &AtomMatrix::simplex(3), &cfg).unwrap();
        assert_eq!(trace.final_point.unwrap().as_slice(), &[0.0, 1.0, 0.0]);
        assert_eq!(trace.records.len(), 1);
        assert!(trace.converged);
    }

    #[test]
    fn simplex_quadratic_with_euclidean_constant() {
        let f = QuadraticObjective::half_squared_norm(4);
        let cfg = SolveConfig::proj_grad(1.0).with_max_iters(50);
        let trace = solve_proj_grad(&f, &AtomMatrix::simplex(4), &cfg).unwrap();
        assert!((trace.final_value() - 0.125).abs() < 1e-14);
    }

    #[test]
    fn backtracking_converges_and_descends() {
        let q = crate::linalg::DenseMatrix::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let f = QuadraticObjective::new(q, vec![-1.0, 0.5]).unwrap();
        let atoms = AtomMatrix::new(
            crate::linalg::DenseMatrix::from_rows(&[vec![1.0, -1.0, 0.0, 2.0], vec![0.0, 1.0, -2.0, 1.0]])
                .unwrap(),
        )
        .unwrap();
        let cfg = SolveConfig::proj_grad(1.0)
            .with_lipschitz(LipschitzMode::backtracking(1e-3))
            .with_max_iters(5000)
            .with_target_gap(1e-7);
        let trace = solve_proj_grad(&f, &atoms, &cfg).unwrap();
        assert!(trace.converged);
        for w in trace.records.windows(2) {
            assert!(w[1].f <= w[0].f + 1e-12);
        }
    }
}
