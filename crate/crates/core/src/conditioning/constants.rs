use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    diameter, facial_distance, local_facial_distance, restricted_operator_norm, AtomMatrix,
    LiftedAtoms,
};
use crate::linalg::{dot, solve_linear, sym_eigen, DenseMatrix, Norm, EIGEN_TOL};
use crate::lp::convex_weights;

use super::objective::{ObjectiveOracle, QuadraticObjective};

/// Residual allowed in the first-order optimality check of `u★`.
pub const OPTIMALITY_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Exact closed form for a positive definite quadratic.
    ClosedFormQuadratic,
    /// Upper bound on `L`, lower bound on `μ`.
    BoundGeneral,
    /// Monte-Carlo estimate.
    Estimated,
}

/// Relative constants of `f` over `conv(A)` with the ℓ1 norm on weights and
/// the Euclidean norm on the range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub diam: f64,
    pub phi: f64,
    pub l_rel: f64,
    pub mu_rel: f64,
    pub mu_star_lb: Option<f64>,
    /// `L_rel / mu_rel`, infinite when `mu_rel = 0`.
    pub kappa_rel: f64,
    /// Smoothness relative to the Euclidean norm on weights, the constant
    /// for projected gradient steps.
    pub l_rel_euclidean: Option<f64>,
    pub provenance: Provenance,
}

/// Whether `Q^{1/2}` is injective on the span of atom differences. When it
/// is not, two weight vectors with different images `Ax` share the same
/// `Q^{1/2}Ax` and the relative strong convexity vanishes.
fn injective_on_directions(obj: &QuadraticObjective, atoms: &AtomMatrix) -> Result<bool> {
    let a = atoms.matrix();
    let (m, n) = (a.rows(), a.cols());
    let mut ap = a.clone();
    for r in 0..m {
        let mean = ap.row(r).iter().sum::<f64>() / n as f64;
        for c in 0..n {
            ap[(r, c)] -= mean;
        }
    }
    let gram = ap.matmul(&ap.transpose())?;
    let eig = sym_eigen(&gram, EIGEN_TOL)?;
    let top = eig.max_eigenvalue();
    let basis: Vec<usize> = (0..m).filter(|&k| eig.eigenvalues[k] > 1e-12 * top).collect();
    if basis.is_empty() {
        return Ok(true);
    }
    let u = eig.eigenvectors.select_columns(&basis);
    let reduced = u.transpose().matmul(&obj.q().matmul(&u)?)?;
    let low = sym_eigen(&reduced, EIGEN_TOL)?.min_eigenvalue();
    Ok(low > 1e-10 * obj.max_eigenvalue())
}

/// `L_rel = diam(Q^{1/2}A)²/4` and `mu_rel = Φ(Q^{1/2}A)²/4`.
///
/// For positive semidefinite `Q`, `mu_rel` is zero when `Q^{1/2}` collapses
/// some direction between atoms, and the report is marked as a bound.
pub fn quadratic_relative_constants(obj: &QuadraticObjective, atoms: &AtomMatrix) -> Result<ConditionReport> {
    if obj.dim() != atoms.dim() {
        return Err(Error::Dimension(format!(
            "Q is {0}x{0} but atoms live in R^{1}",
            obj.dim(),
            atoms.dim()
        )));
    }
    let qa = atoms.transformed(obj.sqrt_q())?;
    let diam = diameter(&qa, Norm::L2);
    let phi = facial_distance(&qa, Norm::L2)?;
    let l_rel = diam * diam / 4.0;
    let (mu_rel, kappa_rel) = if obj.is_positive_definite() || injective_on_directions(obj, atoms)? {
        (phi * phi / 4.0, (diam * diam) / (phi * phi))
    } else {
        (0.0, f64::INFINITY)
    };
    let op = restricted_operator_norm(&qa, Norm::L2)?;
    Ok(ConditionReport {
        diam,
        phi,
        l_rel,
        mu_rel,
        mu_star_lb: None,
        kappa_rel,
        l_rel_euclidean: Some(op * op),
        provenance: if obj.is_positive_definite() {
            Provenance::ClosedFormQuadratic
        } else {
            Provenance::BoundGeneral
        },
    })
}

/// Bounds from the classical constants `L_f`, `μ_f` of `f`.
///
/// ℓ1 weights: `L ≤ L_f·diam(A)²/4`, `μ ≥ μ_f·Φ(A)²/4`.
/// ℓ2 weights: `L ≤ L_f·‖A‖²` on sum-zero directions, `μ ≥ μ_f·Φ(A)²/4`.
pub fn general_relative_bounds(
    obj: &dyn ObjectiveOracle,
    atoms: &AtomMatrix,
    domain_norm: Norm,
) -> Result<ConditionReport> {
    let c = obj.classical_constants().ok_or_else(|| {
        Error::InsufficientData("objective carries no classical smoothness/convexity constants".into())
    })?;
    if obj.dim() != atoms.dim() {
        return Err(Error::Dimension("objective and atoms disagree in dimension".into()));
    }
    let diam = diameter(atoms, Norm::L2);
    let phi = facial_distance(atoms, Norm::L2)?;
    let op = restricted_operator_norm(atoms, Norm::L2)?;
    let euclid = c.smoothness * op * op;
    let l_rel = match domain_norm {
        Norm::L1 => c.smoothness * diam * diam / 4.0,
        Norm::L2 => euclid,
        Norm::Linf => {
            return Err(Error::field("domain_norm", "only l1 and l2 are supported"));
        }
    };
    let mu_rel = c.strong_convexity * phi * phi / 4.0;
    let kappa_rel = if mu_rel > 0.0 {
        match domain_norm {
            Norm::L1 => (c.smoothness / c.strong_convexity) * ((diam * diam) / (phi * phi)),
            _ => l_rel / mu_rel,
        }
    } else {
        f64::INFINITY
    };
    Ok(ConditionReport {
        diam,
        phi,
        l_rel,
        mu_rel,
        mu_star_lb: None,
        kappa_rel,
        l_rel_euclidean: Some(euclid),
        provenance: Provenance::BoundGeneral,
    })
}

/// `min_i ⟨∇f(u), a_i − u⟩`; nonnegative exactly at minimizers over
/// `conv(A)`.
pub fn optimality_residual(obj: &dyn ObjectiveOracle, atoms: &AtomMatrix, u: &[f64]) -> f64 {
    let g = obj.gradient(u);
    let gu = dot(&g, u);
    atoms
        .matrix()
        .tr_matvec(&g)
        .into_iter()
        .map(|s| s - gu)
        .fold(f64::INFINITY, f64::min)
}

/// Certified lower bound `Φ_v(Ā)²/4 ≤ μ*` with `Ā = [Q^{1/2}A; 2bᵀA]` and
/// `v = 2Q^{1/2}u★`.
pub fn mu_star_lower_bound_quadratic(
    obj: &QuadraticObjective,
    atoms: &AtomMatrix,
    u_star: &[f64],
) -> Result<f64> {
    if u_star.len() != atoms.dim() || obj.dim() != atoms.dim() {
        return Err(Error::Dimension("u_star, objective and atoms disagree in dimension".into()));
    }
    let residual = optimality_residual(obj, atoms, u_star);
    if !(residual >= -OPTIMALITY_TOL) {
        return Err(Error::StaleMinimizer { residual });
    }
    if let Err(e) = convex_weights(atoms.matrix(), u_star) {
        return Err(match e {
            Error::InfeasiblePoint { residual } => Error::StaleMinimizer { residual },
            other => other,
        });
    }
    let lifted = LiftedAtoms::from_quadratic(obj, atoms, u_star)?;
    let phi_v = local_facial_distance(&lifted)?;
    Ok(phi_v * phi_v / 4.0)
}

/// Exact minimizer on the face identified by near-minimal gradient scores
/// at `u`: minimizes `f` over the affine hull of those atoms, and keeps the
/// result only if it lies in their hull and passes the optimality check.
pub(crate) fn refine_quadratic_minimizer(
    obj: &QuadraticObjective,
    atoms: &AtomMatrix,
    u: &[f64],
) -> Option<Vec<f64>> {
    let a = atoms.matrix();
    let m = a.rows();
    let scores = a.tr_matvec(&obj.gradient(u));
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = scores.iter().fold(0.0f64, |s, v| s.max((v - min).abs()));
    let active: Vec<usize> = (0..a.cols())
        .filter(|&i| scores[i] <= min + 1e-6 * (1.0 + spread))
        .collect();
    let base = a.column(active[0]);
    let dirs: Vec<Vec<f64>> = active[1..]
        .iter()
        .map(|&i| a.column(i).iter().zip(&base).map(|(x, y)| x - y).collect())
        .collect();
    let candidate = if dirs.is_empty() {
        base.clone()
    } else {
        let b = DenseMatrix::from_columns(&dirs).ok()?;
        let eig = sym_eigen(&b.matmul(&b.transpose()).ok()?, EIGEN_TOL).ok()?;
        let top = eig.max_eigenvalue();
        let keep: Vec<usize> = (0..m).filter(|&k| eig.eigenvalues[k] > 1e-12 * top).collect();
        let basis = eig.eigenvectors.select_columns(&keep);
        let h = basis.transpose().matmul(&obj.q().matmul(&basis).ok()?).ok()?;
        let g0 = obj.gradient(&base);
        let rhs: Vec<f64> = basis.tr_matvec(&g0).into_iter().map(|v| -v).collect();
        let c = solve_linear(&h, &rhs)?;
        let mut p = base.clone();
        let step = basis.matvec(&c);
        p.iter_mut().zip(&step).for_each(|(x, s)| *x += s);
        p
    };
    let sub = atoms.matrix().select_columns(&active);
    convex_weights(&sub, &candidate).ok()?;
    let ok = optimality_residual(obj, atoms, &candidate) >= -1e-12 * (1.0 + spread)
        && obj.value(&candidate) <= obj.value(u) + 1e-12 * (1.0 + obj.value(u).abs());
    ok.then_some(candidate)
}
