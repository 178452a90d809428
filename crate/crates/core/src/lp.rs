//! Dense linear programming and simplex-constrained helpers.
//!
//! [`solve_lp`] is a two-phase primal simplex on a full tableau for problems
//! in standard form `min cᵀx  s.t.  Ax = b, x ≥ 0`. Pivoting follows
//! Dantzig's rule until the number of degenerate pivots exceeds
//! `3·(rows + cols)`, after which Bland's rule takes over for good.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, solve_linear, vector_norm, DenseMatrix, Norm};

/// Absolute feasibility tolerance used throughout this module.
pub const FEAS_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const DEGENERATE_STEP: f64 = 1e-12;

/// `min cᵀx` subject to `Ax = b`, `x ≥ 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq_matrix: DenseMatrix,
    pub eq_rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, eq_matrix: DenseMatrix, eq_rhs: Vec<f64>) -> Result<Self> {
        if eq_matrix.rows() != eq_rhs.len() {
            return Err(Error::Dimension(format!(
                "{} constraint rows but {} right-hand sides",
                eq_matrix.rows(),
                eq_rhs.len()
            )));
        }
        if eq_matrix.cols() != objective.len() {
            return Err(Error::Dimension(format!(
                "{} variables but objective of length {}",
                eq_matrix.cols(),
                objective.len()
            )));
        }
        if objective.iter().chain(&eq_rhs).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("linear program data".into()));
        }
        Ok(Self {
            objective,
            eq_matrix,
            eq_rhs,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.eq_rhs.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point (zeros unless `status == Optimal`).
    pub point: Vec<f64>,
    pub value: f64,
    /// Basic variable of each non-redundant constraint row.
    pub basis: Vec<usize>,
    /// Sum of artificial variables at the end of phase one.
    pub phase_one_residual: f64,
}

struct Tableau {
    rows: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    /// Original constraint row each tableau row came from.
    origin: Vec<usize>,
    bland: bool,
    degenerate_pivots: usize,
    degeneracy_limit: usize,
    pivots: usize,
    pivot_cap: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn obj_row(&self) -> usize {
        self.rows
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        for j in 0..w {
            self.data[r * w + j] /= p;
        }
        self.data[r * w + c] = 1.0;
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [f64]| {
            let f = row[c];
            if f != 0.0 {
                for j in 0..w {
                    row[j] -= f * prow[j];
                }
                row[c] = 0.0;
            }
        };
        before.chunks_mut(w).for_each(eliminate);
        after.chunks_mut(w).for_each(eliminate);
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn entering(&self, allowed: usize) -> Option<usize> {
        let obj = self.obj_row();
        if self.bland {
            (0..allowed).find(|&j| self.at(obj, j) < -COST_TOL)
        } else {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..allowed {
                let rc = self.at(obj, j);
                if rc < -COST_TOL && best.is_none_or(|(_, b)| rc < b) {
                    best = Some((j, rc));
                }
            }
            best.map(|(j, _)| j)
        }
    }

    fn leaving(&self, c: usize) -> Option<(usize, f64)> {
        let rhs = self.rhs_col();
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.at(i, c);
            if a > PIVOT_TOL {
                let ratio = self.at(i, rhs).max(0.0) / a;
                let better = match best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < br - 1e-14 || (ratio <= br + 1e-14 && self.basis[i] < self.basis[bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
        }
        best
    }

    /// Runs simplex iterations over columns `0..allowed`. Returns `false`
    /// when the objective is unbounded below.
    fn optimize(&mut self, allowed: usize) -> Result<bool> {
        loop {
            let Some(c) = self.entering(allowed) else {
                return Ok(true);
            };
            let Some((r, ratio)) = self.leaving(c) else {
                return Ok(false);
            };
            if ratio <= DEGENERATE_STEP {
                self.degenerate_pivots += 1;
                if self.degenerate_pivots > self.degeneracy_limit {
                    self.bland = true;
                }
            }
            if self.pivots >= self.pivot_cap {
                return Err(Error::LpFailure(format!(
                    "pivot cap of {} reached",
                    self.pivot_cap
                )));
            }
            self.pivot(r, c);
        }
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.width;
        self.data.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.origin.remove(r);
        self.rows -= 1;
    }
}

/// Two-phase primal simplex for standard-form linear programs.
pub fn solve_lp(p: &LinearProgram) -> Result<LpSolution> {
    let m = p.num_constraints();
    let n = p.num_vars();
    let width = n + m + 1;
    let rhs = width - 1;

    let mut data = vec![0.0; (m + 1) * width];
    for i in 0..m {
        let sign = if p.eq_rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            data[i * width + j] = sign * p.eq_matrix[(i, j)];
        }
        data[i * width + n + i] = 1.0;
        data[i * width + rhs] = sign * p.eq_rhs[i];
    }
    // phase-one costs: reduced cost of x_j is -Σ_i a_ij
    for i in 0..m {
        for j in 0..n {
            data[m * width + j] -= data[i * width + j];
        }
        data[m * width + rhs] -= data[i * width + rhs];
    }

    let mut t = Tableau {
        rows: m,
        width,
        data,
        basis: (n..n + m).collect(),
        origin: (0..m).collect(),
        bland: false,
        degenerate_pivots: 0,
        degeneracy_limit: 3 * (m + n),
        pivots: 0,
        pivot_cap: 200 * (m + n) + 1000,
    };

    if m > 0 {
        t.optimize(n + m)?;
    }
    let residual = (-t.at(t.obj_row(), rhs)).max(0.0);
    if residual > FEAS_TOL {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            point: vec![0.0; n],
            value: f64::NAN,
            basis: t.basis.clone(),
            phase_one_residual: residual,
        });
    }

    // Drive artificial variables out of the basis, dropping redundant rows.
    let mut i = 0;
    while i < t.rows {
        if t.basis[i] >= n {
            let col = (0..n)
                .filter(|&j| t.at(i, j).abs() > 1e-9)
                .max_by(|&a, &b| t.at(i, a).abs().total_cmp(&t.at(i, b).abs()));
            match col {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => t.remove_row(i),
            }
        } else {
            i += 1;
        }
    }

    // Phase-two reduced costs.
    let obj = t.obj_row();
    for j in 0..width {
        t.data[obj * width + j] = if j < n { p.objective[j] } else { 0.0 };
    }
    for r in 0..t.rows {
        let cb = p.objective[t.basis[r]];
        if cb != 0.0 {
            for j in 0..width {
                t.data[obj * width + j] -= cb * t.data[r * width + j];
            }
        }
    }
    t.degenerate_pivots = 0;
    t.bland = false;

    if !t.optimize(n)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            point: vec![0.0; n],
            value: f64::NEG_INFINITY,
            basis: t.basis.clone(),
            phase_one_residual: residual,
        });
    }

    let mut point = vec![0.0; n];
    for r in 0..t.rows {
        point[t.basis[r]] = t.at(r, rhs).max(0.0);
    }
    if let Some(refined) = refine_basic_solution(p, &t.basis, &t.origin) {
        point = refined;
    }
    let value = dot(&p.objective, &point);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        point,
        value,
        basis: t.basis,
        phase_one_residual: residual,
    })
}

/// Re-solves `B x_B = b` from the original data to shed tableau drift.
fn refine_basic_solution(p: &LinearProgram, basis: &[usize], origin: &[usize]) -> Option<Vec<f64>> {
    let k = basis.len();
    if k == 0 {
        return Some(vec![0.0; p.num_vars()]);
    }
    let mut b = DenseMatrix::zeros(k, k);
    let mut rhs = vec![0.0; k];
    for (r, &orow) in origin.iter().enumerate() {
        for (c, &var) in basis.iter().enumerate() {
            b[(r, c)] = p.eq_matrix[(orow, var)];
        }
        rhs[r] = p.eq_rhs[orow];
    }
    let xb = solve_linear(&b, &rhs)?;
    if xb.iter().any(|v| *v < -FEAS_TOL || !v.is_finite()) {
        return None;
    }
    let mut x = vec![0.0; p.num_vars()];
    for (c, &var) in basis.iter().enumerate() {
        x[var] = xb[c].max(0.0);
    }
    Some(x)
}

/// A point of the standard simplex `{x ≥ 0, Σx = 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Dimension("empty simplex point".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("simplex point".into()));
        }
        if x.iter().any(|v| *v < 0.0) {
            return Err(Error::field("x", "simplex point has a negative entry"));
        }
        let s: f64 = x.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::field("x", format!("simplex point sums to {s}")));
        }
        Ok(Self(x))
    }

    /// Clamps negatives to zero and rescales to unit sum.
    pub fn normalized(mut x: Vec<f64>) -> Result<Self> {
        for v in &mut x {
            *v = v.max(0.0);
        }
        let s: f64 = x.iter().sum();
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::field("x", "cannot normalize onto the simplex"));
        }
        x.iter_mut().for_each(|v| *v /= s);
        Ok(Self(x))
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        let mut x = vec![0.0; n];
        x[i] = 1.0;
        Self(x)
    }

    pub fn barycenter(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Indices with mass strictly above `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > tol).collect()
    }

    pub(crate) fn from_raw(x: Vec<f64>) -> Self {
        Self(x)
    }
}

impl std::ops::Deref for SimplexPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Euclidean projection onto the standard simplex.
///
/// Sort-based threshold search: finds `θ` with `Σ max(y_i − θ, 0) = 1`.
pub fn project_simplex(y: &[f64]) -> SimplexPoint {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    let mut x: Vec<f64> = y.iter().map(|v| (v - theta).max(0.0)).collect();
    let s: f64 = x.iter().sum();
    if (s - 1.0).abs() > 1e-15 {
        x.iter_mut().for_each(|v| *v /= s);
    }
    SimplexPoint(x)
}

/// Solves for some `z ∈ Δ` with `Az = u`, or reports infeasibility.
pub fn convex_weights(a: &DenseMatrix, u: &[f64]) -> Result<SimplexPoint> {
    let (m, n) = (a.rows(), a.cols());
    if u.len() != m {
        return Err(Error::Dimension("point dimension does not match atoms".into()));
    }
    let mut mat = DenseMatrix::zeros(m + 1, n);
    for i in 0..m {
        for j in 0..n {
            mat[(i, j)] = a[(i, j)];
        }
    }
    for j in 0..n {
        mat[(m, j)] = 1.0;
    }
    let mut rhs = u.to_vec();
    rhs.push(1.0);
    let sol = solve_lp(&LinearProgram::new(vec![0.0; n], mat, rhs)?)?;
    match sol.status {
        LpStatus::Optimal => SimplexPoint::normalized(sol.point),
        _ => Err(Error::InfeasiblePoint {
            residual: sol.phase_one_residual,
        }),
    }
}

/// `min ‖x − z‖₁` over `z ∈ Δ` with `Az = u`.
///
/// Encoded as an LP over `(z, p, q) ≥ 0` with `z + p − q = x`, minimizing
/// `1ᵀ(p + q)`.
pub fn fiber_distance(x: &[f64], u: &[f64], a: &DenseMatrix) -> Result<f64> {
    let (m, n) = (a.rows(), a.cols());
    if x.len() != n || u.len() != m {
        return Err(Error::Dimension(format!(
            "fiber distance expects x of length {n} and u of length {m}"
        )));
    }
    let rows = m + 1 + n;
    let vars = 3 * n;
    let mut mat = DenseMatrix::zeros(rows, vars);
    let mut rhs = Vec::with_capacity(rows);
    for i in 0..m {
        for j in 0..n {
            mat[(i, j)] = a[(i, j)];
        }
        rhs.push(u[i]);
    }
    for j in 0..n {
        mat[(m, j)] = 1.0;
    }
    rhs.push(1.0);
    for j in 0..n {
        let r = m + 1 + j;
        mat[(r, j)] = 1.0;
        mat[(r, n + j)] = 1.0;
        mat[(r, 2 * n + j)] = -1.0;
        rhs.push(x[j]);
    }
    let mut cost = vec![0.0; vars];
    cost[n..].iter_mut().for_each(|c| *c = 1.0);
    let sol = solve_lp(&LinearProgram::new(cost, mat, rhs)?)?;
    match sol.status {
        LpStatus::Optimal => {
            let z = &sol.point[..n];
            let diff: Vec<f64> = x.iter().zip(z).map(|(a, b)| a - b).collect();
            Ok(vector_norm(&diff, Norm::L1))
        }
        LpStatus::Infeasible => Err(Error::InfeasiblePoint {
            residual: sol.phase_one_residual,
        }),
        LpStatus::Unbounded => Err(Error::LpFailure("fiber distance LP reported unbounded".into())),
    }
}
