//! One-sided Monte-Carlo estimates of the relative constants.
//!
//! Sampling is split into fixed-size shards, each driven by its own ChaCha
//! stream derived from `(seed, shard)`, so results do not depend on how
//! shards are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::AtomMatrix;
use crate::linalg::{dot, DenseMatrix};
use crate::lp::{fiber_distance, solve_lp, LinearProgram, LpStatus, SimplexPoint};

use super::objective::ObjectiveOracle;

const SHARD: usize = 256;

/// Pairs whose fiber distance is at most this are treated as lying in the
/// fiber and skipped.
pub const FIBER_EPS: f64 = 1e-10;

/// Uniform point of `Δ_{n−1}`.
pub fn dirichlet_point(n: usize, rng: &mut ChaCha8Rng) -> SimplexPoint {
    let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = e.iter().sum();
    SimplexPoint::from_raw(e.into_iter().map(|v: f64| v / s).collect())
}

fn shard_rng(seed: u64, shard: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    rng
}

/// Deterministic Dirichlet samples `0..count`, generated shard by shard.
fn sharded_points(n: usize, count: usize, seed: u64, per_sample: usize) -> Vec<Vec<SimplexPoint>> {
    let shards = count.div_ceil(SHARD);
    (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = shard_rng(seed, s);
            let len = SHARD.min(count - s * SHARD);
            (0..len * per_sample).map(|_| dirichlet_point(n, &mut rng)).collect()
        })
        .collect::<Vec<_>>()
}

/// One evaluation of the Bregman quotient
/// `2(f(Ax) − f(u) − ⟨∇f(u), Ax − u⟩) / dist₁(x, Z(u))²` with `u = Ay`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuotientSample {
    pub x: SimplexPoint,
    pub y: SimplexPoint,
    pub distance: f64,
    pub quotient: f64,
    pub vertex_pair: bool,
}

fn bregman_quotient(
    obj: &dyn ObjectiveOracle,
    a: &DenseMatrix,
    x: SimplexPoint,
    y: SimplexPoint,
    vertex_pair: bool,
) -> Result<Option<QuotientSample>> {
    let u = a.matvec(&y);
    let ax = a.matvec(&x);
    let distance = fiber_distance(&x, &u, a)?;
    if distance <= FIBER_EPS {
        return Ok(None);
    }
    let diff: Vec<f64> = ax.iter().zip(&u).map(|(p, q)| p - q).collect();
    let bregman = obj.value(&ax) - obj.value(&u) - dot(&obj.gradient(&u), &diff);
    Ok(Some(QuotientSample {
        x,
        y,
        distance,
        quotient: 2.0 * bregman / (distance * distance),
        vertex_pair,
    }))
}

/// All `n(n−1)` vertex pairs followed by `samples` Dirichlet pairs.
/// Pairs inside the fiber are dropped.
pub fn sample_relative_quotients(
    obj: &dyn ObjectiveOracle,
    atoms: &AtomMatrix,
    samples: usize,
    seed: u64,
) -> Result<Vec<QuotientSample>> {
    let a = atoms.matrix();
    let n = a.cols();
    if obj.dim() != a.rows() {
        return Err(Error::Dimension("objective and atoms disagree in dimension".into()));
    }
    let mut pairs: Vec<(SimplexPoint, SimplexPoint, bool)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pairs.push((SimplexPoint::vertex(n, i), SimplexPoint::vertex(n, j), true));
            }
        }
    }
    for shard in sharded_points(n, samples, seed, 2) {
        let mut it = shard.into_iter();
        while let (Some(x), Some(y)) = (it.next(), it.next()) {
            pairs.push((x, y, false));
        }
    }
    let out: Result<Vec<Option<QuotientSample>>> = pairs
        .into_par_iter()
        .map(|(x, y, v)| bregman_quotient(obj, a, x, y, v))
        .collect();
    Ok(out?.into_iter().flatten().collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelativeEstimate {
    /// Largest sampled quotient; a lower estimate of `L_rel`.
    pub l_est: f64,
    /// Smallest sampled quotient; an upper estimate of `mu_rel`.
    pub mu_est: f64,
    pub quotients: usize,
    pub samples: usize,
    pub seed: u64,
}

pub fn estimate_relative_constants(
    obj: &dyn ObjectiveOracle,
    atoms: &AtomMatrix,
    samples: usize,
    seed: u64,
) -> Result<RelativeEstimate> {
    if samples < 1 {
        return Err(Error::field("samples", "must be at least 1"));
    }
    let qs = sample_relative_quotients(obj, atoms, samples, seed)?;
    if qs.is_empty() {
        return Err(Error::NoData("every sampled pair lies in its own fiber".into()));
    }
    let l_est = qs.iter().map(|q| q.quotient).fold(f64::NEG_INFINITY, f64::max);
    let mu_est = qs.iter().map(|q| q.quotient).fold(f64::INFINITY, f64::min);
    Ok(RelativeEstimate {
        l_est,
        mu_est,
        quotients: qs.len(),
        samples,
        seed,
    })
}

/// How the minimizer set `Z★` is described.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimizerSet {
    /// `Z★ = conv(basis)`.
    Basis(Vec<SimplexPoint>),
    /// `Z★ = Z(u★)`.
    Fiber(Vec<f64>),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuStarSampling {
    /// Every point of `Δ_{n−1}` with coordinates in multiples of `step`.
    Grid { step: f64 },
    /// Vertices plus Dirichlet samples.
    Random { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MuStarEstimate {
    /// Smallest sampled growth quotient; an upper estimate of `μ*`.
    pub estimate: f64,
    pub argmin: SimplexPoint,
    pub points: usize,
}

/// `min ‖x − z‖₁` over `z ∈ conv(basis)`.
fn distance_to_hull(x: &[f64], basis: &[SimplexPoint]) -> Result<f64> {
    let n = x.len();
    let k = basis.len();
    let mut mat = DenseMatrix::zeros(n + 1, k + 2 * n);
    let mut rhs = x.to_vec();
    for r in 0..n {
        for (c, z) in basis.iter().enumerate() {
            mat[(r, c)] = z[r];
        }
        mat[(r, k + r)] = 1.0;
        mat[(r, k + n + r)] = -1.0;
    }
    for c in 0..k {
        mat[(n, c)] = 1.0;
    }
    rhs.push(1.0);
    let mut obj = vec![0.0; k + 2 * n];
    obj[k..].iter_mut().for_each(|v| *v = 1.0);
    let sol = solve_lp(&LinearProgram::new(obj, mat, rhs)?)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value.max(0.0)),
        _ => Err(Error::LpFailure("distance to minimizer hull".into())),
    }
}

fn grid_points(n: usize, step: f64) -> Result<Vec<SimplexPoint>> {
    let steps = (1.0 / step).round();
    if !(step > 0.0) || (steps * step - 1.0).abs() > 1e-9 || steps > 1e6 {
        return Err(Error::field("step", "grid step must divide 1"));
    }
    let total = steps as usize;
    let mut out = Vec::new();
    let mut counts = vec![0usize; n];
    fn rec(i: usize, left: usize, counts: &mut Vec<usize>, total: usize, out: &mut Vec<SimplexPoint>) {
        let n = counts.len();
        if i == n - 1 {
            counts[i] = left;
            let x = counts.iter().map(|&c| c as f64 / total as f64).collect();
            out.push(SimplexPoint::from_raw(x));
            return;
        }
        for c in 0..=left {
            counts[i] = c;
            rec(i + 1, left - c, counts, total, out);
        }
    }
    rec(0, total, &mut counts, total, &mut out);
    Ok(out)
}

/// `min 2(f(Ax) − f★)/dist₁(x, Z★)²` over the sample set, skipping points
/// of `Z★`.
pub fn estimate_mu_star(
    obj: &dyn ObjectiveOracle,
    atoms: &AtomMatrix,
    f_star: f64,
    minimizers: &MinimizerSet,
    sampling: MuStarSampling,
) -> Result<MuStarEstimate> {
    let a = atoms.matrix();
    let n = a.cols();
    match minimizers {
        MinimizerSet::Basis(b) if b.is_empty() => {
            return Err(Error::field("z_star", "minimizer basis is empty"))
        }
        MinimizerSet::Basis(b) if b.iter().any(|z| z.dim() != n) => {
            return Err(Error::Dimension("minimizer basis has the wrong length".into()))
        }
        MinimizerSet::Fiber(u) if u.len() != a.rows() => {
            return Err(Error::Dimension("u_star has the wrong length".into()))
        }
        _ => {}
    }
    let points: Vec<SimplexPoint> = match sampling {
        MuStarSampling::Grid { step } => grid_points(n, step)?,
        MuStarSampling::Random { samples, seed } => (0..n)
            .map(|i| SimplexPoint::vertex(n, i))
            .chain(sharded_points(n, samples, seed, 1).into_iter().flatten())
            .collect(),
    };
    let results: Result<Vec<Option<(f64, SimplexPoint)>>> = points
        .into_par_iter()
        .map(|x| {
            let d = match minimizers {
                MinimizerSet::Basis(b) => distance_to_hull(&x, b)?,
                MinimizerSet::Fiber(u) => fiber_distance(&x, u, a)?,
            };
            if d <= 1e-9 {
                return Ok(None);
            }
            let q = 2.0 * (obj.value(&a.matvec(&x)) - f_star) / (d * d);
            Ok(Some((q, x)))
        })
        .collect();
    let valid: Vec<(f64, SimplexPoint)> = results?.into_iter().flatten().collect();
    let count = valid.len();
    let (estimate, argmin) = valid
        .into_iter()
        .min_by(|p, q| p.0.total_cmp(&q.0))
        .ok_or_else(|| Error::NoData("every sample point lies in the minimizer set".into()))?;
    Ok(MuStarEstimate {
        estimate,
        argmin,
        points: count,
    })
}
