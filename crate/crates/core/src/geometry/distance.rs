use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditioning::{ObjectiveOracle, QuadraticObjective};
use crate::error::{Error, Result};
use crate::linalg::{dot, solve_linear, DenseMatrix, Norm};
use crate::lp::SimplexPoint;
use crate::solvers::{run_fw_away, SolveConfig, StartPoint, SUPPORT_TOL};

use super::faces::{expand, faces_within};
use super::{AtomMatrix, FaceCertificate};

const POLISH_ROUNDS: usize = 6;
const ROUND_ITERS: usize = 20_000;

fn regular_gap(obj: &QuadraticObjective, a: &DenseMatrix, x: &[f64]) -> f64 {
    let u = a.matvec(x);
    let g = obj.gradient(&u);
    let best = a.tr_matvec(&g).into_iter().fold(f64::INFINITY, f64::min);
    dot(&g, &u) - best
}

/// Solves the equality-constrained problem on the current support exactly;
/// returns the result only when it stays in the simplex.
fn polish(obj: &QuadraticObjective, a: &DenseMatrix, x: &[f64]) -> Option<Vec<f64>> {
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] > SUPPORT_TOL).collect();
    let k = support.len();
    if k < 2 {
        return None;
    }
    let d = a.select_columns(&support);
    let h = d.transpose().matmul(&obj.q().matmul(&d).ok()?).ok()?;
    let g = d.tr_matvec(obj.b());
    let mut kkt = DenseMatrix::zeros(k + 1, k + 1);
    let mut rhs = vec![0.0; k + 1];
    for i in 0..k {
        for j in 0..k {
            kkt[(i, j)] = h[(i, j)];
        }
        kkt[(i, k)] = 1.0;
        kkt[(k, i)] = 1.0;
        rhs[i] = -g[i];
    }
    rhs[k] = 1.0;
    let sol = solve_linear(&kkt, &rhs)?;
    if sol[..k].iter().any(|&w| !(w >= 0.0)) {
        return None;
    }
    let mut w = vec![0.0; x.len()];
    for (p, &i) in support.iter().enumerate() {
        w[i] = sol[p];
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    Some(w)
}

/// Minimizes a convex quadratic over `conv(a)` by FW-away with exact line
/// search, alternating with an exact solve on the active support.
fn minimize_on_hull(obj: &QuadraticObjective, a: &DenseMatrix) -> Result<Vec<f64>> {
    let n = a.cols();
    let vertex_values: Vec<f64> = (0..n).map(|j| obj.value(&a.column(j))).collect();
    let start = (0..n)
        .min_by(|&i, &j| vertex_values[i].total_cmp(&vertex_values[j]))
        .ok_or_else(|| Error::Dimension("no columns".into()))?;
    let scale = 1.0 + vertex_values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let target = 1e-15 * scale;

    let mut x = SimplexPoint::vertex(n, start).into_inner();
    let mut value = vertex_values[start];
    let mut gap = regular_gap(obj, a, &x);
    for _ in 0..POLISH_ROUNDS {
        if gap <= target {
            break;
        }
        let cfg = SolveConfig::fw_away(1.0)
            .with_exact_line_search(true)
            .with_max_iters(ROUND_ITERS)
            .with_target_gap(target)
            .with_start(StartPoint::Given(SimplexPoint::from_raw(x.clone())))
            .without_iterates();
        let trace = run_fw_away(obj, a, &cfg)?;
        let fw_x = trace.final_point.expect("solver traces carry a final point").into_inner();
        let fw_value = obj.value(&a.matvec(&fw_x));
        if fw_value <= value {
            x = fw_x;
            value = fw_value;
        }
        if let Some(w) = polish(obj, a, &x) {
            let pv = obj.value(&a.matvec(&w));
            if pv <= value {
                x = w;
                value = pv;
            }
        }
        gap = regular_gap(obj, a, &x);
    }
    Ok(x)
}

/// Squared distance between `conv(a_S)` and `conv(a_T)`. With `scores`
/// set, adds `Σ w_st·max(0, scores_t − scores_s)` as the linear part, which
/// is the quasi-norm term when every `s ∈ S` minimizes the scores.
pub(crate) fn hull_distance_sq(
    a: &DenseMatrix,
    s: &[usize],
    t: &[usize],
    scores: Option<&[f64]>,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let m = a.rows();
    let rows = m + usize::from(scores.is_some());
    let mut d = DenseMatrix::zeros(rows, s.len() * t.len());
    for (p, &i) in s.iter().enumerate() {
        for (q, &j) in t.iter().enumerate() {
            let col = p * t.len() + q;
            for r in 0..m {
                d[(r, col)] = a[(r, i)] - a[(r, j)];
            }
            if let Some(sc) = scores {
                d[(m, col)] = (sc[j] - sc[i]).max(0.0);
            }
        }
    }
    let obj = match scores {
        None => QuadraticObjective::half_squared_norm(m),
        Some(_) => {
            let mut diag = vec![2.0; rows];
            diag[m] = 0.0;
            let mut b = vec![0.0; rows];
            b[m] = 1.0;
            QuadraticObjective::new(DenseMatrix::diag(&diag), b)?
        }
    };
    let best = minimize_on_hull(&obj, &d)?;
    let mut y = vec![0.0; s.len()];
    let mut z = vec![0.0; t.len()];
    for p in 0..s.len() {
        for q in 0..t.len() {
            let w = best[p * t.len() + q];
            y[p] += w;
            z[q] += w;
        }
    }
    let dw = d.matvec(&best);
    let dist_sq = match scores {
        None => dot(&dw, &dw),
        Some(_) => dot(&dw[..m], &dw[..m]) + dw[m],
    };
    Ok((dist_sq.max(0.0), y, z))
}

/// `dist(conv(a_S), conv(a_T))` in the Euclidean norm, with the attaining
/// points `A·witness_y` and `A·witness_z`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolytopeDistanceResult {
    pub distance: f64,
    pub witness_y: SimplexPoint,
    pub witness_z: SimplexPoint,
}

fn spread(n: usize, idx: &[usize], w: &[f64]) -> SimplexPoint {
    let mut x = vec![0.0; n];
    for (&i, &v) in idx.iter().zip(w) {
        x[i] += v;
    }
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    SimplexPoint::from_raw(x)
}

pub fn polytope_pair_distance(
    atoms: &AtomMatrix,
    s: &[usize],
    t: &[usize],
    range_norm: Norm,
) -> Result<PolytopeDistanceResult> {
    if range_norm != Norm::L2 {
        return Err(Error::field("range_norm", "only the l2 range norm is supported"));
    }
    let n = atoms.len();
    if s.is_empty() || t.is_empty() {
        return Err(Error::field("atom sets", "both sets must be nonempty"));
    }
    if s.iter().chain(t).any(|&i| i >= n) {
        return Err(Error::field("atom sets", format!("index out of range for {n} atoms")));
    }
    if s.iter().any(|i| t.contains(i)) {
        return Err(Error::field("atom sets", "sets must be disjoint"));
    }
    let (dsq, y, z) = hull_distance_sq(atoms.matrix(), s, t, None)?;
    Ok(PolytopeDistanceResult {
        distance: dsq.sqrt(),
        witness_y: spread(n, s, &y),
        witness_z: spread(n, t, &z),
    })
}

/// Φ(A) together with the face attaining it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FacialDistanceReport {
    pub phi: f64,
    pub face: FaceCertificate,
    pub complement: Vec<usize>,
    pub witness_y: SimplexPoint,
    pub witness_z: SimplexPoint,
    pub face_count: usize,
}

pub fn facial_distance_detailed(atoms: &AtomMatrix, range_norm: Norm) -> Result<FacialDistanceReport> {
    if range_norm != Norm::L2 {
        return Err(Error::field("range_norm", "only the l2 range norm is supported"));
    }
    let (a, groups) = atoms.distinct();
    let k = a.cols();
    let all: Vec<usize> = (0..k).collect();
    let faces = faces_within(&a, &all)?;
    let dists: Vec<Result<(f64, Vec<f64>, Vec<f64>, Vec<usize>)>> = faces
        .par_iter()
        .map(|(s, _, _, _)| {
            let t: Vec<usize> = (0..k).filter(|j| !s.contains(j)).collect();
            let (d, y, z) = hull_distance_sq(&a, s, &t, None)?;
            Ok((d, y, z, t))
        })
        .collect();
    let mut best: Option<(usize, (f64, Vec<f64>, Vec<f64>, Vec<usize>))> = None;
    for (i, r) in dists.into_iter().enumerate() {
        let r = r?;
        if best.as_ref().is_none_or(|(_, b)| r.0 < b.0) {
            best = Some((i, r));
        }
    }
    let (i, (dsq, y, z, t)) = best.ok_or_else(|| Error::Degenerate("polytope has no proper faces".into()))?;
    let (s, c, g, e) = &faces[i];
    let reps: Vec<usize> = groups.iter().map(|g| g[0]).collect();
    let n = atoms.len();
    let s_orig: Vec<usize> = s.iter().map(|&j| reps[j]).collect();
    let t_orig: Vec<usize> = t.iter().map(|&j| reps[j]).collect();
    Ok(FacialDistanceReport {
        phi: dsq.sqrt(),
        face: FaceCertificate {
            atom_indices: expand(s, &groups),
            functional: c.clone(),
            level: *g,
            slack: *e,
        },
        complement: expand(&t, &groups),
        witness_y: spread(n, &s_orig, &y),
        witness_z: spread(n, &t_orig, &z),
        face_count: faces.len(),
    })
}

/// `Φ(A) = min over proper faces F of dist(F, conv(A∖F))`.
pub fn facial_distance(atoms: &AtomMatrix, range_norm: Norm) -> Result<f64> {
    facial_distance_detailed(atoms, range_norm).map(|r| r.phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector_norm;

    #[test]
    fn two_edges_of_the_tetrahedron() {
        let atoms = AtomMatrix::simplex(4);
        let r = polytope_pair_distance(&atoms, &[0, 1], &[2, 3], Norm::L2).unwrap();
        assert!((r.distance - 1.0).abs() < 1e-12);
        for (w, expect) in r.witness_y.iter().zip([0.5, 0.5, 0.0, 0.0]) {
            assert!((w - expect).abs() < 1e-9);
        }
        for (w, expect) in r.witness_z.iter().zip([0.0, 0.0, 0.5, 0.5]) {
            assert!((w - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn two_vertices() {
        let r = polytope_pair_distance(&AtomMatrix::simplex(2), &[0], &[1], Norm::L2).unwrap();
        assert!((r.distance - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn touching_sets() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0, 1.0, 2.0], vec![0.0, 0.0, 0.0, 1.0]]).unwrap();
        let atoms = AtomMatrix::new(a).unwrap();
        let r = polytope_pair_distance(&atoms, &[0, 1], &[2, 3], Norm::L2).unwrap();
        assert!(r.distance < 1e-12);
    }

    #[test]
    fn closed_forms() {
        let phi4 = facial_distance(&AtomMatrix::simplex(4), Norm::L2).unwrap();
        assert!((phi4 - 1.0).abs() < 1e-9);
        let phi3 = facial_distance(&AtomMatrix::simplex(3), Norm::L2).unwrap();
        assert!((phi3 - 1.5f64.sqrt()).abs() < 1e-9);
        let ball = facial_distance(&AtomMatrix::l1_ball(3), Norm::L2).unwrap();
        assert!((ball - 0.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn report_is_consistent() {
        let atoms = AtomMatrix::l1_ball(2);
        let r = facial_distance_detailed(&atoms, Norm::L2).unwrap();
        assert!(r.face.verify(&atoms));
        assert_eq!(r.face_count, 8);
        let a = atoms.matrix();
        let gap: Vec<f64> = a
            .matvec(&r.witness_y)
            .iter()
            .zip(a.matvec(&r.witness_z))
            .map(|(p, q)| p - q)
            .collect();
        assert!((vector_norm(&gap, Norm::L2) - r.phi).abs() < 1e-12);
    }
}
