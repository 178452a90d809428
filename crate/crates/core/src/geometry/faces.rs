use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix};
use crate::lp::{solve_lp, LinearProgram, LpStatus};

use super::AtomMatrix;

/// Largest atom count accepted by face enumeration.
pub const ENUMERATION_CAP: usize = 16;

/// Certified slack below which a subset is not a face.
const FACE_EPS: f64 = 1e-9;

/// A supporting functional `c` exposing the face spanned by `atom_indices`:
/// `⟨c, a_i⟩ = γ` on the face and `⟨c, a_j⟩ ≥ γ + ε` off it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceCertificate {
    pub atom_indices: Vec<usize>,
    pub functional: Vec<f64>,
    pub level: f64,
    pub slack: f64,
}

impl FaceCertificate {
    /// Equalities within `1e-9`, inequalities within `1e-12`.
    pub fn verify(&self, atoms: &AtomMatrix) -> bool {
        let a = atoms.matrix();
        if self.functional.len() != a.rows() || !(self.slack > 0.0) {
            return false;
        }
        if self.functional.iter().any(|c| c.abs() > 1.0 + 1e-12) {
            return false;
        }
        let mut inside = vec![false; a.cols()];
        for &i in &self.atom_indices {
            if i >= a.cols() {
                return false;
            }
            inside[i] = true;
        }
        (0..a.cols()).all(|j| {
            let s = dot(&self.functional, &a.column(j));
            if inside[j] {
                (s - self.level).abs() <= 1e-9
            } else {
                s >= self.level + self.slack - 1e-12
            }
        })
    }

    pub fn len(&self) -> usize {
        self.atom_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atom_indices.is_empty()
    }
}

/// Maximizes `ε` over `‖c‖_∞ ≤ 1`, `ε ≤ 1` subject to `⟨c, a_i⟩ = γ` for
/// `i ∈ s` and `⟨c, a_j⟩ ≥ γ + ε` otherwise. Returns `(c, γ, ε)` when the
/// optimal `ε` exceeds the face threshold.
fn certify(a: &DenseMatrix, s: &[usize]) -> Result<Option<(Vec<f64>, f64, f64)>> {
    let m = a.rows();
    let n = a.cols();
    let mut in_s = vec![false; n];
    s.iter().for_each(|&i| in_s[i] = true);
    let outside: Vec<usize> = (0..n).filter(|&j| !in_s[j]).collect();

    // Columns: c⁺ (m), c⁻ (m), γ⁺, γ⁻, ε, slacks for outside atoms,
    // then upper-bound slacks for c⁺, c⁻ and ε.
    let (cp, cm, gp, gm, eps) = (0, m, 2 * m, 2 * m + 1, 2 * m + 2);
    let sl = 2 * m + 3;
    let ub = sl + outside.len();
    let nv = ub + 2 * m + 1;
    let nr = n + 2 * m + 1;
    let mut mat = DenseMatrix::zeros(nr, nv);
    let mut rhs = vec![0.0; nr];
    let mut out_pos = 0;
    for j in 0..n {
        for k in 0..m {
            mat[(j, cp + k)] = a[(k, j)];
            mat[(j, cm + k)] = -a[(k, j)];
        }
        mat[(j, gp)] = -1.0;
        mat[(j, gm)] = 1.0;
        if !in_s[j] {
            mat[(j, eps)] = -1.0;
            mat[(j, sl + out_pos)] = -1.0;
            out_pos += 1;
        }
    }
    for k in 0..2 * m {
        mat[(n + k, cp + k)] = 1.0;
        mat[(n + k, ub + k)] = 1.0;
        rhs[n + k] = 1.0;
    }
    mat[(n + 2 * m, eps)] = 1.0;
    mat[(n + 2 * m, ub + 2 * m)] = 1.0;
    rhs[n + 2 * m] = 1.0;
    let mut objective = vec![0.0; nv];
    objective[eps] = -1.0;

    let sol = solve_lp(&LinearProgram::new(objective, mat, rhs)?)?;
    if sol.status != LpStatus::Optimal || -sol.value <= FACE_EPS {
        return Ok(None);
    }
    let c: Vec<f64> = (0..m)
        .map(|k| (sol.point[cp + k] - sol.point[cm + k]).clamp(-1.0, 1.0))
        .collect();
    // Recompute γ and ε from c so the certificate is self-consistent.
    let scores: Vec<f64> = (0..n).map(|j| dot(&c, &a.column(j))).collect();
    let gamma = s.iter().map(|&i| scores[i]).sum::<f64>() / s.len() as f64;
    if s.iter().any(|&i| (scores[i] - gamma).abs() > FACE_EPS) {
        return Ok(None);
    }
    let eps = outside
        .iter()
        .map(|&j| scores[j] - gamma)
        .fold(f64::INFINITY, f64::min);
    Ok((eps > FACE_EPS).then_some((c, gamma, eps)))
}

/// Atoms lying in the relative interior of `conv(a)`: those expressible
/// with strictly positive weight on every atom. Such atoms lie on no proper
/// face.
fn relative_interior_atoms(a: &DenseMatrix) -> Result<Vec<bool>> {
    let m = a.rows();
    let n = a.cols();
    (0..n)
        .into_par_iter()
        .map(|i| {
            // λ_j = t + μ_j; maximize t.
            let mut mat = DenseMatrix::zeros(m + 1, n + 1);
            let mut rhs = vec![0.0; m + 1];
            for k in 0..m {
                for j in 0..n {
                    mat[(k, j)] = a[(k, j)];
                    mat[(k, n)] += a[(k, j)];
                }
                rhs[k] = a[(k, i)];
            }
            for j in 0..n {
                mat[(m, j)] = 1.0;
            }
            mat[(m, n)] = n as f64;
            rhs[m] = 1.0;
            let mut obj = vec![0.0; n + 1];
            obj[n] = -1.0;
            let sol = solve_lp(&LinearProgram::new(obj, mat, rhs)?)?;
            Ok(sol.status == LpStatus::Optimal && -sol.value > FACE_EPS)
        })
        .collect()
}

/// Certified faces among the subsets of `candidates` (indices into the
/// distinct columns `a`), excluding the empty set and the whole polytope.
pub(crate) fn faces_within(a: &DenseMatrix, candidates: &[usize]) -> Result<Vec<(Vec<usize>, Vec<f64>, f64, f64)>> {
    let n = a.cols();
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            atoms: n,
            cap: ENUMERATION_CAP,
        });
    }
    let interior = relative_interior_atoms(a)?;
    let usable: Vec<usize> = candidates.iter().copied().filter(|&i| !interior[i]).collect();
    let k = usable.len();
    let masks: Vec<u32> = (1u32..(1u32 << k)).collect();
    let found: Result<Vec<Option<_>>> = masks
        .par_iter()
        .map(|&mask| {
            let s: Vec<usize> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| usable[b]).collect();
            if s.len() == n {
                return Ok(None);
            }
            Ok(certify(a, &s)?.map(|(c, g, e)| (s, c, g, e)))
        })
        .collect();
    Ok(found?.into_iter().flatten().collect())
}

/// Every proper nonempty face of `conv(A)` with its certificate. Duplicate
/// atoms are merged for the search and all copies are reported in the face.
pub fn enumerate_proper_faces(atoms: &AtomMatrix) -> Result<Vec<FaceCertificate>> {
    let (a, groups) = atoms.distinct();
    let all: Vec<usize> = (0..a.cols()).collect();
    let faces = faces_within(&a, &all)?;
    Ok(faces
        .into_iter()
        .map(|(s, c, g, e)| FaceCertificate {
            atom_indices: expand(&s, &groups),
            functional: c,
            level: g,
            slack: e,
        })
        .collect())
}

pub(crate) fn expand(s: &[usize], groups: &[Vec<usize>]) -> Vec<usize> {
    let mut out: Vec<usize> = s.iter().flat_map(|&i| groups[i].iter().copied()).collect();
    out.sort_unstable();
    out
}
