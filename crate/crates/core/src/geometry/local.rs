use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditioning::QuadraticObjective;
use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix};

use super::distance::hull_distance_sq;
use super::faces::faces_within;
use super::{AtomMatrix, FaceCertificate};

/// Tolerance for membership in the minimizing face.
const FACE_TOL: f64 = 1e-9;

/// Lifted atoms `Ā ∈ ℝ^{(m+1)×n}` with the vector `v ∈ ℝ^m` defining the
/// quasi-norm `‖ū‖_v`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftedAtoms {
    abar: AtomMatrix,
    v: Vec<f64>,
    provenance: String,
}

impl LiftedAtoms {
    pub fn new(abar: DenseMatrix, v: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if abar.rows() != v.len() + 1 {
            return Err(Error::Dimension(format!(
                "lifted atoms have {} rows but v has length {}",
                abar.rows(),
                v.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("v".into()));
        }
        Ok(Self {
            abar: AtomMatrix::new(abar)?,
            v,
            provenance: provenance.into(),
        })
    }

    /// `Ā = [A; 0]`, `v = 0`.
    pub fn zero_lift(atoms: &AtomMatrix) -> Result<Self> {
        let zero = DenseMatrix::zeros(1, atoms.len());
        let abar = atoms.matrix().vstack(&zero)?;
        Self::new(abar, vec![0.0; atoms.dim()], "zero lift [A; 0], v = 0")
    }

    /// `Ā = [Q^{1/2}A; 2bᵀA]`, `v = 2Q^{1/2}u★` for `f(u) = ½⟨Qu,u⟩ + ⟨b,u⟩`.
    pub fn from_quadratic(obj: &QuadraticObjective, atoms: &AtomMatrix, u_star: &[f64]) -> Result<Self> {
        let a = atoms.matrix();
        if u_star.len() != a.rows() || obj.b().len() != a.rows() {
            return Err(Error::Dimension("u_star, b and atoms disagree in dimension".into()));
        }
        let top = obj.sqrt_q().matmul(a)?;
        let last: Vec<f64> = a.tr_matvec(obj.b()).into_iter().map(|x| 2.0 * x).collect();
        let abar = top.vstack(&DenseMatrix::new(1, a.cols(), last)?)?;
        let v = obj.sqrt_q().matvec(u_star).into_iter().map(|x| 2.0 * x).collect();
        Self::new(abar, v, "quadratic lift [Q^1/2 A; 2 b^T A], v = 2 Q^1/2 u*")
    }

    pub fn abar(&self) -> &AtomMatrix {
        &self.abar
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    fn scores(&self, a: &DenseMatrix) -> Vec<f64> {
        let mut w = self.v.clone();
        w.push(1.0);
        a.tr_matvec(&w)
    }
}

/// `‖ū‖_v = √(‖u‖² + |⟨v, u⟩ + u_{m+1}|)` for `ū = (u, u_{m+1})`.
pub fn quasi_norm(ubar: &[f64], v: &[f64]) -> Result<f64> {
    let m = v.len();
    if ubar.len() != m + 1 {
        return Err(Error::Dimension(format!(
            "quasi-norm needs a vector of length {} but got {}",
            m + 1,
            ubar.len()
        )));
    }
    let u = &ubar[..m];
    Ok((dot(u, u) + (dot(v, u) + ubar[m]).abs()).sqrt())
}

/// The face of `conv(Ā)` minimizing `⟨(v, 1), ·⟩`: atoms within `1e-9` of
/// the minimum score.
pub fn minimizing_face(lifted: &LiftedAtoms) -> FaceCertificate {
    let a = lifted.abar.matrix();
    let scores = lifted.scores(a);
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let members: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] <= min + FACE_TOL).collect();
    let mut functional = lifted.v.clone();
    functional.push(1.0);
    let scale = functional.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    functional.iter_mut().for_each(|x| *x /= scale);
    let level = min / scale;
    let slack = (0..scores.len())
        .filter(|i| !members.contains(i))
        .map(|j| scores[j] / scale - level)
        .fold(f64::INFINITY, f64::min);
    FaceCertificate {
        atom_indices: members,
        functional,
        level,
        // No atoms off the face: any positive slack certifies.
        slack: if slack.is_finite() { slack } else { 1.0 },
    }
}

/// `Φ_v(Ā)`: the minimum over faces `G ≠ conv(Ā)` of `F(v)` of
/// `dist_v(G, conv(Ā∖G))`.
///
/// For `s ∈ G ⊆ F(v)` every difference `ā_s − ā_t` has
/// `⟨v, ·⟩ + last ≤ 0`, so the absolute value in the quasi-norm has a fixed
/// sign and each distance is a single convex quadratic program.
pub fn local_facial_distance(lifted: &LiftedAtoms) -> Result<f64> {
    let (a, _groups) = lifted.abar.distinct();
    let m = lifted.v.len();
    let k = a.cols();
    let scores = lifted.scores(&a);
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let in_face: Vec<usize> = (0..k).filter(|&i| scores[i] <= min + FACE_TOL).collect();
    let faces = faces_within(&a, &in_face)?;
    if faces.is_empty() {
        return Err(Error::Degenerate("minimizing face has no admissible subfaces".into()));
    }
    let top_rows: Vec<Vec<f64>> = (0..m).map(|r| a.row(r).to_vec()).collect();
    let top = DenseMatrix::from_rows(&top_rows)?;
    let dists: Result<Vec<f64>> = faces
        .par_iter()
        .map(|(g, _, _, _)| {
            let t: Vec<usize> = (0..k).filter(|j| !g.contains(j)).collect();
            hull_distance_sq(&top, g, &t, Some(&scores)).map(|(d, _, _)| d)
        })
        .collect();
    let best = dists?.into_iter().fold(f64::INFINITY, f64::min);
    Ok(best.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::facial_distance;
    use crate::linalg::Norm;

    fn flat_direction_lift() -> LiftedAtoms {
        let abar = DenseMatrix::from_rows(&[
            vec![1.0, -1.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        LiftedAtoms::new(abar, vec![0.0, 0.0], "test").unwrap()
    }

    #[test]
    fn quasi_norm_values() {
        assert!((quasi_norm(&[3.0, 4.0, 0.0], &[0.0, 0.0]).unwrap() - 5.0).abs() < 1e-15);
        assert_eq!(quasi_norm(&[0.0, 4.0], &[0.0]).unwrap(), 2.0);
        assert!((quasi_norm(&[1.0, 0.0, 1.0], &[1.0, 0.0]).unwrap() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn flat_direction_face_and_distance() {
        let lifted = flat_direction_lift();
        let f = minimizing_face(&lifted);
        assert_eq!(f.atom_indices, vec![0, 1]);
        assert!(f.verify(lifted.abar()));
        let phi = local_facial_distance(&lifted).unwrap();
        assert!((phi - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn zero_lift_matches_facial_distance() {
        let atoms = AtomMatrix::simplex(3);
        let lifted = LiftedAtoms::zero_lift(&atoms).unwrap();
        assert_eq!(minimizing_face(&lifted).atom_indices, vec![0, 1, 2]);
        let local = local_facial_distance(&lifted).unwrap();
        let phi = facial_distance(&atoms, Norm::L2).unwrap();
        assert!((local - phi).abs() < 1e-9);
    }

    #[test]
    fn singleton_face() {
        let abar = DenseMatrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 3.0]])
            .unwrap();
        let lifted = LiftedAtoms::new(abar, vec![0.0, 0.0], "test").unwrap();
        assert_eq!(minimizing_face(&lifted).atom_indices, vec![0]);
        // Vertex 0 against conv{(1,0,1), (0,1,3)}: s² + (1−s)² + 3 − 2s,
        // minimized at s = 1 with value 2.
        let phi = local_facial_distance(&lifted).unwrap();
        assert!((phi - 2f64.sqrt()).abs() < 1e-9);
    }
}
