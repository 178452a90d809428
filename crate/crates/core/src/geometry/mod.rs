//! Geometry of `conv(A)`: diameter, faces, facial distances.

mod distance;
mod faces;
mod local;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sub, sym_eigen, vector_norm, DenseMatrix, Norm, EIGEN_TOL};

pub use distance::{
    facial_distance, facial_distance_detailed, polytope_pair_distance, FacialDistanceReport,
    PolytopeDistanceResult,
};
pub use faces::{enumerate_proper_faces, FaceCertificate, ENUMERATION_CAP};
pub use local::{local_facial_distance, minimizing_face, quasi_norm, LiftedAtoms};

/// Entrywise tolerance for treating two atoms as the same point.
pub const DUPLICATE_TOL: f64 = 1e-12;

/// The columns `a_1..a_n` of an `m × n` matrix, generating `conv(A)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DenseMatrix", into = "DenseMatrix")]
pub struct AtomMatrix {
    a: DenseMatrix,
}

impl TryFrom<DenseMatrix> for AtomMatrix {
    type Error = Error;
    fn try_from(a: DenseMatrix) -> Result<Self> {
        Self::new(a)
    }
}

impl From<AtomMatrix> for DenseMatrix {
    fn from(a: AtomMatrix) -> Self {
        a.a
    }
}

impl AtomMatrix {
    /// Requires at least two distinct columns.
    pub fn new(a: DenseMatrix) -> Result<Self> {
        let atoms = Self { a };
        if atoms.distinct().1.len() < 2 {
            return Err(Error::Degenerate(
                "atoms need at least two distinct columns".into(),
            ));
        }
        Ok(atoms)
    }

    /// Identity `I_m`: vertices of the unit simplex.
    pub fn simplex(m: usize) -> Self {
        Self::new(DenseMatrix::identity(m)).expect("m >= 2")
    }

    /// `[I_m  −I_m]`: vertices of the ℓ1 unit ball.
    pub fn l1_ball(m: usize) -> Self {
        let mut a = DenseMatrix::zeros(m, 2 * m);
        for i in 0..m {
            a[(i, i)] = 1.0;
            a[(i, m + i)] = -1.0;
        }
        Self::new(a).expect("m >= 1")
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    /// Number of atoms `n`.
    pub fn len(&self) -> usize {
        self.a.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.a.cols() == 0
    }

    /// Ambient dimension `m`.
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn atom(&self, i: usize) -> Vec<f64> {
        self.a.column(i)
    }

    /// `M·A` for a linear map `M`.
    pub fn transformed(&self, m: &DenseMatrix) -> Result<Self> {
        Self::new(m.matmul(&self.a)?)
    }

    /// Distinct columns and, for each, the original indices equal to it.
    pub(crate) fn distinct(&self) -> (DenseMatrix, Vec<Vec<usize>>) {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let cols: Vec<Vec<f64>> = (0..self.len()).map(|j| self.a.column(j)).collect();
        for j in 0..cols.len() {
            let same = groups.iter_mut().find(|g| {
                cols[g[0]]
                    .iter()
                    .zip(&cols[j])
                    .all(|(x, y)| (x - y).abs() <= DUPLICATE_TOL)
            });
            match same {
                Some(g) => g.push(j),
                None => groups.push(vec![j]),
            }
        }
        let reps: Vec<usize> = groups.iter().map(|g| g[0]).collect();
        (self.a.select_columns(&reps), groups)
    }
}

/// `max_{i,j} ‖a_i − a_j‖`, the diameter of `conv(A)`.
pub fn diameter(atoms: &AtomMatrix, range_norm: Norm) -> f64 {
    let n = atoms.len();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| atoms.atom(j)).collect();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            best = best.max(vector_norm(&sub(&cols[i], &cols[j]), range_norm));
        }
    }
    best
}

/// `max { ‖Aw‖₂ / ‖w‖ : 1ᵀw = 0 }` for the ℓ1 or ℓ2 norm on `w`.
pub fn restricted_operator_norm(atoms: &AtomMatrix, domain_norm: Norm) -> Result<f64> {
    match domain_norm {
        Norm::L1 => Ok(diameter(atoms, Norm::L2) / 2.0),
        Norm::L2 => {
            let n = atoms.len();
            let mut ap = atoms.matrix().clone();
            for r in 0..ap.rows() {
                let mean = ap.row(r).iter().sum::<f64>() / n as f64;
                for c in 0..n {
                    ap[(r, c)] -= mean;
                }
            }
            // Nonzero spectrum of (AP)ᵀ(AP) equals that of (AP)(AP)ᵀ.
            let gram = ap.matmul(&ap.transpose())?;
            let eig = sym_eigen(&gram, EIGEN_TOL)?;
            Ok(eig.max_eigenvalue().max(0.0).sqrt())
        }
        Norm::Linf => Err(Error::field(
            "domain_norm",
            "only l1 and l2 domain norms are supported",
        )),
    }
}
