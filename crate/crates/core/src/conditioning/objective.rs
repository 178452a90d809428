use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, matrix_sqrt_psd, sym_eigen, vector_norm, DenseMatrix, Norm, EIGEN_TOL};

/// Classical smoothness and strong-convexity constants, both measured in
/// the Euclidean norm on the range space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalConstants {
    pub smoothness: f64,
    pub strong_convexity: f64,
}

/// A differentiable convex function `f: ℝ^m → ℝ`.
pub trait ObjectiveOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, u: &[f64]) -> f64;

    fn gradient(&self, u: &[f64]) -> Vec<f64>;

    /// `⟨∇²f · d, d⟩` when the Hessian is constant. Enables exact line search.
    fn curvature(&self, _d: &[f64]) -> Option<f64> {
        None
    }

    fn classical_constants(&self) -> Option<ClassicalConstants> {
        None
    }

    fn as_quadratic(&self) -> Option<&QuadraticObjective> {
        None
    }
}

/// `f(u) = ½⟨Qu, u⟩ + ⟨b, u⟩` with `Q` symmetric PSD.
#[derive(Clone, Debug)]
pub struct QuadraticObjective {
    q: DenseMatrix,
    b: Vec<f64>,
    sqrt_q: DenseMatrix,
    max_eig: f64,
    min_eig: f64,
}

impl QuadraticObjective {
    pub fn new(q: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        if q.rows() != q.cols() {
            return Err(Error::field("q", "matrix must be square"));
        }
        if b.len() != q.rows() {
            return Err(Error::Dimension(format!(
                "Q is {0}x{0} but b has length {1}",
                q.rows(),
                b.len()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("b".into()));
        }
        let eig = sym_eigen(&q, EIGEN_TOL)?;
        let sqrt_q = matrix_sqrt_psd(&q)?;
        Ok(Self {
            max_eig: eig.max_eigenvalue(),
            min_eig: eig.min_eigenvalue().max(0.0),
            q,
            b,
            sqrt_q,
        })
    }

    /// `½‖u‖²` on `ℝ^m`.
    pub fn half_squared_norm(m: usize) -> Self {
        Self::new(DenseMatrix::identity(m), vec![0.0; m]).expect("identity is PSD")
    }

    pub fn linear(b: Vec<f64>) -> Result<Self> {
        let m = b.len();
        Self::new(DenseMatrix::zeros(m, m), b)
    }

    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn sqrt_q(&self) -> &DenseMatrix {
        &self.sqrt_q
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.max_eig
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eig
    }

    /// Smallest eigenvalue above `1e-10 · λ_max`.
    pub fn is_positive_definite(&self) -> bool {
        self.max_eig > 0.0 && self.min_eig > 1e-10 * self.max_eig
    }

    /// The objective `λ·f`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(
            self.q.scaled(lambda),
            self.b.iter().map(|v| v * lambda).collect(),
        )
    }
}

impl ObjectiveOracle for QuadraticObjective {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, u: &[f64]) -> f64 {
        0.5 * dot(&self.q.matvec(u), u) + dot(&self.b, u)
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = self.q.matvec(u);
        g.iter_mut().zip(&self.b).for_each(|(gi, bi)| *gi += bi);
        g
    }

    fn curvature(&self, d: &[f64]) -> Option<f64> {
        Some(dot(&self.q.matvec(d), d).max(0.0))
    }

    fn classical_constants(&self) -> Option<ClassicalConstants> {
        Some(ClassicalConstants {
            smoothness: self.max_eig,
            strong_convexity: self.min_eig,
        })
    }

    fn as_quadratic(&self) -> Option<&QuadraticObjective> {
        Some(self)
    }
}

/// Objective assembled from closures, for functions without a closed form
/// in this crate.
pub struct FnObjective<F, G> {
    dim: usize,
    value: F,
    gradient: G,
    constants: Option<ClassicalConstants>,
}

impl<F, G> FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim: usize, value: F, gradient: G) -> Self {
        Self {
            dim,
            value,
            gradient,
            constants: None,
        }
    }

    pub fn with_constants(mut self, smoothness: f64, strong_convexity: f64) -> Self {
        self.constants = Some(ClassicalConstants {
            smoothness,
            strong_convexity,
        });
        self
    }
}

impl<F, G> ObjectiveOracle for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, u: &[f64]) -> f64 {
        (self.value)(u)
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        (self.gradient)(u)
    }

    fn classical_constants(&self) -> Option<ClassicalConstants> {
        self.constants
    }
}

/// Compares the analytic gradient against central differences with step
/// `1e-6·(1 + ‖u‖)` at each probe; agreement must be within `1e-5`
/// relative.
pub fn check_gradient(obj: &dyn ObjectiveOracle, probes: &[Vec<f64>]) -> Result<()> {
    for u in probes {
        if u.len() != obj.dim() {
            return Err(Error::Dimension("gradient probe has wrong dimension".into()));
        }
        let g = obj.gradient(u);
        if g.len() != u.len() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Objective("gradient is not a finite vector of the right size".into()));
        }
        let h = 1e-6 * (1.0 + vector_norm(u, Norm::L2));
        let mut fd = vec![0.0; u.len()];
        let mut probe = u.clone();
        for i in 0..u.len() {
            probe[i] = u[i] + h;
            let fp = obj.value(&probe);
            probe[i] = u[i] - h;
            let fm = obj.value(&probe);
            probe[i] = u[i];
            fd[i] = (fp - fm) / (2.0 * h);
        }
        let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
        let scale = vector_norm(&g, Norm::L2).max(1.0);
        let err = vector_norm(&diff, Norm::L2) / scale;
        if err > 1e-5 {
            return Err(Error::Objective(format!(
                "gradient disagrees with finite differences (relative error {err:e})"
            )));
        }
    }
    Ok(())
}
