//! Condition numbers of convex functions relative to a polytope `conv(A)`,
//! and first-order methods whose linear rates they govern.
//!
//! The crate computes the facial distance `Φ(A)`, the relative smoothness
//! and strong convexity constants of quadratics, a certified lower bound on
//! the quadratic functional growth constant `μ*`, and checks Frank-Wolfe
//! with away steps and projected gradient traces against their rate bounds.

pub mod conditioning;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod lp;
pub mod solvers;

pub use conditioning::{ConditionReport, ObjectiveOracle, QuadraticObjective};
pub use error::{Error, Result};
pub use geometry::{AtomMatrix, LiftedAtoms};
pub use linalg::{DenseMatrix, Norm};
pub use lp::SimplexPoint;
pub use solvers::{SolveConfig, SolveTrace};
