//! The two small solvers everything else rests on: a dense two-phase
//! simplex method and Euclidean projection onto the probability simplex.

use polycond::lp::{convex_weights, project_simplex, solve_lp, LinearProgram, LpStatus};
use polycond::DenseMatrix;

fn main() -> polycond::Result<()> {
    // max x + y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6, all ≥ 0.
    let a = DenseMatrix::from_rows(&[vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]])?;
    let lp = LinearProgram::new(vec![-1.0, -1.0, 0.0, 0.0], a, vec![4.0, 6.0])?;
    let sol = solve_lp(&lp)?;
    assert_eq!(sol.status, LpStatus::Optimal);
    println!("LP optimum {:.6} at {:?}", -sol.value, &sol.point[..2]);

    let y = [0.9, -0.4, 0.6, 0.1];
    let p = project_simplex(&y);
    println!("projection of {y:?} = {:?}", p.as_slice());

    // Weights expressing a point of the hull in terms of the atoms.
    let atoms = DenseMatrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]])?;
    let w = convex_weights(&atoms, &[0.25, 0.5])?;
    println!("(0.25, 0.5) = {:?} · atoms", w.as_slice());
    Ok(())
}
