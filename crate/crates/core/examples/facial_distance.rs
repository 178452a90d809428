//! Facial distance of the standard simplex and the ℓ1 ball against their
//! closed forms, plus the face that attains it.
//!
//! ```bash
//! cargo run -p polycond --example facial_distance
//! ```

use polycond::geometry::{enumerate_proper_faces, facial_distance, facial_distance_detailed};
use polycond::{AtomMatrix, Norm};

fn main() -> polycond::Result<()> {
    println!("{:<10} {:>4} {:>14} {:>14}", "polytope", "m", "phi", "closed form");
    for m in 2..=6 {
        let phi = facial_distance(&AtomMatrix::simplex(m), Norm::L2)?;
        let mf = m as f64;
        let exact = if m % 2 == 0 { 2.0 / mf.sqrt() } else { 2.0 / (mf - 1.0 / mf).sqrt() };
        println!("{:<10} {m:>4} {phi:>14.10} {exact:>14.10}", "simplex");
    }
    for m in 2..=4 {
        let phi = facial_distance(&AtomMatrix::l1_ball(m), Norm::L2)?;
        let exact = 1.0 / (m as f64 - 1.0).sqrt();
        println!("{:<10} {m:>4} {phi:>14.10} {exact:>14.10}", "l1ball");
    }

    // The minimizing face comes with a certificate that can be checked
    // independently of the enumeration.
    let square = AtomMatrix::l1_ball(2);
    let report = facial_distance_detailed(&square, Norm::L2)?;
    println!(
        "\nl1ball(2): {} proper faces, minimizing face {:?} vs {:?}",
        enumerate_proper_faces(&square)?.len(),
        report.face.atom_indices,
        report.complement
    );
    println!("certificate c = {:?}, level {}, verifies: {}", report.face.functional, report.face.level, report.face.verify(&square));
    Ok(())
}
