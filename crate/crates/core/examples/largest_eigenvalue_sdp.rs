//! The largest eigenvalue of a symmetric matrix as an SDP:
//! maximize <C, X> subject to Tr X = 1, X >= 0.

use nalgebra::{DMatrix, SymmetricEigen};
use qkd_bsa::sdp::{solve, write_dump, Constraint, SdpOptions, SdpProblem};

fn main() -> qkd_bsa::Result<()> {
    let n = 5;
    let c = DMatrix::from_fn(n, n, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
    // the solver minimizes, so negate the objective
    let p = SdpProblem::new(
        vec![n],
        vec![-c.clone()],
        vec![Constraint { matrices: vec![Some(DMatrix::identity(n, n))], rhs: 1.0 }],
    )?;
    let sol = solve(&p, &SdpOptions::default());
    let exact = SymmetricEigen::new(c).eigenvalues.max();
    println!("status {:?} after {} iterations", sol.status, sol.iterations);
    println!("SDP   {:.12}", -sol.primal_objective);
    println!("eig   {:.12}", exact);
    println!("gap   {:.2e}", sol.duality_gap);
    println!("\n{}", write_dump(&p));
    Ok(())
}
