//! Sign changes of the Dirichlet solution count the eigenvalues above `E`.
use gaplab::oscillation::{dirichlet_solution, interpolated_zeros, verify_oscillation};
use gaplab::tridiag::eigenvalues;
use gaplab::JacobiBlock;

fn main() -> gaplab::Result<()> {
    println!("zeros of [1,-1,1,-1]: {}", interpolated_zeros(&[1.0, -1.0, 1.0, -1.0]));
    println!("zeros of [1,0,-1]:    {}", interpolated_zeros(&[1.0, 0.0, -1.0]));

    let diag = [0.3, -1.2, 0.8, 0.0, 2.1, -0.4];
    let off = [1.0, 0.5, 2.0, 0.7, 1.3];
    let block = JacobiBlock::from_real(&diag, &off)?;
    let eig = eigenvalues(&block, 1e-12)?;
    println!("eigenvalues: {:.4?}", eig.values);
    for e in [-4.0, -1.0, 0.25, 1.5, 4.0] {
        let r = verify_oscillation(&block, e)?;
        let u = dirichlet_solution(&block, e, 1.0)?;
        println!(
            "E = {e:+.2}  F = {}  above = {}  u = {:+.3?}",
            r.zeros,
            r.eig_above,
            u.from_zero()
        );
    }
    Ok(())
}
