//! A complex off-diagonal is unitarily equivalent to its modulus:
//! `U* J U` with diagonal `U` has off-diagonal `|a(n)|`.
use gaplab::tridiag::{eigenvalues, gauge_reduce};
use gaplab::JacobiBlock;
use num_complex::Complex64;

fn main() -> gaplab::Result<()> {
    let diag = vec![0.5, -0.3, 1.1, 0.0];
    let off = vec![Complex64::new(0.6, 0.8), Complex64::new(-2.0, 0.0), Complex64::from_polar(0.5, 2.0)];
    let block = JacobiBlock::new(diag, off)?;
    println!("gauge-reduced as given: {}", block.is_gauge_reduced());

    let reduced = gauge_reduce(&block);
    let u = reduced.phases();
    println!("reduced off-diagonal: {:?}", reduced.real_offdiag()?);
    for (n, a) in block.offdiag().iter().enumerate() {
        let conj = u[n].conj() * a * u[n + 1];
        println!("conj(u{n}) a{n} u{} = {:.6}", n + 1, conj);
    }
    println!("eigenvalues: {:.6?}", eigenvalues(&reduced, 1e-13)?.values);
    Ok(())
}
