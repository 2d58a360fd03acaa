//! The free Laplacian (`p ≡ 1`, `q ≡ 0`): its IDS against the closed form
//! `1 − arccos(E/2)/π`.
use gaplab::ids::{dos_estimate, free_ids, ids_eval};
use gaplab::{SamplingFn, SystemSpec, GOLDEN};

fn main() -> gaplab::Result<()> {
    let sys = SystemSpec::rotation(vec![GOLDEN])?;
    let p = SamplingFn::constant(1, 1.0);
    let q = SamplingFn::constant(1, 0.0);
    let dos = dos_estimate(&sys, &p, &q, 0, 1, 5000)?;
    let mut worst = 0.0f64;
    for i in 0..400 {
        let e = -1.9 + 3.8 * i as f64 / 399.0;
        let err = (ids_eval(&dos, e) - free_ids(e)).abs();
        worst = worst.max(err);
        if i % 50 == 0 {
            println!("E = {e:+.3}  k_N = {:.5}  exact = {:.5}", ids_eval(&dos, e), free_ids(e));
        }
    }
    println!("sup error on [-1.9, 1.9]: {worst:.2e}");
    Ok(())
}
