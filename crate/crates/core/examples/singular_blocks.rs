//! When `p` vanishes the matrix splits into finite blocks. Sign flips
//! inside each block give the IDS without any truncation.
use gaplab::ids::{dos_estimate, ids_eval};
use gaplab::oscillation::{block_route_ids, split_blocks};
use gaplab::sampling::{coefficients, TrigPoly};
use gaplab::{PhasePoint, SamplingFn, SystemSpec, GOLDEN};

fn main() -> gaplab::Result<()> {
    let sys = SystemSpec::rotation(vec![GOLDEN])?;
    // p = max(0, cos 2πω − ½) vanishes on a third of the circle.
    let p = SamplingFn::clamp_below(TrigPoly::cosine(vec![1], 1.0), 0.5)?;
    let q: SamplingFn = TrigPoly::cosine(vec![1], 2.0).into();

    let co = coefficients(&sys, &p, &q, &PhasePoint::torus(vec![0.0]), 0, 99_999)?.modulus();
    let decomp = split_blocks(&co)?;
    let sizes: Vec<usize> = decomp.complete_blocks().map(|b| b.len()).take(12).collect();
    println!("{} zeros of p in 10^5 sites; first block sizes {sizes:?}", decomp.singular.len());

    let dos = dos_estimate(&sys, &p, &q, 0, 8, 2000)?;
    for e in [-1.5, -0.7, -0.2, 0.3, 0.9, 1.6] {
        let k = block_route_ids(&decomp, e)?;
        println!("E = {e:+.2}  block route {k:.5}  truncation {:.5}", ids_eval(&dos, e));
    }
    Ok(())
}
