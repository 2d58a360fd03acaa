//! Iterating the base maps: a golden rotation, the cat map, the doubling
//! map on a wide binary angle, and the solenoid.
use gaplab::{PhasePoint, SystemSpec, GOLDEN};

fn main() -> gaplab::Result<()> {
    let rot = SystemSpec::rotation(vec![GOLDEN])?;
    let x0 = PhasePoint::torus(vec![0.1]);
    for n in [-2, -1, 0, 1, 2, 1000] {
        println!("rotation  T^{n:<5}(0.1) = {:?}", rot.iterate(&x0, n)?.torus_coords());
    }

    let cat = SystemSpec::cat_map();
    let p = PhasePoint::torus(vec![0.2, 0.7]);
    let back = cat.iterate(&cat.iterate(&p, 5)?, -5)?;
    println!("cat map   T^-5 T^5 (0.2, 0.7) = {:?}", back.torus_coords());

    // An f64 angle is exhausted after ~53 doublings; sampled points carry
    // thousands of bits.
    let dbl = SystemSpec::doubling(2)?;
    let w = &dbl.sample_points(0, 1)[0];
    println!("doubling  resolved steps from a sampled point: {}", dbl.resolved_steps(w));
    for n in [0, 1, 100, 5000] {
        println!("doubling  T^{n:<5} ω = {:.12}", dbl.iterate(w, n)?.torus_coords()[0]);
    }
    if let Err(e) = dbl.iterate(w, -1) {
        println!("doubling  T^-1: {e}");
    }

    let sol = SystemSpec::solenoid(0.25)?;
    let s = PhasePoint::solenoid(1.0 / 3.0, 0.0, 0.0)?;
    for n in [1, 2, 20] {
        let pt = sol.iterate(&s, n)?;
        println!("solenoid  T^{n:<3} = ω {:.6}, disk {:?}", pt.torus_coords()[0], pt.disk().unwrap());
    }
    Ok(())
}
