//! Over the cat map every gap label would be an integer, so no interior gap
//! can open. Detect gaps and report the connectedness verdict.
use gaplab::ids::{detect_gaps, dos_estimate, GapOptions};
use gaplab::labelling::{connectedness_verdict, LabelGroup};
use gaplab::sampling::TrigPoly;
use gaplab::{SamplingFn, SystemSpec};

fn main() -> gaplab::Result<()> {
    let sys = SystemSpec::cat_map();
    let p: SamplingFn = TrigPoly::constant(2, 1.0).plus(&TrigPoly::cosine(vec![1, 0], 0.5))?.into();
    let q: SamplingFn = TrigPoly::cosine(vec![0, 1], 1.0).into();
    let group = LabelGroup::for_system(&sys, &p)?;
    println!("label group origin {:?}, kernel rank {}", group.origin, group.rank());

    let dos = dos_estimate(&sys, &p, &q, 0, 16, 1500)?;
    let opts = GapOptions { min_width: 0.05, ..GapOptions::default() };
    let gaps = detect_gaps(&dos, &opts)?;
    let verdict = connectedness_verdict(&gaps, &group, opts.min_width)?;
    println!("range of spectrum {:?}", dos.range());
    println!("{} (connected: {})", verdict.statement, verdict.connected);
    Ok(())
}
