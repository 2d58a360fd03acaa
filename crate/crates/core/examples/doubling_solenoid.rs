//! The solenoid with coefficients depending only on the circle coordinate
//! has the same DOS as the doubling map.
use gaplab::ids::{detect_gaps, dos_estimate, GapOptions};
use gaplab::labelling::{connectedness_verdict, LabelGroup};
use gaplab::sampling::TrigPoly;
use gaplab::{SamplingFn, SystemSpec};

fn main() -> gaplab::Result<()> {
    let p: SamplingFn = TrigPoly::constant(1, 1.0).plus(&TrigPoly::cosine(vec![1], 0.5))?.into();
    let q: SamplingFn = TrigPoly::cosine(vec![1], 2.0).into();
    let dbl = SystemSpec::doubling(2)?;
    let sol = SystemSpec::solenoid(0.25)?;

    let a = dos_estimate(&dbl, &p, &q, 0, 16, 1500)?;
    let b = dos_estimate(&sol, &p, &q, 0, 16, 1500)?;
    println!("identical eigenvalues: {}", a.values() == b.values());

    let opts = GapOptions { min_width: 0.05, ..GapOptions::default() };
    let gaps = detect_gaps(&a, &opts)?;
    let verdict = connectedness_verdict(&gaps, &LabelGroup::for_system(&dbl, &p)?, opts.min_width)?;
    println!("{}", verdict.statement);

    // With p vanishing somewhere the label question is open.
    let p0: SamplingFn = TrigPoly::constant(1, 1.0).plus(&TrigPoly::cosine(vec![1], 1.0))?.into();
    println!("p = 1 + cos: {:?}", LabelGroup::for_system(&dbl, &p0)?.origin);
    Ok(())
}
