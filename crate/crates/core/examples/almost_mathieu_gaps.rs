//! Gaps of the almost Mathieu operator at the golden frequency, with their
//! labels matched against `{m·α + n}`.
use gaplab::ids::{detect_gaps, dos_estimate, GapOptions};
use gaplab::labelling::{default_label_tol, verify_gap_labels, LabelGroup};
use gaplab::sampling::TrigPoly;
use gaplab::{SamplingFn, SystemSpec, GOLDEN};

fn main() -> gaplab::Result<()> {
    let n = 2000;
    let sys = SystemSpec::rotation(vec![GOLDEN])?;
    let p = SamplingFn::constant(1, 1.0);
    let q: SamplingFn = TrigPoly::cosine(vec![1], 6.0).into(); // λ = 3
    let dos = dos_estimate(&sys, &p, &q, 0, 8, n)?;
    let gaps = detect_gaps(&dos, &GapOptions::default())?;
    let group = LabelGroup::for_system(&sys, &p)?;
    let (labels, summary) = verify_gap_labels(&gaps, &group, default_label_tol(n))?;
    println!("{:>10} {:>10} {:>9} {:>6} {:>4} {:>9}", "lo", "hi", "k", "m", "n", "residual");
    for l in &labels {
        println!(
            "{:>10.5} {:>10.5} {:>9.5} {:>6} {:>4} {:>9.2e}",
            l.gap[0], l.gap[1], l.label, l.m[0], l.n, l.residual
        );
    }
    println!("{}/{} matched within {}", summary.matched, summary.gaps, summary.tol);
    Ok(())
}
