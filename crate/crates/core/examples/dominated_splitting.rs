//! Energies in a gap give a dominated splitting of the cocycle; energies in
//! the spectrum do not. Compared against the numerical spectrum.
use gaplab::cocycle::{ds_sweep, rotation_number, DsParams};
use gaplab::ids::{classify_energy, dos_estimate, spectrum_approx};
use gaplab::sampling::TrigPoly;
use gaplab::{PhasePoint, SamplingFn, SystemSpec, GOLDEN};

fn main() -> gaplab::Result<()> {
    let sys = SystemSpec::rotation(vec![GOLDEN])?;
    let p = SamplingFn::constant(1, 1.0);
    let q: SamplingFn = TrigPoly::cosine(vec![1], 6.0).into();
    let dos = dos_estimate(&sys, &p, &q, 0, 8, 2000)?;
    let spectrum = spectrum_approx(&dos, 0.01)?;

    let energies: Vec<f64> = (0..16).map(|i| -5.0 + 10.0 * i as f64 / 15.0).collect();
    let verdicts = ds_sweep(&energies, &sys, &p, &q, &DsParams::default())?;
    let omega = PhasePoint::torus(vec![0.0]);
    for v in &verdicts {
        let in_spectrum = classify_energy(&spectrum, v.energy, 0.02);
        let rho = rotation_number(v.energy, &sys, &p, &q, &omega, 10_000)?;
        println!(
            "E = {:+.3}  dominated {:<5}  in spectrum {:<12}  rotation {:.4}",
            v.energy,
            v.is_dominated(),
            format!("{in_spectrum:?}"),
            rho
        );
    }
    Ok(())
}
