//! Verification suites behind the `verify-*` subcommands.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::cocycle::{product, unstable_section};
use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::ids::{detect_gaps, dos_estimate_with, ids_eval, DosEstimate};
use crate::labelling::{connectedness_verdict, ConnectednessVerdict, LabelGroup};
use crate::oscillation::{
    block_route_ids, block_sign_flips, clear_of_spectrum, split_blocks, verify_oscillation_with,
};
use crate::sampling::{coefficients, SamplingFn, TrigPoly};
use crate::tridiag::{build_block, eigenvalues, gauge_reduce, sturm_count, JacobiBlock};

/// Smallest distance kept between a probe energy and an eigenvalue.
const PROBE_GAP: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct OscillationCase {
    pub case: usize,
    pub m: usize,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "F")]
    pub zeros: usize,
    pub eig_above: usize,
    pub equal: bool,
    /// `F` with trailing coefficients 0.1, 1 and 10.
    pub trailing: [usize; 3],
}

impl OscillationCase {
    pub fn trailing_consistent(&self) -> bool {
        self.trailing.iter().all(|&f| f == self.trailing[0])
    }
}

pub const TRAILING: [f64; 3] = [0.1, 1.0, 10.0];

/// A random block with `m ≤ 12`, `b ∈ [−2, 2]`, `a ∈ (0, 2]`, and an energy
/// at least `1e-6` from its eigenvalues; half of the energies are taken
/// close to an eigenvalue.
pub fn random_oscillation_case(rng: &mut impl Rng) -> Result<(JacobiBlock, f64)> {
    let m = rng.gen_range(1..=12);
    let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..=2.0)).collect();
    let a: Vec<f64> = (0..m - 1).map(|_| 2.0 - rng.gen_range(0.0..2.0)).collect();
    let block = JacobiBlock::from_real(&b, &a)?;
    let eig = eigenvalues(&block, 1e-14)?.values;
    let (lo, hi) = (eig[0] - 1.0, eig[m - 1] + 1.0);
    loop {
        let e = if rng.gen_bool(0.5) {
            let j = rng.gen_range(0..m);
            let offset = 10f64.powf(rng.gen_range(-5.9..-2.0));
            if rng.gen_bool(0.5) { eig[j] + offset } else { eig[j] - offset }
        } else {
            rng.gen_range(lo..hi)
        };
        if eig.iter().all(|&x| (x - e).abs() >= PROBE_GAP) {
            return Ok((block, e));
        }
    }
}

pub fn oscillation_suite(seed: u64, cases: usize) -> Result<Vec<OscillationCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .map(|case| {
            let (block, e) = random_oscillation_case(&mut rng)?;
            let rep = verify_oscillation_with(&block, e, 1.0)?;
            let mut trailing = [0; 3];
            for (slot, t) in trailing.iter_mut().zip(TRAILING) {
                *slot = verify_oscillation_with(&block, e, t)?.zeros;
            }
            Ok(OscillationCase {
                case,
                m: rep.m,
                energy: e,
                zeros: rep.zeros,
                eig_above: rep.eig_above,
                equal: rep.equal,
                trailing,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GaugeCase {
    pub case: usize,
    pub alpha: f64,
    /// Largest elementwise difference of the two eigenvalue lists.
    pub max_eig_diff: f64,
    /// Largest `|conj(λ_n) a(n) λ_{n+1} − |a(n)||` of the conjugation.
    pub conjugation_residual: f64,
}

/// A rotation by a random angle with a random complex `p` and real `q`.
pub fn random_gauge_instance(rng: &mut impl Rng) -> Result<(SystemSpec, SamplingFn, SamplingFn)> {
    let alpha = rng.gen_range(0.05..0.95);
    let mut terms = vec![(vec![0], Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))];
    for k in [1i64, -1, 2] {
        terms.push((vec![k], Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
    }
    let p = SamplingFn::from(TrigPoly::new(1, false, terms)?);
    let q = TrigPoly::cosine(vec![1], rng.gen_range(0.0..3.0)).plus(&TrigPoly::sine(vec![2], rng.gen_range(0.0..1.0)))?;
    Ok((SystemSpec::rotation(vec![alpha])?, p, q.into()))
}

pub fn gauge_suite(seed: u64, cases: usize, n: usize) -> Result<Vec<GaugeCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .map(|case| {
            let (sys, p, q) = random_gauge_instance(&mut rng)?;
            let omega = sys.sample_points(rng.gen(), 1).remove(0);
            let last = n as i64 - 1;
            let complex = build_block(&coefficients(&sys, &p, &q, &omega, 0, last)?, 0, last)?;
            let reduced = gauge_reduce(&complex);
            let modulus = build_block(&coefficients(&sys, &p.modulus(), &q, &omega, 0, last)?, 0, last)?;
            let e1 = eigenvalues(&reduced, 1e-13)?.values;
            let e2 = eigenvalues(&modulus, 1e-13)?.values;
            let max_eig_diff = e1.iter().zip(&e2).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            let lam = reduced.phases();
            let conjugation_residual = complex
                .offdiag()
                .iter()
                .enumerate()
                .map(|(j, a)| (lam[j].conj() * a * lam[j + 1] - a.norm()).norm())
                .fold(0.0, f64::max);
            let alpha = match &sys {
                SystemSpec::AffineTorus { shift, .. } => shift[0],
                _ => unreachable!(),
            };
            Ok(GaugeCase { case, alpha, max_eig_diff, conjugation_residual })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockIdsPoint {
    #[serde(rename = "E")]
    pub energy: f64,
    pub block_route: f64,
    pub truncation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockPair {
    pub block: usize,
    pub size: usize,
    #[serde(rename = "E")]
    pub energy: f64,
    pub flips: usize,
    pub eig_above: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlocksReport {
    pub window: usize,
    pub zeros: usize,
    pub complete_blocks: usize,
    pub ids: Vec<BlockIdsPoint>,
    pub sup_difference: f64,
    pub pairs: Vec<BlockPair>,
    pub pairs_equal: usize,
    /// Sites `n_r + 1` right after a zero checked for `E^u = span(e₁)`.
    pub sections_checked: usize,
    pub sections_exact: usize,
}

/// Block-route IDS, per-block sign flips and the unstable section after
/// each zero, for a config whose `p` vanishes on an interval.
pub fn blocks_suite(cfg: &ExperimentConfig, dos: &DosEstimate) -> Result<BlocksReport> {
    let window = cfg.checks.window;
    let omega = cfg.system.sample_points(cfg.seed, 1).remove(0);
    let co = coefficients(&cfg.system, &cfg.p, &cfg.q, &omega, 0, window as i64 - 1)?.modulus();
    let decomp = split_blocks(&co)?;
    let complete: Vec<_> = decomp.complete_blocks().collect();
    if complete.is_empty() {
        return Err(Error::PreconditionViolated("p has no two zeros along the window".into()));
    }

    let (lo, hi) = dos.range();
    let count = cfg.checks.grid_points;
    let mut ids = Vec::with_capacity(count);
    for i in 0..count {
        let mut e = lo - 0.1 + (hi - lo + 0.2) * i as f64 / (count - 1) as f64;
        // Nudge off block eigenvalues; the truncation IDS moves by far less.
        let block_route = loop {
            match block_route_ids(&decomp, e) {
                Err(Error::EnergyTooCloseToBlockSpectrum { .. }) => e += 1e-7,
                other => break other?,
            }
        };
        ids.push(BlockIdsPoint { energy: e, block_route, truncation: ids_eval(dos, e) });
    }
    let sup_difference = ids.iter().map(|p| (p.block_route - p.truncation).abs()).fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_b10c);
    let mut pairs = Vec::with_capacity(cfg.checks.pairs);
    while pairs.len() < cfg.checks.pairs {
        let r = rng.gen_range(0..complete.len());
        let block = &complete[r].block;
        let e = rng.gen_range(lo - 0.5..hi + 0.5);
        if !clear_of_spectrum(block, e, PROBE_GAP)? {
            continue;
        }
        let flips = block_sign_flips(block, e)?;
        let eig_above = block.size() - sturm_count(block, e)?;
        pairs.push(BlockPair { block: r, size: block.size(), energy: e, flips, eig_above });
    }
    let pairs_equal = pairs.iter().filter(|p| p.flips == p.eig_above).count();

    // E^u at T^{n_r+1}ω: both the section routine and a plain product of
    // transfer matrices ending at the zero.
    let depth = 64i64;
    let energies = [lo - 0.05, 0.5 * (lo + hi), hi + 0.05];
    let mut sections_checked = 0;
    let mut sections_exact = 0;
    for &z in decomp.singular.iter().filter(|&&z| z > depth).take(200) {
        let pt = cfg.system.iterate(&omega, z + 1)?;
        for &e in &energies {
            sections_checked += 1;
            let s = unstable_section(e, &cfg.system, &cfg.p, &cfg.q, &pt, depth as usize)?;
            let m = product(e, &co, z - depth, depth as usize + 1).value();
            let v = [0.54 * m.a + 0.84 * m.b, 0.54 * m.c + 0.84 * m.d];
            if s.direction.theta == 0.0 && m.c == Complex64::new(0.0, 0.0) && m.d == m.c && v[0].re != 0.0 {
                sections_exact += 1;
            }
        }
    }
    Ok(BlocksReport {
        window,
        zeros: decomp.singular.len(),
        complete_blocks: complete.len(),
        ids,
        sup_difference,
        pairs,
        pairs_equal,
        sections_checked,
        sections_exact,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SolenoidReport {
    pub lambda: f64,
    pub orbit_len: usize,
    pub orbits: usize,
    pub orbits_identical: usize,
    pub dos_bytes: usize,
    pub dos_identical: bool,
    pub connectedness: Option<ConnectednessVerdict>,
    /// Set when no verdict applies.
    pub theory_open: Option<String>,
    pub gaps: Vec<crate::ids::Gap>,
}

/// Coefficients and DOS through the solenoid against the doubling map, and
/// the connectedness verdict for the doubling map.
pub fn solenoid_suite(cfg: &ExperimentConfig) -> Result<(SolenoidReport, DosEstimate)> {
    let SystemSpec::Doubling { multiplier: 2 } = cfg.system else {
        return Err(Error::Config { pointer: "/system".into(), message: "verify-solenoid needs the doubling map with m = 2".into() });
    };
    let lambda = cfg.checks.solenoid_lambda;
    let sol = SystemSpec::solenoid(lambda)?;
    let last = cfg.checks.orbit_len as i64 - 1;
    let points = sol.sample_points(cfg.seed, cfg.samples);
    let mut orbits_identical = 0;
    for pt in &points {
        let circle = pt.project_to_circle().expect("solenoid point");
        let a = coefficients(&sol, &cfg.p, &cfg.q, pt, 0, last)?;
        let b = coefficients(&cfg.system, &cfg.p, &cfg.q, &circle, 0, last)?;
        let same = a.a.iter().zip(&b.a).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits())
            && a.b.iter().zip(&b.b).all(|(x, y)| x.to_bits() == y.to_bits());
        orbits_identical += usize::from(same);
    }
    let dos_sol = dos_estimate_with(&sol, &cfg.p, &cfg.q, cfg.seed, cfg.samples, cfg.n, cfg.eig_tol)?;
    let dos_dbl = dos_estimate_with(&cfg.system, &cfg.p, &cfg.q, cfg.seed, cfg.samples, cfg.n, cfg.eig_tol)?;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    dos_sol.write_csv(&mut x)?;
    dos_dbl.write_csv(&mut y)?;
    let gaps = detect_gaps(&dos_dbl, &cfg.gaps)?;
    let group = LabelGroup::for_system(&cfg.system, &cfg.p)?;
    let (connectedness, theory_open) = match connectedness_verdict(&gaps, &group, cfg.gaps.min_width) {
        Ok(v) => (Some(v), None),
        Err(Error::PreconditionViolated(why)) => (None, Some(why)),
        Err(e) => return Err(e),
    };
    let report = SolenoidReport {
        lambda,
        orbit_len: cfg.checks.orbit_len,
        orbits: points.len(),
        orbits_identical,
        dos_bytes: x.len(),
        dos_identical: x == y,
        connectedness,
        theory_open,
        gaps,
    };
    Ok((report, dos_dbl))
}
