//! Density of states from truncated operators, the integrated density of
//! states, numerical spectra and gap detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::dynamics::{periodic_orbits, PeriodicSearch, SystemSpec};
use crate::error::{Error, Result};
use crate::sampling::{coefficients, SamplingFn};
use crate::tridiag::{build_block, eigenvalues, gauge_reduce};

/// Bisection width used for DOS atoms unless overridden.
pub const DEFAULT_EIG_TOL: f64 = 1e-11;

/// How a [`DosEstimate`] was produced; kept so it can be recomputed at a
/// larger truncation size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DosMeta {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "S")]
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub system: SystemSpec,
    pub p: SamplingFn,
    pub q: SamplingFn,
}

/// Weighted eigenvalue atoms, sorted by value.
#[derive(Clone, Debug, PartialEq)]
pub struct DosEstimate {
    values: Vec<f64>,
    weights: Vec<f64>,
    /// `cumulative[i]` = total weight of the first `i` atoms.
    cumulative: Vec<f64>,
    meta: Option<DosMeta>,
}

impl DosEstimate {
    /// Builds an estimate from raw atoms; weights are normalised to sum 1.
    pub fn from_atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("no atoms".into()));
        }
        if atoms.iter().any(|(v, w)| !v.is_finite() || !(*w > 0.0)) {
            return Err(Error::InvalidParameter("atoms need finite values and positive weights".into()));
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let (values, weights) = atoms.into_iter().map(|(v, w)| (v, w / total)).unzip();
        Ok(Self::assemble(values, weights, None))
    }

    fn assemble(values: Vec<f64>, weights: Vec<f64>, meta: Option<DosMeta>) -> Self {
        let mut cumulative = Vec::with_capacity(weights.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        Self { values, weights, cumulative, meta }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn meta(&self) -> Option<&DosMeta> {
        self.meta.as_ref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    /// Smallest and largest atom.
    pub fn range(&self) -> (f64, f64) {
        (self.values[0], self.values[self.values.len() - 1])
    }

    /// Rows `value, weight`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["value", "weight"])?;
        for (v, x) in self.values.iter().zip(&self.weights) {
            w.write_record([v.to_string(), x.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> DosSummary {
        let (min, max) = self.range();
        DosSummary { atoms: self.len(), min, max, total_weight: self.total_weight(), meta: self.meta.clone() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DosSummary {
    pub atoms: usize,
    pub min: f64,
    pub max: f64,
    pub total_weight: f64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub meta: Option<DosMeta>,
}

pub fn dos_estimate(
    sys: &SystemSpec,
    p: &SamplingFn,
    q: &SamplingFn,
    seed: u64,
    samples: usize,
    n: usize,
) -> Result<DosEstimate> {
    dos_estimate_with(sys, p, q, seed, samples, n, DEFAULT_EIG_TOL)
}

/// For each of `samples` points `ω`, the eigenvalues of the gauge-reduced
/// `N×N` truncation on `[0, N)`, each with weight `1/(S·N)`.
pub fn dos_estimate_with(
    sys: &SystemSpec,
    p: &SamplingFn,
    q: &SamplingFn,
    seed: u64,
    samples: usize,
    n: usize,
    tol: f64,
) -> Result<DosEstimate> {
    if samples == 0 || n == 0 {
        return Err(Error::InvalidParameter("need at least one sample and N ≥ 1".into()));
    }
    let points = sys.sample_points(seed, samples);
    let per_sample: Vec<Vec<f64>> = points
        .par_iter()
        .map(|omega| {
            let co = coefficients(sys, p, q, omega, 0, n as i64 - 1)?;
            let block = gauge_reduce(&build_block(&co, 0, n as i64 - 1)?);
            Ok(eigenvalues(&block, tol)?.values)
        })
        .collect::<Result<_>>()?;
    let mut values: Vec<f64> = per_sample.into_iter().flatten().collect();
    values.sort_by(f64::total_cmp);
    let w = 1.0 / (samples as f64 * n as f64);
    let weights = vec![w; values.len()];
    let meta = DosMeta { n, samples, seed, tol, system: sys.clone(), p: p.clone(), q: q.clone() };
    Ok(DosEstimate::assemble(values, weights, Some(meta)))
}

/// Weight of the atoms `≤ E`.
pub fn ids_eval(dos: &DosEstimate, e: f64) -> f64 {
    let i = dos.values.partition_point(|&v| v <= e);
    dos.cumulative[i]
}

/// `(E, k(E))` rows for plotting.
pub fn write_ids_csv<W: Write>(dos: &DosEstimate, energies: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["E", "k"])?;
    for &e in energies {
        w.write_record([e.to_string(), ids_eval(dos, e).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// IDS of the free operator, `1 − arccos(E/2)/π` on `[−2, 2]`.
pub fn free_ids(e: f64) -> f64 {
    if e <= -2.0 {
        0.0
    } else if e >= 2.0 {
        1.0
    } else {
        1.0 - (e / 2.0).acos() / std::f64::consts::PI
    }
}

/// A closed interval with the number of atoms it was built from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub lo: f64,
    pub hi: f64,
    pub atoms: usize,
}

fn clusters(dos: &DosEstimate, delta: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    for &v in &dos.values {
        match out.last_mut() {
            Some(c) if v - delta <= c.hi => {
                c.hi = v + delta;
                c.atoms += 1;
            }
            _ => out.push(Cluster { lo: v - delta, hi: v + delta, atoms: 1 }),
        }
    }
    out
}

/// Union of the `δ`-neighbourhoods of all atoms, as disjoint closed intervals.
pub fn spectrum_approx(dos: &DosEstimate, delta: f64) -> Result<Vec<(f64, f64)>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("resolution must be positive, got {delta}")));
    }
    Ok(clusters(dos, delta).into_iter().map(|c| (c.lo, c.hi)).collect())
}

/// Like [`spectrum_approx`], keeping only intervals built from at least
/// `min_atoms` atoms. Truncating to `[0, N)` adds boundary eigenvalues that
/// wander into gaps and differ from sample to sample; they show up as
/// sparse isolated atoms, while genuine spectrum collects atoms from every
/// sample.
pub fn filtered_support(dos: &DosEstimate, delta: f64, min_atoms: usize) -> Result<Vec<Cluster>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("resolution must be positive, got {delta}")));
    }
    Ok(clusters(dos, delta).into_iter().filter(|c| c.atoms >= min_atoms).collect())
}

/// Distance from `e` to a set of intervals (0 inside).
pub fn distance_to(intervals: &[(f64, f64)], e: f64) -> f64 {
    intervals
        .iter()
        .map(|&(lo, hi)| if e < lo { lo - e } else if e > hi { e - hi } else { 0.0 })
        .fold(f64::INFINITY, f64::min)
}

/// `Some(true)` inside the intervals, `Some(false)` outside, `None` within
/// `collar` of an endpoint.
pub fn classify_energy(intervals: &[(f64, f64)], e: f64, collar: f64) -> Option<bool> {
    let near_edge = intervals.iter().any(|&(lo, hi)| (e - lo).abs() <= collar || (e - hi).abs() <= collar);
    (!near_edge).then(|| distance_to(intervals, e) == 0.0)
}

/// A bounded component of the complement of the numerical spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
    pub label: f64,
    pub width: f64,
}

impl Gap {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapOptions {
    /// Fattening radius of each atom.
    pub delta: f64,
    /// Gaps narrower than this are ignored; must exceed `2δ`.
    pub min_width: f64,
    /// Spectral clusters with fewer atoms are treated as truncation
    /// artifacts. `None` means half the sample count, at least 2.
    pub min_cluster_atoms: Option<usize>,
    /// Recompute at `2N` and keep only gaps whose midpoint (±δ) stays clear.
    pub stability: bool,
    /// Remove the parts of each gap covered by the spectrum of a periodic
    /// orbit of the base map (see [`PeriodicWitness`]).
    pub periodic: Option<PeriodicSearch>,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self {
            delta: 1e-3,
            min_width: 1e-2,
            min_cluster_atoms: None,
            stability: true,
            periodic: Some(PeriodicSearch::default()),
        }
    }
}

impl GapOptions {
    pub fn cluster_threshold(&self, samples: usize) -> usize {
        self.min_cluster_atoms.unwrap_or_else(|| (samples / 2).max(2))
    }
}

/// Interior gaps of width `> min_width`, each labelled by the IDS at its
/// midpoint, in increasing order of energy.
pub fn detect_gaps(dos: &DosEstimate, opts: &GapOptions) -> Result<Vec<Gap>> {
    if !(opts.min_width > 2.0 * opts.delta) {
        return Err(Error::InvalidParameter(format!(
            "min_width {} must exceed 2δ = {}",
            opts.min_width,
            2.0 * opts.delta
        )));
    }
    let samples = dos.meta.as_ref().map_or(1, |m| m.samples);
    let support = filtered_support(dos, opts.delta, opts.cluster_threshold(samples))?;
    let mut gaps: Vec<Gap> = support
        .windows(2)
        .filter_map(|w| {
            let (lo, hi) = (w[0].hi, w[1].lo);
            (hi - lo > opts.min_width).then(|| {
                let label = ids_eval(dos, 0.5 * (lo + hi));
                Gap { lo, hi, label, width: hi - lo }
            })
        })
        .collect();
    if opts.stability && !gaps.is_empty() {
        let meta = dos.meta.as_ref().ok_or_else(|| {
            Error::PreconditionViolated("stability filter needs an estimate produced by dos_estimate".into())
        })?;
        let doubled = dos_estimate_with(&meta.system, &meta.p, &meta.q, meta.seed, meta.samples, 2 * meta.n, meta.tol)?;
        let support2: Vec<(f64, f64)> = filtered_support(&doubled, opts.delta, opts.cluster_threshold(samples))?
            .into_iter()
            .map(|c| (c.lo, c.hi))
            .collect();
        gaps.retain(|g| distance_to(&support2, g.midpoint()) > opts.delta);
    }
    if let (Some(search), Some(meta)) = (&opts.periodic, &dos.meta) {
        if !gaps.is_empty() {
            let witness = PeriodicWitness::new(&meta.system, &meta.p, &meta.q, search);
            gaps = gaps
                .iter()
                .flat_map(|g| witness.uncovered(g, opts.min_width))
                .map(|(lo, hi)| Gap { lo, hi, label: ids_eval(dos, 0.5 * (lo + hi)), width: hi - lo })
                .collect();
        }
    }
    Ok(gaps)
}

/// Probes per gap used by [`PeriodicWitness::uncovered`].
const WITNESS_PROBES: usize = 64;

/// Spectra of periodic operators. If `ω₀` is periodic, `J_{ω₀}` is a strong
/// limit of translates of `J_ω` for every `ω` with a dense orbit, so its
/// spectrum lies inside the almost sure spectrum. Near periodic orbits the
/// density of states can be exponentially small, and sampled truncations
/// then show stable pseudo-gaps that these spectra expose.
pub struct PeriodicWitness {
    /// `(|p|, q)` along each cycle on which `p` does not vanish.
    cycles: Vec<(Vec<f64>, Vec<f64>)>,
}

impl PeriodicWitness {
    pub fn new(sys: &SystemSpec, p: &SamplingFn, q: &SamplingFn, search: &PeriodicSearch) -> Self {
        let cycles = periodic_orbits(sys, search)
            .into_iter()
            .map(|cycle| {
                let a: Vec<f64> = cycle.iter().map(|x| p.eval_at(x).norm()).collect();
                let b: Vec<f64> = cycle.iter().map(|x| q.eval_at(x).re).collect();
                (a, b)
            })
            .filter(|(a, _)| a.iter().all(|&x| x > 0.0))
            .collect();
        Self { cycles }
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles.len()
    }

    /// Whether `E` is in the spectrum of some periodic operator: the
    /// normalised monodromy over one period has `|tr| ≤ 2`.
    pub fn covers(&self, e: f64) -> bool {
        self.cycles.iter().any(|(a, b)| {
            let period = a.len();
            let (mut m00, mut m01, mut m10, mut m11) = (1.0f64, 0.0f64, 0.0f64, 1.0f64);
            for n in 0..period {
                let prev = a[(n + period - 1) % period];
                // (1/a(n)) [[E − b(n), −a(n−1)], [a(n), 0]] applied on the left
                let (x00, x01, x10) = ((e - b[n]) / a[n], -prev / a[n], 1.0);
                let (n00, n01) = (x00 * m00 + x01 * m10, x00 * m01 + x01 * m11);
                let (n10, n11) = (x10 * m00, x10 * m01);
                m00 = n00;
                m01 = n01;
                m10 = n10;
                m11 = n11;
            }
            (m00 + m11).abs() <= 2.0
        })
    }

    /// The parts of `gap` free of periodic spectra (probed on a grid),
    /// keeping those wider than `min_width`.
    pub fn uncovered(&self, gap: &Gap, min_width: f64) -> Vec<(f64, f64)> {
        let h = gap.width / WITNESS_PROBES as f64;
        let covered: Vec<bool> =
            (0..WITNESS_PROBES).map(|i| self.covers(gap.lo + (i as f64 + 0.5) * h)).collect();
        if !covered.contains(&true) {
            return vec![(gap.lo, gap.hi)];
        }
        let mut out = Vec::new();
        let mut i = 0;
        while i < WITNESS_PROBES {
            if covered[i] {
                i += 1;
                continue;
            }
            let j = (i..WITNESS_PROBES).find(|&j| covered[j]).unwrap_or(WITNESS_PROBES);
            let lo = if i == 0 { gap.lo } else { gap.lo + i as f64 * h };
            let hi = if j == WITNESS_PROBES { gap.hi } else { gap.lo + j as f64 * h };
            if hi - lo > min_width {
                out.push((lo, hi));
            }
            i = j;
        }
        out
    }
}

/// The `k` widest gaps, widest first.
pub fn widest(gaps: &[Gap], k: usize) -> Vec<Gap> {
    let mut g = gaps.to_vec();
    g.sort_by(|a, b| b.width.total_cmp(&a.width));
    g.truncate(k);
    g
}
