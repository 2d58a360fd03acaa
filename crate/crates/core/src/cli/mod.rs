//! The `gaplab` command line: experiment configs in, CSV/JSON/SVG
//! artifacts and a run report out.
//!
//! Exit codes: 0 success, 1 verification failure or runtime error, 2
//! config or usage error.

pub mod config;
pub mod plot;
pub mod verify;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub use config::{EnergyGrid, ExperimentConfig};

use crate::cocycle::{ds_sweep, rotation_number, DsStatus};
use crate::dynamics::{PhasePoint, SamplerConfig, SystemSpec};
use crate::error::{Error, Result};
use crate::ids::{
    classify_energy, detect_gaps, dos_estimate_with, free_ids, ids_eval, spectrum_approx, DosEstimate, Gap,
};
use crate::labelling::{connectedness_verdict, verify_gap_labels, GroupOrigin};
use crate::sampling::PostMap;
use plot::{line_plot, Series};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerance on the free-operator IDS noted by `ids` and `report`.
pub const FREE_IDS_TOL: f64 = 2e-3;

#[derive(Parser, Debug)]
#[command(name = "gaplab", version, about = "Spectra, IDS and gap labels of ergodic Jacobi matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(short = 'c', long = "config", global = true)]
    config: Option<PathBuf>,
    /// Truncation size N.
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Energy grid as lo:hi:count.
    #[arg(long = "E-grid", global = true, allow_hyphen_values = true)]
    e_grid: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "gaplab-out")]
    out: PathBuf,
    /// Number of random cases for verification suites.
    #[arg(long, global = true)]
    cases: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Eigenvalue atoms and the δ-approximate spectrum.
    Spectrum,
    /// Integrated density of states on the energy grid.
    Ids,
    /// Interior gaps with their IDS labels.
    Gaps,
    /// Gaps matched against the label group, with a connectedness verdict
    /// where labels must be integers.
    Labels,
    /// Rotation number on the energy grid.
    Rotation,
    /// Dominated-splitting verdicts on the energy grid.
    DsSweep,
    /// Oscillation theorem on random blocks.
    VerifyOscillation,
    /// Spectra of complex-p truncations against their gauge reductions.
    VerifyGauge,
    /// Block decomposition checks for p vanishing on an interval.
    VerifyBlocks,
    /// Solenoid against doubling-map coefficients and DOS.
    VerifySolenoid,
    /// Spectrum, IDS, gaps, labels and verdicts in one run.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Ids => "ids",
            Command::Gaps => "gaps",
            Command::Labels => "labels",
            Command::Rotation => "rotation",
            Command::DsSweep => "ds-sweep",
            Command::VerifyOscillation => "verify-oscillation",
            Command::VerifyGauge => "verify-gauge",
            Command::VerifyBlocks => "verify-blocks",
            Command::VerifySolenoid => "verify-solenoid",
            Command::Report => "report",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub results: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub passed: bool,
}

struct Run {
    dir: PathBuf,
    report: RunReport,
}

impl Run {
    fn new(command: Command, dir: &Path, config: Value) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            report: RunReport {
                command: command.name().into(),
                version: VERSION.into(),
                config,
                results: BTreeMap::new(),
                checks: Vec::new(),
                artifacts: Vec::new(),
                timings: BTreeMap::new(),
                passed: true,
            },
        })
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f()?;
        *self.report.timings.entry(stage.into()).or_default() += t.elapsed().as_secs_f64();
        Ok(out)
    }

    fn result(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.report.results.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    fn check(&mut self, name: &str, value: f64, threshold: impl Into<String>, pass: bool) {
        self.report.passed &= pass;
        self.report.checks.push(Check { name: name.into(), value, threshold: threshold.into(), pass });
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.report.artifacts.push(name.into());
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.write(name, &bytes)
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn finish(mut self) -> Result<bool> {
        self.report.artifacts.push("report.json".into());
        let mut text = serde_json::to_string_pretty(&self.report)?;
        text.push('\n');
        std::fs::write(self.dir.join("report.json"), text)?;
        for c in &self.report.checks {
            println!("{} {}: {} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
        }
        println!("{}: {} -> {}", self.report.command, if self.report.passed { "ok" } else { "FAILED" }, self.dir.display());
        Ok(self.report.passed)
    }
}

fn s(x: impl ToString) -> String {
    x.to_string()
}

fn needs_config(cli: &Cli, preset: Option<&str>) -> Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::preset(name).expect("known preset"),
        (None, None) => {
            return Err(Error::Config { pointer: String::new(), message: "this command needs a config (-c FILE)".into() })
        }
    };
    if let Some(n) = cli.n {
        cfg.n = n;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(g) = &cli.e_grid {
        cfg.energy_grid = Some(EnergyGrid::parse(g)?);
    }
    if let Some(cases) = cli.cases {
        cfg.checks.pairs = cases;
    }
    cfg.validate()?;
    cfg.resolve()?;
    Ok(cfg)
}

/// `p ≡ 1`, `q ≡ 0`.
pub fn is_free(cfg: &ExperimentConfig) -> bool {
    let unit = cfg.p.post() == PostMap::Identity
        && cfg.p.base().terms().all(|(k, c)| {
            let zero = k.iter().all(|&x| x == 0);
            (zero && c.re == 1.0 && c.im == 0.0) || (!zero && c.norm() == 0.0)
        })
        && cfg.p.base().terms().count() > 0;
    unit && cfg.q.post() == PostMap::Identity && cfg.q.base().l1_norm() == 0.0
}

fn dos_stage(run: &mut Run, cfg: &ExperimentConfig) -> Result<DosEstimate> {
    let dos = run.timed("dos", || dos_estimate_with(&cfg.system, &cfg.p, &cfg.q, cfg.seed, cfg.samples, cfg.n, cfg.eig_tol))?;
    run.result("dos", dos.summary())?;
    let mut bytes = Vec::new();
    dos.write_csv(&mut bytes)?;
    run.write("dos.csv", &bytes)?;
    Ok(dos)
}

fn ids_stage(run: &mut Run, cfg: &ExperimentConfig, dos: &DosEstimate) -> Result<()> {
    let grid = cfg.grid();
    let k: Vec<f64> = grid.iter().map(|&e| ids_eval(dos, e)).collect();
    run.csv("ids.csv", &["E", "k"], grid.iter().zip(&k).map(|(e, k)| vec![s(e), s(k)]))?;
    let mut series = vec![Series { name: "k(E)", points: grid.iter().copied().zip(k.iter().copied()).collect() }];
    if is_free(cfg) {
        let exact: Vec<(f64, f64)> = grid.iter().map(|&e| (e, free_ids(e))).collect();
        let err = exact.iter().zip(&k).map(|((_, x), y)| (x - y).abs()).fold(0.0, f64::max);
        run.result("free_ids_sup_error", err)?;
        run.check("free_ids_sup_error", err, format!("<= {FREE_IDS_TOL}"), err <= FREE_IDS_TOL);
        series.push(Series { name: "1 - arccos(E/2)/pi", points: exact });
    }
    let title = format!("IDS, N = {}, S = {}", cfg.n, cfg.samples);
    run.write("ids.svg", line_plot(&title, "E", "k", &series).as_bytes())
}

fn gaps_stage(run: &mut Run, cfg: &ExperimentConfig, dos: &DosEstimate) -> Result<Vec<Gap>> {
    let gaps = run.timed("gaps", || detect_gaps(dos, &cfg.gaps))?;
    run.csv(
        "gaps.csv",
        &["lo", "hi", "width", "label"],
        gaps.iter().map(|g| vec![s(g.lo), s(g.hi), s(g.width), s(g.label)]),
    )?;
    run.result("gaps", &gaps)?;
    Ok(gaps)
}

fn labels_stage(run: &mut Run, cfg: &ExperimentConfig, gaps: &[Gap]) -> Result<()> {
    let group = cfg.label_group()?;
    let tol = cfg.label_tol();
    let (reports, summary) = run.timed("labels", || verify_gap_labels(gaps, &group, tol))?;
    run.json("labels.json", &reports)?;
    run.csv(
        "labels.csv",
        &["lo", "hi", "label", "m", "n", "residual", "matched"],
        reports.iter().map(|r| {
            let m: Vec<String> = r.m.iter().map(|x| x.to_string()).collect();
            vec![s(r.gap[0]), s(r.gap[1]), s(r.label), m.join(" "), s(r.n), s(r.residual), s(r.matched)]
        }),
    )?;
    run.result("label_group", &group)?;
    run.result("label_summary", &summary)?;
    if group.origin == GroupOrigin::TheoryOpen {
        run.result("verdict", "theory open: p vanishes somewhere, no label group is known; labels reported without a verdict")?;
        return Ok(());
    }
    run.check("labels_matched", summary.matched as f64, format!("= {} gaps", summary.gaps), summary.unmatched == 0);
    if group.is_integer_only() {
        let v = connectedness_verdict(gaps, &group, cfg.gaps.min_width)?;
        let statement = format!("{} at resolution (N = {}, delta = {}, min_width = {})", v.statement, cfg.n, cfg.gaps.delta, cfg.gaps.min_width);
        run.check("connected", v.offending.len() as f64, "= 0 offending gaps", v.connected);
        run.result("verdict", statement)?;
        run.result("connectedness", v)?;
    }
    Ok(())
}

/// A sample point resolved far enough for `t_max` forward steps.
fn rotation_point(cfg: &ExperimentConfig) -> PhasePoint {
    let bits = match cfg.system {
        SystemSpec::Doubling { multiplier } => {
            (cfg.rotation.t_max + 64) * (32 - multiplier.leading_zeros()) as usize + 64
        }
        SystemSpec::Solenoid { .. } => cfg.rotation.t_max + 128,
        SystemSpec::AffineTorus { .. } => 64,
    };
    let sampler = SamplerConfig { angle_bits: bits.max(SamplerConfig::default().angle_bits), ..SamplerConfig::default() };
    cfg.system.sample_points_with(cfg.seed, 1, &sampler).remove(0)
}

fn rotation_at(cfg: &ExperimentConfig, omega: &PhasePoint, energies: &[f64]) -> Vec<Result<f64>> {
    energies
        .par_iter()
        .map(|&e| rotation_number(e, &cfg.system, &cfg.p, &cfg.q, omega, cfg.rotation.t_max))
        .collect()
}

fn rotation_cmd(run: &mut Run, cfg: &ExperimentConfig) -> Result<()> {
    let grid = cfg.grid();
    let omega = rotation_point(cfg);
    let rho = run.timed("rotation", || Ok(rotation_at(cfg, &omega, &grid)))?;
    let failed = rho.iter().filter(|r| r.is_err()).count();
    run.csv(
        "rotation.csv",
        &["E", "rotation", "error"],
        grid.iter().zip(&rho).map(|(e, r)| match r {
            Ok(x) => vec![s(e), s(x), String::new()],
            Err(err) => vec![s(e), String::new(), err.to_string()],
        }),
    )?;
    let pts = grid.iter().zip(&rho).map(|(&e, r)| (e, *r.as_ref().unwrap_or(&f64::NAN))).collect();
    let svg = line_plot("rotation number", "E", "rotation", &[Series { name: "rotation", points: pts }]);
    run.write("rotation.svg", svg.as_bytes())?;
    run.result("energies_without_value", failed)
}

fn ds_cmd(run: &mut Run, cfg: &ExperimentConfig) -> Result<()> {
    let grid = cfg.grid();
    let verdicts = run.timed("ds", || ds_sweep(&grid, &cfg.system, &cfg.p, &cfg.q, &cfg.ds))?;
    let dos = dos_stage(run, cfg)?;
    let delta = cfg.checks.ds_delta;
    let intervals = spectrum_approx(&dos, delta)?;
    let mut scored = 0usize;
    let mut agree = 0usize;
    let mut rows = Vec::with_capacity(grid.len());
    for v in &verdicts {
        let class = classify_energy(&intervals, v.energy, 2.0 * delta);
        let ok = class.map(|in_spec| in_spec != v.is_dominated());
        scored += usize::from(ok.is_some());
        agree += usize::from(ok == Some(true));
        let (status, rho, min_ratio, min_angle) = match &v.status {
            DsStatus::Dominated { rho, .. } => ("dominated", s(rho), String::new(), String::new()),
            DsStatus::NotDominated { .. } => ("not_dominated", String::new(), String::new(), String::new()),
            DsStatus::Inconclusive { min_ratio, min_angle } => ("inconclusive", String::new(), s(min_ratio), s(min_angle)),
        };
        let class = match class {
            Some(true) => "spectrum",
            Some(false) => "gap",
            None => "collar",
        };
        let ok = ok.map(s).unwrap_or_default();
        rows.push(vec![s(v.energy), status.into(), rho, min_ratio, min_angle, class.into(), ok]);
    }
    run.csv("ds.csv", &["E", "status", "rho", "min_ratio", "min_angle", "class", "agree"], rows)?;
    run.json("ds.json", &verdicts)?;
    let frac = if scored == 0 { 0.0 } else { agree as f64 / scored as f64 };
    run.result("scored", scored)?;
    run.result("agreeing", agree)?;
    run.check("ds_agreement", frac, ">= 0.95", frac >= 0.95);
    let dom: Vec<(f64, f64)> = verdicts.iter().map(|v| (v.energy, f64::from(u8::from(v.is_dominated())))).collect();
    let gap: Vec<(f64, f64)> =
        grid.iter().map(|&e| (e, if distance_gap(&intervals, e) { 0.5 } else { 0.0 })).collect();
    let svg = line_plot(
        "dominated splitting",
        "E",
        "indicator",
        &[Series { name: "dominated", points: dom }, Series { name: "outside spectrum (0.5)", points: gap }],
    );
    run.write("ds.svg", svg.as_bytes())
}

fn distance_gap(intervals: &[(f64, f64)], e: f64) -> bool {
    crate::ids::distance_to(intervals, e) > 0.0
}

fn duality_stage(run: &mut Run, cfg: &ExperimentConfig, dos: &DosEstimate, gaps: &[Gap]) -> Result<()> {
    if gaps.is_empty() {
        return Ok(());
    }
    let omega = rotation_point(cfg);
    let mids: Vec<f64> = gaps.iter().map(Gap::midpoint).collect();
    let rho = run.timed("rotation", || Ok(rotation_at(cfg, &omega, &mids)))?;
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for (e, r) in mids.iter().zip(rho) {
        let k = ids_eval(dos, *e);
        let r = r?;
        worst = worst.max((r - (1.0 - k)).abs());
        rows.push(vec![s(e), s(k), s(r), s((r - (1.0 - k)).abs())]);
    }
    run.csv("duality.csv", &["E", "k", "rotation", "difference"], rows)?;
    run.check("rotation_ids_duality", worst, "<= 1e-2", worst <= 1e-2);
    Ok(())
}

fn spectrum_plot(run: &mut Run, cfg: &ExperimentConfig, dos: &DosEstimate) -> Result<()> {
    let intervals = spectrum_approx(dos, cfg.gaps.delta)?;
    run.csv("spectrum.csv", &["lo", "hi"], intervals.iter().map(|(a, b)| vec![s(a), s(b)]))?;
    run.result("intervals", intervals.len())?;
    let grid = cfg.grid();
    let pts = grid.iter().map(|&e| (e, ids_eval(dos, e))).collect();
    let svg = line_plot("IDS", "E", "k", &[Series { name: "k(E)", points: pts }]);
    run.write("spectrum.svg", svg.as_bytes())
}

fn suite_config(seed: u64, cases: usize, n: Option<usize>) -> Value {
    let mut v = json!({ "seed": seed, "cases": cases });
    if let Some(n) = n {
        v["N"] = n.into();
    }
    v
}

fn dispatch(cli: &Cli) -> Result<bool> {
    let out = cli.out.as_path();
    match cli.command {
        Command::VerifyOscillation => {
            let (seed, cases) = (cli.seed.unwrap_or(0), cli.cases.unwrap_or(200));
            let mut run = Run::new(cli.command, out, suite_config(seed, cases, None))?;
            let rows = run.timed("suite", || verify::oscillation_suite(seed, cases))?;
            run.csv(
                "oscillation.csv",
                &["case", "m", "E", "F", "eig_above", "equal", "F_t0.1", "F_t1", "F_t10"],
                rows.iter().map(|r| {
                    vec![s(r.case), s(r.m), s(r.energy), s(r.zeros), s(r.eig_above), s(r.equal), s(r.trailing[0]), s(r.trailing[1]), s(r.trailing[2])]
                }),
            )?;
            let equal = rows.iter().filter(|r| r.equal).count();
            let consistent = rows.iter().filter(|r| r.trailing_consistent()).count();
            run.result("equalities", format!("{equal}/{cases}"))?;
            run.check("oscillation_exact", equal as f64, format!("= {cases}"), equal == cases);
            run.check("trailing_independent", consistent as f64, format!("= {cases}"), consistent == cases);
            run.finish()
        }
        Command::VerifyGauge => {
            let (seed, cases, n) = (cli.seed.unwrap_or(0), cli.cases.unwrap_or(100), cli.n.unwrap_or(50));
            let mut run = Run::new(cli.command, out, suite_config(seed, cases, Some(n)))?;
            let rows = run.timed("suite", || verify::gauge_suite(seed, cases, n))?;
            run.csv(
                "gauge.csv",
                &["case", "alpha", "max_eig_diff", "conjugation_residual"],
                rows.iter().map(|r| vec![s(r.case), s(r.alpha), s(r.max_eig_diff), s(r.conjugation_residual)]),
            )?;
            let eig = rows.iter().map(|r| r.max_eig_diff).fold(0.0, f64::max);
            let conj = rows.iter().map(|r| r.conjugation_residual).fold(0.0, f64::max);
            run.check("gauge_eigenvalues", eig, "<= 1e-9", eig <= 1e-9);
            run.check("gauge_conjugation", conj, "<= 1e-12", conj <= 1e-12);
            run.finish()
        }
        Command::VerifyBlocks => {
            let cfg = needs_config(cli, Some("singular"))?;
            let mut run = Run::new(cli.command, out, serde_json::to_value(&cfg)?)?;
            let dos = dos_stage(&mut run, &cfg)?;
            let rep = run.timed("blocks", || verify::blocks_suite(&cfg, &dos))?;
            run.csv(
                "blocks_ids.csv",
                &["E", "block_route", "truncation"],
                rep.ids.iter().map(|p| vec![s(p.energy), s(p.block_route), s(p.truncation)]),
            )?;
            run.csv(
                "blocks_pairs.csv",
                &["block", "size", "E", "flips", "eig_above"],
                rep.pairs.iter().map(|p| vec![s(p.block), s(p.size), s(p.energy), s(p.flips), s(p.eig_above)]),
            )?;
            let svg = line_plot(
                "block-route and truncation IDS",
                "E",
                "k",
                &[
                    Series { name: "block route", points: rep.ids.iter().map(|p| (p.energy, p.block_route)).collect() },
                    Series { name: "truncation", points: rep.ids.iter().map(|p| (p.energy, p.truncation)).collect() },
                ],
            );
            run.write("blocks.svg", svg.as_bytes())?;
            run.check("block_ids_sup_difference", rep.sup_difference, "<= 1e-2", rep.sup_difference <= 1e-2);
            run.check("block_flips_exact", rep.pairs_equal as f64, format!("= {}", rep.pairs.len()), rep.pairs_equal == rep.pairs.len());
            run.check(
                "section_after_zero_is_e1",
                rep.sections_exact as f64,
                format!("= {} > 0", rep.sections_checked),
                rep.sections_checked > 0 && rep.sections_exact == rep.sections_checked,
            );
            run.result("zeros", rep.zeros)?;
            run.result("complete_blocks", rep.complete_blocks)?;
            run.finish()
        }
        Command::VerifySolenoid => {
            let cfg = needs_config(cli, Some("doubling"))?;
            let mut run = Run::new(cli.command, out, serde_json::to_value(&cfg)?)?;
            let (rep, dos) = run.timed("suite", || verify::solenoid_suite(&cfg))?;
            let mut bytes = Vec::new();
            dos.write_csv(&mut bytes)?;
            run.write("dos.csv", &bytes)?;
            run.csv(
                "gaps.csv",
                &["lo", "hi", "width", "label"],
                rep.gaps.iter().map(|g| vec![s(g.lo), s(g.hi), s(g.width), s(g.label)]),
            )?;
            run.check("orbit_coefficients_identical", rep.orbits_identical as f64, format!("= {}", rep.orbits), rep.orbits_identical == rep.orbits);
            run.check("dos_byte_identical", f64::from(u8::from(rep.dos_identical)), "= 1", rep.dos_identical);
            if let Some(v) = &rep.connectedness {
                run.check("connected", v.offending.len() as f64, "= 0 offending gaps", v.connected);
            }
            run.result("solenoid", &rep)?;
            run.finish()
        }
        command => {
            let cfg = needs_config(cli, None)?;
            let mut run = Run::new(command, out, serde_json::to_value(&cfg)?)?;
            match command {
                Command::Spectrum => {
                    let dos = dos_stage(&mut run, &cfg)?;
                    spectrum_plot(&mut run, &cfg, &dos)?;
                }
                Command::Ids => {
                    let dos = dos_stage(&mut run, &cfg)?;
                    ids_stage(&mut run, &cfg, &dos)?;
                }
                Command::Gaps => {
                    let dos = dos_stage(&mut run, &cfg)?;
                    ids_stage(&mut run, &cfg, &dos)?;
                    gaps_stage(&mut run, &cfg, &dos)?;
                }
                Command::Labels => {
                    let dos = dos_stage(&mut run, &cfg)?;
                    let gaps = gaps_stage(&mut run, &cfg, &dos)?;
                    labels_stage(&mut run, &cfg, &gaps)?;
                }
                Command::Rotation => rotation_cmd(&mut run, &cfg)?,
                Command::DsSweep => ds_cmd(&mut run, &cfg)?,
                Command::Report => {
                    let dos = dos_stage(&mut run, &cfg)?;
                    spectrum_plot(&mut run, &cfg, &dos)?;
                    ids_stage(&mut run, &cfg, &dos)?;
                    let gaps = gaps_stage(&mut run, &cfg, &dos)?;
                    labels_stage(&mut run, &cfg, &gaps)?;
                    duality_stage(&mut run, &cfg, &dos, &gaps)?;
                }
                _ => unreachable!("handled above"),
            }
            run.finish()
        }
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config { .. }
            | Error::InvalidSystem(_)
            | Error::InvalidSampling(_)
            | Error::InvalidParameter(_)
            | Error::DimensionMismatch { .. }
            | Error::NotReal
            | Error::NonInvertible
    )
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("GAPLAB_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Error::Config {
        pointer: String::new(),
        message: format!("GAPLAB_THREADS must be a positive integer, got {v:?}"),
    })?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Run the command line and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|()| dispatch(&cli));
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if is_config_error(&e) {
                2
            } else {
                1
            }
        }
    }
}
