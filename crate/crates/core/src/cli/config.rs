//! Experiment configs: JSON schema, presets, validation and resolution of
//! every default into an explicit value.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cocycle::DsParams;
use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::ids::{GapOptions, DEFAULT_EIG_TOL};
use crate::labelling::{default_label_tol, LabelGroup};
use crate::sampling::{SamplingFn, TrigPoly};
use crate::GOLDEN;

/// Evenly spaced energies `lo..=hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl EnergyGrid {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.hi } else { self.lo + step * i as f64 }).collect()
    }

    /// `lo:hi:count`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Config { pointer: "/energy_grid".into(), message: format!("expected lo:hi:count, got {s:?}") };
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts[..] else { return Err(bad()) };
        let grid = Self {
            lo: lo.trim().parse().map_err(|_| bad())?,
            hi: hi.trim().parse().map_err(|_| bad())?,
            count: count.trim().parse().map_err(|_| bad())?,
        };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) || self.count < 2 {
            return Err(Error::Config {
                pointer: "/energy_grid".into(),
                message: "need finite lo < hi and count ≥ 2".into(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelOptions {
    /// Matching tolerance; resolves to `max(5e-3, 10/N)`.
    pub tol: Option<f64>,
    /// Coefficient box bound; resolves to the default for the kernel rank.
    pub bound: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RotationOptions {
    pub t_max: usize,
}

impl Default for RotationOptions {
    fn default() -> Self {
        Self { t_max: 10_000 }
    }
}

/// Options of the verification suites that run on a config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckOptions {
    /// Orbit window for block-route counts.
    pub window: usize,
    /// Sampled `(block, E)` pairs.
    pub pairs: usize,
    /// Energies compared between block-route and truncation IDS.
    pub grid_points: usize,
    /// Forward orbit length for the solenoid comparison.
    pub orbit_len: usize,
    /// Contraction of the solenoid disk fibre.
    pub solenoid_lambda: f64,
    /// Resolution of the spectral classification in `ds-sweep`; points
    /// within `2·ds_delta` of an edge are not scored.
    pub ds_delta: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { window: 10_000, pairs: 500, grid_points: 100, orbit_len: 1000, solenoid_lambda: 0.25, ds_delta: 0.01 }
    }
}

fn default_n() -> usize {
    2000
}

fn default_samples() -> usize {
    8
}

fn default_eig_tol() -> f64 {
    DEFAULT_EIG_TOL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub system: SystemSpec,
    pub p: SamplingFn,
    pub q: SamplingFn,
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eig_tol")]
    pub eig_tol: f64,
    #[serde(default)]
    pub energy_grid: Option<EnergyGrid>,
    #[serde(default)]
    pub gaps: GapOptions,
    #[serde(default)]
    pub labels: LabelOptions,
    #[serde(default)]
    pub rotation: RotationOptions,
    #[serde(default)]
    pub ds: DsParams,
    #[serde(default)]
    pub checks: CheckOptions,
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        let token = match seg {
            Segment::Seq { index } => index.to_string(),
            Segment::Map { key } => key.replace('~', "~0").replace('/', "~1"),
            Segment::Enum { variant } => variant.replace('~', "~0").replace('/', "~1"),
            Segment::Unknown => continue,
        };
        out.push('/');
        out.push_str(&token);
    }
    out
}

fn cfg_err(pointer: &str, message: impl Into<String>) -> Error {
    Error::Config { pointer: pointer.into(), message: message.into() }
}

impl ExperimentConfig {
    /// Parse and validate; schema errors carry the JSON pointer of the
    /// offending value.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(&mut *de)
            .map_err(|e| cfg_err(&json_pointer(e.path()), e.inner().to_string()))?;
        de.end().map_err(|e| cfg_err("", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg_err("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.system.torus_dim();
        for (name, f) in [("/p", &self.p), ("/q", &self.q)] {
            if f.dim() != dim {
                return Err(cfg_err(name, format!("sampling function has d = {}, the system has dimension {dim}", f.dim())));
            }
        }
        if !self.q.is_real() {
            return Err(cfg_err("/q", "q must be real"));
        }
        if self.n == 0 {
            return Err(cfg_err("/N", "N must be positive"));
        }
        if self.samples == 0 {
            return Err(cfg_err("/samples", "need at least one sample"));
        }
        if !(self.eig_tol > 0.0) {
            return Err(cfg_err("/eig_tol", "must be positive"));
        }
        if let Some(g) = &self.energy_grid {
            g.validate()?;
        }
        let gaps = &self.gaps;
        if !(gaps.delta > 0.0) {
            return Err(cfg_err("/gaps/delta", "must be positive"));
        }
        if !(gaps.min_width > 2.0 * gaps.delta) {
            return Err(cfg_err("/gaps/min_width", "must exceed 2·delta"));
        }
        if let Some(tol) = self.labels.tol {
            if !(tol > 0.0) {
                return Err(cfg_err("/labels/tol", "must be positive"));
            }
        }
        if matches!(self.labels.bound, Some(b) if b < 0) {
            return Err(cfg_err("/labels/bound", "must be non-negative"));
        }
        if self.rotation.t_max < 1000 {
            return Err(cfg_err("/rotation/t_max", "must be at least 1000"));
        }
        let ds = &self.ds;
        if ds.grid == 0 || ds.n_star == 0 {
            return Err(cfg_err("/ds", "grid and n_star must be positive"));
        }
        if !(ds.rho_min > 1.0) {
            return Err(cfg_err("/ds/rho_min", "must exceed 1"));
        }
        let c = &self.checks;
        if !(c.solenoid_lambda > 0.0 && c.solenoid_lambda < 0.5) {
            return Err(cfg_err("/checks/solenoid_lambda", "must lie in (0, 1/2)"));
        }
        if !(c.ds_delta > 0.0) {
            return Err(cfg_err("/checks/ds_delta", "must be positive"));
        }
        if c.window < 2 || c.grid_points < 2 {
            return Err(cfg_err("/checks", "window and grid_points must be at least 2"));
        }
        Ok(())
    }

    /// Fill every optional field with the value that will be used.
    pub fn resolve(&mut self) -> Result<()> {
        if self.energy_grid.is_none() {
            let r = spectral_radius_bound(&self.p, &self.q) + 0.1;
            self.energy_grid = Some(EnergyGrid { lo: -r, hi: r, count: 200 });
        }
        if self.labels.tol.is_none() {
            self.labels.tol = Some(default_label_tol(self.n));
        }
        if self.labels.bound.is_none() {
            self.labels.bound = Some(self.label_group_unbounded()?.bound);
        }
        Ok(())
    }

    fn label_group_unbounded(&self) -> Result<LabelGroup> {
        LabelGroup::for_system(&self.system, &self.p)
    }

    pub fn label_group(&self) -> Result<LabelGroup> {
        let g = self.label_group_unbounded()?;
        Ok(match self.labels.bound {
            Some(b) => g.with_bound(b),
            None => g,
        })
    }

    pub fn grid(&self) -> Vec<f64> {
        self.energy_grid.expect("resolved config").points()
    }

    pub fn label_tol(&self) -> f64 {
        self.labels.tol.unwrap_or_else(|| default_label_tol(self.n))
    }

    /// Built-in experiments; the files under `configs/` match these.
    pub fn preset(name: &str) -> Option<Self> {
        let one = |d| TrigPoly::constant(d, 1.0);
        let golden = SystemSpec::rotation(vec![GOLDEN]).ok()?;
        let base = |name: &str, system, p, q| Self {
            name: name.into(),
            system,
            p,
            q,
            n: default_n(),
            samples: default_samples(),
            seed: 0,
            eig_tol: DEFAULT_EIG_TOL,
            energy_grid: None,
            gaps: GapOptions::default(),
            labels: LabelOptions::default(),
            rotation: RotationOptions::default(),
            ds: DsParams::default(),
            checks: CheckOptions::default(),
        };
        let cfg = match name {
            "amo_golden" => base(
                name,
                golden,
                SamplingFn::constant(1, 1.0),
                TrigPoly::cosine(vec![1], 6.0).into(),
            ),
            "free" => Self {
                n: 5000,
                samples: 1,
                energy_grid: Some(EnergyGrid { lo: -1.9, hi: 1.9, count: 400 }),
                ..base(name, golden, SamplingFn::constant(1, 1.0), SamplingFn::constant(1, 0.0))
            },
            "cat_map" => Self {
                n: 1500,
                samples: 16,
                gaps: GapOptions { min_width: 0.05, ..GapOptions::default() },
                ..base(
                    name,
                    SystemSpec::cat_map(),
                    one(2).plus(&TrigPoly::cosine(vec![1, 0], 0.5)).ok()?.into(),
                    TrigPoly::cosine(vec![0, 1], 1.0).into(),
                )
            },
            "doubling" => Self {
                n: 1500,
                samples: 16,
                gaps: GapOptions { min_width: 0.05, ..GapOptions::default() },
                ..base(
                    name,
                    SystemSpec::doubling(2).ok()?,
                    one(1).plus(&TrigPoly::cosine(vec![1], 0.5)).ok()?.into(),
                    TrigPoly::cosine(vec![1], 2.0).into(),
                )
            },
            "singular" => base(
                name,
                golden,
                SamplingFn::clamp_below(TrigPoly::cosine(vec![1], 1.0), 0.5).ok()?,
                TrigPoly::cosine(vec![1], 2.0).into(),
            ),
            _ => return None,
        };
        Some(cfg)
    }

    pub const PRESETS: [&'static str; 5] = ["amo_golden", "free", "cat_map", "doubling", "singular"];
}

/// `sup|q| + 2 sup|p|`, bounded through the coefficient sums.
pub fn spectral_radius_bound(p: &SamplingFn, q: &SamplingFn) -> f64 {
    fn sup(f: &SamplingFn) -> f64 {
        let l1 = f.base().l1_norm();
        match f.post() {
            crate::sampling::PostMap::ClampBelow(t) => (l1 - t).max(0.0),
            _ => l1,
        }
    }
    sup(q) + 2.0 * sup(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointer_for_nested_error() {
        let text = r#"{"system":{"kind":"doubling","m":2},"p":{"d":1,"real":true,"terms":[{"k":[0],"re":1}]},
            "q":{"d":1,"real":true,"terms":[{"k":["x"],"re":1}]}}"#;
        match ExperimentConfig::from_json(text) {
            Err(Error::Config { pointer, .. }) => assert_eq!(pointer, "/q/terms/0/k/0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_and_semantic_errors() {
        let good = serde_json::to_value(ExperimentConfig::preset("amo_golden").unwrap()).unwrap();
        let mut v = good.clone();
        v["gaps"]["deltaa"] = 1.0.into();
        let e = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(e, Error::Config { ref pointer, .. } if pointer.starts_with("/gaps")), "{e}");
        let mut v = good.clone();
        v["N"] = 0.into();
        assert!(matches!(ExperimentConfig::from_json(&v.to_string()), Err(Error::Config { pointer, .. }) if pointer == "/N"));
        let mut v = good;
        v["p"]["d"] = 2.into();
        v["p"]["terms"][0]["k"] = serde_json::json!([0, 0]);
        assert!(matches!(ExperimentConfig::from_json(&v.to_string()), Err(Error::Config { pointer, .. }) if pointer == "/p"));
    }

    #[test]
    fn presets_round_trip_and_resolve() {
        for name in ExperimentConfig::PRESETS {
            let cfg = ExperimentConfig::preset(name).unwrap();
            let text = serde_json::to_string(&cfg).unwrap();
            assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
            let mut r = cfg.clone();
            r.resolve().unwrap();
            assert!(r.energy_grid.is_some() && r.labels.tol.is_some() && r.labels.bound.is_some());
        }
    }

    #[test]
    fn grid_parse() {
        let g = EnergyGrid::parse("-1.9:1.9:400").unwrap();
        let pts = g.points();
        assert_eq!((pts.len(), pts[0], pts[399]), (400, -1.9, 1.9));
        assert!(EnergyGrid::parse("1:0:5").is_err());
        assert!(EnergyGrid::parse("0:1").is_err());
    }
}
