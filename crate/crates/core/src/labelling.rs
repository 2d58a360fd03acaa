//! Gap labels: the label group of an affine torus map, matching measured
//! labels against it, and connectedness verdicts where labels must be
//! integers.

use serde::Serialize;

use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::ids::Gap;
use crate::lattice::{integer_kernel_of, IntMatrix};
use crate::sampling::SamplingFn;

/// Upper limit on the size of an enumerated coefficient box.
const MAX_BOX: usize = 100_000;

/// Basis of `Z^d ∩ ker(I − Aᵀ)`, in Hermite normal form.
pub fn integer_kernel(a: &[Vec<i64>]) -> Result<IntMatrix> {
    let d = a.len();
    if d == 0 || d > 8 || a.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidParameter("need a square matrix of size 1..=8".into()));
    }
    if a.iter().flatten().any(|x| x.abs() > 1_000_000) {
        return Err(Error::InvalidParameter("entries must be at most 10^6 in modulus".into()));
    }
    let m: IntMatrix = (0..d)
        .map(|i| (0..d).map(|j| i64::from(i == j) - a[j][i]).collect())
        .collect();
    integer_kernel_of(&m)
}

/// Where a label group comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupOrigin {
    /// `{m·b + n : m ∈ Z^d ∩ ker(I − Aᵀ), n ∈ Z}` for `ω ↦ Aω + b`.
    AffineTorus,
    /// Integer labels: doubling map or solenoid with `p` nowhere zero.
    Integers,
    /// Doubling map or solenoid with `p` vanishing somewhere: no label
    /// group is known, labels are reported without a verdict.
    TheoryOpen,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelGroup {
    pub origin: GroupOrigin,
    pub frequencies: Vec<f64>,
    pub kernel: IntMatrix,
    /// Coefficient bound `M` of the search box `|c_i| ≤ M`.
    pub bound: i64,
}

/// Default coefficient bound for a kernel of the given rank.
pub fn default_bound(rank: usize) -> i64 {
    match rank {
        0 => 0,
        1 => 100,
        2 => 30,
        r => box_bound(r, MAX_BOX),
    }
}

/// Largest `M` with `(2M + 1)^rank ≤ limit`.
fn box_bound(rank: usize, limit: usize) -> i64 {
    let mut m = 0i64;
    while ((2 * m + 3) as f64).powi(rank as i32) <= limit as f64 {
        m += 1;
    }
    m
}

impl LabelGroup {
    pub fn affine(matrix: &[Vec<i64>], shift: &[f64]) -> Result<Self> {
        if shift.len() != matrix.len() {
            return Err(Error::DimensionMismatch { expected: matrix.len(), found: shift.len() });
        }
        let kernel = integer_kernel(matrix)?;
        let bound = default_bound(kernel.len());
        Ok(Self { origin: GroupOrigin::AffineTorus, frequencies: shift.to_vec(), kernel, bound })
    }

    pub fn integers() -> Self {
        Self { origin: GroupOrigin::Integers, frequencies: Vec::new(), kernel: Vec::new(), bound: 0 }
    }

    /// The group for a system; for the circle maps it depends on whether
    /// `p` has zeros.
    pub fn for_system(sys: &SystemSpec, p: &SamplingFn) -> Result<Self> {
        match sys {
            SystemSpec::AffineTorus { matrix, shift } => Self::affine(matrix, shift),
            SystemSpec::Doubling { .. } | SystemSpec::Solenoid { .. } => {
                if p.may_vanish() {
                    Ok(Self { origin: GroupOrigin::TheoryOpen, ..Self::integers() })
                } else {
                    Ok(Self::integers())
                }
            }
        }
    }

    pub fn with_bound(mut self, bound: i64) -> Self {
        self.bound = bound;
        self
    }

    pub fn rank(&self) -> usize {
        self.kernel.len()
    }

    /// `v·b` for each kernel basis vector `v`.
    pub fn generators(&self) -> Vec<f64> {
        self.kernel
            .iter()
            .map(|v| v.iter().zip(&self.frequencies).map(|(c, b)| *c as f64 * b).sum())
            .collect()
    }

    /// Whether every element of the group is an integer.
    pub fn is_integer_only(&self) -> bool {
        self.origin == GroupOrigin::Integers
            || (self.origin == GroupOrigin::AffineTorus && self.generators().iter().all(|g| g.fract() == 0.0))
    }

    /// Coefficient vectors of the box with the fractional parts of their
    /// values, sorted by value.
    fn table(&self) -> Vec<(f64, Vec<i64>)> {
        let r = self.rank();
        let gens = self.generators();
        let side = (2 * self.bound + 1) as usize;
        let total = side.checked_pow(r as u32).unwrap_or(usize::MAX);
        let mut out = Vec::with_capacity(total.min(MAX_BOX));
        let mut c = vec![-self.bound; r];
        for _ in 0..total {
            let v: f64 = c.iter().zip(&gens).map(|(ci, g)| *ci as f64 * g).sum();
            out.push((v - v.floor(), c.clone()));
            for ci in c.iter_mut() {
                if *ci < self.bound {
                    *ci += 1;
                    break;
                }
                *ci = -self.bound;
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

/// Best element of the label group near a measured label.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelMatch {
    pub target: f64,
    pub m: Vec<i64>,
    pub n: i64,
    pub value: f64,
    pub residual: f64,
    pub matched: bool,
    pub bound: i64,
}

/// Reusable sorted coefficient table for matching many labels.
pub struct LabelMatcher {
    gens: Vec<f64>,
    bound: i64,
    table: Vec<(f64, Vec<i64>)>,
}

impl LabelMatcher {
    pub fn new(group: &LabelGroup) -> Result<Self> {
        let side = (2 * group.bound.max(0) + 1) as f64;
        if side.powi(group.rank() as i32) > 4.0 * MAX_BOX as f64 {
            return Err(Error::InvalidParameter(format!(
                "coefficient box of bound {} in rank {} is too large",
                group.bound,
                group.rank()
            )));
        }
        Ok(Self { gens: group.generators(), bound: group.bound, table: group.table() })
    }

    fn evaluate(&self, c: &[i64], k: f64) -> (i64, f64, f64) {
        let v: f64 = c.iter().zip(&self.gens).map(|(ci, g)| *ci as f64 * g).sum();
        let n = (k - v).round() as i64;
        let value = v + n as f64;
        (n, value, (value - k).abs())
    }

    /// Minimise `|Σ c_i g_i + n − k|` over the box; ties go to the smallest
    /// `Σ|c_i|`, then the smallest `|n|`.
    pub fn best(&self, k: f64, tol: f64) -> LabelMatch {
        let len = self.table.len();
        let f = k - k.floor();
        let idx = self.table.partition_point(|e| e.0 < f);
        // Nearest neighbours on the circle, then everything equally close.
        let mut best_r = f64::INFINITY;
        for j in [idx + 2 * len - 1, idx, idx + 1, idx + 2 * len - 2] {
            let (_, _, r) = self.evaluate(&self.table[j % len].1, k);
            best_r = best_r.min(r);
        }
        let slack = best_r + 1e-15;
        let mut chosen: Option<(i64, i64, Vec<i64>, f64, f64)> = None;
        let mut consider = |j: usize| -> bool {
            let c = &self.table[j % len].1;
            let (n, value, r) = self.evaluate(c, k);
            if r > slack {
                return false;
            }
            let key = (c.iter().map(|x| x.abs()).sum::<i64>(), n.abs());
            if chosen.as_ref().is_none_or(|b| key < (b.0, b.1)) {
                chosen = Some((key.0, key.1, c.clone(), value, r));
            }
            true
        };
        for step in 0..len {
            if !consider(idx + step) {
                break;
            }
        }
        for step in 1..=len {
            if !consider(idx + 2 * len - step) {
                break;
            }
        }
        let (_, _, m, value, residual) = chosen.unwrap_or_else(|| {
            let c = self.table[idx % len].1.clone();
            let (_, value, r) = self.evaluate(&c, k);
            (0, 0, c, value, r)
        });
        let n = (value - m.iter().zip(&self.gens).map(|(ci, g)| *ci as f64 * g).sum::<f64>()).round() as i64;
        LabelMatch { target: k, m, n, value, residual, matched: residual <= tol, bound: self.bound }
    }
}

pub fn match_label(k: f64, group: &LabelGroup, tol: f64) -> Result<LabelMatch> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::InvalidParameter(format!("label {k} outside [0, 1]")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    Ok(LabelMatcher::new(group)?.best(k, tol))
}

/// Default matching tolerance for truncation size `N`.
pub fn default_label_tol(n: usize) -> f64 {
    (10.0 / n as f64).max(5e-3)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapLabelReport {
    pub gap: [f64; 2],
    pub label: f64,
    pub m: Vec<i64>,
    pub n: i64,
    pub residual: f64,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelSummary {
    pub gaps: usize,
    pub matched: usize,
    pub unmatched: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub bound: i64,
    pub origin: GroupOrigin,
}

/// Match every gap's label against the group.
pub fn verify_gap_labels(gaps: &[Gap], group: &LabelGroup, tol: f64) -> Result<(Vec<GapLabelReport>, LabelSummary)> {
    let matcher = LabelMatcher::new(group)?;
    let reports: Vec<GapLabelReport> = gaps
        .iter()
        .map(|g| {
            let m = matcher.best(g.label, tol);
            GapLabelReport { gap: [g.lo, g.hi], label: g.label, m: m.m, n: m.n, residual: m.residual, matched: m.matched }
        })
        .collect();
    let matched = reports.iter().filter(|r| r.matched).count();
    let summary = LabelSummary {
        gaps: reports.len(),
        matched,
        unmatched: reports.len() - matched,
        max_residual: reports.iter().map(|r| r.residual).fold(0.0, f64::max),
        tol,
        bound: group.bound,
        origin: group.origin,
    };
    Ok((reports, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectednessVerdict {
    pub connected: bool,
    pub offending: Vec<Gap>,
    pub min_width: f64,
    pub statement: String,
}

/// Where every label must be an integer, an interior gap is impossible; a
/// surviving gap wider than `min_width` is reported as offending.
pub fn connectedness_verdict(gaps: &[Gap], group: &LabelGroup, min_width: f64) -> Result<ConnectednessVerdict> {
    if group.origin == GroupOrigin::TheoryOpen {
        return Err(Error::PreconditionViolated(
            "labels for the doubling map with vanishing p are not known to be integers".into(),
        ));
    }
    if !group.is_integer_only() {
        return Err(Error::PreconditionViolated(format!(
            "label group has non-integer elements (kernel rank {})",
            group.rank()
        )));
    }
    let offending: Vec<Gap> = gaps.iter().filter(|g| g.width > min_width).copied().collect();
    let connected = offending.is_empty();
    let statement = if connected {
        format!("no interior gap wider than {min_width} detected")
    } else {
        format!("{} interior gap(s) wider than {min_width} detected", offending.len())
    };
    Ok(ConnectednessVerdict { connected, offending, min_width, statement })
}
