//! Base dynamics: affine torus maps, linear expanding circle maps and the
//! Smale–Williams solenoid, with orbit iteration and samplers for their
//! ergodic measures.
//!
//! Torus coordinates are doubles reduced to `[0, 1)` after every step. The
//! expanding circle maps are different: multiplying a double by 2 shifts one
//! mantissa bit out per step, so every floating-point orbit of the doubling
//! map lands on 0 within 53 steps. Circle coordinates are therefore kept as
//! [`BinaryAngle`]s, fixed-point binary fractions with as many bits as the
//! sampler is configured to draw, and an orbit is only trusted for as many
//! steps as the point has bits to spend.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::lattice;

/// Largest torus dimension accepted for affine maps.
pub const MAX_TORUS_DIM: usize = 8;

/// Reduce to `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance between two points of the circle `R/Z`.
pub fn circle_dist(x: f64, y: f64) -> f64 {
    let d = frac(x - y);
    d.min(1.0 - d)
}

/// A point of `R/Z` stored as a big-endian binary fraction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryAngle {
    words: Vec<u64>,
}

impl BinaryAngle {
    /// Exact binary expansion of `x mod 1`, padded with zeros to `bits`
    /// (rounded up to a whole number of 64-bit words).
    pub fn from_f64(x: f64, bits: usize) -> Self {
        let nwords = bits.div_ceil(64).max(1);
        let mut words = vec![0u64; nwords];
        let mut rest = frac(x);
        for w in &mut words {
            if rest == 0.0 {
                break;
            }
            // Scaling by 2^64 and splitting off the integer part are exact.
            let scaled = rest * 18_446_744_073_709_551_616.0;
            let hi = scaled.floor();
            *w = hi as u64;
            rest = scaled - hi;
        }
        Self { words }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, bits: usize) -> Self {
        let nwords = bits.div_ceil(64).max(1);
        Self {
            words: (0..nwords).map(|_| rng.gen()).collect(),
        }
    }

    pub fn bits(&self) -> usize {
        self.words.len() * 64
    }

    /// Leading 53 significant bits as a double in `[0, 1)` (truncating).
    pub fn to_f64(&self) -> f64 {
        for (i, &w) in self.words.iter().enumerate() {
            if w == 0 {
                continue;
            }
            let lz = w.leading_zeros();
            let next = self.words.get(i + 1).copied().unwrap_or(0);
            let top = if lz == 0 { w } else { (w << lz) | (next >> (64 - lz)) };
            let exp = 53 + lz as i32 + 64 * i as i32;
            return (top >> 11) as f64 * 2f64.powi(-exp);
        }
        0.0
    }

    /// `self ← m·self mod 1`, exact.
    pub fn mul_small(&mut self, m: u32) {
        let mut carry: u128 = 0;
        for w in self.words.iter_mut().rev() {
            let prod = u128::from(*w) * u128::from(m) + carry;
            *w = prod as u64;
            carry = prod >> 64;
        }
    }

    /// Number of steps of `x ↦ m·x` after which the leading 53 bits of the
    /// image still come from bits this point actually carries.
    pub fn resolved_steps(&self, m: u32) -> i64 {
        let usable = self.bits().saturating_sub(53) as f64;
        (usable / f64::from(m).log2()).floor() as i64
    }
}

/// Declarative description of a base map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem", into = "RawSystem")]
pub enum SystemSpec {
    /// `ω ↦ Aω + b` on `T^d`, `A ∈ GL(d, Z)`.
    AffineTorus { matrix: Vec<Vec<i64>>, shift: Vec<f64> },
    /// `ω ↦ mω` on the circle; not invertible.
    Doubling { multiplier: u32 },
    /// `(ω,x,y) ↦ (2ω, λx + ½cos 2πω, λy + ½sin 2πω)` on the solid torus.
    Solenoid { lambda: f64 },
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawSystem {
    AffineTorus {
        #[serde(rename = "A")]
        a: Vec<Vec<i64>>,
        b: Vec<f64>,
    },
    Doubling {
        m: u32,
    },
    Solenoid {
        lambda: f64,
    },
}

impl TryFrom<RawSystem> for SystemSpec {
    type Error = Error;

    fn try_from(raw: RawSystem) -> Result<Self> {
        match raw {
            RawSystem::AffineTorus { a, b } => SystemSpec::affine_torus(a, b),
            RawSystem::Doubling { m } => SystemSpec::doubling(m),
            RawSystem::Solenoid { lambda } => SystemSpec::solenoid(lambda),
        }
    }
}

impl From<SystemSpec> for RawSystem {
    fn from(s: SystemSpec) -> Self {
        match s {
            SystemSpec::AffineTorus { matrix, shift } => RawSystem::AffineTorus { a: matrix, b: shift },
            SystemSpec::Doubling { multiplier } => RawSystem::Doubling { m: multiplier },
            SystemSpec::Solenoid { lambda } => RawSystem::Solenoid { lambda },
        }
    }
}

impl SystemSpec {
    pub fn affine_torus(matrix: Vec<Vec<i64>>, shift: Vec<f64>) -> Result<Self> {
        let d = matrix.len();
        if d == 0 || d > MAX_TORUS_DIM {
            return Err(Error::InvalidSystem(format!(
                "torus dimension {d} outside 1..={MAX_TORUS_DIM}"
            )));
        }
        if matrix.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidSystem("A must be square".into()));
        }
        if shift.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: shift.len() });
        }
        if shift.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSystem("b must be finite".into()));
        }
        let det = lattice::determinant(&matrix)?;
        let unit = num_bigint::BigInt::from(1);
        if det != unit && det != -unit {
            return Err(Error::InvalidSystem(format!("det A = {det}, expected ±1")));
        }
        Ok(SystemSpec::AffineTorus { matrix, shift })
    }

    /// Translation `ω ↦ ω + α` on `T^d`.
    pub fn rotation(alpha: Vec<f64>) -> Result<Self> {
        let d = alpha.len();
        let id = (0..d)
            .map(|i| (0..d).map(|j| i64::from(i == j)).collect())
            .collect();
        Self::affine_torus(id, alpha)
    }

    /// `(ω₁, ω₂) ↦ (ω₁ + α, ω₁ + ω₂)`.
    pub fn skew_shift(alpha: f64) -> Self {
        Self::affine_torus(vec![vec![1, 0], vec![1, 1]], vec![alpha, 0.0])
            .expect("skew shift is unimodular")
    }

    /// `(ω₁, ω₂) ↦ (2ω₁ + ω₂, ω₁ + ω₂)`.
    pub fn cat_map() -> Self {
        Self::affine_torus(vec![vec![2, 1], vec![1, 1]], vec![0.0, 0.0])
            .expect("cat map is unimodular")
    }

    pub fn doubling(multiplier: u32) -> Result<Self> {
        if multiplier < 2 {
            return Err(Error::InvalidSystem(format!(
                "multiplier must be at least 2, got {multiplier}"
            )));
        }
        Ok(SystemSpec::Doubling { multiplier })
    }

    pub fn solenoid(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 0.5) {
            return Err(Error::InvalidSystem(format!(
                "solenoid contraction {lambda} outside (0, 1/2)"
            )));
        }
        Ok(SystemSpec::Solenoid { lambda })
    }

    /// Dimension of the torus factor (the solenoid's circle counts as 1).
    pub fn torus_dim(&self) -> usize {
        match self {
            SystemSpec::AffineTorus { matrix, .. } => matrix.len(),
            _ => 1,
        }
    }

    pub fn is_invertible(&self) -> bool {
        matches!(self, SystemSpec::AffineTorus { .. })
    }

    fn check_point(&self, pt: &PhasePoint) -> Result<()> {
        let ok = match (self, pt) {
            (SystemSpec::AffineTorus { matrix, .. }, PhasePoint::Torus(x)) => {
                if x.len() != matrix.len() {
                    return Err(Error::DimensionMismatch { expected: matrix.len(), found: x.len() });
                }
                true
            }
            (SystemSpec::Doubling { .. }, PhasePoint::Circle(_)) => true,
            (SystemSpec::Solenoid { .. }, PhasePoint::Solenoid { .. }) => true,
            _ => false,
        };
        if ok {
            return Ok(());
        }
        let system = match self {
            SystemSpec::AffineTorus { .. } => "torus",
            SystemSpec::Doubling { .. } => "circle",
            SystemSpec::Solenoid { .. } => "solenoid",
        };
        let point = match pt {
            PhasePoint::Torus(_) => "torus",
            PhasePoint::Circle(_) => "circle",
            PhasePoint::Solenoid { .. } => "solenoid",
        };
        Err(Error::WrongPointKind { system, point })
    }

    /// One forward step, in place. The point must match the system.
    pub(crate) fn step(&self, pt: &mut PhasePoint) {
        match (self, pt) {
            (SystemSpec::AffineTorus { matrix, shift }, PhasePoint::Torus(x)) => {
                let old = x.clone();
                for (i, xi) in x.iter_mut().enumerate() {
                    let mut v = shift[i];
                    for (aij, oj) in matrix[i].iter().zip(&old) {
                        v += *aij as f64 * oj;
                    }
                    *xi = frac(v);
                }
            }
            (SystemSpec::Doubling { multiplier }, PhasePoint::Circle(w)) => w.mul_small(*multiplier),
            (SystemSpec::Solenoid { lambda }, PhasePoint::Solenoid { angle, disk }) => {
                let (s, c) = (TAU * angle.to_f64()).sin_cos();
                disk[0] = lambda * disk[0] + 0.5 * c;
                disk[1] = lambda * disk[1] + 0.5 * s;
                angle.mul_small(2);
            }
            _ => unreachable!("point checked against system"),
        }
    }

    /// `T^n(pt)`. Negative `n` requires an invertible system.
    pub fn iterate(&self, pt: &PhasePoint, n: i64) -> Result<PhasePoint> {
        self.check_point(pt)?;
        let mut out = pt.clone();
        if n >= 0 {
            for _ in 0..n {
                self.step(&mut out);
            }
            return Ok(out);
        }
        let SystemSpec::AffineTorus { matrix, shift } = self else {
            return Err(Error::NonInvertible);
        };
        let inv = lattice::unimodular_inverse(matrix)?;
        let PhasePoint::Torus(x) = &mut out else { unreachable!() };
        for _ in 0..(-n) {
            let y: Vec<f64> = x.iter().zip(shift).map(|(xi, bi)| xi - bi).collect();
            for (i, xi) in x.iter_mut().enumerate() {
                let v: f64 = inv[i].iter().zip(&y).map(|(a, yj)| *a as f64 * yj).sum();
                *xi = frac(v);
            }
        }
        Ok(out)
    }

    /// How many forward steps from `pt` are numerically meaningful.
    pub fn resolved_steps(&self, pt: &PhasePoint) -> i64 {
        match (self, pt) {
            (SystemSpec::Doubling { multiplier }, PhasePoint::Circle(w)) => w.resolved_steps(*multiplier),
            (SystemSpec::Solenoid { .. }, PhasePoint::Solenoid { angle, .. }) => angle.resolved_steps(2),
            _ => i64::MAX,
        }
    }

    pub fn sample_points(&self, seed: u64, count: usize) -> Vec<PhasePoint> {
        self.sample_points_with(seed, count, &SamplerConfig::default())
    }

    /// Draw `count` points from the ergodic measure: Lebesgue on tori and
    /// circles, the Bernoulli-times-Lebesgue measure on the solenoid.
    ///
    /// Point `i` uses its own ChaCha stream, and on the circle and the
    /// solenoid the angle is drawn first, so a doubling-map sample and a
    /// solenoid sample with the same seed share their angles.
    pub fn sample_points_with(&self, seed: u64, count: usize, cfg: &SamplerConfig) -> Vec<PhasePoint> {
        (0..count)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                match self {
                    SystemSpec::AffineTorus { matrix, .. } => {
                        PhasePoint::Torus((0..matrix.len()).map(|_| rng.gen::<f64>()).collect())
                    }
                    SystemSpec::Doubling { .. } => {
                        PhasePoint::Circle(BinaryAngle::random(&mut rng, cfg.angle_bits))
                    }
                    SystemSpec::Solenoid { lambda } => {
                        let angle = BinaryAngle::random(&mut rng, cfg.angle_bits);
                        let disk = attractor_fiber_point(angle.to_f64(), *lambda, cfg.solenoid_depth, &mut rng);
                        PhasePoint::Solenoid { angle, disk }
                    }
                }
            })
            .collect()
    }
}

/// Bounds for [`periodic_orbits`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodicSearch {
    /// Longest cycle kept.
    pub max_period: usize,
    /// Largest denominator of rational torus points examined.
    pub max_denominator: u64,
    /// Cap on the number of candidate points.
    pub max_points: usize,
}

impl Default for PeriodicSearch {
    fn default() -> Self {
        Self { max_period: 16, max_denominator: 24, max_points: 1 << 17 }
    }
}

/// Periodic cycles of the base map, each as the list of torus coordinates
/// along one period. Circle maps use the points `j/(m^P − 1)`; toral
/// automorphisms (`b = 0`) use rational points, all of which are periodic.
/// Translations with `b ≠ 0` report none. Coordinates come from exact
/// integer arithmetic.
pub fn periodic_orbits(sys: &SystemSpec, search: &PeriodicSearch) -> Vec<Vec<Vec<f64>>> {
    match sys {
        SystemSpec::Doubling { multiplier } => circle_cycles(u64::from(*multiplier), search),
        SystemSpec::Solenoid { .. } => circle_cycles(2, search),
        SystemSpec::AffineTorus { matrix, shift } => {
            if shift.iter().any(|&x| x != 0.0) {
                Vec::new()
            } else {
                torus_cycles(matrix, search)
            }
        }
    }
}

fn circle_cycles(m: u64, search: &PeriodicSearch) -> Vec<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    let mut budget = search.max_points;
    for period in 1..=search.max_period {
        let Some(modulus) = m.checked_pow(period as u32).map(|x| x - 1) else { break };
        if modulus as usize > budget {
            break;
        }
        budget -= modulus as usize;
        for j in 0..modulus.max(1) {
            let mut cycle = vec![j];
            let mut x = (j * m) % modulus.max(1);
            while x != j {
                if x < j || cycle.len() > period {
                    break;
                }
                cycle.push(x);
                x = (x * m) % modulus.max(1);
            }
            // Keep each cycle once, from its smallest point, at its exact period.
            if x == j && cycle.len() == period {
                out.push(cycle.iter().map(|&v| vec![v as f64 / modulus as f64]).collect());
            }
        }
    }
    out
}

fn torus_cycles(a: &[Vec<i64>], search: &PeriodicSearch) -> Vec<Vec<Vec<f64>>> {
    let d = a.len() as u32;
    let mut out = Vec::new();
    let mut budget = search.max_points;
    for n in 1..=search.max_denominator {
        let Some(total) = n.checked_pow(d).map(|t| t as usize) else { break };
        if total > budget {
            break;
        }
        budget -= total;
        let decode = |mut idx: usize| -> Vec<i64> {
            (0..d)
                .map(|_| {
                    let v = (idx as u64 % n) as i64;
                    idx /= n as usize;
                    v
                })
                .collect()
        };
        let encode = |v: &[i64]| -> usize { v.iter().rev().fold(0usize, |acc, &x| acc * n as usize + x as usize) };
        let image = |v: &[i64]| -> Vec<i64> {
            a.iter()
                .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum::<i64>().rem_euclid(n as i64))
                .collect()
        };
        let mut seen = vec![false; total];
        for start in 0..total {
            if seen[start] {
                continue;
            }
            let v0 = decode(start);
            // Points with a smaller denominator were handled earlier.
            let g = v0.iter().fold(n as i64, |g, &x| num_integer::gcd(g, x));
            let mut cycle = vec![v0.clone()];
            seen[start] = true;
            let mut v = image(&v0);
            while v != v0 {
                seen[encode(&v)] = true;
                cycle.push(v.clone());
                v = image(&v);
            }
            if (g == 1 || n == 1) && cycle.len() <= search.max_period {
                out.push(
                    cycle
                        .iter()
                        .map(|v| v.iter().map(|&x| x as f64 / n as f64).collect())
                        .collect(),
                );
            }
        }
    }
    out
}

/// Pull a random backward itinerary of `ω` through the solenoid map: pick
/// preimages `ω₋ⱼ = (ω₋ⱼ₊₁ + sⱼ)/2`, start at the disk centre above `ω₋depth`
/// and push forward to the fibre over `ω`.
fn attractor_fiber_point<R: Rng>(omega: f64, lambda: f64, depth: usize, rng: &mut R) -> [f64; 2] {
    let mut back = Vec::with_capacity(depth);
    let mut w = omega;
    for _ in 0..depth {
        let s = f64::from(u8::from(rng.gen::<bool>()));
        w = (w + s) / 2.0;
        back.push(w);
    }
    let mut disk = [0.0f64; 2];
    for &w in back.iter().rev() {
        let (s, c) = (TAU * w).sin_cos();
        disk = [lambda * disk[0] + 0.5 * c, lambda * disk[1] + 0.5 * s];
    }
    disk
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Binary digits drawn for circle angles (doubling map, solenoid).
    pub angle_bits: usize,
    /// Length of the backward itinerary used to land on the solenoid.
    pub solenoid_depth: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { angle_bits: 8192, solenoid_depth: 40 }
    }
}

/// A point of the phase space.
#[derive(Clone, Debug, PartialEq)]
pub enum PhasePoint {
    Torus(Vec<f64>),
    Circle(BinaryAngle),
    Solenoid { angle: BinaryAngle, disk: [f64; 2] },
}

impl PhasePoint {
    pub fn torus(coords: Vec<f64>) -> Self {
        PhasePoint::Torus(coords.into_iter().map(frac).collect())
    }

    /// Circle point with the default angle precision.
    pub fn circle(x: f64) -> Self {
        PhasePoint::Circle(BinaryAngle::from_f64(x, SamplerConfig::default().angle_bits))
    }

    /// Solenoid point; `(x, y)` must lie in the closed unit disk.
    pub fn solenoid(omega: f64, x: f64, y: f64) -> Result<Self> {
        if x * x + y * y > 1.0 {
            return Err(Error::InvalidParameter(format!("({x}, {y}) outside the unit disk")));
        }
        Ok(PhasePoint::Solenoid {
            angle: BinaryAngle::from_f64(omega, SamplerConfig::default().angle_bits),
            disk: [x, y],
        })
    }

    pub fn torus_dim(&self) -> usize {
        match self {
            PhasePoint::Torus(x) => x.len(),
            _ => 1,
        }
    }

    /// Torus coordinates as doubles in `[0, 1)`.
    pub fn torus_coords(&self) -> Vec<f64> {
        match self {
            PhasePoint::Torus(x) => x.clone(),
            PhasePoint::Circle(a) | PhasePoint::Solenoid { angle: a, .. } => vec![a.to_f64()],
        }
    }

    pub fn disk(&self) -> Option<[f64; 2]> {
        match self {
            PhasePoint::Solenoid { disk, .. } => Some(*disk),
            _ => None,
        }
    }

    /// Projection of a solenoid point to its circle coordinate.
    pub fn project_to_circle(&self) -> Option<PhasePoint> {
        match self {
            PhasePoint::Solenoid { angle, .. } => Some(PhasePoint::Circle(angle.clone())),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(x: &[f64], y: &[f64], tol: f64) -> bool {
        x.len() == y.len() && x.iter().zip(y).all(|(a, b)| circle_dist(*a, *b) <= tol)
    }

    #[test]
    fn cat_map_one_step() {
        let sys = SystemSpec::cat_map();
        let p = sys.iterate(&PhasePoint::torus(vec![0.5, 0.5]), 1).unwrap();
        assert_eq!(p.torus_coords(), vec![0.5, 0.0]);
    }

    #[test]
    fn doubling_two_steps() {
        let sys = SystemSpec::doubling(2).unwrap();
        let p = sys.iterate(&PhasePoint::circle(0.3), 2).unwrap();
        assert!((p.torus_coords()[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn solenoid_fixed_angle() {
        let sys = SystemSpec::solenoid(0.25).unwrap();
        let p = sys.iterate(&PhasePoint::solenoid(0.0, 0.0, 0.0).unwrap(), 1).unwrap();
        assert_eq!(p.torus_coords(), vec![0.0]);
        assert_eq!(p.disk(), Some([0.5, 0.0]));
    }

    #[test]
    fn negative_time_requires_invertibility() {
        let d = SystemSpec::doubling(2).unwrap();
        assert!(matches!(d.iterate(&PhasePoint::circle(0.1), -1), Err(Error::NonInvertible)));
        let s = SystemSpec::solenoid(0.3).unwrap();
        let p = PhasePoint::solenoid(0.1, 0.0, 0.0).unwrap();
        assert!(matches!(s.iterate(&p, -1), Err(Error::NonInvertible)));
    }

    #[test]
    fn dimension_mismatch() {
        let sys = SystemSpec::cat_map();
        assert!(matches!(
            sys.iterate(&PhasePoint::torus(vec![0.1]), 1),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            sys.iterate(&PhasePoint::circle(0.1), 1),
            Err(Error::WrongPointKind { system: "torus", point: "circle" })
        ));
    }

    #[test]
    fn invalid_systems_rejected() {
        assert!(SystemSpec::affine_torus(vec![vec![2, 0], vec![0, 1]], vec![0.0, 0.0]).is_err());
        assert!(SystemSpec::solenoid(0.5).is_err());
        assert!(SystemSpec::solenoid(0.0).is_err());
        assert!(SystemSpec::doubling(1).is_err());
    }

    #[test]
    fn forward_then_backward_returns() {
        for sys in [SystemSpec::cat_map(), SystemSpec::skew_shift(0.618_033_988_749_894_9)] {
            for p in sys.sample_points(11, 50) {
                let q = sys.iterate(&sys.iterate(&p, 1).unwrap(), -1).unwrap();
                assert!(close(&p.torus_coords(), &q.torus_coords(), 1e-12));
            }
        }
    }

    #[test]
    fn composition_law() {
        let sys = SystemSpec::skew_shift(0.3819660112501051);
        let p = PhasePoint::torus(vec![0.123, 0.456]);
        let direct = sys.iterate(&p, 17).unwrap();
        let split = sys.iterate(&sys.iterate(&p, 9).unwrap(), 8).unwrap();
        assert!(close(&direct.torus_coords(), &split.torus_coords(), 1e-12));
        let back = sys.iterate(&sys.iterate(&p, -5).unwrap(), 12).unwrap();
        assert!(close(&back.torus_coords(), &sys.iterate(&p, 7).unwrap().torus_coords(), 1e-12));
    }

    #[test]
    fn samplers_are_deterministic_and_in_range() {
        let sys = SystemSpec::rotation(vec![0.1, 0.2]).unwrap();
        let a = sys.sample_points(7, 3);
        assert_eq!(a, sys.sample_points(7, 3));
        assert_eq!(a.len(), 3);
        assert!(a.iter().flat_map(|p| p.torus_coords()).all(|x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn solenoid_samples_lie_in_disk_fibres() {
        let sys = SystemSpec::solenoid(0.25).unwrap();
        for p in sys.sample_points(1, 1000) {
            let [x, y] = p.disk().unwrap();
            assert!(x * x + y * y <= 1.0);
        }
    }

    #[test]
    fn doubling_and_solenoid_samples_share_angles() {
        let d = SystemSpec::doubling(2).unwrap();
        let s = SystemSpec::solenoid(0.3).unwrap();
        for (pd, ps) in d.sample_points(5, 4).iter().zip(s.sample_points(5, 4)) {
            assert_eq!(Some(pd.clone()), ps.project_to_circle());
        }
    }

    #[test]
    fn doubling_orbit_keeps_resolution() {
        // A double-precision orbit of the doubling map dies within 53 steps;
        // the binary angle keeps producing fresh digits.
        let sys = SystemSpec::doubling(2).unwrap();
        let p = &sys.sample_points(3, 1)[0];
        assert!(sys.resolved_steps(p) >= 8000);
        let far = sys.iterate(p, 3000).unwrap().torus_coords()[0];
        assert!(far != 0.0);
    }

    #[test]
    fn periodic_cycles_are_cycles() {
        let search = PeriodicSearch { max_period: 6, max_denominator: 7, max_points: 1 << 12 };
        for sys in [SystemSpec::doubling(2).unwrap(), SystemSpec::cat_map(), SystemSpec::doubling(3).unwrap()] {
            let cycles = periodic_orbits(&sys, &search);
            assert!(!cycles.is_empty());
            for cycle in &cycles {
                for (i, x) in cycle.iter().enumerate() {
                    let next = &cycle[(i + 1) % cycle.len()];
                    let pt = match sys {
                        SystemSpec::AffineTorus { .. } => PhasePoint::torus(x.clone()),
                        _ => PhasePoint::circle(x[0]),
                    };
                    let img = sys.iterate(&pt, 1).unwrap().torus_coords();
                    assert!(close(&img, next, 1e-12), "{x:?} -> {img:?}, expected {next:?}");
                }
            }
        }
        // period-2 orbit of the doubling map
        let two = periodic_orbits(&SystemSpec::doubling(2).unwrap(), &search);
        assert!(two.iter().any(|c| c.len() == 2 && (c[0][0] - 1.0 / 3.0).abs() < 1e-15));
        assert!(periodic_orbits(&SystemSpec::rotation(vec![0.3]).unwrap(), &search).is_empty());
    }

    #[test]
    fn binary_angle_roundtrip() {
        for x in [0.0, 0.3, 0.999_999_999_999, 1e-30, 0.5] {
            assert_eq!(BinaryAngle::from_f64(x, 256).to_f64(), x);
        }
    }

    #[test]
    fn json_schema() {
        let s: SystemSpec = serde_json::from_str(r#"{"kind":"affine_torus","A":[[2,1],[1,1]],"b":[0,0]}"#).unwrap();
        assert_eq!(s, SystemSpec::cat_map());
        let d: SystemSpec = serde_json::from_str(r#"{"kind":"doubling","m":2}"#).unwrap();
        assert_eq!(d, SystemSpec::Doubling { multiplier: 2 });
        let l: SystemSpec = serde_json::from_str(r#"{"kind":"solenoid","lambda":0.25}"#).unwrap();
        assert_eq!(serde_json::to_string(&l).unwrap(), r#"{"kind":"solenoid","lambda":0.25}"#);
        assert!(serde_json::from_str::<SystemSpec>(r#"{"kind":"solenoid","lambda":0.7}"#).is_err());
        assert!(serde_json::from_str::<SystemSpec>(r#"{"kind":"affine_torus","A":[[2,0],[0,1]],"b":[0,0]}"#).is_err());
    }
}
