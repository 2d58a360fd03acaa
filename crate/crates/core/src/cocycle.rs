//! Transfer-matrix cocycles, rotation numbers from sign flips, invariant
//! sections and a finite-orbit test for dominated splittings.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::Mul;

use crate::dynamics::{PhasePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::oscillation::{block_flip_totals, split_blocks};
use crate::sampling::{coefficients, JacobiCoeffs, SamplingFn};

/// Products are rescaled after this many factors.
const RENORM_EVERY: usize = 32;

/// A complex 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { a, b, c, d }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        let z = |x| Complex64::new(x, 0.0);
        Self::new(z(a), z(b), z(c), z(d))
    }

    pub fn identity() -> Self {
        Self::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn max_abs(&self) -> f64 {
        [self.a, self.b, self.c, self.d].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Singular values `σ₁ ≥ σ₂` from `σ₁² + σ₂² = ‖M‖_F²` and `σ₁σ₂ = |det M|`.
    pub fn singular_values(&self) -> (f64, f64) {
        let fro2 = self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr();
        let det = self.det().norm();
        let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
        let s1 = ((fro2 + disc) / 2.0).sqrt();
        let s2 = if s1 > 0.0 { det / s1 } else { 0.0 };
        (s1, s2)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// `exp(log_scale) · matrix`. The determinant of a long product is lost
/// to cancellation in the entries, so `log|det|` is accumulated from the
/// factors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledMat2 {
    pub matrix: Mat2,
    pub log_scale: f64,
    pub log_abs_det: f64,
}

impl ScaledMat2 {
    /// The product as a plain matrix (may overflow for long products).
    pub fn value(&self) -> Mat2 {
        self.matrix.scale(self.log_scale.exp())
    }

    pub fn log_singular_values(&self) -> (f64, f64) {
        let (s1, _) = self.matrix.singular_values();
        let l1 = s1.ln() + self.log_scale;
        (l1, self.log_abs_det - l1)
    }
}

/// `B(Tⁿω) = [[E − b(n), −conj a(n−1)], [a(n), 0]]` from a coefficient
/// window containing `n − 1` and `n`.
pub fn transfer_matrix(e: f64, coeffs: &JacobiCoeffs, n: i64) -> Mat2 {
    let z = Complex64::new(0.0, 0.0);
    Mat2::new(
        Complex64::new(e - coeffs.b_at(n), 0.0),
        -coeffs.a_at(n - 1).conj(),
        coeffs.a_at(n),
        z,
    )
}

/// `B^E(ω) = [[E − q(ω), −conj p(T⁻¹ω)], [p(ω), 0]]`. With `shifted`, the
/// half-line form `[[E − q(Tω), −conj p(ω)], [p(Tω), 0]]`, which only looks
/// forward and so also works for non-invertible maps.
pub fn cocycle_matrix(
    e: f64,
    sys: &SystemSpec,
    p: &SamplingFn,
    q: &SamplingFn,
    pt: &PhasePoint,
    shifted: bool,
) -> Result<Mat2> {
    let co = if shifted {
        coefficients(sys, p, q, pt, 0, 1)?
    } else {
        coefficients(sys, p, q, pt, -1, 0)?
    };
    Ok(transfer_matrix(e, &co, co.start + 1))
}

/// `B_n(ω) = B(T^{n−1}ω) ⋯ B(ω)`, rescaled every few factors.
pub fn cocycle_iterate(
    e: f64,
    sys: &SystemSpec,
    p: &SamplingFn,
    q: &SamplingFn,
    pt: &PhasePoint,
    n: usize,
    shifted: bool,
) -> Result<ScaledMat2> {
    if n == 0 {
        return Ok(ScaledMat2 { matrix: Mat2::identity(), log_scale: 0.0, log_abs_det: 0.0 });
    }
    let co = if shifted {
        coefficients(sys, p, q, pt, 0, n as i64)?
    } else {
        coefficients(sys, p, q, pt, -1, n as i64 - 1)?
    };
    Ok(product(e, &co, co.start + 1, n))
}

/// `B(T^{first+n−1}ω) ⋯ B(T^{first}ω)` from a coefficient window.
pub fn product(e: f64, coeffs: &JacobiCoeffs, first: i64, n: usize) -> ScaledMat2 {
    let mut m = Mat2::identity();
    let mut log_scale = 0.0;
    let mut log_abs_det = 0.0;
    for i in 0..n {
        let site = first + i as i64;
        m = transfer_matrix(e, coeffs, site) * m;
        log_abs_det += coeffs.a_at(site).norm().ln() + coeffs.a_at(site - 1).norm().ln();
        if (i + 1) % RENORM_EVERY == 0 {
            let s = m.max_abs();
            if s > 0.0 {
                m = m.scale(1.0 / s);
                log_scale += s.ln();
            }
        }
    }
    ScaledMat2 { matrix: m, log_scale, log_abs_det }
}

/// Result of advancing a solution by one site.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolutionStep {
    /// `(u(n+1), u(n))`.
    Next(f64, f64),
    /// `a(n) = 0`: the transfer matrix maps `(u(n), u(n−1))` into the
    /// first coordinate axis and the recurrence cannot be continued.
    ZeroImage,
}

/// `(u(n), u(n−1)) ↦ (u(n+1), u(n))` using `a(n)u(n+1) = (E − b(n))u(n) −
/// a(n−1)u(n−1)` on gauge-reduced coefficients. When `u(n−1) = 0` the
/// coefficient `a(n−1)` is not needed and may lie outside the window.
pub fn solution_action(e: f64, coeffs: &JacobiCoeffs, n: i64, u: f64, u_prev: f64) -> Result<SolutionStep> {
    let an = coeffs.a_at(n);
    if an.im != 0.0 {
        return Err(Error::ComplexCocycle);
    }
    if an.re == 0.0 {
        return Ok(SolutionStep::ZeroImage);
    }
    let left = if u_prev == 0.0 {
        0.0
    } else {
        let am = coeffs.a_at(n - 1);
        if am.im != 0.0 {
            return Err(Error::ComplexCocycle);
        }
        am.re * u_prev
    };
    Ok(SolutionStep::Next(((e - coeffs.b_at(n)) * u - left) / an.re, u))
}

/// `(1/t_max) · #{0 ≤ n < t_max : sgn u(n) ≠ sgn u(n+1)}` for the Dirichlet
/// solution along the orbit of `ω`, with `|p|` in place of `p`. When `|p|`
/// vanishes somewhere in the window the count runs block by block:
/// `Σ f_r / Σ ℓ_r` over the blocks between consecutive zeros.
pub fn rotation_number(
    e: f64,
    sys: &SystemSpec,
    p: &SamplingFn,
    q: &SamplingFn,
    omega: &PhasePoint,
    t_max: usize,
) -> Result<f64> {
    if t_max < 1000 {
        return Err(Error::InvalidParameter(format!("t_max must be at least 1000, got {t_max}")));
    }
    let co = coefficients(sys, p, q, omega, 0, t_max as i64 - 1)?.modulus();
    rotation_number_of(e, &co)
}

/// [`rotation_number`] on a given gauge-reduced window `[0, t_max)`.
pub fn rotation_number_of(e: f64, co: &JacobiCoeffs) -> Result<f64> {
    if !co.is_gauge_reduced() {
        return Err(Error::NotGaugeReduced);
    }
    if co.a.iter().any(|z| z.re == 0.0) {
        let decomp = split_blocks(co)?;
        let (flips, len) = block_flip_totals(&decomp, e)?;
        if len == 0 {
            return Err(Error::PreconditionViolated("no complete block in the window".into()));
        }
        return Ok(flips as f64 / len as f64);
    }
    let a: Vec<f64> = co.a.iter().map(|z| z.re).collect();
    let (mut u, mut prev) = (1.0f64, 0.0f64);
    let mut flips = 0usize;
    for (i, (&b, &an)) in co.b.iter().zip(&a).enumerate() {
        let left = if i == 0 { 0.0 } else { a[i - 1] * prev };
        let next = ((e - b) * u - left) / an;
        if next == 0.0 {
            return Err(Error::SolutionHitsEigenvalue { index: co.start + i as i64 + 1 });
        }
        if (next < 0.0) != (u < 0.0) {
            flips += 1;
        }
        prev = u;
        u = next;
        // Power-of-two rescaling is exact and keeps signs.
        if u.abs() > 1e150 {
            u *= 2f64.powi(-500);
            prev *= 2f64.powi(-500);
        } else if u.abs() < 1e-150 && prev.abs() < 1e-150 {
            u *= 2f64.powi(500);
            prev *= 2f64.powi(500);
        }
    }
    Ok(flips as f64 / co.len() as f64)
}

/// A line `span{(cos θ, sin θ)}` of the real projective line, `θ ∈ [0, π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProjectivePoint {
    pub theta: f64,
}

impl ProjectivePoint {
    pub fn from_vector(x: f64, y: f64) -> Self {
        let t = y.atan2(x).rem_euclid(PI);
        Self { theta: if t >= PI { 0.0 } else { t } }
    }

    pub fn vector(&self) -> [f64; 2] {
        [self.theta.cos(), self.theta.sin()]
    }

    /// `|sin(θ₁ − θ₂)|`.
    pub fn distance(&self, other: &ProjectivePoint) -> f64 {
        (self.theta - other.theta).sin().abs()
    }
}

fn real_window(co: &JacobiCoeffs) -> Result<(Vec<f64>, Vec<f64>)> {
    if co.a.iter().any(|z| z.im != 0.0) {
        return Err(Error::ComplexCocycle);
    }
    Ok((co.a.iter().map(|z| z.re).collect(), co.b.clone()))
}

/// Real cocycle data on a window, indexed by lattice site.
struct RealCocycle {
    start: i64,
    a: Vec<f64>,
    b: Vec<f64>,
    e: f64,
}

impl RealCocycle {
    fn new(e: f64, co: &JacobiCoeffs) -> Result<Self> {
        let (a, b) = real_window(co)?;
        Ok(Self { start: co.start, a, b, e })
    }

    fn a(&self, n: i64) -> f64 {
        self.a[(n - self.start) as usize]
    }

    fn b(&self, n: i64) -> f64 {
        self.b[(n - self.start) as usize]
    }

    /// `B(Tⁿω) v`.
    fn apply(&self, n: i64, v: [f64; 2]) -> [f64; 2] {
        [(self.e - self.b(n)) * v[0] - self.a(n - 1) * v[1], self.a(n) * v[0]]
    }

    /// `B(Tⁿω)⁻¹ v`; `None` if the matrix is singular.
    fn apply_inverse(&self, n: i64, v: [f64; 2]) -> Option<[f64; 2]> {
        let (an, am) = (self.a(n), self.a(n - 1));
        if an == 0.0 || am == 0.0 {
            return None;
        }
        let x = v[1] / an;
        Some([x, ((self.e - self.b(n)) * x - v[0]) / am])
    }
}

fn normalize(v: [f64; 2]) -> Option<[f64; 2]> {
    let r = v[0].hypot(v[1]);
    (r > 0.0 && r.is_finite()).then(|| [v[0] / r, v[1] / r])
}

/// `|sin ∠(u, v)|` for unit vectors.
fn sin_angle(u: [f64; 2], v: [f64; 2]) -> f64 {
    (u[0] * v[1] - u[1] * v[0]).abs()
}

/// Direction used to start pushes; any line off the invariant ones works.
const GENERIC: [f64; 2] = [0.540_302_305_868_139_8, 0.841_470_984_807_896_5];

/// Push the generic direction forward from site `from` to site `to`
/// (`from ≤ to`); starts at `e₁` right after the last zero of `a` if there
/// is one.
fn push_unstable(c: &RealCocycle, from: i64, to: i64) -> [f64; 2] {
    let mut start = from;
    let mut v = GENERIC;
    if let Some(z) = (from..to).rev().find(|&n| c.a(n) == 0.0) {
        start = z + 1;
        v = [1.0, 0.0];
    }
    for n in start..to {
        v = normalize(c.apply(n, v)).unwrap_or([1.0, 0.0]);
    }
    v
}

/// Pull the generic direction back from site `from` to site `to` (`to ≤
/// from`) with inverse transfer matrices.
fn pull_stable(c: &RealCocycle, from: i64, to: i64) -> Result<[f64; 2]> {
    let mut v = GENERIC;
    for n in (to..from).rev() {
        let w = c.apply_inverse(n, v).ok_or(Error::SingularCocycle { site: n })?;
        v = normalize(w).unwrap_or(GENERIC);
    }
    Ok(v)
}

/// An invariant direction at `ω` and how well it is transported.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SectionEstimate {
    pub direction: ProjectivePoint,
    /// `|sin ∠(B(ω)·s(ω), s(Tω))|`, with `s(Tω)` computed independently.
    pub residual: f64,
}

/// Unstable direction at `ω`: a generic line pushed forward `depth` steps
/// from `T^{−depth}ω`, or `e₁` pushed from just after the last zero of `p`
/// on that stretch, where the unstable line is exactly `e₁`.
pub fn unstable_section(
    e: f64,
    sys: &SystemSpec,
    p: &SamplingFn,
    q: &SamplingFn,
    omega: &PhasePoint,
    depth: usize,
) -> Result<SectionEstimate> {
    let d = depth as i64;
    let co = coefficients(sys, p, q, omega, -d - 1, 1)?;
    let c = RealCocycle::new(e, &co)?;
    let here = push_unstable(&c, -d, 0);
    let there = push_unstable(&c, 1 - d, 1);
    Ok(section_estimate(&c, here, there))
}

/// Stable direction at `ω`: a generic line pulled back `depth` steps from
/// `T^{depth}ω` by inverse transfer matrices. Needs `p ≠ 0` along the way.
pub fn stable_section(
    e: f64,
    sys: &SystemSpec,
    p: &SamplingFn,
    q: &SamplingFn,
    omega: &PhasePoint,
    depth: usize,
) -> Result<SectionEstimate> {
    let d = depth as i64;
    let co = coefficients(sys, p, q, omega, -1, d + 1)?;
    let c = RealCocycle::new(e, &co)?;
    let here = pull_stable(&c, d, 0)?;
    let there = pull_stable(&c, d + 1, 1)?;
    Ok(section_estimate(&c, here, there))
}

fn section_estimate(c: &RealCocycle, here: [f64; 2], there: [f64; 2]) -> SectionEstimate {
    let residual = match normalize(c.apply(0, here)) {
        Some(w) => sin_angle(w, there),
        None => 1.0,
    };
    SectionEstimate { direction: ProjectivePoint::from_vector(here[0], here[1]), residual }
}

/// Unstable sections along `0..steps` of one orbit, each computed from its
/// own `depth`-step history, with the invariance residual at every site.
pub fn unstable_orbit_residuals(
    e: f64,
    sys: &SystemSpec,
    p: &SamplingFn,
    q: &SamplingFn,
    omega: &PhasePoint,
    depth: usize,
    steps: usize,
) -> Result<Vec<f64>> {
    let d = depth as i64;
    let s = steps as i64;
    let co = coefficients(sys, p, q, omega, -d - 1, s + 1)?;
    let c = RealCocycle::new(e, &co)?;
    let sections: Vec<[f64; 2]> = (0..=s).map(|j| push_unstable(&c, j - d, j)).collect();
    Ok((0..s as usize)
        .map(|j| match normalize(c.apply(j as i64, sections[j])) {
            Some(w) => sin_angle(w, sections[j + 1]),
            None => 1.0,
        })
        .collect())
}

/// Stable counterpart of [`unstable_orbit_residuals`].
pub fn stable_orbit_residuals(
    e: f64,
    sys: &SystemSpec,
    p: &SamplingFn,
    q: &SamplingFn,
    omega: &PhasePoint,
    depth: usize,
    steps: usize,
) -> Result<Vec<f64>> {
    let d = depth as i64;
    let s = steps as i64;
    let co = coefficients(sys, p, q, omega, -1, s + d + 1)?;
    let c = RealCocycle::new(e, &co)?;
    let sections: Vec<[f64; 2]> = (0..=s).map(|j| pull_stable(&c, j + d, j)).collect::<Result<_>>()?;
    Ok((0..s as usize)
        .map(|j| match normalize(c.apply(j as i64, sections[j])) {
            Some(w) => sin_angle(w, sections[j + 1]),
            None => 1.0,
        })
        .collect())
}

/// Parameters of the dominated-splitting test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DsParams {
    /// Number of sampled base points.
    pub grid: usize,
    /// Length of the products whose singular values are compared.
    pub n_star: usize,
    /// Required per-step domination rate.
    pub rho_min: f64,
    pub seed: u64,
    /// Orbit length, from each sampled point, along which the unstable and
    /// stable directions are compared.
    pub orbit_len: usize,
    /// Angles below this count as a collision of the two directions.
    pub collision_angle: f64,
}

impl Default for DsParams {
    fn default() -> Self {
        Self { grid: 64, n_star: 40, rho_min: 1.05, seed: 0, orbit_len: 1024, collision_angle: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DsStatus {
    /// `rho` is the smallest observed `(σ₁/σ₂)^{1/N*}`.
    Dominated { n_star: usize, rho: f64 },
    NotDominated { witness: Vec<f64>, reason: String },
    Inconclusive { min_ratio: f64, min_angle: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DsVerdict {
    pub energy: f64,
    #[serde(flatten)]
    pub status: DsStatus,
    pub params: DsParams,
}

impl DsVerdict {
    pub fn is_dominated(&self) -> bool {
        matches!(self.status, DsStatus::Dominated { .. })
    }
}

/// Coefficient windows for the dominated-splitting test, computed once and
/// reused for every energy of a sweep.
pub struct DsWorkspace {
    params: DsParams,
    points: Vec<PhasePoint>,
    windows: Vec<JacobiCoeffs>,
}

impl DsWorkspace {
    /// `|p|` replaces `p`: the gauge transformation is a unitary
    /// conjugation and changes neither singular values nor angles.
    pub fn new(sys: &SystemSpec, p: &SamplingFn, q: &SamplingFn, params: DsParams) -> Result<Self> {
        if !sys.is_invertible() {
            return Err(Error::NonInvertible);
        }
        if params.grid == 0 || params.n_star == 0 || params.orbit_len == 0 {
            return Err(Error::InvalidParameter("grid, n_star and orbit_len must be positive".into()));
        }
        let points = sys.sample_points(params.seed, params.grid);
        let n = params.n_star as i64;
        let m = params.orbit_len as i64;
        let windows = points
            .iter()
            .map(|pt| {
                let co = coefficients(sys, p, q, pt, -n - 1, m + n)?.modulus();
                if let Some(i) = co.a.iter().position(|z| z.re == 0.0) {
                    return Err(Error::SingularCocycle { site: co.start + i as i64 });
                }
                Ok(co)
            })
            .collect::<Result<_>>()?;
        Ok(Self { params, points, windows })
    }

    pub fn params(&self) -> &DsParams {
        &self.params
    }

    pub fn verdict(&self, e: f64) -> DsVerdict {
        let prm = &self.params;
        let n = prm.n_star as i64;
        let m = prm.orbit_len as i64;
        let mut min_ratio_log = f64::INFINITY;
        let mut min_angle = f64::INFINITY;
        let mut isometric: Option<usize> = None;
        let mut collision: Option<(usize, i64)> = None;
        let mut converged = true;
        for (g, co) in self.windows.iter().enumerate() {
            let (s1, s2) = product(e, co, 0, prm.n_star).log_singular_values();
            let log_ratio = s1 - s2;
            min_ratio_log = min_ratio_log.min(log_ratio);
            if log_ratio <= (1e-6f64).ln_1p() && isometric.is_none() {
                isometric = Some(g);
            }
            let c = RealCocycle::new(e, co).expect("moduli are real");
            // Unstable directions along the orbit, each with at least N* steps of history.
            let mut unstable = Vec::with_capacity(m as usize);
            let mut v = GENERIC;
            let mut w = [-GENERIC[1], GENERIC[0]];
            for site in -n..m {
                if site >= 0 {
                    unstable.push(v);
                }
                v = normalize(c.apply(site, v)).unwrap_or([1.0, 0.0]);
                if site < 0 {
                    w = normalize(c.apply(site, w)).unwrap_or([1.0, 0.0]);
                }
            }
            if sin_angle(unstable[0], w) > 1e-6 {
                converged = false;
            }
            let mut s = GENERIC;
            for site in (0..m + n).rev() {
                s = normalize(c.apply_inverse(site, s).expect("nonsingular")).unwrap_or(GENERIC);
                if site < m {
                    let ang = sin_angle(unstable[site as usize], s);
                    if ang < min_angle {
                        min_angle = ang;
                        if ang < prm.collision_angle && collision.is_none() {
                            collision = Some((g, site));
                        }
                    }
                }
            }
        }
        let witness = |g: usize| self.points[g].torus_coords();
        let status = if let Some(g) = isometric {
            DsStatus::NotDominated {
                witness: witness(g),
                reason: format!("singular value ratio of B_{} at most 1 + 1e-6", prm.n_star),
            }
        } else if let Some((g, site)) = collision {
            DsStatus::NotDominated {
                witness: witness(g),
                reason: format!("unstable and stable directions within angle {min_angle:.3e} at orbit site {site}"),
            }
        } else if converged && min_ratio_log >= prm.n_star as f64 * prm.rho_min.ln() {
            DsStatus::Dominated { n_star: prm.n_star, rho: (min_ratio_log / prm.n_star as f64).exp() }
        } else {
            DsStatus::Inconclusive { min_ratio: min_ratio_log.exp(), min_angle }
        };
        DsVerdict { energy: e, status, params: prm.clone() }
    }
}

/// Finite-orbit certificate for a dominated splitting of `B^E`.
///
/// At each sampled point the singular value ratio of `B_{N*}` must reach
/// `ρ_min^{N*}`, and along an orbit segment from each point the unstable
/// direction (pushed forward) and the stable direction (pulled back) must
/// stay at least `collision_angle` apart. Positive Lyapunov exponents make
/// the ratio large on the spectrum too, so the angle condition is what
/// separates the two regimes there.
pub fn dominated_splitting_test(
    e: f64,
    sys: &SystemSpec,
    p: &SamplingFn,
    q: &SamplingFn,
    params: &DsParams,
) -> Result<DsVerdict> {
    Ok(DsWorkspace::new(sys, p, q, params.clone())?.verdict(e))
}

/// Verdicts for many energies with one workspace.
pub fn ds_sweep(
    energies: &[f64],
    sys: &SystemSpec,
    p: &SamplingFn,
    q: &SamplingFn,
    params: &DsParams,
) -> Result<Vec<DsVerdict>> {
    let ws = DsWorkspace::new(sys, p, q, params.clone())?;
    Ok(energies.par_iter().map(|&e| ws.verdict(e)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::TrigPoly;
    use crate::GOLDEN;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn free() -> (SystemSpec, SamplingFn, SamplingFn) {
        (
            SystemSpec::rotation(vec![GOLDEN]).unwrap(),
            SamplingFn::constant(1, 1.0),
            SamplingFn::constant(1, 0.0),
        )
    }

    #[test]
    fn free_matrices() {
        let (sys, p, q) = free();
        let pt = PhasePoint::torus(vec![0.2]);
        assert_eq!(cocycle_matrix(3.0, &sys, &p, &q, &pt, false).unwrap(), Mat2::real(3.0, -1.0, 1.0, 0.0));
        assert_eq!(cocycle_matrix(0.0, &sys, &p, &q, &pt, false).unwrap(), Mat2::real(0.0, -1.0, 1.0, 0.0));
    }

    #[test]
    fn complex_p_conjugation() {
        let sys = SystemSpec::rotation(vec![GOLDEN]).unwrap();
        let p = SamplingFn::from(TrigPoly::exponential(vec![1], c(1.0, 0.0)));
        let q = SamplingFn::constant(1, 0.0);
        let m = cocycle_matrix(0.0, &sys, &p, &q, &PhasePoint::torus(vec![0.0]), false).unwrap();
        let expect = -Complex64::from_polar(1.0, 2.0 * PI * GOLDEN);
        assert!((m.b - expect).norm() < 1e-12);
        assert!((m.c - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(m.d, c(0.0, 0.0));
    }

    #[test]
    fn shifted_form_needed_for_doubling() {
        let sys = SystemSpec::doubling(2).unwrap();
        let p = SamplingFn::constant(1, 1.0);
        let q = SamplingFn::from(TrigPoly::cosine(vec![1], 2.0));
        let pt = PhasePoint::circle(0.1);
        assert!(matches!(cocycle_matrix(0.0, &sys, &p, &q, &pt, false), Err(Error::NonInvertible)));
        let m = cocycle_matrix(0.0, &sys, &p, &q, &pt, true).unwrap();
        assert!((m.a.re + 2.0 * (0.4 * PI).cos()).abs() < 1e-12);
    }

    #[test]
    fn iterate_base_cases() {
        let (sys, p, q) = free();
        let pt = PhasePoint::torus(vec![0.2]);
        assert_eq!(cocycle_iterate(3.0, &sys, &p, &q, &pt, 0, false).unwrap().value(), Mat2::identity());
        let one = cocycle_iterate(3.0, &sys, &p, &q, &pt, 1, false).unwrap().value();
        assert_eq!(one, cocycle_matrix(3.0, &sys, &p, &q, &pt, false).unwrap());
    }

    #[test]
    fn long_products_do_not_overflow() {
        let (sys, p, q) = free();
        let pt = PhasePoint::torus(vec![0.2]);
        let prod = cocycle_iterate(3.0, &sys, &p, &q, &pt, 2000, false).unwrap();
        let (l1, _) = prod.log_singular_values();
        let lyap = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((l1 / 2000.0 - lyap).abs() < 1e-3);
        assert!(prod.matrix.max_abs().is_finite());
    }

    #[test]
    fn solution_steps() {
        let co = JacobiCoeffs::from_real(0, &[1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(solution_action(1.0, &co, 0, 1.0, 0.0).unwrap(), SolutionStep::Next(1.0, 1.0));
        assert_eq!(solution_action(1.0, &co, 1, 1.0, 1.0).unwrap(), SolutionStep::ZeroImage);
    }

    #[test]
    fn rotation_free() {
        let (sys, p, q) = free();
        let pt = PhasePoint::torus(vec![0.0]);
        assert_eq!(rotation_number(3.0, &sys, &p, &q, &pt, 1000).unwrap(), 0.0);
        assert_eq!(rotation_number(-3.0, &sys, &p, &q, &pt, 1000).unwrap(), 1.0);
        let mid = rotation_number(0.1, &sys, &p, &q, &pt, 10_000).unwrap();
        assert!((mid - (1.0 - crate::ids::free_ids(0.1))).abs() < 1e-2);
        assert!(rotation_number(0.1, &sys, &p, &q, &pt, 10).is_err());
    }

    #[test]
    fn rotation_hits_eigenvalue() {
        // E = 0 for the free operator gives u = 1, 0, −1, 0, …
        let (sys, p, q) = free();
        let r = rotation_number(0.0, &sys, &p, &q, &PhasePoint::torus(vec![0.0]), 1000);
        assert!(matches!(r, Err(Error::SolutionHitsEigenvalue { index: 1 })));
    }

    #[test]
    fn singular_values_of_rotation() {
        let (s1, s2) = Mat2::real(0.0, -1.0, 1.0, 0.0).singular_values();
        assert!((s1 - 1.0).abs() < 1e-15 && (s2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn free_unstable_section() {
        let (sys, p, q) = free();
        let s = unstable_section(3.0, &sys, &p, &q, &PhasePoint::torus(vec![0.3]), 60).unwrap();
        let lam = (3.0 + 5f64.sqrt()) / 2.0;
        let expect = ProjectivePoint::from_vector(lam, 1.0);
        assert!(s.direction.distance(&expect) < 1e-12);
        assert!(s.residual <= 1e-10);
    }

    #[test]
    fn free_ds_verdicts() {
        let (sys, p, q) = free();
        let prm = DsParams { grid: 4, orbit_len: 64, ..Default::default() };
        let v = dominated_splitting_test(3.0, &sys, &p, &q, &prm).unwrap();
        match v.status {
            DsStatus::Dominated { rho, .. } => assert!((rho - 6.854).abs() < 0.2, "{rho}"),
            other => panic!("{other:?}"),
        }
        let v = dominated_splitting_test(0.0, &sys, &p, &q, &prm).unwrap();
        assert!(matches!(v.status, DsStatus::NotDominated { .. }));
    }

    #[test]
    fn ds_rejects_singular_cocycle() {
        let sys = SystemSpec::rotation(vec![GOLDEN]).unwrap();
        let p = SamplingFn::clamp_below(TrigPoly::cosine(vec![1], 1.0), 0.5).unwrap();
        let q = SamplingFn::constant(1, 0.0);
        let r = dominated_splitting_test(5.0, &sys, &p, &q, &DsParams::default());
        assert!(matches!(r, Err(Error::SingularCocycle { .. })));
    }
}
