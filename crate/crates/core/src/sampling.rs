//! Sampling functions (trigonometric polynomials with an optional pointwise
//! post-map) and the Jacobi coefficient sequences they produce along orbits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::dynamics::{PhasePoint, SystemSpec};
use crate::error::{Error, Result};

/// `Σ c_k e^{2πi k·ω}` over a finite set of frequencies `k ∈ Z^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    d: usize,
    real: bool,
    terms: BTreeMap<Vec<i64>, Complex64>,
}

impl TrigPoly {
    /// Builds and validates a polynomial. Repeated frequencies are summed.
    /// A real polynomial must satisfy `c_{−k} = conj(c_k)`.
    pub fn new(d: usize, real: bool, terms: impl IntoIterator<Item = (Vec<i64>, Complex64)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSampling("dimension must be positive".into()));
        }
        let mut map: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (k, c) in terms {
            if k.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: k.len() });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidSampling(format!("coefficient of {k:?} is not finite")));
            }
            *map.entry(k).or_default() += c;
        }
        if real {
            for (k, c) in &map {
                let neg: Vec<i64> = k.iter().map(|x| -x).collect();
                let partner = map.get(&neg).copied().unwrap_or_default();
                if (partner - c.conj()).norm() > 1e-12 * c.norm().max(1.0) {
                    return Err(Error::InvalidSampling(format!(
                        "flagged real but c{neg:?} is not the conjugate of c{k:?}"
                    )));
                }
            }
        }
        Ok(Self { d, real, terms: map })
    }

    pub fn constant(d: usize, c: f64) -> Self {
        Self::new(d, true, [(vec![0; d], Complex64::new(c, 0.0))]).expect("valid constant")
    }

    /// `amp · cos(2π k·ω)`.
    pub fn cosine(k: Vec<i64>, amp: f64) -> Self {
        let neg = k.iter().map(|x| -x).collect();
        let h = Complex64::new(amp / 2.0, 0.0);
        Self::new(k.len(), true, [(k, h), (neg, h)]).expect("valid cosine")
    }

    /// `amp · sin(2π k·ω)`.
    pub fn sine(k: Vec<i64>, amp: f64) -> Self {
        let neg = k.iter().map(|x| -x).collect();
        let h = Complex64::new(0.0, -amp / 2.0);
        Self::new(k.len(), true, [(k, h), (neg, h.conj())]).expect("valid sine")
    }

    /// `c · e^{2πi k·ω}`, a complex polynomial.
    pub fn exponential(k: Vec<i64>, c: Complex64) -> Self {
        Self::new(k.len(), false, [(k, c)]).expect("valid exponential")
    }

    /// Sum of two polynomials of the same dimension; real iff both are.
    pub fn plus(&self, other: &TrigPoly) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: other.d });
        }
        let terms = self.terms.iter().chain(&other.terms).map(|(k, c)| (k.clone(), *c));
        Self::new(self.d, self.real && other.real, terms)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.terms.iter()
    }

    /// `Σ |c_k|`, an upper bound for the modulus.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Evaluate at torus coordinates (length must equal the dimension).
    pub fn eval_at(&self, x: &[f64]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (k, c) in &self.terms {
            let phase: f64 = k.iter().zip(x).map(|(ki, xi)| *ki as f64 * xi).sum();
            let (sn, cs) = (TAU * (phase - phase.floor())).sin_cos();
            s += c * Complex64::new(cs, sn);
        }
        if self.real {
            s.im = 0.0;
        }
        s
    }
}

/// Pointwise map applied after the polynomial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PostMap {
    Identity,
    /// `ω ↦ max(0, f(ω) − t)`; `f` must be real.
    ClampBelow(f64),
    /// `ω ↦ |f(ω)|`.
    Modulus,
}

/// A sampling function `p` or `q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSamplingFn", into = "RawSamplingFn")]
pub struct SamplingFn {
    base: TrigPoly,
    post: PostMap,
}

impl From<TrigPoly> for SamplingFn {
    fn from(base: TrigPoly) -> Self {
        Self { base, post: PostMap::Identity }
    }
}

impl SamplingFn {
    pub fn new(base: TrigPoly, post: PostMap) -> Result<Self> {
        match post {
            PostMap::ClampBelow(_) if !base.real => {
                Err(Error::InvalidSampling("clamp_below needs a real base polynomial".into()))
            }
            PostMap::ClampBelow(t) if !t.is_finite() => {
                Err(Error::InvalidSampling("clamp threshold must be finite".into()))
            }
            _ => Ok(Self { base, post }),
        }
    }

    pub fn constant(d: usize, c: f64) -> Self {
        TrigPoly::constant(d, c).into()
    }

    pub fn clamp_below(base: TrigPoly, t: f64) -> Result<Self> {
        Self::new(base, PostMap::ClampBelow(t))
    }

    /// `|self|`; the modulus of an already clamped or modulus function is
    /// itself.
    pub fn modulus(&self) -> Self {
        match self.post {
            PostMap::Identity => Self { base: self.base.clone(), post: PostMap::Modulus },
            _ => self.clone(),
        }
    }

    pub fn base(&self) -> &TrigPoly {
        &self.base
    }

    pub fn post(&self) -> PostMap {
        self.post
    }

    pub fn dim(&self) -> usize {
        self.base.d
    }

    pub fn is_real(&self) -> bool {
        self.base.real || self.post != PostMap::Identity
    }

    /// Whether the values are real and non-negative by construction.
    pub fn is_nonnegative(&self) -> bool {
        self.post != PostMap::Identity
    }

    pub fn eval_at(&self, x: &[f64]) -> Complex64 {
        let v = self.base.eval_at(x);
        match self.post {
            PostMap::Identity => v,
            PostMap::ClampBelow(t) => Complex64::new((v.re - t).max(0.0), 0.0),
            PostMap::Modulus => Complex64::new(v.norm(), 0.0),
        }
    }

    /// Evaluate on the phase point. Solenoid points are evaluated through
    /// their circle coordinate.
    pub fn eval(&self, sys: &SystemSpec, pt: &PhasePoint) -> Result<Complex64> {
        let dim = sys.torus_dim();
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: self.dim() });
        }
        if pt.torus_dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: pt.torus_dim() });
        }
        Ok(self.eval_point(pt))
    }

    pub(crate) fn eval_point(&self, pt: &PhasePoint) -> Complex64 {
        match pt {
            PhasePoint::Torus(x) => self.eval_at(x),
            PhasePoint::Circle(a) | PhasePoint::Solenoid { angle: a, .. } => self.eval_at(&[a.to_f64()]),
        }
    }

    /// Minimum of `|f|` over a uniform grid of `per_axis^d` points.
    pub fn grid_min_modulus(&self, per_axis: usize) -> f64 {
        let d = self.dim();
        let total = per_axis.pow(d as u32);
        let mut x = vec![0.0; d];
        let mut best = f64::INFINITY;
        for idx in 0..total {
            let mut r = idx;
            for xi in x.iter_mut() {
                *xi = (r % per_axis) as f64 / per_axis as f64;
                r /= per_axis;
            }
            best = best.min(self.eval_at(&x).norm());
        }
        best
    }

    /// Whether `f` has zeros: always for a clamp whose threshold is at most
    /// the polynomial's maximum, otherwise judged on a fine grid.
    pub fn may_vanish(&self) -> bool {
        let per_axis = match self.dim() {
            1 => 4096,
            2 => 256,
            3 => 40,
            _ => 12,
        };
        self.grid_min_modulus(per_axis) < 1e-9
            || matches!(self.post, PostMap::ClampBelow(t) if t < self.base.l1_norm())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    k: Vec<i64>,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawPost {
    Identity,
    ClampBelow,
    Modulus,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSamplingFn {
    d: usize,
    real: bool,
    terms: Vec<RawTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    post: Option<RawPost>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
}

impl TryFrom<RawSamplingFn> for SamplingFn {
    type Error = Error;

    fn try_from(raw: RawSamplingFn) -> Result<Self> {
        let base = TrigPoly::new(
            raw.d,
            raw.real,
            raw.terms.into_iter().map(|t| (t.k, Complex64::new(t.re, t.im))),
        )?;
        let post = match (raw.post, raw.t) {
            (None | Some(RawPost::Identity), None) => PostMap::Identity,
            (Some(RawPost::Modulus), None) => PostMap::Modulus,
            (Some(RawPost::ClampBelow), Some(t)) => PostMap::ClampBelow(t),
            (Some(RawPost::ClampBelow), None) => {
                return Err(Error::InvalidSampling("clamp_below needs a threshold \"t\"".into()))
            }
            (_, Some(_)) => {
                return Err(Error::InvalidSampling("\"t\" is only meaningful with clamp_below".into()))
            }
        };
        SamplingFn::new(base, post)
    }
}

impl From<SamplingFn> for RawSamplingFn {
    fn from(f: SamplingFn) -> Self {
        let (post, t) = match f.post {
            PostMap::Identity => (None, None),
            PostMap::ClampBelow(t) => (Some(RawPost::ClampBelow), Some(t)),
            PostMap::Modulus => (Some(RawPost::Modulus), None),
        };
        RawSamplingFn {
            d: f.base.d,
            real: f.base.real,
            terms: f
                .base
                .terms
                .into_iter()
                .map(|(k, c)| RawTerm { k, re: c.re, im: c.im })
                .collect(),
            post,
            t,
        }
    }
}

/// Coefficients `a(n) = p(Tⁿω)`, `b(n) = q(Tⁿω)` on the window `[start, end]`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiCoeffs {
    pub start: i64,
    pub a: Vec<Complex64>,
    pub b: Vec<f64>,
}

impl JacobiCoeffs {
    /// Coefficients given directly, indexed from `start`.
    pub fn new(start: i64, a: Vec<Complex64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: b.len(), found: a.len() });
        }
        Ok(Self { start, a, b })
    }

    pub fn from_real(start: i64, a: &[f64], b: &[f64]) -> Result<Self> {
        Self::new(start, a.iter().map(|&x| Complex64::new(x, 0.0)).collect(), b.to_vec())
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// Last index of the window.
    pub fn end(&self) -> i64 {
        self.start + self.b.len() as i64 - 1
    }

    pub fn a_at(&self, n: i64) -> Complex64 {
        self.a[(n - self.start) as usize]
    }

    pub fn b_at(&self, n: i64) -> f64 {
        self.b[(n - self.start) as usize]
    }

    /// Whether every `a(n)` is real and non-negative.
    pub fn is_gauge_reduced(&self) -> bool {
        self.a.iter().all(|z| z.im == 0.0 && z.re >= 0.0)
    }

    /// The same window with `a` replaced by `|a|`.
    pub fn modulus(&self) -> Self {
        Self {
            start: self.start,
            a: self.a.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect(),
            b: self.b.clone(),
        }
    }

    /// `|a|` as reals.
    pub fn abs_a(&self) -> Vec<f64> {
        self.a.iter().map(|z| z.norm()).collect()
    }
}

/// Fill `a(n) = p(Tⁿω)`, `b(n) = q(Tⁿω)` for `n ∈ [start, end]` in one pass.
pub fn coefficients(
    sys: &SystemSpec,
    p: &SamplingFn,
    q: &SamplingFn,
    omega: &PhasePoint,
    start: i64,
    end: i64,
) -> Result<JacobiCoeffs> {
    if !q.is_real() {
        return Err(Error::NotReal);
    }
    let dim = sys.torus_dim();
    for f in [p, q] {
        if f.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: f.dim() });
        }
    }
    if end < start {
        return Err(Error::InvalidParameter(format!("empty window [{start}, {end}]")));
    }
    if start < 0 && !sys.is_invertible() {
        return Err(Error::NonInvertible);
    }
    let available = sys.resolved_steps(omega);
    if end > available {
        return Err(Error::PrecisionExhausted { requested: end, available });
    }
    let mut pt = sys.iterate(omega, start)?;
    let len = (end - start + 1) as usize;
    let mut a = Vec::with_capacity(len);
    let mut b = Vec::with_capacity(len);
    for i in 0..len {
        if i > 0 {
            sys.step(&mut pt);
        }
        a.push(p.eval_point(&pt));
        b.push(q.eval_point(&pt).re);
    }
    Ok(JacobiCoeffs { start, a, b })
}
