//! Finite Jacobi blocks, gauge reduction, Sturm counts and a bisection
//! eigensolver.

use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

use crate::error::{Error, Result};
use crate::sampling::JacobiCoeffs;

/// An `m×m` Jacobi matrix with `b` on the diagonal, `a(n)` at `(n, n+1)` and
/// `conj a(n)` at `(n+1, n)`. `phases` holds the diagonal unitary produced by
/// [`gauge_reduce`] (all ones otherwise).
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiBlock {
    start: i64,
    diag: Vec<f64>,
    offdiag: Vec<Complex64>,
    phases: Vec<Complex64>,
}

impl JacobiBlock {
    pub fn new(diag: Vec<f64>, offdiag: Vec<Complex64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::EmptyBlock);
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch { expected: diag.len() - 1, found: offdiag.len() });
        }
        let phases = vec![Complex64::new(1.0, 0.0); diag.len()];
        Ok(Self { start: 0, diag, offdiag, phases })
    }

    pub fn from_real(diag: &[f64], offdiag: &[f64]) -> Result<Self> {
        Self::new(diag.to_vec(), offdiag.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Zero diagonal, unit off-diagonal.
    pub fn free(m: usize) -> Self {
        Self::from_real(&vec![0.0; m], &vec![1.0; m.saturating_sub(1)]).expect("m ≥ 1")
    }

    /// Lattice index of the first row.
    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[Complex64] {
        &self.offdiag
    }

    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    pub fn is_gauge_reduced(&self) -> bool {
        self.offdiag.iter().all(|z| z.im == 0.0 && z.re >= 0.0)
    }

    /// Off-diagonal as reals, if the block is gauge-reduced.
    pub fn real_offdiag(&self) -> Result<Vec<f64>> {
        if !self.is_gauge_reduced() {
            return Err(Error::NotGaugeReduced);
        }
        Ok(self.offdiag.iter().map(|z| z.re).collect())
    }

    /// Leading `k×k` principal submatrix.
    pub fn leading(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.size() {
            return Err(Error::InvalidParameter(format!("leading size {k} outside 1..={}", self.size())));
        }
        Ok(Self {
            start: self.start,
            diag: self.diag[..k].to_vec(),
            offdiag: self.offdiag[..k - 1].to_vec(),
            phases: self.phases[..k].to_vec(),
        })
    }

    /// Rows `n, b, re_a, im_a`; the last row has no off-diagonal entry.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "b", "re_a", "im_a"])?;
        for (i, b) in self.diag.iter().enumerate() {
            let n = (self.start + i as i64).to_string();
            match self.offdiag.get(i) {
                Some(a) => w.write_record([n, b.to_string(), a.re.to_string(), a.im.to_string()])?,
                None => w.write_record([n, b.to_string(), String::new(), String::new()])?,
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// The block of `coeffs` on `[lo, hi]`: `b(lo..=hi)` and `a(lo..hi)`.
pub fn build_block(coeffs: &JacobiCoeffs, lo: i64, hi: i64) -> Result<JacobiBlock> {
    if hi < lo {
        return Err(Error::EmptyBlock);
    }
    if lo < coeffs.start || hi > coeffs.end() {
        return Err(Error::InvalidParameter(format!(
            "[{lo}, {hi}] is not inside the window [{}, {}]",
            coeffs.start,
            coeffs.end()
        )));
    }
    let i0 = (lo - coeffs.start) as usize;
    let i1 = (hi - coeffs.start) as usize;
    let mut block = JacobiBlock::new(coeffs.b[i0..=i1].to_vec(), coeffs.a[i0..i1].to_vec())?;
    block.start = lo;
    Ok(block)
}

/// Conjugate by `Λ = diag(λ)`, `λ₀ = 1`, `λₙ₊₁ = λₙ e^{−i Arg a(n)}` (with
/// `e^{−i Arg 0} = 1`), turning every off-diagonal entry into `|a(n)|`.
pub fn gauge_reduce(block: &JacobiBlock) -> JacobiBlock {
    let one = Complex64::new(1.0, 0.0);
    let mut phases = Vec::with_capacity(block.size());
    let mut lam = one;
    phases.push(lam);
    for a in &block.offdiag {
        let r = a.norm();
        let rot = if r == 0.0 { one } else { a.conj() / r };
        lam *= rot;
        phases.push(lam);
    }
    JacobiBlock {
        start: block.start,
        diag: block.diag.clone(),
        offdiag: block.offdiag.iter().map(|a| Complex64::new(a.norm(), 0.0)).collect(),
        phases,
    }
}

/// Real symmetric tridiagonal data prepared for repeated Sturm counts.
#[derive(Clone, Debug)]
pub(crate) struct SturmData {
    diag: Vec<f64>,
    off2: Vec<f64>,
    pivmin: f64,
}

impl SturmData {
    pub(crate) fn new(diag: &[f64], off: &[f64]) -> Self {
        let off2: Vec<f64> = off.iter().map(|a| a * a).collect();
        let max2 = off2.iter().copied().fold(1.0f64, f64::max);
        Self { diag: diag.to_vec(), off2, pivmin: f64::MIN_POSITIVE * max2 }
    }

    fn from_block(block: &JacobiBlock) -> Result<Self> {
        Ok(Self::new(&block.diag, &block.real_offdiag()?))
    }

    /// Number of negative pivots of `J − E` = number of eigenvalues `≤ E`.
    pub(crate) fn count(&self, e: f64) -> usize {
        let mut count = 0;
        let mut d = self.diag[0] - e;
        if d.abs() <= self.pivmin {
            d = -self.pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
        for (b, a2) in self.diag[1..].iter().zip(&self.off2) {
            d = (b - e) - a2 / d;
            if d.abs() <= self.pivmin {
                d = -self.pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let m = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..m {
            let mut r = 0.0;
            if i > 0 {
                r += self.off2[i - 1].sqrt();
            }
            if i + 1 < m {
                r += self.off2[i].sqrt();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        let pad = 1e-12 * (hi - lo).abs().max(1.0) + self.pivmin;
        (lo - pad, hi + pad)
    }

    /// Sturm counts at `LANES` energies in one sweep. The pivot recurrence
    /// is a chain of dependent divisions; running independent chains side by
    /// side keeps the divider busy.
    fn count_lanes(&self, e: &[f64; LANES]) -> [usize; LANES] {
        let pivmin = self.pivmin;
        let fix = |d: f64| if d.abs() <= pivmin { -pivmin } else { d };
        let mut d = [0.0f64; LANES];
        let mut count = [0usize; LANES];
        for l in 0..LANES {
            d[l] = fix(self.diag[0] - e[l]);
            count[l] = usize::from(d[l] < 0.0);
        }
        for (b, a2) in self.diag[1..].iter().zip(&self.off2) {
            for l in 0..LANES {
                d[l] = fix((b - e[l]) - a2 / d[l]);
                count[l] += usize::from(d[l] < 0.0);
            }
        }
        count
    }

    /// All eigenvalues in increasing order, each bracketed to width `tol`.
    ///
    /// Every bracket carries the counts at its ends, so the eigenvalues it
    /// holds have known positions in the output; brackets are refined in
    /// batches of independent probes.
    pub(crate) fn eigenvalues(&self, tol: f64) -> Vec<f64> {
        let m = self.diag.len();
        if m == 1 {
            return vec![self.diag[0]];
        }
        let (lo, hi) = self.gershgorin();
        let mut out = vec![f64::NAN; m];
        let mut active = vec![(lo, hi, self.count(lo), self.count(hi))];
        let mut next = Vec::new();
        while !active.is_empty() {
            let mut pending = Vec::with_capacity(active.len());
            for &(lo, hi, clo, chi) in &active {
                let mid = 0.5 * (lo + hi);
                if hi - lo <= tol || mid <= lo || mid >= hi {
                    out[clo..chi].fill(mid);
                } else {
                    pending.push((lo, hi, clo, chi));
                }
            }
            for chunk in pending.chunks(LANES) {
                let mut probes = [0.0; LANES];
                for (l, probe) in probes.iter_mut().enumerate() {
                    let (lo, hi, _, _) = chunk[l.min(chunk.len() - 1)];
                    *probe = 0.5 * (lo + hi);
                }
                let counts = self.count_lanes(&probes);
                for (l, &(lo, hi, clo, chi)) in chunk.iter().enumerate() {
                    let (mid, cmid) = (probes[l], counts[l].clamp(clo, chi));
                    if cmid > clo {
                        next.push((lo, mid, clo, cmid));
                    }
                    if chi > cmid {
                        next.push((mid, hi, cmid, chi));
                    }
                }
            }
            std::mem::swap(&mut active, &mut next);
            next.clear();
        }
        out
    }
}

const LANES: usize = 8;

/// Number of eigenvalues `≤ E`, with multiplicity.
pub fn sturm_count(block: &JacobiBlock, e: f64) -> Result<usize> {
    Ok(SturmData::from_block(block)?.count(e))
}

/// Sorted eigenvalues with the bracket width used.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenList {
    pub values: Vec<f64>,
    pub tol: f64,
}

/// Eigenvalues by Sturm bisection, each located to within `tol`.
pub fn eigenvalues(block: &JacobiBlock, tol: f64) -> Result<EigenList> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let data = SturmData::from_block(block)?;
    Ok(EigenList { values: data.eigenvalues(tol), tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn build_from_coeffs() {
        let co = JacobiCoeffs::from_real(0, &[1.0, 1.0, 0.0], &[0.0, 0.0, 0.0]).unwrap();
        let b = build_block(&co, 0, 2).unwrap();
        assert_eq!(b.size(), 3);
        assert_eq!(b.offdiag(), &[c(1.0, 0.0), c(1.0, 0.0)]);
        let one = build_block(&co, 1, 1).unwrap();
        assert_eq!(one.size(), 1);
        assert!(one.offdiag().is_empty());
        assert!(matches!(build_block(&co, 2, 1), Err(Error::EmptyBlock)));
        let zeros = JacobiCoeffs::from_real(0, &[1.0, 0.0, 1.0], &[0.0; 3]).unwrap();
        assert!(build_block(&zeros, 0, 2).is_ok());
    }

    #[test]
    fn gauge_examples() {
        let b = JacobiBlock::new(vec![0.0, 0.0], vec![c(0.0, 1.0)]).unwrap();
        let g = gauge_reduce(&b);
        assert_eq!(g.offdiag(), &[c(1.0, 0.0)]);
        assert!((g.phases()[1] - c(0.0, -1.0)).norm() < 1e-15);
        let e = eigenvalues(&g, 1e-12).unwrap().values;
        assert!((e[0] + 1.0).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);

        let real = JacobiBlock::from_real(&[1.0, 2.0, 3.0], &[0.5, 2.0]).unwrap();
        let g = gauge_reduce(&real);
        assert_eq!(g, real);

        let zero = JacobiBlock::new(vec![0.0, 0.0], vec![c(0.0, 0.0)]).unwrap();
        let g = gauge_reduce(&zero);
        assert_eq!(g.offdiag(), &[c(0.0, 0.0)]);
        assert_eq!(g.phases(), &[c(1.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn sturm_examples() {
        let f = JacobiBlock::free(3);
        assert_eq!(sturm_count(&f, 1.0).unwrap(), 2);
        assert_eq!(sturm_count(&f, -2.5).unwrap(), 0);
        assert_eq!(sturm_count(&f, 2.5).unwrap(), 3);
        let complex = JacobiBlock::new(vec![0.0, 0.0], vec![c(0.0, 1.0)]).unwrap();
        assert!(matches!(sturm_count(&complex, 0.0), Err(Error::NotGaugeReduced)));
    }

    #[test]
    fn exact_eigenvalue_probe() {
        // E = 0 is an eigenvalue of the free 3×3 block and hits a zero pivot.
        assert_eq!(sturm_count(&JacobiBlock::free(3), 0.0).unwrap(), 2);
    }

    #[test]
    fn free_eigenvalues() {
        let e = eigenvalues(&JacobiBlock::free(3), 1e-10).unwrap().values;
        for (x, y) in e.iter().zip([-SQRT_2, 0.0, SQRT_2]) {
            assert!((x - y).abs() <= 1e-10);
        }
        let n = 100;
        let e = eigenvalues(&JacobiBlock::free(n), 1e-12).unwrap().values;
        for (j, x) in e.iter().enumerate() {
            let exact = 2.0 * ((n - j) as f64 * PI / (n + 1) as f64).cos();
            assert!((x - exact).abs() <= 1e-11);
        }
    }

    #[test]
    fn one_by_one_is_exact() {
        let b = JacobiBlock::from_real(&[5.0], &[]).unwrap();
        assert_eq!(eigenvalues(&b, 1e-3).unwrap().values, vec![5.0]);
    }

    #[test]
    fn decoupled_blocks() {
        let b = JacobiBlock::from_real(&[1.0, 1.0, -3.0], &[0.0, 0.0]).unwrap();
        let e = eigenvalues(&b, 1e-13).unwrap().values;
        assert!((e[0] + 3.0).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12 && (e[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_rows() {
        let mut out = Vec::new();
        JacobiBlock::new(vec![1.0, 2.0], vec![c(0.5, -1.0)]).unwrap().write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "n,b,re_a,im_a\n0,1,0.5,-1\n1,2,,\n");
    }
}
