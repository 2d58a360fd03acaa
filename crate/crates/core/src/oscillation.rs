//! Dirichlet solutions, zero counts of their interpolations, and the block
//! decomposition of a Jacobi matrix whose off-diagonal vanishes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::JacobiCoeffs;
use crate::tridiag::{build_block, sturm_count, JacobiBlock};

/// Margin kept between probe energies and eigenvalues.
pub const SPECTRAL_MARGIN: f64 = 1e-9;

/// `u(−1..=m)` with `u(−1) = 0`, `u(0) = 1`, solving `Ju = Eu` on the block
/// and using `trailing` in place of the missing `a(m−1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletSolution {
    pub energy: f64,
    pub values: Vec<f64>,
    pub trailing: f64,
}

impl DirichletSolution {
    /// Block size `m`.
    pub fn size(&self) -> usize {
        self.values.len() - 2
    }

    /// `u(n)` for `−1 ≤ n ≤ m`.
    pub fn u(&self, n: i64) -> f64 {
        self.values[(n + 1) as usize]
    }

    /// `u(0..=m)`.
    pub fn from_zero(&self) -> &[f64] {
        &self.values[1..]
    }
}

pub fn dirichlet_solution(block: &JacobiBlock, e: f64, trailing: f64) -> Result<DirichletSolution> {
    let a = block.real_offdiag()?;
    if let Some(index) = a.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::NonPositiveOffdiag { index });
    }
    if !(trailing > 0.0) {
        return Err(Error::InvalidParameter(format!("trailing coefficient must be positive, got {trailing}")));
    }
    let b = block.diag();
    let m = b.len();
    let mut values = Vec::with_capacity(m + 2);
    values.extend([0.0, 1.0]);
    for n in 0..m {
        let (um, u) = (values[n], values[n + 1]);
        let left = if n == 0 { 0.0 } else { a[n - 1] * um };
        let right = if n + 1 < m { a[n] } else { trailing };
        values.push(((e - b[n]) * u - left) / right);
    }
    Ok(DirichletSolution { energy: e, values, trailing })
}

/// Zeros in the open interval `(0, L)` of the piecewise-linear interpolation
/// of `u(0..=L)`. A lattice zero counts once; a sign change between two
/// consecutive nonzero values counts once.
pub fn interpolated_zeros(u: &[f64]) -> usize {
    let len = u.len().saturating_sub(1);
    let lattice = (1..len).filter(|&j| u[j] == 0.0).count();
    let crossings = u
        .windows(2)
        .filter(|w| w[0] != 0.0 && w[1] != 0.0 && (w[0] < 0.0) != (w[1] < 0.0))
        .count();
    lattice + crossings
}

/// `F_m(E)`: zeros of the interpolated solution in `(0, m)`.
pub fn count_interpolated_zeros(sol: &DirichletSolution) -> usize {
    interpolated_zeros(sol.from_zero())
}

/// Whether `e` is at least `margin` away from every eigenvalue of the block.
pub fn clear_of_spectrum(block: &JacobiBlock, e: f64, margin: f64) -> Result<bool> {
    Ok(sturm_count(block, e - margin)? == sturm_count(block, e + margin)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationReport {
    pub m: usize,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "F")]
    pub zeros: usize,
    pub eig_above: usize,
    pub equal: bool,
}

/// Compare `F_m(E)` with the number of eigenvalues above `E`.
pub fn verify_oscillation(block: &JacobiBlock, e: f64) -> Result<OscillationReport> {
    verify_oscillation_with(block, e, 1.0)
}

pub fn verify_oscillation_with(block: &JacobiBlock, e: f64, trailing: f64) -> Result<OscillationReport> {
    if !clear_of_spectrum(block, e, SPECTRAL_MARGIN)? {
        return Err(Error::EnergyTooCloseToSpectrum { energy: e, tol: SPECTRAL_MARGIN });
    }
    let zeros = count_interpolated_zeros(&dirichlet_solution(block, e, trailing)?);
    let m = block.size();
    let eig_above = m - sturm_count(block, e)?;
    Ok(OscillationReport { m, energy: e, zeros, eig_above, equal: zeros == eig_above })
}

/// A maximal zero-free run `[first, last]` of a coefficient window.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSpan {
    pub first: i64,
    pub last: i64,
    /// The run starts at the window edge, so it may extend further left.
    pub leading_open: bool,
    /// The run ends at the window edge with `a(last) ≠ 0`.
    pub trailing_open: bool,
    pub block: JacobiBlock,
}

impl BlockSpan {
    pub fn len(&self) -> usize {
        (self.last - self.first + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bounded on both sides by zeros of `a` inside the window.
    pub fn is_complete(&self) -> bool {
        !self.leading_open && !self.trailing_open
    }
}

/// Positions where `a` vanishes and the blocks between them.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomposition {
    pub singular: Vec<i64>,
    pub blocks: Vec<BlockSpan>,
}

impl BlockDecomposition {
    pub fn complete_blocks(&self) -> impl Iterator<Item = &BlockSpan> {
        self.blocks.iter().filter(|b| b.is_complete())
    }
}

/// Split a gauge-reduced window at the exact zeros of `a`: the blocks are
/// `[n_r + 1, n_{r+1}]` for consecutive zeros `n_r < n_{r+1}`, plus the
/// partial runs at either edge.
pub fn split_blocks(coeffs: &JacobiCoeffs) -> Result<BlockDecomposition> {
    if !coeffs.is_gauge_reduced() {
        return Err(Error::NotGaugeReduced);
    }
    let end = coeffs.end();
    let singular: Vec<i64> = (coeffs.start..=end).filter(|&n| coeffs.a_at(n).re == 0.0).collect();
    let mut blocks = Vec::with_capacity(singular.len() + 1);
    let mut first = coeffs.start;
    let mut leading_open = true;
    for &z in &singular {
        blocks.push(BlockSpan {
            first,
            last: z,
            leading_open,
            trailing_open: false,
            block: build_block(coeffs, first, z)?,
        });
        first = z + 1;
        leading_open = false;
    }
    if first <= end {
        blocks.push(BlockSpan {
            first,
            last: end,
            leading_open,
            trailing_open: true,
            block: build_block(coeffs, first, end)?,
        });
    }
    Ok(BlockDecomposition { singular, blocks })
}

/// `f_r`: sign flips of the block's Dirichlet solution (trailing coefficient
/// 1) over the block and one step past it. Equals the number of block
/// eigenvalues above `E`.
pub fn block_sign_flips(block: &JacobiBlock, e: f64) -> Result<usize> {
    if !clear_of_spectrum(block, e, SPECTRAL_MARGIN)? {
        return Err(Error::EnergyTooCloseToBlockSpectrum { energy: e, tol: SPECTRAL_MARGIN });
    }
    Ok(count_interpolated_zeros(&dirichlet_solution(block, e, 1.0)?))
}

/// `(Σ f_r, Σ ℓ_r)` over the complete blocks.
pub fn block_flip_totals(decomp: &BlockDecomposition, e: f64) -> Result<(usize, usize)> {
    let mut flips = 0;
    let mut len = 0;
    for span in decomp.complete_blocks() {
        flips += block_sign_flips(&span.block, e)?;
        len += span.len();
    }
    Ok((flips, len))
}

/// `1 − Σ f_r / Σ ℓ_r`, the block-route estimate of the IDS at `E`.
pub fn block_route_ids(decomp: &BlockDecomposition, e: f64) -> Result<f64> {
    let (flips, len) = block_flip_totals(decomp, e)?;
    if len == 0 {
        return Err(Error::PreconditionViolated("no complete block in the window".into()));
    }
    Ok(1.0 - flips as f64 / len as f64)
}
