//! Exact integer linear algebra for small square matrices: determinants,
//! unimodular inverses and integer kernel bases in Hermite form.
//!
//! Everything runs on `BigInt` so intermediate growth in the elimination
//! can never overflow; the matrices involved are at most 8×8.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type IntMatrix = Vec<Vec<i64>>;

fn to_big(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

fn is_square(m: &[Vec<i64>]) -> bool {
    m.iter().all(|row| row.len() == m.len())
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &[Vec<i64>]) -> Result<BigInt> {
    if !is_square(m) {
        return Err(Error::InvalidParameter("matrix is not square".into()));
    }
    Ok(bareiss(to_big(m)))
}

fn bareiss(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Inverse of a unimodular integer matrix (det = ±1) via the adjugate.
pub fn unimodular_inverse(m: &[Vec<i64>]) -> Result<IntMatrix> {
    let det = determinant(m)?;
    if det.abs() != BigInt::one() {
        return Err(Error::InvalidSystem(format!(
            "matrix is not unimodular (det = {det})"
        )));
    }
    let n = m.len();
    let big = to_big(m);
    let mut inv = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            // cofactor C_ji lands in inv[i][j]
            let minor: Vec<Vec<BigInt>> = big
                .iter()
                .enumerate()
                .filter(|&(r, _)| r != j)
                .map(|(_, row)| {
                    row.iter()
                        .enumerate()
                        .filter(|&(c, _)| c != i)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            let mut c = bareiss(minor);
            if (i + j) % 2 == 1 {
                c = -c;
            }
            let v = c * &det;
            inv[i][j] = v
                .to_i64()
                .ok_or_else(|| Error::InvalidSystem("inverse entry overflows i64".into()))?;
        }
    }
    Ok(inv)
}

/// Integer row echelon form of `rows` using unimodular row operations.
/// Operations are mirrored onto `track`. Returns the pivot columns.
fn row_echelon(rows: &mut [Vec<BigInt>], track: &mut [Vec<BigInt>]) -> Vec<usize> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        // Euclid on column c between row r and every row below it.
        for i in r + 1..nrows {
            while !rows[i][c].is_zero() {
                if rows[r][c].is_zero() {
                    rows.swap(r, i);
                    track.swap(r, i);
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[r][c]);
                let (pr, pi) = (rows[r].clone(), track[r].clone());
                for (x, y) in rows[i].iter_mut().zip(&pr) {
                    *x -= &q * y;
                }
                for (x, y) in track[i].iter_mut().zip(&pi) {
                    *x -= &q * y;
                }
                rows.swap(r, i);
                track.swap(r, i);
            }
        }
        if !rows[r][c].is_zero() {
            if rows[r][c].is_negative() {
                for x in rows[r].iter_mut().chain(track[r].iter_mut()) {
                    *x = -x.clone();
                }
            }
            pivots.push(c);
            r += 1;
        }
    }
    pivots
}

/// Z-basis of the integer kernel {v ∈ Zᵈ : M v = 0}, returned in row
/// Hermite normal form (positive pivots, entries above pivots reduced).
pub fn integer_kernel_of(m: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    if !is_square(m) {
        return Err(Error::InvalidParameter("matrix is not square".into()));
    }
    let d = m.len();
    // Row-reduce Mᵀ while tracking U with U Mᵀ = H; zero rows of H give kernel rows of U.
    let mut rows: Vec<Vec<BigInt>> = (0..d)
        .map(|i| (0..d).map(|j| BigInt::from(m[j][i])).collect())
        .collect();
    let mut track: Vec<Vec<BigInt>> = (0..d)
        .map(|i| (0..d).map(|j| BigInt::from(i64::from(i == j))).collect())
        .collect();
    let rank = row_echelon(&mut rows, &mut track).len();
    let mut kernel: Vec<Vec<BigInt>> = track.split_off(rank);
    hermite_reduce(&mut kernel);
    kernel
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| {
                    x.to_i64()
                        .ok_or_else(|| Error::InvalidParameter("kernel entry overflows i64".into()))
                })
                .collect()
        })
        .collect()
}

fn hermite_reduce(basis: &mut [Vec<BigInt>]) {
    let mut dummy: Vec<Vec<BigInt>> = vec![Vec::new(); basis.len()];
    let pivots = row_echelon(basis, &mut dummy);
    for (r, &c) in pivots.iter().enumerate() {
        for i in 0..r {
            let q = basis[i][c].div_floor(&basis[r][c]);
            if !q.is_zero() {
                let pr = basis[r].clone();
                for (x, y) in basis[i].iter_mut().zip(&pr) {
                    *x -= &q * y;
                }
            }
        }
    }
}
