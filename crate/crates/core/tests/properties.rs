use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gaplab::cocycle::{product, rotation_number, transfer_matrix, Mat2};
use gaplab::dynamics::{PhasePoint, SamplerConfig};
use gaplab::ids::{dos_estimate, ids_eval};
use gaplab::labelling::{integer_kernel, match_label, LabelGroup};
use gaplab::oscillation::{count_interpolated_zeros, dirichlet_solution};
use gaplab::sampling::coefficients;
use gaplab::tridiag::{eigenvalues, gauge_reduce, sturm_count, JacobiBlock};
use gaplab::{JacobiCoeffs, SamplingFn, SystemSpec, TrigPoly, GOLDEN};

fn dense_real(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let a = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            diag[i]
        } else if j == i + 1 {
            off[i]
        } else if i == j + 1 {
            off[j]
        } else {
            0.0
        }
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn dense_hermitian(diag: &[f64], off: &[Complex64]) -> Vec<f64> {
    let m = diag.len();
    let a = DMatrix::from_fn(m, m, |i, j| {
        let z = if i == j {
            Complex64::new(diag[i], 0.0)
        } else if j == i + 1 {
            off[i]
        } else if i == j + 1 {
            off[j].conj()
        } else {
            Complex64::new(0.0, 0.0)
        };
        nalgebra::Complex::new(z.re, z.im)
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn block_strategy(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max).prop_flat_map(|m| {
        (prop::collection::vec(-3.0..3.0f64, m), prop::collection::vec(0.01..2.0f64, m - 1))
    })
}

#[test]
fn gauge_reduction_preserves_spectrum_500_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for _ in 0..500 {
        let m = rng.gen_range(1..=30);
        let diag: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let off: Vec<Complex64> = (0..m - 1)
            .map(|_| {
                if rng.gen_bool(0.1) {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(rng.gen_range(0.0..2.0), rng.gen_range(-3.2..3.2))
                }
            })
            .collect();
        let dense = dense_hermitian(&diag, &off);
        let block = gauge_reduce(&JacobiBlock::new(diag, off).unwrap());
        let ours = eigenvalues(&block, 1e-13).unwrap().values;
        for (x, y) in dense.iter().zip(&ours) {
            assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
        }
    }
}

proptest! {
    #[test]
    fn eigenvalues_match_dense((diag, off) in block_strategy(40)) {
        let dense = dense_real(&diag, &off);
        let ours = eigenvalues(&JacobiBlock::from_real(&diag, &off).unwrap(), 1e-12).unwrap().values;
        prop_assert_eq!(ours.len(), dense.len());
        for (x, y) in dense.iter().zip(&ours) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn sturm_count_is_eigenvalue_count((diag, off) in block_strategy(30), e in -7.0..7.0f64) {
        let dense = dense_real(&diag, &off);
        prop_assume!(dense.iter().all(|x| (x - e).abs() > 1e-9));
        let block = JacobiBlock::from_real(&diag, &off).unwrap();
        prop_assert_eq!(sturm_count(&block, e).unwrap(), dense.iter().filter(|&&x| x <= e).count());
    }

    #[test]
    fn leading_blocks_interlace((diag, off) in block_strategy(25)) {
        let block = JacobiBlock::from_real(&diag, &off).unwrap();
        let m = block.size();
        prop_assume!(m >= 2);
        let big = eigenvalues(&block, 1e-13).unwrap().values;
        let small = eigenvalues(&block.leading(m - 1).unwrap(), 1e-13).unwrap().values;
        for (j, mu) in small.iter().enumerate() {
            prop_assert!(big[j] <= mu + 1e-10 && *mu <= big[j + 1] + 1e-10);
        }
    }

    #[test]
    fn oscillation_against_dense((diag, off) in block_strategy(12), e in -6.0..6.0f64, t in 0.05..20.0f64) {
        let dense = dense_real(&diag, &off);
        prop_assume!(dense.iter().all(|x| (x - e).abs() >= 1e-6));
        let block = JacobiBlock::from_real(&diag, &off).unwrap();
        let f = count_interpolated_zeros(&dirichlet_solution(&block, e, t).unwrap());
        prop_assert_eq!(f, dense.iter().filter(|&&x| x > e).count());
    }

    #[test]
    fn group_elements_match_exactly(m in -100i64..=100, n in -3i64..=3) {
        let group = LabelGroup::affine(&[vec![1]], &[GOLDEN]).unwrap();
        let v = m as f64 * GOLDEN + n as f64;
        let k = v - v.floor();
        let r = match_label(k, &group, 1e-9).unwrap();
        prop_assert!(r.residual <= 1e-12);
    }

    #[test]
    fn rotation_number_in_unit_interval(e in -9.0..9.0f64, seed in 0u64..50) {
        let sys = SystemSpec::rotation(vec![GOLDEN]).unwrap();
        let q = SamplingFn::from(TrigPoly::cosine(vec![1], 6.0));
        let omega = sys.sample_points(seed, 1).remove(0);
        if let Ok(r) = rotation_number(e, &sys, &SamplingFn::constant(1, 1.0), &q, &omega, 1000) {
            prop_assert!((0.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn shift_covariance(seed in 0u64..1000, k in 0i64..50) {
        let sys = SystemSpec::skew_shift(GOLDEN);
        let p = SamplingFn::from(TrigPoly::constant(2, 1.0).plus(&TrigPoly::cosine(vec![1, 1], 0.3)).unwrap());
        let q = SamplingFn::from(TrigPoly::cosine(vec![0, 1], 1.0));
        let w = sys.sample_points(seed, 1).remove(0);
        let shifted = coefficients(&sys, &p, &q, &sys.iterate(&w, k).unwrap(), 0, 20).unwrap();
        let direct = coefficients(&sys, &p, &q, &w, k, k + 20).unwrap();
        prop_assert_eq!(shifted.a, direct.a);
        prop_assert_eq!(shifted.b, direct.b);
    }
}

#[test]
fn transfer_matrix_determinant_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let n = rng.gen_range(1..12usize);
        let a: Vec<Complex64> =
            (0..=n + 1).map(|_| Complex64::from_polar(rng.gen_range(0.2..2.0), rng.gen_range(-3.0..3.0))).collect();
        let b: Vec<f64> = (0..=n + 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let co = JacobiCoeffs::new(0, a.clone(), b).unwrap();
        let e = rng.gen_range(-3.0..3.0);
        let m = product(e, &co, 1, n);
        let direct = (1..=n as i64).fold(Mat2::identity(), |acc, s| transfer_matrix(e, &co, s) * acc);
        let expected: Complex64 = (1..=n).map(|s| a[s] * a[s - 1].conj()).product();
        assert!((direct.det() - expected).norm() <= 1e-9 * expected.norm().max(1.0));
        let log_det: f64 = (1..=n).map(|s| a[s].norm().ln() + a[s - 1].norm().ln()).sum();
        assert!((m.log_abs_det - log_det).abs() <= 1e-9);
    }
}

/// Kolmogorov–Smirnov statistic of a sample against the uniform law.
fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

#[test]
fn doubling_step_preserves_lebesgue() {
    let sys = SystemSpec::doubling(2).unwrap();
    let n = 100_000;
    let cfg = SamplerConfig { angle_bits: 128, ..SamplerConfig::default() };
    let xs: Vec<f64> = sys
        .sample_points_with(9, n, &cfg)
        .iter()
        .map(|p| match sys.iterate(p, 1).unwrap() {
            PhasePoint::Circle(a) => a.to_f64(),
            _ => unreachable!(),
        })
        .collect();
    let d = ks_uniform(xs);
    assert!(d <= 1.628 / (n as f64).sqrt(), "KS statistic {d}");
}

#[test]
fn solenoid_projects_to_doubling() {
    let sol = SystemSpec::solenoid(0.3).unwrap();
    let dbl = SystemSpec::doubling(2).unwrap();
    for pt in sol.sample_points(4, 50) {
        for k in [1, 7, 60] {
            let up = sol.iterate(&pt, k).unwrap().project_to_circle().unwrap();
            let down = dbl.iterate(&pt.project_to_circle().unwrap(), k).unwrap();
            assert_eq!(up, down);
        }
    }
}

fn det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i128>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect()).collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            sign * m[0][j] * det_i128(&minor)
        })
        .sum()
}

/// Rank as the size of the largest non-vanishing minor.
fn rank_by_minors(m: &[Vec<i128>]) -> usize {
    let n = m.len();
    for k in (1..=n).rev() {
        for rows in 0u32..(1 << n) {
            if rows.count_ones() as usize != k {
                continue;
            }
            for cols in 0u32..(1 << n) {
                if cols.count_ones() as usize != k {
                    continue;
                }
                let sub: Vec<Vec<i128>> = (0..n)
                    .filter(|i| rows >> i & 1 == 1)
                    .map(|i| (0..n).filter(|j| cols >> j & 1 == 1).map(|j| m[i][j]).collect())
                    .collect();
                if det_i128(&sub) != 0 {
                    return k;
                }
            }
        }
    }
    0
}

fn random_unimodular(rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<i64>> {
    let mut a: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..rng.gen_range(0..6) {
        let (i, j) = (rng.gen_range(0..d), rng.gen_range(0..d));
        if i == j {
            continue;
        }
        let c = rng.gen_range(-2..=2);
        for k in 0..d {
            a[i][k] += c * a[j][k];
        }
    }
    if rng.gen_bool(0.3) && d >= 2 {
        a.swap(0, 1);
    }
    a
}

#[test]
fn kernel_is_exact_and_has_full_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..300 {
        let d = rng.gen_range(1..=4);
        let a = random_unimodular(&mut rng, d);
        let kernel = integer_kernel(&a).unwrap();
        let m: Vec<Vec<i128>> =
            (0..d).map(|i| (0..d).map(|j| i128::from(i == j) - i128::from(a[j][i])).collect()).collect();
        for v in &kernel {
            for row in &m {
                assert_eq!(row.iter().zip(v).map(|(x, y)| x * i128::from(*y)).sum::<i128>(), 0);
            }
        }
        assert_eq!(kernel.len(), d - rank_by_minors(&m), "A = {a:?}");
        if !kernel.is_empty() {
            let k: Vec<Vec<i128>> = kernel.iter().map(|v| v.iter().map(|&x| i128::from(x)).collect()).collect();
            let gram: Vec<Vec<i128>> =
                k.iter().map(|u| k.iter().map(|v| u.iter().zip(v).map(|(x, y)| x * y).sum()).collect()).collect();
            assert_ne!(det_i128(&gram), 0, "kernel basis is dependent");
        }
    }
}

#[test]
fn dos_is_a_probability_measure_and_deterministic() {
    let sys = SystemSpec::cat_map();
    let p = SamplingFn::constant(2, 1.0);
    let q = SamplingFn::from(TrigPoly::cosine(vec![1, 1], 1.5));
    let a = dos_estimate(&sys, &p, &q, 5, 4, 300).unwrap();
    let b = dos_estimate(&sys, &p, &q, 5, 4, 300).unwrap();
    assert_eq!(a, b);
    assert!((a.total_weight() - 1.0).abs() < 1e-12);
    let (lo, hi) = a.range();
    assert_eq!(ids_eval(&a, lo - 1.0), 0.0);
    assert!((ids_eval(&a, hi) - 1.0).abs() < 1e-12);
}
