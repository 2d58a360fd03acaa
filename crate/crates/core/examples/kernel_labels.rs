//! Label groups from integer kernels: for `ω ↦ Aω + b` the labels are
//! `m·b + n` with `m` in the kernel of `I − Aᵀ`.
use gaplab::labelling::{integer_kernel, match_label, LabelGroup};

fn main() -> gaplab::Result<()> {
    let shift = vec![0.618_033_988_749_894_9, std::f64::consts::SQRT_2 - 1.0];
    let cases: [(&str, Vec<Vec<i64>>); 3] = [
        ("rotation", vec![vec![1, 0], vec![0, 1]]),
        ("skew shift", vec![vec![1, 0], vec![1, 1]]),
        ("cat map", vec![vec![2, 1], vec![1, 1]]),
    ];
    for (name, a) in cases {
        let kernel = integer_kernel(&a)?;
        let group = LabelGroup::affine(&a, &shift)?;
        println!("{name:<10} kernel {kernel:?} generators {:?}", group.generators());
    }

    let group = LabelGroup::affine(&[vec![1, 0], vec![1, 1]], &shift)?;
    for k in [0.381_966, 0.236_068, 0.5] {
        let m = match_label(k, &group, 1e-4)?;
        println!("k = {k}: m = {:?}, n = {}, residual {:.1e}, matched {}", m.m, m.n, m.residual, m.matched);
    }
    Ok(())
}
