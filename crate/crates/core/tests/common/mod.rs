#![allow(dead_code)]

use permbound::matrix::{diag_congruence, random_psd, CMatrix, HermitianMatrix};
use permbound::rng::Stream;
use std::path::PathBuf;

pub const CORPUS_SEED: u64 = 0x5eed_c0de;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

/// Instance `i` of size `n`: Gaussian Gram matrix of rank `1 + i mod n`,
/// every other one rescaled by a random positive diagonal.
pub fn corpus_matrix(n: usize, i: usize) -> HermitianMatrix {
    let mut rng = Stream::derive(CORPUS_SEED ^ (n as u64) << 32, i as u64);
    let rank = 1 + i % n;
    let a = random_psd(n, rank, &mut rng);
    if i % 2 == 1 {
        let lambda: Vec<f64> = (0..n).map(|_| (0.7 * rng.normal()).exp()).collect();
        diag_congruence(&a, &lambda).unwrap()
    } else {
        a
    }
}

pub fn corpus(sizes: std::ops::RangeInclusive<usize>, per_size: usize) -> Vec<HermitianMatrix> {
    sizes.flat_map(|n| (0..per_size).map(move |i| corpus_matrix(n, i))).collect()
}

pub fn random_square(n: usize, rng: &mut Stream) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| rng.cnormal())
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
