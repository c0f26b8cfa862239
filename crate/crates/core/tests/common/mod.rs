#![allow(dead_code)]

use anosov_core::SquareMatrix;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Gaussian matrix with positive determinant, renormalised into `SL(n, R)`.
pub fn random_sl(rng: &mut impl Rng, n: usize) -> SquareMatrix {
    let mut m = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    if m.clone().lu().determinant() < 0.0 {
        m.row_mut(0).neg_mut();
    }
    SquareMatrix::new(m).expect("gaussian matrices are invertible")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (tol {tol})");
}
