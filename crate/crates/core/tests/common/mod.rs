#![allow(dead_code)]

use deepvoc_core::dae::{mirrored_dims, Activation, DaeModel, Layer};
use deepvoc_core::vq::SplitCodebook;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sigmoid DAE with weights uniform in `[-scale, scale]` and a feature range
/// of `[-23, 3]` nats on every input.
pub fn random_model(input: usize, hidden: &[usize], latent: usize, scale: f64, seed: u64) -> DaeModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = mirrored_dims(input, hidden, latent);
    let layers = dims
        .windows(2)
        .map(|w| {
            let weights = Array2::from_shape_fn((w[1], w[0]), |_| rng.random_range(-scale..scale));
            let biases = Array1::from_shape_fn(w[1], |_| rng.random_range(-0.5..0.5));
            Layer::new(weights, biases, Activation::Sigmoid).unwrap()
        })
        .collect();
    DaeModel::new(dims, layers, vec![-23.0; input], vec![3.0; input]).unwrap()
}

pub fn random_codebook(latent: usize, bits: &[u8], seed: u64) -> SplitCodebook {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sub = latent / bits.len();
    let splits = bits
        .iter()
        .map(|b| Array2::from_shape_fn((1usize << b, sub), |_| rng.random::<f64>()))
        .collect();
    SplitCodebook::new(latent, bits.to_vec(), splits).unwrap()
}

pub fn random_vec(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt()
}
