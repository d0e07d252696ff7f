//! Fixtures shared by the benchmarks.

use deepvoc_core::dae::{mirrored_dims, DaeModel, Layer};
use deepvoc_core::dsp::FrameConfig;
use deepvoc_core::vq::SplitCodebook;
use deepvoc_core::CodecMode;

/// Small deterministic pseudo-random generator so fixtures need no RNG crate.
fn lcg(state: &mut u64) -> f64 {
    *state = state
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    (*state >> 11) as f64 / (1u64 << 53) as f64
}

/// A DAE with random weights in `[-scale, scale]` for the given mode.
pub fn random_model(mode: CodecMode, hidden: &[usize], scale: f64, seed: u64) -> DaeModel {
    let input = mode.input_dim(&FrameConfig::default());
    let dims = mirrored_dims(input, hidden, mode.latent_dim());
    let mut s = seed;
    let layers = dims
        .windows(2)
        .map(|w| {
            let weights = ndarray::Array2::from_shape_fn((w[1], w[0]), |_| scale * (2.0 * lcg(&mut s) - 1.0));
            let biases = ndarray::Array1::zeros(w[1]);
            Layer::new(weights, biases, deepvoc_core::dae::Activation::Sigmoid).expect("valid layer")
        })
        .collect();
    DaeModel::new(dims, layers, vec![-23.0; input], vec![3.0; input]).expect("valid model")
}

/// A codebook with uniformly random codewords for the given mode.
pub fn random_codebook(mode: CodecMode, seed: u64) -> SplitCodebook {
    let mut s = seed;
    let sub = mode.latent_dim() / mode.splits();
    let splits = (0..mode.splits())
        .map(|_| ndarray::Array2::from_shape_fn((1usize << mode.split_bits(), sub), |_| lcg(&mut s)))
        .collect();
    SplitCodebook::new(mode.latent_dim(), mode.bits(), splits).expect("valid codebook")
}
