//! Closed-loop (analysis-by-synthesis) codeword selection.

use ndarray::{Array2, Axis};

use super::{nearest_codewords, SplitCodebook};
use crate::dae::DaeModel;
use crate::error::{invalid, Error, Result};

/// Upper bound on `J^D` candidate reconstructions per search.
pub const MAX_CANDIDATES: usize = 1_000_000;

/// Decoder rows evaluated per batch.
const BATCH: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Candidates kept per split.
    pub j: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { j: 3 }
    }
}

impl SearchConfig {
    pub fn validate(&self, cb: &SplitCodebook) -> Result<usize> {
        if self.j == 0 || self.j > cb.min_size() {
            return Err(Error::Config(format!(
                "J must be in 1..={}, got {}",
                cb.min_size(),
                self.j
            )));
        }
        self.j
            .checked_pow(cb.split_count() as u32)
            .filter(|n| *n <= MAX_CANDIDATES)
            .ok_or_else(|| {
                Error::Config(format!(
                    "J^D = {}^{} exceeds the limit of {MAX_CANDIDATES} candidates",
                    self.j,
                    cb.split_count()
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsResult {
    pub indices: Vec<usize>,
    /// Mean squared log-magnitude error of the chosen reconstruction.
    pub distortion: f64,
    /// Number of candidate reconstructions scored.
    pub evaluated: usize,
}

/// Mean squared difference between two log-magnitude vectors.
pub fn log_spectral_mse(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len().max(1) as f64
}

/// Picks the codeword combination whose decoded spectrum is closest to
/// `y_target`.
///
/// Each split keeps its `J` nearest sub-codewords to `z`; all `J^D`
/// combinations are decoded in lexicographic order of their candidate ranks
/// and the first one with the smallest log-spectral MSE wins. With `J = 1`
/// this is exactly [`super::quantize_svq`].
pub fn quantize_abs_svq(
    y_target: &[f64],
    z: &[f64],
    cb: &SplitCodebook,
    model: &DaeModel,
    search: SearchConfig,
) -> Result<AbsResult> {
    let total = search.validate(cb)?;
    cb.check_latent(z)?;
    if model.latent_dim() != cb.latent_dim() {
        return Err(Error::Config(format!(
            "model latent dimension {} does not match codebook {}",
            model.latent_dim(),
            cb.latent_dim()
        )));
    }
    if y_target.len() != model.input_dim() {
        return Err(invalid(format!(
            "target spectrum has {} values, model output is {}",
            y_target.len(),
            model.input_dim()
        )));
    }

    let d = cb.split_count();
    let sub = cb.sub_dim();
    let candidates = (0..d)
        .map(|s| {
            nearest_codewords(cb.sub_vector(z, s), cb.split(s), search.j)
                .map(|c| c.into_iter().map(|(i, _)| i).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut ranks = vec![0usize; d];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluated = 0;
    let mut start = 0;
    while start < total {
        let rows = BATCH.min(total - start);
        let mut latents = Array2::zeros((rows, cb.latent_dim()));
        let mut tuples = Vec::with_capacity(rows);
        for mut row in latents.axis_iter_mut(Axis(0)) {
            for (s, r) in ranks.iter().enumerate() {
                let cw = cb.codeword(s, candidates[s][*r]);
                row.slice_mut(ndarray::s![s * sub..(s + 1) * sub]).assign(&cw);
            }
            tuples.push(ranks.clone());
            // odometer: last split varies fastest
            for s in (0..d).rev() {
                ranks[s] += 1;
                if ranks[s] < search.j {
                    break;
                }
                ranks[s] = 0;
            }
        }
        let decoded = model.decode_batch(latents.view())?;
        for (row, tuple) in decoded.axis_iter(Axis(0)).zip(tuples) {
            let dist = log_spectral_mse(row.as_slice().expect("standard layout"), y_target);
            evaluated += 1;
            if best.as_ref().is_none_or(|(b, _)| dist < *b) {
                best = Some((dist, tuple));
            }
        }
        start += rows;
    }

    let (distortion, ranks) = best.expect("at least one candidate");
    Ok(AbsResult {
        indices: ranks.iter().enumerate().map(|(s, r)| candidates[s][*r]).collect(),
        distortion,
        evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dae::{mirrored_dims, DaeModel, Network};
    use crate::vq::{dequantize, quantize_svq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_model(input: usize, latent: usize, seed: u64) -> DaeModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = mirrored_dims(input, &[6], latent);
        let mut net = crate::dae::xavier_network(&dims, &mut rng);
        for l in &mut net.layers {
            l.weights.mapv_inplace(|w| w * 3.0);
        }
        let lo: Vec<f64> = (0..input).map(|_| rng.random_range(-20.0..-10.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|v| v + 15.0).collect();
        Network::into_model(net, lo, hi).unwrap()
    }

    #[test]
    fn j1_equals_svq_and_counts() {
        let model = random_model(10, 4, 1);
        let cb = crate::vq::tests::random_codebook(4, &[4, 4], 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let y: Vec<f64> = (0..10).map(|_| rng.random_range(-20.0..-5.0)).collect();
            let z = model.encode_latent(&y).unwrap();
            let r1 = quantize_abs_svq(&y, &z, &cb, &model, SearchConfig { j: 1 }).unwrap();
            assert_eq!(r1.indices, quantize_svq(&z, &cb).unwrap());
            assert_eq!(r1.evaluated, 1);
            let r3 = quantize_abs_svq(&y, &z, &cb, &model, SearchConfig { j: 3 }).unwrap();
            assert_eq!(r3.evaluated, 9);
            assert!(r3.distortion <= r1.distortion);
            let zq = dequantize(&r3.indices, &cb).unwrap();
            let yq = model.decode_spectrum(&zq).unwrap();
            assert_eq!(log_spectral_mse(&yq, &y), r3.distortion);
        }
    }

    #[test]
    fn batching_spans_multiple_chunks() {
        // 5^4 = 625 > BATCH candidates
        let model = random_model(12, 4, 5);
        let cb = crate::vq::tests::random_codebook(4, &[3, 3, 3, 3], 6);
        let y: Vec<f64> = (0..12).map(|i| -15.0 + i as f64 * 0.3).collect();
        let z = model.encode_latent(&y).unwrap();
        let r = quantize_abs_svq(&y, &z, &cb, &model, SearchConfig { j: 5 }).unwrap();
        assert_eq!(r.evaluated, 625);
    }

    #[test]
    fn config_errors() {
        let model = random_model(10, 4, 1);
        let cb = crate::vq::tests::random_codebook(4, &[2, 2], 2);
        let y = vec![-12.0; 10];
        let z = model.encode_latent(&y).unwrap();
        assert!(matches!(
            quantize_abs_svq(&y, &z, &cb, &model, SearchConfig { j: 0 }),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            quantize_abs_svq(&y, &z, &cb, &model, SearchConfig { j: 5 }),
            Err(Error::Config(_))
        ));
        let wide = crate::vq::tests::random_codebook(8, &[5; 8], 2);
        // 16^8 > 10^6
        assert!(matches!(SearchConfig { j: 16 }.validate(&wide), Err(Error::Config(_))));
        assert!(quantize_abs_svq(&y[..9], &z, &cb, &model, SearchConfig { j: 1 }).is_err());
    }
}
