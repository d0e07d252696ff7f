//! Split vector quantization of latent vectors.
//!
//! A latent vector of `K` values is cut into `D` equal sub-vectors, each
//! quantized against its own codebook of `2^bits` codewords. Besides the
//! open-loop nearest-neighbour quantizer this module provides the closed-loop
//! search in [`quantize_abs_svq`], which scores candidate codeword
//! combinations by the log-spectral error of their decoded spectra, and the
//! one-bit-per-dimension scalar baseline.

mod io;
mod lbg;
mod search;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::dae::LatentVector;
use crate::error::{invalid, Error, Result};

pub use io::{load_codebook, save_codebook, CODEBOOK_MAGIC, CODEBOOK_VERSION};
pub use lbg::{train_lbg, train_lbg_traced, train_split_codebook, LbgConfig, LbgLevel, LbgTrace};
pub use search::{log_spectral_mse, quantize_abs_svq, AbsResult, SearchConfig, MAX_CANDIDATES};

/// Largest supported per-split codebook width.
pub const MAX_SPLIT_BITS: u8 = 16;

/// `D` sub-codebooks over consecutive slices of a `K`-dimensional latent.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCodebook {
    latent_dim: usize,
    bits: Vec<u8>,
    splits: Vec<Array2<f64>>,
}

impl SplitCodebook {
    /// Codeword values are rounded to `f32` precision, the on-disk format.
    pub fn new(latent_dim: usize, bits: Vec<u8>, splits: Vec<Array2<f64>>) -> Result<Self> {
        let d = bits.len();
        if d == 0 || latent_dim == 0 || latent_dim % d != 0 {
            return Err(invalid(format!(
                "{d} splits must evenly divide latent dimension {latent_dim}"
            )));
        }
        if splits.len() != d {
            return Err(invalid(format!("{d} bit widths but {} sub-codebooks", splits.len())));
        }
        let sub = latent_dim / d;
        for (i, (b, cb)) in bits.iter().zip(&splits).enumerate() {
            if *b == 0 || *b > MAX_SPLIT_BITS {
                return Err(invalid(format!(
                    "split {i}: bit width {b} outside 1..={MAX_SPLIT_BITS}"
                )));
            }
            if cb.nrows() != 1usize << b || cb.ncols() != sub {
                return Err(invalid(format!(
                    "split {i}: sub-codebook is {}x{}, expected {}x{sub}",
                    cb.nrows(),
                    cb.ncols(),
                    1usize << b
                )));
            }
            if let Some(v) = cb.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(invalid(format!("split {i}: codeword value {v} outside [0, 1]")));
            }
        }
        let splits = splits.into_iter().map(|cb| cb.mapv(|v| v as f32 as f64)).collect();
        Ok(Self {
            latent_dim,
            bits,
            splits,
        })
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn split_count(&self) -> usize {
        self.bits.len()
    }

    pub fn sub_dim(&self) -> usize {
        self.latent_dim / self.bits.len()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn total_bits(&self) -> usize {
        self.bits.iter().map(|b| *b as usize).sum()
    }

    pub fn split(&self, d: usize) -> ArrayView2<'_, f64> {
        self.splits[d].view()
    }

    pub fn codeword(&self, d: usize, index: usize) -> ArrayView1<'_, f64> {
        self.splits[d].row(index)
    }

    /// Smallest sub-codebook size.
    pub fn min_size(&self) -> usize {
        self.splits.iter().map(|s| s.nrows()).min().unwrap_or(0)
    }

    fn sub_vector<'a>(&self, z: &'a [f64], d: usize) -> &'a [f64] {
        let s = self.sub_dim();
        &z[d * s..(d + 1) * s]
    }

    fn check_latent(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.latent_dim {
            return Err(invalid(format!(
                "latent has {} values, codebook expects {}",
                z.len(),
                self.latent_dim
            )));
        }
        Ok(())
    }
}

fn squared_distance(a: &[f64], b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `j` codewords nearest to `subvec` as `(index, squared distance)`,
/// ascending by distance with ties broken towards the lower index.
pub fn nearest_codewords(subvec: &[f64], codebook: ArrayView2<f64>, j: usize) -> Result<Vec<(usize, f64)>> {
    if j == 0 {
        return Err(invalid("need at least one candidate"));
    }
    if j > codebook.nrows() {
        return Err(invalid(format!(
            "asked for {j} candidates from {} codewords",
            codebook.nrows()
        )));
    }
    if subvec.len() != codebook.ncols() {
        return Err(invalid(format!(
            "sub-vector has {} values, codewords have {}",
            subvec.len(),
            codebook.ncols()
        )));
    }
    let mut scored: Vec<(usize, f64)> = codebook
        .axis_iter(Axis(0))
        .map(|row| squared_distance(subvec, row))
        .enumerate()
        .collect();
    let by_dist = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    if j < scored.len() {
        scored.select_nth_unstable_by(j - 1, by_dist);
        scored.truncate(j);
    }
    scored.sort_unstable_by(by_dist);
    Ok(scored)
}

/// Open-loop split VQ: nearest codeword per split in the latent domain.
pub fn quantize_svq(z: &[f64], cb: &SplitCodebook) -> Result<Vec<usize>> {
    cb.check_latent(z)?;
    (0..cb.split_count())
        .map(|d| Ok(nearest_codewords(cb.sub_vector(z, d), cb.split(d), 1)?[0].0))
        .collect()
}

/// Concatenates the selected sub-codewords.
pub fn dequantize(indices: &[usize], cb: &SplitCodebook) -> Result<LatentVector> {
    if indices.len() != cb.split_count() {
        return Err(invalid(format!(
            "{} indices for {} splits",
            indices.len(),
            cb.split_count()
        )));
    }
    let mut out = Vec::with_capacity(cb.latent_dim());
    for (d, &i) in indices.iter().enumerate() {
        let size = cb.split(d).nrows();
        if i >= size {
            return Err(invalid(format!("split {d}: index {i} out of range (size {size})")));
        }
        out.extend(cb.codeword(d, i).iter());
    }
    LatentVector::new(out)
}

/// One-bit scalar quantization: bit `i` is 1 iff `z[i] >= 0.5`.
pub fn quantize_sq_binary(z: &[f64]) -> Result<Vec<u8>> {
    if let Some(v) = z.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(invalid(format!("latent value {v} outside [0, 1]")));
    }
    Ok(z.iter().map(|v| u8::from(*v >= 0.5)).collect())
}

/// Maps bits back to the cell midpoints 0.25 and 0.75.
pub fn sq_dequantize(bits: &[u8]) -> Result<LatentVector> {
    bits.iter()
        .map(|b| match b {
            0 => Ok(0.25),
            1 => Ok(0.75),
            other => Err(Error::InvalidArgument(format!("bit value {other} is not 0 or 1"))),
        })
        .collect::<Result<Vec<_>>>()
        .and_then(LatentVector::new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_codebook(latent: usize, bits: &[u8], seed: u64) -> SplitCodebook {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sub = latent / bits.len();
        let splits = bits
            .iter()
            .map(|b| Array2::from_shape_fn((1 << b, sub), |_| rng.random::<f64>()))
            .collect();
        SplitCodebook::new(latent, bits.to_vec(), splits).unwrap()
    }

    #[test]
    fn exact_match_is_first() {
        let cb = random_codebook(4, &[4, 4], 1);
        let target: Vec<f64> = cb.codeword(0, 5).to_vec();
        let near = nearest_codewords(&target, cb.split(0), 3).unwrap();
        assert_eq!(near[0], (5, 0.0));
    }

    #[test]
    fn ties_prefer_lower_index() {
        let mut book = Array2::from_elem((8, 1), 0.9);
        book[[2, 0]] = 0.4;
        book[[7, 0]] = 0.6;
        let near = nearest_codewords(&[0.5], book.view(), 2).unwrap();
        assert_eq!(near.iter().map(|n| n.0).collect::<Vec<_>>(), vec![2, 7]);
    }

    #[test]
    fn nearest_matches_full_sort() {
        let cb = random_codebook(3, &[4], 11);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let q: Vec<f64> = (0..3).map(|_| rng.random()).collect();
            let mut all: Vec<(usize, f64)> = (0..16)
                .map(|i| {
                    let c = cb.codeword(0, i);
                    (i, (0..3).map(|k| (q[k] - c[k]).powi(2)).sum())
                })
                .collect();
            all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
            let got = nearest_codewords(&q, cb.split(0), 4).unwrap();
            assert_eq!(got, all[..4].to_vec());
            // nestedness
            let more = nearest_codewords(&q, cb.split(0), 5).unwrap();
            assert_eq!(&more[..4], &got[..]);
        }
        assert!(nearest_codewords(&[0.0; 3], cb.split(0), 0).is_err());
        assert!(nearest_codewords(&[0.0; 3], cb.split(0), 17).is_err());
    }

    #[test]
    fn svq_recovers_assembled_codewords() {
        let cb = random_codebook(6, &[3, 3, 3], 2);
        let idx = [5, 0, 7];
        let z = dequantize(&idx, &cb).unwrap();
        assert_eq!(quantize_svq(&z, &cb).unwrap(), idx.to_vec());
        let first = dequantize(&[0, 0, 0], &cb).unwrap();
        let expect: Vec<f64> = (0..3).flat_map(|d| cb.codeword(d, 0).to_vec()).collect();
        assert_eq!(&*first, &expect[..]);
        assert!(dequantize(&[8, 0, 0], &cb).is_err());
        assert!(dequantize(&[0, 0], &cb).is_err());
        assert!(quantize_svq(&[0.5; 5], &cb).is_err());
    }

    #[test]
    fn svq_matches_per_split_scan() {
        let cb = random_codebook(8, &[3, 3], 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let z: Vec<f64> = (0..8).map(|_| rng.random()).collect();
            let got = quantize_svq(&z, &cb).unwrap();
            for d in 0..2 {
                let mut best = (0, f64::INFINITY);
                for i in 0..8 {
                    let dist: f64 = (0..4).map(|k| (z[d * 4 + k] - cb.codeword(d, i)[k]).powi(2)).sum();
                    if dist < best.1 {
                        best = (i, dist);
                    }
                }
                assert_eq!(got[d], best.0);
            }
        }
    }

    #[test]
    fn scalar_baseline() {
        assert_eq!(quantize_sq_binary(&[0.5; 4]).unwrap(), vec![1; 4]);
        let bits = quantize_sq_binary(&[0.1, 0.9]).unwrap();
        assert_eq!(bits, vec![0, 1]);
        assert_eq!(&*sq_dequantize(&bits).unwrap(), &[0.25, 0.75]);
        assert!(quantize_sq_binary(&[1.2]).is_err());
        assert!(sq_dequantize(&[2]).is_err());
    }

    #[test]
    fn codebook_invariants() {
        assert!(SplitCodebook::new(7, vec![2, 2], vec![Array2::zeros((4, 3)); 2]).is_err());
        assert!(SplitCodebook::new(6, vec![2, 2], vec![Array2::zeros((4, 3)); 2]).is_ok());
        assert!(SplitCodebook::new(6, vec![2, 2], vec![Array2::zeros((3, 3)); 2]).is_err());
        assert!(SplitCodebook::new(6, vec![2, 2], vec![Array2::from_elem((4, 3), 1.5); 2]).is_err());
        assert!(SplitCodebook::new(6, vec![0, 0], vec![Array2::zeros((1, 3)); 2]).is_err());
    }
}
