//! Linde-Buzo-Gray codebook training by binary splitting.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SplitCodebook, MAX_SPLIT_BITS};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LbgConfig {
    /// Additive offset applied to each centroid when the codebook doubles.
    pub split_perturbation: f64,
    /// Lloyd iterations per codebook size.
    pub max_iters: usize,
    /// Stop a level once `(D_prev - D) / D` drops below this.
    pub rel_tol: f64,
    /// Seeds the direction of empty-cell repairs.
    pub rng_seed: u64,
}

impl Default for LbgConfig {
    fn default() -> Self {
        Self {
            split_perturbation: 1e-3,
            max_iters: 100,
            rel_tol: 1e-5,
            rng_seed: 0,
        }
    }
}

impl LbgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.split_perturbation.is_finite() && self.split_perturbation > 0.0) {
            return Err(Error::Config(format!(
                "split perturbation must be positive, got {}",
                self.split_perturbation
            )));
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(Error::Config(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Lloyd history for one codebook size.
#[derive(Debug, Clone, PartialEq)]
pub struct LbgLevel {
    /// Codebook right after splitting, before any Lloyd iteration.
    pub initial: Array2<f64>,
    /// Total squared error of each nearest-neighbour assignment pass.
    pub distortions: Vec<f64>,
    /// Cells still empty after the final pass.
    pub empty_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LbgTrace {
    pub levels: Vec<LbgLevel>,
}

/// Trains a codebook of `2^bits` codewords on the rows of `vectors`.
pub fn train_lbg(vectors: ArrayView2<f64>, bits: u8, cfg: &LbgConfig) -> Result<Array2<f64>> {
    Ok(train_lbg_traced(vectors, bits, cfg)?.0)
}

pub fn train_lbg_traced(vectors: ArrayView2<f64>, bits: u8, cfg: &LbgConfig) -> Result<(Array2<f64>, LbgTrace)> {
    cfg.validate()?;
    if bits == 0 || bits > MAX_SPLIT_BITS {
        return Err(invalid(format!("bit width {bits} outside 1..={MAX_SPLIT_BITS}")));
    }
    let size = 1usize << bits;
    if vectors.nrows() < size {
        return Err(invalid(format!(
            "{} training vectors cannot populate {size} codewords",
            vectors.nrows()
        )));
    }
    if vectors.ncols() == 0 {
        return Err(invalid("training vectors have zero dimension"));
    }
    if vectors.iter().any(|v| !v.is_finite()) {
        return Err(invalid("training vectors contain non-finite values"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut codebook = vectors.mean_axis(Axis(0)).expect("non-empty").insert_axis(Axis(0));
    let mut trace = LbgTrace::default();
    let eps = cfg.split_perturbation;

    while codebook.nrows() < size {
        let n = codebook.nrows();
        let mut next = Array2::zeros((2 * n, codebook.ncols()));
        for (i, c) in codebook.axis_iter(Axis(0)).enumerate() {
            next.row_mut(2 * i).assign(&c.mapv(|v| v + eps));
            next.row_mut(2 * i + 1).assign(&c.mapv(|v| v - eps));
        }
        codebook = next;
        let level = lloyd(vectors, &mut codebook, cfg, &mut rng);
        trace.levels.push(level);
    }
    Ok((codebook, trace))
}

struct Assignment {
    distortion: f64,
    counts: Vec<usize>,
    sums: Array2<f64>,
}

fn assign(vectors: ArrayView2<f64>, codebook: &Array2<f64>) -> Assignment {
    let mut counts = vec![0usize; codebook.nrows()];
    let mut sums = Array2::zeros(codebook.raw_dim());
    let mut distortion = 0.0;
    for v in vectors.axis_iter(Axis(0)) {
        let mut best = (0usize, f64::INFINITY);
        for (i, c) in codebook.axis_iter(Axis(0)).enumerate() {
            let mut d = 0.0;
            for (a, b) in v.iter().zip(c.iter()) {
                d += (a - b) * (a - b);
                if d >= best.1 {
                    break;
                }
            }
            if d < best.1 {
                best = (i, d);
            }
        }
        distortion += best.1;
        counts[best.0] += 1;
        let mut row = sums.row_mut(best.0);
        row += &v;
    }
    Assignment {
        distortion,
        counts,
        sums,
    }
}

fn lloyd(vectors: ArrayView2<f64>, codebook: &mut Array2<f64>, cfg: &LbgConfig, rng: &mut impl Rng) -> LbgLevel {
    let initial = codebook.clone();
    let mut distortions = Vec::new();
    let mut empty_cells = 0;
    for it in 0..cfg.max_iters {
        let a = assign(vectors, codebook);
        distortions.push(a.distortion);
        empty_cells = a.counts.iter().filter(|c| **c == 0).count();
        let converged = a.distortion == 0.0
            || (it > 0 && {
                let prev = distortions[it - 1];
                (prev - a.distortion) / a.distortion < cfg.rel_tol
            });

        for (i, count) in a.counts.iter().enumerate() {
            if *count > 0 {
                let mean: Array1<f64> = a.sums.row(i).mapv(|v| v / *count as f64);
                codebook.row_mut(i).assign(&mean);
            }
        }
        if converged && empty_cells == 0 {
            break;
        }
        repair_empty(codebook, &a.counts, cfg.split_perturbation, rng);
        if converged {
            break;
        }
    }
    LbgLevel {
        initial,
        distortions,
        empty_cells,
    }
}

/// Moves every empty codeword next to the centroid of the most populated
/// cell. The populated centroid itself stays put, so distortion cannot rise.
fn repair_empty(codebook: &mut Array2<f64>, counts: &[usize], eps: f64, rng: &mut impl Rng) {
    let mut counts = counts.to_vec();
    for empty in 0..counts.len() {
        if counts[empty] != 0 {
            continue;
        }
        let donor = (0..counts.len())
            .max_by(|a, b| counts[*a].cmp(&counts[*b]).then(b.cmp(a)))
            .expect("non-empty codebook");
        let moved = codebook
            .row(donor)
            .mapv(|v| v + if rng.random::<bool>() { eps } else { -eps });
        codebook.row_mut(empty).assign(&moved);
        // split the donor's population for subsequent repairs
        let half = counts[donor] / 2;
        counts[donor] -= half;
        counts[empty] = half;
    }
}

/// Trains one LBG codebook per split of the latent rows `latents`.
///
/// Codeword values are clamped to the `[0, 1]` latent range.
pub fn train_split_codebook(latents: ArrayView2<f64>, bits: &[u8], cfg: &LbgConfig) -> Result<SplitCodebook> {
    let d = bits.len();
    let k = latents.ncols();
    if d == 0 || k % d != 0 {
        return Err(invalid(format!("{d} splits must evenly divide latent dimension {k}")));
    }
    if let Some(b) = bits.iter().max() {
        let need = 1usize << (*b).min(MAX_SPLIT_BITS);
        if latents.nrows() < need {
            return Err(Error::InsufficientData(format!(
                "{} latent vectors, but a {b}-bit codebook needs at least {need}",
                latents.nrows()
            )));
        }
    }
    let sub = k / d;
    let splits = bits
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let split_cfg = LbgConfig {
                rng_seed: cfg.rng_seed.wrapping_add(i as u64),
                ..cfg.clone()
            };
            let view = latents.slice(s![.., i * sub..(i + 1) * sub]);
            train_lbg(view, *b, &split_cfg).map(|cb| cb.mapv(|v| v.clamp(0.0, 1.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    SplitCodebook::new(k, bits.to_vec(), splits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn identical_vectors_stay_within_perturbation() {
        let v = [0.3, 0.7, 0.1];
        let data = Array2::from_shape_fn((10, 3), |(_, c)| v[c]);
        let cfg = LbgConfig::default();
        let cb = train_lbg(data.view(), 1, &cfg).unwrap();
        assert_eq!(cb.nrows(), 2);
        for row in cb.axis_iter(Axis(0)) {
            for (a, b) in row.iter().zip(v) {
                assert!((a - b).abs() <= cfg.split_perturbation + 1e-15);
            }
        }
    }

    #[test]
    fn too_few_vectors() {
        let data = Array2::<f64>::zeros((3, 2));
        assert!(matches!(
            train_lbg(data.view(), 2, &LbgConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            train_split_codebook(data.view(), &[2, 2], &LbgConfig::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn lloyd_distortion_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let normal = Normal::new(0.0, 0.2).unwrap();
        let data = Array2::from_shape_fn((400, 3), |_| normal.sample(&mut rng));
        let (cb, trace) = train_lbg_traced(data.view(), 4, &LbgConfig::default()).unwrap();
        assert_eq!(cb.nrows(), 16);
        assert_eq!(trace.levels.len(), 4);
        for level in &trace.levels {
            for w in level.distortions.windows(2) {
                assert!(w[1] <= w[0], "{} > {}", w[1], w[0]);
            }
            assert_eq!(level.empty_cells, 0);
        }
    }

    #[test]
    fn split_codebook_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data = Array2::from_shape_fn((300, 6), |_| rng.random::<f64>());
        let cb = train_split_codebook(data.view(), &[3, 3, 3], &LbgConfig::default()).unwrap();
        assert_eq!(cb.split_count(), 3);
        assert_eq!(cb.sub_dim(), 2);
        assert_eq!(cb.split(2).nrows(), 8);
        let again = train_split_codebook(data.view(), &[3, 3, 3], &LbgConfig::default()).unwrap();
        assert_eq!(cb, again);
    }

    #[test]
    fn config_validation() {
        let bad = LbgConfig {
            split_perturbation: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = LbgConfig {
            rel_tol: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
