//! Short-time objective intelligibility, following the reference
//! implementation's framing, silence removal and one-third octave analysis.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::resample::resample;
use crate::error::{invalid, Error, Result};

/// Internal analysis rate; other rates are resampled to it.
pub const STOI_SAMPLE_RATE: u32 = 10_000;
const FRAME: usize = 256;
const HOP: usize = FRAME / 2;
const NFFT: usize = 512;
const BANDS: usize = 15;
const MIN_FREQ: f64 = 150.0;
/// Frames per intermediate intelligibility segment.
const SEGMENT: usize = 30;
const BETA_DB: f64 = -15.0;
const DYN_RANGE_DB: f64 = 40.0;
const EPS: f64 = f64::EPSILON;

/// Hann window without its zero end points.
fn hanning(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n + 1) as f64).cos())
        .collect()
}

fn frame_starts(len: usize) -> impl Iterator<Item = usize> {
    (0..len.saturating_sub(FRAME)).step_by(HOP)
}

/// One-third octave band matrix as `(start, end)` bin ranges.
fn third_octave_bands() -> Vec<(usize, usize)> {
    let bins = NFFT / 2 + 1;
    let freqs: Vec<f64> = (0..bins)
        .map(|i| i as f64 * STOI_SAMPLE_RATE as f64 / NFFT as f64)
        .collect();
    let nearest = |target: f64| -> usize {
        let mut best = 0;
        for (i, f) in freqs.iter().enumerate() {
            if (f - target).powi(2) < (freqs[best] - target).powi(2) {
                best = i;
            }
        }
        best
    };
    (0..BANDS)
        .map(|k| {
            let k = k as f64;
            let lo = MIN_FREQ * 2f64.powf((2.0 * k - 1.0) / 6.0);
            let hi = MIN_FREQ * 2f64.powf((2.0 * k + 1.0) / 6.0);
            (nearest(lo), nearest(hi))
        })
        .collect()
}

/// Drops frames more than 40 dB below the loudest reference frame and
/// overlap-adds the remaining windowed frames.
fn remove_silent_frames(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let w = hanning(FRAME);
    let windowed =
        |s: &[f64], start: usize| -> Vec<f64> { s[start..start + FRAME].iter().zip(&w).map(|(a, b)| a * b).collect() };
    let starts: Vec<usize> = frame_starts(x.len()).collect();
    let energies: Vec<f64> = starts
        .iter()
        .map(|&s| {
            let norm = windowed(x, s).iter().map(|v| v * v).sum::<f64>().sqrt();
            20.0 * (norm + EPS).log10()
        })
        .collect();
    let max = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let kept: Vec<usize> = starts
        .iter()
        .zip(&energies)
        .filter(|(_, e)| max - DYN_RANGE_DB - **e < 0.0)
        .map(|(s, _)| *s)
        .collect();
    let out_len = if kept.is_empty() {
        0
    } else {
        (kept.len() - 1) * HOP + FRAME
    };
    let mut xs = vec![0.0; out_len];
    let mut ys = vec![0.0; out_len];
    for (i, &s) in kept.iter().enumerate() {
        let off = i * HOP;
        for (n, (a, b)) in windowed(x, s).into_iter().zip(windowed(y, s)).enumerate() {
            xs[off + n] += a;
            ys[off + n] += b;
        }
    }
    (xs, ys)
}

/// Band envelopes, `bands x frames`.
fn band_envelopes(s: &[f64], fft: &Arc<dyn Fft<f64>>, bands: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let w = hanning(FRAME);
    let mut env = vec![Vec::new(); BANDS];
    let mut buf = vec![Complex::new(0.0, 0.0); NFFT];
    for start in frame_starts(s.len()) {
        buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for (n, v) in s[start..start + FRAME].iter().enumerate() {
            buf[n].re = v * w[n];
        }
        fft.process(&mut buf);
        for (b, &(lo, hi)) in bands.iter().enumerate() {
            let power: f64 = buf[lo..hi].iter().map(|c| c.norm_sqr()).sum();
            env[b].push(power.sqrt());
        }
    }
    env
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// STOI of `test` against `reference`, in `[-1, 1]` (typically `[0, 1]`).
///
/// Returns [`Error::InsufficientData`] when fewer than 30 non-silent frames
/// remain after silence removal.
pub fn stoi_score(reference: &[f64], test: &[f64], sample_rate: u32) -> Result<f64> {
    if reference.len() != test.len() {
        return Err(invalid(format!(
            "signals differ in length: {} vs {}",
            reference.len(),
            test.len()
        )));
    }
    let x = resample(reference, sample_rate, STOI_SAMPLE_RATE)?;
    let y = resample(test, sample_rate, STOI_SAMPLE_RATE)?;
    let (x, y) = remove_silent_frames(&x, &y);

    let bands = third_octave_bands();
    let fft = FftPlanner::new().plan_fft_forward(NFFT);
    let x_env = band_envelopes(&x, &fft, &bands);
    let y_env = band_envelopes(&y, &fft, &bands);
    let frames = x_env[0].len();
    if frames < SEGMENT {
        return Err(Error::InsufficientData(format!(
            "STOI needs at least {SEGMENT} non-silent frames, got {frames}"
        )));
    }

    let clip = 10f64.powf(-BETA_DB / 20.0);
    let segments = frames - SEGMENT + 1;
    let mut total = 0.0;
    for m in 0..segments {
        for b in 0..BANDS {
            let xs = &x_env[b][m..m + SEGMENT];
            let ys = &y_env[b][m..m + SEGMENT];
            let scale = norm(xs) / (norm(ys) + EPS);
            let mut yp: Vec<f64> = ys
                .iter()
                .zip(xs)
                .map(|(yv, xv)| (yv * scale).min(xv * (1.0 + clip)))
                .collect();
            let mut xc = xs.to_vec();
            for v in [&mut yp, &mut xc] {
                let mean = v.iter().sum::<f64>() / SEGMENT as f64;
                v.iter_mut().for_each(|a| *a -= mean);
                let n = norm(v) + EPS;
                v.iter_mut().for_each(|a| *a /= n);
            }
            total += yp.iter().zip(&xc).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    Ok(total / (segments * BANDS) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn band_edges() {
        let b = third_octave_bands();
        assert_eq!(b.len(), BANDS);
        // 150 Hz * 2^(-1/6) ~ 133.6 Hz -> bin 7 at 19.53 Hz spacing
        assert_eq!(b[0].0, 7);
        assert!(b.iter().all(|(lo, hi)| lo < hi && *hi <= NFFT / 2 + 1));
        assert!(b.windows(2).all(|w| w[0].1 == w[1].0));
    }

    #[test]
    fn window_matches_numpy_hanning_interior() {
        // np.hanning(5)[1:-1] = [0.5, 1.0, 0.5]
        let w = hanning(3);
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identical_scaled_and_noise() {
        let x = synth::vowel_utterance(8000, 2.0, 1);
        let same = stoi_score(&x, &x, 8000).unwrap();
        assert!(same > 0.999, "{same}");
        let half: Vec<f64> = x.iter().map(|v| 0.5 * v).collect();
        assert!(stoi_score(&x, &half, 8000).unwrap() > 0.99);
        let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
        let noise = synth::white_noise(x.len(), rms, 3);
        let score = stoi_score(&x, &noise, 8000).unwrap();
        assert!(score < 0.3, "{score}");
    }

    #[test]
    fn too_short() {
        let x = synth::vowel_utterance(8000, 0.2, 1);
        assert!(matches!(stoi_score(&x, &x, 8000), Err(Error::InsufficientData(_))));
    }
}
