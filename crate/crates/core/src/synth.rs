//! Seeded synthetic test signals: vowel-like utterances and white noise.
//!
//! Utterances alternate voiced segments (harmonic series shaped by a
//! three-formant envelope, with a drifting pitch), short noise bursts and
//! digitally silent gaps, optionally over a noise floor.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// (F1, F2, F3) in Hz.
const VOWELS: [(f64, f64, f64); 6] = [
    (730.0, 1090.0, 2440.0),
    (270.0, 2290.0, 3010.0),
    (530.0, 1840.0, 2480.0),
    (570.0, 840.0, 2410.0),
    (300.0, 870.0, 2240.0),
    (660.0, 1720.0, 2410.0),
];
const FORMANT_BW: f64 = 90.0;
const FADE_SECS: f64 = 0.01;

fn formant_gain(f: f64, formants: (f64, f64, f64)) -> f64 {
    let peak = |fc: f64| 1.0 / (1.0 + ((f - fc) / FORMANT_BW).powi(2));
    let (f1, f2, f3) = formants;
    (peak(f1) + 0.6 * peak(f2) + 0.3 * peak(f3) + 0.02) / (1.0 + f / 1000.0)
}

fn fade(seg: &mut [f64], sample_rate: u32) {
    let n = ((FADE_SECS * sample_rate as f64) as usize).min(seg.len() / 2);
    let len = seg.len();
    for i in 0..n {
        let g = 0.5 - 0.5 * (PI * i as f64 / n as f64).cos();
        seg[i] *= g;
        seg[len - 1 - i] *= g;
    }
}

fn voiced(len: usize, sample_rate: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let sr = sample_rate as f64;
    let formants = VOWELS[rng.random_range(0..VOWELS.len())];
    let f0_start: f64 = rng.random_range(90.0..220.0);
    let f0_end = f0_start * rng.random_range(0.8..1.25);
    let level: f64 = rng.random_range(0.15..0.4);
    let nyquist = sr / 2.0;
    let max_h = (nyquist / f0_start.min(f0_end)) as usize;
    let gains: Vec<f64> = (1..=max_h)
        .map(|h| formant_gain(h as f64 * (f0_start + f0_end) / 2.0, formants))
        .collect();
    let norm: f64 = gains.iter().sum::<f64>().max(1e-9);
    let mut phase = 0.0;
    let mut out = Vec::with_capacity(len);
    for n in 0..len {
        let f0 = f0_start + (f0_end - f0_start) * n as f64 / len as f64;
        phase += 2.0 * PI * f0 / sr;
        let mut s = 0.0;
        for (h, g) in gains.iter().enumerate() {
            let fh = (h + 1) as f64 * f0;
            if fh >= nyquist {
                break;
            }
            s += g * ((h + 1) as f64 * phase).sin();
        }
        out.push(level * s / norm * 2.0);
    }
    out
}

fn fricative(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let level: f64 = rng.random_range(0.02..0.08);
    // first difference tilts the spectrum upwards
    let mut prev = 0.0;
    (0..len)
        .map(|_| {
            let v: f64 = rng.sample(StandardNormal);
            let out = level * (v - prev);
            prev = v;
            out
        })
        .collect()
}

/// A speech-like signal of `secs` seconds, clipped to `[-1, 1]`.
pub fn vowel_utterance(sample_rate: u32, secs: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = (secs * sample_rate as f64).round() as usize;
    let sr = sample_rate as f64;
    let mut out = Vec::with_capacity(total);
    while out.len() < total {
        let kind: f64 = rng.random();
        let (mut seg, silent) = if kind < 0.65 {
            let len = (rng.random_range(0.15..0.4) * sr) as usize;
            (voiced(len, sample_rate, &mut rng), false)
        } else if kind < 0.85 {
            let len = (rng.random_range(0.05..0.15) * sr) as usize;
            (fricative(len, &mut rng), false)
        } else {
            let len = (rng.random_range(0.05..0.2) * sr) as usize;
            (vec![0.0; len], true)
        };
        if !silent {
            fade(&mut seg, sample_rate);
        }
        out.extend(seg);
    }
    out.truncate(total);
    out.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0));
    out
}

/// [`vowel_utterance`] over a white-noise floor of standard deviation
/// `floor_rms`, as in a recording with background noise.
pub fn noisy_vowel_utterance(sample_rate: u32, secs: f64, seed: u64, floor_rms: f64) -> Vec<f64> {
    let clean = vowel_utterance(sample_rate, secs, seed);
    let noise = white_noise(clean.len(), floor_rms, seed ^ 0x5eed_f100);
    clean
        .iter()
        .zip(&noise)
        .map(|(s, n)| (s + n).clamp(-1.0, 1.0))
        .collect()
}

/// Gaussian white noise with standard deviation `rms`.
pub fn white_noise(len: usize, rms: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rms * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Sum of unit-phase sinusoids `(freq_hz, amplitude)`.
pub fn tones(sample_rate: u32, len: usize, partials: &[(f64, f64)]) -> Vec<f64> {
    (0..len)
        .map(|n| {
            let t = n as f64 / sample_rate as f64;
            partials.iter().map(|(f, a)| a * (2.0 * PI * f * t).sin()).sum()
        })
        .collect()
}
