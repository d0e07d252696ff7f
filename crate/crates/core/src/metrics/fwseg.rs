use crate::dsp::{frame_signal, FrameConfig, SpectralAnalyzer};
use crate::error::{invalid, Result};

pub const FWSEG_BANDS: usize = 25;
pub const FWSEG_FLOOR_DB: f64 = -10.0;
pub const FWSEG_CEIL_DB: f64 = 35.0;
const GAMMA: f64 = 0.2;
const EPS: f64 = 1e-10;

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

/// Band index of each retained FFT bin: equal-width mel bands over 0..fs/2.
fn band_map(cfg: &FrameConfig) -> Vec<usize> {
    let nyquist = cfg.sample_rate() as f64 / 2.0;
    let mel_max = hz_to_mel(nyquist);
    let bins = cfg.spectrum_len();
    (0..bins)
        .map(|k| {
            let f = k as f64 * cfg.sample_rate() as f64 / cfg.fft_size() as f64;
            ((hz_to_mel(f) / mel_max * FWSEG_BANDS as f64) as usize).min(FWSEG_BANDS - 1)
        })
        .collect()
}

/// Frequency-weighted segmental SNR in dB.
///
/// Per frame, magnitude spectra are summed into 25 mel-spaced bands; each
/// band contributes `10 log10(|X|^2 / ((|X| - |Y|)^2 + 1e-10))` weighted by
/// `|X|^0.2`. Frame values are clamped to `[-10, 35]` and averaged. A frame
/// whose reference is digitally silent scores 35 if the test frame is silent
/// too and -10 otherwise.
pub fn fwseg_snr(reference: &[f64], test: &[f64], cfg: &FrameConfig) -> Result<f64> {
    if reference.len() != test.len() {
        return Err(invalid(format!(
            "signals differ in length: {} vs {}",
            reference.len(),
            test.len()
        )));
    }
    let analyzer = SpectralAnalyzer::new(cfg);
    let bands = band_map(cfg);
    let ref_frames = frame_signal(reference, cfg)?;
    let test_frames = frame_signal(test, cfg)?;

    let band_mags = |frame: &[f64]| -> Result<[f64; FWSEG_BANDS]> {
        let spec = analyzer.spectrum(frame)?;
        let mut out = [0.0; FWSEG_BANDS];
        for (k, b) in bands.iter().enumerate() {
            out[*b] += spec[k].norm();
        }
        Ok(out)
    };

    let mut total = 0.0;
    for (rf, tf) in ref_frames.frames.iter().zip(&test_frames.frames) {
        let x = band_mags(rf)?;
        let y = band_mags(tf)?;
        let (mut num, mut den) = (0.0, 0.0);
        for (xb, yb) in x.iter().zip(&y) {
            let w = xb.powf(GAMMA);
            let err = (xb - yb) * (xb - yb);
            num += w * 10.0 * (xb * xb / (err + EPS)).log10();
            den += w;
        }
        let value = if den > 0.0 {
            num / den
        } else if y.iter().all(|v| *v == 0.0) {
            FWSEG_CEIL_DB
        } else {
            FWSEG_FLOOR_DB
        };
        total += value.clamp(FWSEG_FLOOR_DB, FWSEG_CEIL_DB);
    }
    Ok(total / ref_frames.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn all_bands_populated() {
        let map = band_map(&FrameConfig::default());
        for b in 0..FWSEG_BANDS {
            assert!(map.contains(&b), "band {b} empty");
        }
        assert!(map.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn identical_and_negated() {
        let cfg = FrameConfig::default();
        let x = synth::vowel_utterance(8000, 1.0, 0);
        assert_eq!(fwseg_snr(&x, &x, &cfg).unwrap(), FWSEG_CEIL_DB);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(fwseg_snr(&x, &neg, &cfg).unwrap(), FWSEG_CEIL_DB);
        assert!(fwseg_snr(&x, &x[1..], &cfg).is_err());
    }

    #[test]
    fn noise_lowers_score() {
        let cfg = FrameConfig::default();
        let x = synth::vowel_utterance(8000, 1.0, 4);
        let power = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        let noise = synth::white_noise(x.len(), power.sqrt(), 9);
        let y: Vec<f64> = x.iter().zip(&noise).map(|(a, b)| a + b).collect();
        let score = fwseg_snr(&x, &y, &cfg).unwrap();
        assert!((FWSEG_FLOOR_DB..FWSEG_CEIL_DB).contains(&score), "{score}");
        assert!(score < fwseg_snr(&x, &x, &cfg).unwrap());
    }
}
