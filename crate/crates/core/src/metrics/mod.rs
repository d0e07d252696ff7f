//! Objective quality measures: log-spectral distortion, frequency-weighted
//! segmental SNR and STOI.

mod fwseg;
mod resample;
mod stoi;

use std::f64::consts::LN_10;

use crate::dsp::LogSpectralFrame;
use crate::error::{invalid, Result};

pub use fwseg::{fwseg_snr, FWSEG_BANDS, FWSEG_CEIL_DB, FWSEG_FLOOR_DB};
pub use resample::resample;
pub use stoi::{stoi_score, STOI_SAMPLE_RATE};

/// Mean, standard deviation and per-item values of a metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub values: Vec<f64>,
}

impl MetricReport {
    pub fn from_values(values: Vec<f64>) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                values,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        Self {
            mean,
            std: var.sqrt(),
            values,
        }
    }
}

/// Natural-log magnitude difference to decibels.
const NEPER_TO_DB: f64 = 20.0 / LN_10;

/// RMS log-spectral distance in dB between two equally shaped spectrograms.
pub fn log_spectral_distortion(reference: &[LogSpectralFrame], test: &[LogSpectralFrame]) -> Result<f64> {
    if reference.len() != test.len() {
        return Err(invalid(format!(
            "{} reference frames vs {} test frames",
            reference.len(),
            test.len()
        )));
    }
    if reference.is_empty() {
        return Err(invalid("no frames to compare"));
    }
    let mut total = 0.0;
    for (i, (r, t)) in reference.iter().zip(test).enumerate() {
        if r.len() != t.len() || r.is_empty() {
            return Err(invalid(format!("frame {i}: {} vs {} bins", r.len(), t.len())));
        }
        let frame_ms = r
            .iter()
            .zip(t.iter())
            .map(|(a, b)| {
                let d = NEPER_TO_DB * (a - b);
                d * d
            })
            .sum::<f64>()
            / r.len() as f64;
        total += frame_ms;
    }
    Ok((total / reference.len() as f64).sqrt())
}
