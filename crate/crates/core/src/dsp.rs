//! Short-time spectral analysis and Griffin-Lim synthesis.
//!
//! Frames are windowed slices `s[m*R + n] * w[n]`, analysed with an `N`-point
//! FFT of which only the first `N/2 + 1` bins are kept as natural-log
//! magnitudes. Synthesis goes the other way: half spectra are mirrored back to
//! conjugate-symmetric spectra, phase is estimated iteratively and the frames
//! are combined with a squared-window-normalised overlap-add.

use std::f64::consts::PI;
use std::ops::Deref;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};

/// Default analysis parameters: 8 kHz audio, 32 ms Hamming frames, 15 ms hop.
pub const DEFAULT_SAMPLE_RATE: u32 = 8000;
pub const DEFAULT_FRAME_LEN: usize = 256;
pub const DEFAULT_FRAME_SHIFT: usize = 120;
pub const DEFAULT_FFT_SIZE: usize = 256;
pub const DEFAULT_LOG_FLOOR: f64 = 1e-10;
pub const DEFAULT_GRIFFIN_LIM_ITERS: usize = 100;

/// Smallest overlap-add normaliser allowed before division.
const OLA_FLOOR: f64 = 1e-8;

/// Symmetric Hamming window `0.54 - 0.46 cos(2 pi n / (L - 1))`.
pub fn hamming_window(len: usize) -> Result<Vec<f64>> {
    if len < 2 {
        return Err(invalid(format!("hamming window needs at least 2 points, got {len}")));
    }
    let denom = (len - 1) as f64;
    Ok((0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / denom).cos())
        .collect())
}

/// Framing and spectral-analysis parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameConfig {
    sample_rate: u32,
    frame_len: usize,
    frame_shift: usize,
    fft_size: usize,
    window: Vec<f64>,
    log_floor: f64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self::new(
            DEFAULT_SAMPLE_RATE,
            DEFAULT_FRAME_LEN,
            DEFAULT_FRAME_SHIFT,
            DEFAULT_FFT_SIZE,
        )
        .expect("default frame configuration is valid")
    }
}

impl FrameConfig {
    /// Builds a configuration with a Hamming window and the default log floor.
    pub fn new(sample_rate: u32, frame_len: usize, frame_shift: usize, fft_size: usize) -> Result<Self> {
        let window = hamming_window(frame_len)?;
        let cfg = Self {
            sample_rate,
            frame_len,
            frame_shift,
            fft_size,
            window,
            log_floor: DEFAULT_LOG_FLOOR,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_window(mut self, window: Vec<f64>) -> Result<Self> {
        self.window = window;
        self.validate()?;
        Ok(self)
    }

    pub fn with_log_floor(mut self, log_floor: f64) -> Result<Self> {
        self.log_floor = log_floor;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 {
            return Err(invalid("sample rate must be positive"));
        }
        if self.frame_shift < 1 || self.frame_shift > self.frame_len || self.frame_len > self.fft_size {
            return Err(invalid(format!(
                "need 1 <= shift <= frame length <= fft size, got R={} L={} N={}",
                self.frame_shift, self.frame_len, self.fft_size
            )));
        }
        if self.fft_size % 2 != 0 {
            return Err(invalid(format!("fft size must be even, got {}", self.fft_size)));
        }
        if self.window.len() != self.frame_len {
            return Err(invalid(format!(
                "window has {} points, frame length is {}",
                self.window.len(),
                self.frame_len
            )));
        }
        if let Some(bad) = self.window.iter().find(|w| !(w.is_finite() && **w > 0.0 && **w <= 1.0)) {
            return Err(invalid(format!("window value {bad} outside (0, 1]")));
        }
        if !(self.log_floor.is_finite() && self.log_floor > 0.0) {
            return Err(invalid(format!("log floor must be positive, got {}", self.log_floor)));
        }
        Ok(())
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn frame_shift(&self) -> usize {
        self.frame_shift
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    pub fn log_floor(&self) -> f64 {
        self.log_floor
    }

    /// Number of retained spectral bins, `N/2 + 1`.
    pub fn spectrum_len(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Frame count for a signal of `n_samples`, zero-padding the tail into one
    /// final frame. Zero samples yield zero frames.
    pub fn frame_count(&self, n_samples: usize) -> usize {
        if n_samples == 0 {
            0
        } else {
            n_samples.saturating_sub(self.frame_len).div_ceil(self.frame_shift) + 1
        }
    }

    /// Length of the overlap-add output for `frames` frames.
    pub fn synthesis_len(&self, frames: usize) -> usize {
        if frames == 0 {
            0
        } else {
            (frames - 1) * self.frame_shift + self.frame_len
        }
    }
}

/// Windowed frames of a signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<Vec<f64>>,
    pub original_len: usize,
}

impl FrameSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Splits `samples` into overlapping windowed frames.
pub fn frame_signal(samples: &[f64], cfg: &FrameConfig) -> Result<FrameSequence> {
    if samples.is_empty() {
        return Err(invalid("cannot frame an empty signal"));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(invalid("signal contains non-finite samples"));
    }
    let count = cfg.frame_count(samples.len());
    let frames = (0..count)
        .map(|m| {
            let start = m * cfg.frame_shift;
            cfg.window
                .iter()
                .enumerate()
                .map(|(n, w)| samples.get(start + n).copied().unwrap_or(0.0) * w)
                .collect()
        })
        .collect();
    Ok(FrameSequence {
        frames,
        original_len: samples.len(),
    })
}

/// Natural-log magnitude half spectrum of one frame (`N/2 + 1` values).
#[derive(Debug, Clone, PartialEq)]
pub struct LogSpectralFrame(Vec<f64>);

impl LogSpectralFrame {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for LogSpectralFrame {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for LogSpectralFrame {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// Cached FFT plans for one [`FrameConfig`].
#[derive(Clone)]
pub struct SpectralAnalyzer {
    cfg: FrameConfig,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralAnalyzer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralAnalyzer").field("cfg", &self.cfg).finish()
    }
}

impl SpectralAnalyzer {
    pub fn new(cfg: &FrameConfig) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(cfg.fft_size),
            inverse: planner.plan_fft_inverse(cfg.fft_size),
            cfg: cfg.clone(),
        }
    }

    pub fn config(&self) -> &FrameConfig {
        &self.cfg
    }

    /// Full `N`-point DFT of a (possibly shorter, zero-padded) real frame.
    pub fn spectrum(&self, frame: &[f64]) -> Result<Vec<Complex64>> {
        let n = self.cfg.fft_size;
        if frame.len() > n {
            return Err(invalid(format!(
                "frame of {} samples exceeds fft size {n}",
                frame.len()
            )));
        }
        if frame.iter().any(|s| !s.is_finite()) {
            return Err(invalid("frame contains non-finite samples"));
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (b, s) in buf.iter_mut().zip(frame) {
            b.re = *s;
        }
        self.forward.process(&mut buf);
        Ok(buf)
    }

    pub fn log_magnitude(&self, frame: &[f64]) -> Result<LogSpectralFrame> {
        let spec = self.spectrum(frame)?;
        let floor = self.cfg.log_floor;
        Ok(LogSpectralFrame(
            spec[..self.cfg.spectrum_len()]
                .iter()
                .map(|c| c.norm().max(floor).ln())
                .collect(),
        ))
    }

    /// Frames `samples` and returns one log spectrum per frame.
    pub fn analyze(&self, samples: &[f64]) -> Result<Vec<LogSpectralFrame>> {
        frame_signal(samples, &self.cfg)?
            .frames
            .iter()
            .map(|f| self.log_magnitude(f))
            .collect()
    }
}

/// Log-magnitude spectrum of a single frame.
pub fn log_magnitude(frame: &[f64], cfg: &FrameConfig) -> Result<LogSpectralFrame> {
    SpectralAnalyzer::new(cfg).log_magnitude(frame)
}

/// Result of a Griffin-Lim run.
#[derive(Debug, Clone)]
pub struct GriffinLimOutput {
    pub samples: Vec<f64>,
    /// `sum (|STFT(x_i)| - A)^2` over all frames and all `N` bins, one entry
    /// per iteration.
    pub inconsistency: Vec<f64>,
    /// `sum A^2` over the same bins, for relative error measures.
    pub target_energy: f64,
}

impl GriffinLimOutput {
    /// `||(|STFT(x)| - A)|| / ||A||` after the final iteration.
    pub fn spectral_convergence(&self) -> f64 {
        let last = self.inconsistency.last().copied().unwrap_or(f64::NAN);
        (last / self.target_energy).sqrt()
    }
}

/// Reconstructs a waveform from log-magnitude frames with zero initial phase.
///
/// Returns `(M - 1) * R + L` samples.
pub fn griffin_lim_invert(frames: &[LogSpectralFrame], cfg: &FrameConfig, iters: usize) -> Result<Vec<f64>> {
    Ok(griffin_lim(frames, cfg, iters)?.samples)
}

/// Griffin-Lim with the per-iteration inconsistency trace.
pub fn griffin_lim(frames: &[LogSpectralFrame], cfg: &FrameConfig, iters: usize) -> Result<GriffinLimOutput> {
    if iters == 0 {
        return Err(invalid("griffin-lim needs at least one iteration"));
    }
    let n = cfg.fft_size;
    let half = cfg.spectrum_len();
    let (len, shift) = (cfg.frame_len, cfg.frame_shift);
    if let Some(bad) = frames.iter().position(|f| f.len() != half) {
        return Err(invalid(format!(
            "frame {bad} has {} bins, expected {half}",
            frames[bad].len()
        )));
    }
    if frames.iter().flat_map(|f| f.iter()).any(|v| !v.is_finite()) {
        return Err(invalid("log spectrum contains non-finite values"));
    }
    let out_len = cfg.synthesis_len(frames.len());
    if frames.is_empty() {
        return Ok(GriffinLimOutput {
            samples: Vec::new(),
            inconsistency: vec![0.0; iters],
            target_energy: 0.0,
        });
    }

    let analyzer = SpectralAnalyzer::new(cfg);
    let magnitudes: Vec<Vec<f64>> = frames
        .iter()
        .map(|f| {
            (0..n)
                .map(|k| if k < half { f[k].exp() } else { f[n - k].exp() })
                .collect()
        })
        .collect();
    let target_energy: f64 = magnitudes.iter().flatten().map(|a| a * a).sum();

    let mut norm = vec![0.0; out_len];
    for m in 0..frames.len() {
        for (j, w) in cfg.window.iter().enumerate() {
            norm[m * shift + j] += w * w;
        }
    }
    for v in &mut norm {
        *v = v.max(OLA_FLOOR);
    }

    let mut phases = vec![vec![Complex64::new(1.0, 0.0); n]; frames.len()];
    let mut samples = vec![0.0; out_len];
    let mut inconsistency = Vec::with_capacity(iters);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let scale = 1.0 / n as f64;

    for _ in 0..iters {
        samples.iter_mut().for_each(|s| *s = 0.0);
        for (m, (mag, phase)) in magnitudes.iter().zip(&phases).enumerate() {
            for ((b, a), p) in buf.iter_mut().zip(mag).zip(phase) {
                *b = p * *a;
            }
            analyzer.inverse.process(&mut buf);
            let start = m * shift;
            for (j, w) in cfg.window.iter().enumerate() {
                samples[start + j] += w * buf[j].re * scale;
            }
        }
        for (s, d) in samples.iter_mut().zip(&norm) {
            *s /= d;
        }

        let mut err = 0.0;
        for (m, (mag, phase)) in magnitudes.iter().zip(phases.iter_mut()).enumerate() {
            let start = m * shift;
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            for (j, w) in cfg.window.iter().enumerate() {
                buf[j].re = samples[start + j] * w;
            }
            analyzer.forward.process(&mut buf);
            for ((b, a), p) in buf.iter().zip(mag).zip(phase.iter_mut()) {
                let r = b.norm();
                err += (r - a) * (r - a);
                if r > 0.0 {
                    *p = b / r;
                }
            }
        }
        inconsistency.push(err);
    }

    debug_assert_eq!(samples.len(), len + (frames.len() - 1) * shift);
    Ok(GriffinLimOutput {
        samples,
        inconsistency,
        target_energy,
    })
}
