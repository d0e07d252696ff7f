//! End-to-end encode and decode pipelines.

use std::fmt;

use ndarray::{Array2, Axis};

use crate::bitstream::{crc32, pack_indices, EncodedFile};
use crate::dae::DaeModel;
use crate::dsp::{griffin_lim_invert, FrameConfig, LogSpectralFrame, SpectralAnalyzer};
use crate::error::{format_err, invalid, Error, Result};
use crate::vq::{
    dequantize, quantize_abs_svq, quantize_sq_binary, quantize_svq, sq_dequantize, AbsResult, SearchConfig,
    SplitCodebook,
};

/// Fixed-rate operating points.
///
/// | mode | T | K  | D | bits/split | bits/frame |
/// |------|---|----|---|------------|------------|
/// | 2400 | 2 | 72 | 6 | 12         | 36         |
/// | 1200 | 3 | 54 | 6 | 9          | 18         |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodecMode {
    Rate2400,
    Rate1200,
}

impl CodecMode {
    pub const ALL: [CodecMode; 2] = [CodecMode::Rate2400, CodecMode::Rate1200];

    pub fn tag(self) -> u8 {
        match self {
            CodecMode::Rate2400 => 0,
            CodecMode::Rate1200 => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(CodecMode::Rate2400),
            1 => Some(CodecMode::Rate1200),
            _ => None,
        }
    }

    pub fn from_rate(rate: u32) -> Option<Self> {
        match rate {
            2400 => Some(CodecMode::Rate2400),
            1200 => Some(CodecMode::Rate1200),
            _ => None,
        }
    }

    /// Nominal bit rate at 8 kHz with a 120-sample hop.
    pub fn rate(self) -> u32 {
        match self {
            CodecMode::Rate2400 => 2400,
            CodecMode::Rate1200 => 1200,
        }
    }

    /// Frames per super-frame, `T`.
    pub fn frames_per_superframe(self) -> usize {
        match self {
            CodecMode::Rate2400 => 2,
            CodecMode::Rate1200 => 3,
        }
    }

    /// Latent dimension `K`.
    pub fn latent_dim(self) -> usize {
        match self {
            CodecMode::Rate2400 => 72,
            CodecMode::Rate1200 => 54,
        }
    }

    /// Number of splits `D`.
    pub fn splits(self) -> usize {
        6
    }

    pub fn split_bits(self) -> u8 {
        match self {
            CodecMode::Rate2400 => 12,
            CodecMode::Rate1200 => 9,
        }
    }

    pub fn bits(self) -> Vec<u8> {
        vec![self.split_bits(); self.splits()]
    }

    pub fn bits_per_superframe(self) -> usize {
        self.splits() * self.split_bits() as usize
    }

    pub fn bits_per_frame(self) -> usize {
        self.bits_per_superframe() / self.frames_per_superframe()
    }

    /// Model input width for `cfg`: `(N/2 + 1) * T`.
    pub fn input_dim(self, cfg: &FrameConfig) -> usize {
        cfg.spectrum_len() * self.frames_per_superframe()
    }
}

impl fmt::Display for CodecMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} bit/s, T={}, {} bits/frame",
            self.rate(),
            self.frames_per_superframe(),
            self.bits_per_frame()
        )
    }
}

/// Concatenates runs of `t` frames; a short final run repeats its last frame.
pub fn assemble_superframes(frames: &[LogSpectralFrame], t: usize) -> Result<Vec<Vec<f64>>> {
    if t == 0 {
        return Err(invalid("super-frames need at least one frame"));
    }
    if frames.is_empty() {
        return Err(invalid("no frames to assemble"));
    }
    Ok(frames
        .chunks(t)
        .map(|chunk| {
            let last = chunk.last().expect("chunks are non-empty");
            chunk
                .iter()
                .chain(std::iter::repeat_n(last, t - chunk.len()))
                .flat_map(|f| f.iter().copied())
                .collect()
        })
        .collect())
}

/// Cuts joint vectors back into `frame_count` frames of `bins` values.
pub fn split_superframes(superframes: &[Vec<f64>], bins: usize, frame_count: usize) -> Vec<LogSpectralFrame> {
    superframes
        .iter()
        .flat_map(|sf| sf.chunks(bins).map(|c| LogSpectralFrame::new(c.to_vec())))
        .take(frame_count)
        .collect()
}

/// Stacks the super-frames of every signal into one training matrix.
pub fn superframe_dataset(signals: &[Vec<f64>], mode: CodecMode, cfg: &FrameConfig) -> Result<Array2<f64>> {
    let analyzer = SpectralAnalyzer::new(cfg);
    let width = mode.input_dim(cfg);
    let mut flat = Vec::new();
    let mut rows = 0;
    for signal in signals {
        if signal.is_empty() {
            continue;
        }
        let frames = analyzer.analyze(signal)?;
        for sf in assemble_superframes(&frames, mode.frames_per_superframe())? {
            flat.extend(sf);
            rows += 1;
        }
    }
    if rows == 0 {
        return Err(Error::InsufficientData("no super-frames in the corpus".into()));
    }
    Array2::from_shape_vec((rows, width), flat).map_err(|e| invalid(e.to_string()))
}

/// How latent vectors are quantized when reconstructing spectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantizer {
    /// One bit per latent dimension.
    ScalarBinary,
    /// Open-loop nearest-neighbour split VQ.
    Svq,
    /// Closed-loop J-best split VQ.
    AbsSvq(SearchConfig),
    /// No quantization (DAE analysis/synthesis only).
    None,
}

/// Model, codebook and framing bundled for one operating mode.
#[derive(Debug, Clone)]
pub struct Codec {
    mode: CodecMode,
    analyzer: SpectralAnalyzer,
    model: DaeModel,
    codebook: SplitCodebook,
    model_hash: u32,
    codebook_hash: u32,
}

/// Decoded waveform and any non-fatal diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedStream {
    pub samples: Vec<f64>,
    pub warnings: Vec<String>,
}

impl Codec {
    pub fn new(mode: CodecMode, model: DaeModel, codebook: SplitCodebook) -> Result<Self> {
        Self::with_frame_config(mode, model, codebook, FrameConfig::default())
    }

    pub fn with_frame_config(
        mode: CodecMode,
        model: DaeModel,
        codebook: SplitCodebook,
        cfg: FrameConfig,
    ) -> Result<Self> {
        let input = mode.input_dim(&cfg);
        if model.input_dim() != input {
            return Err(Error::Config(format!(
                "model input is {}, mode {} needs {input}",
                model.input_dim(),
                mode.rate()
            )));
        }
        if model.latent_dim() != mode.latent_dim() {
            return Err(Error::Config(format!(
                "model latent dimension is {}, mode {} needs {}",
                model.latent_dim(),
                mode.rate(),
                mode.latent_dim()
            )));
        }
        if codebook.latent_dim() != mode.latent_dim() || codebook.bits() != mode.bits().as_slice() {
            return Err(Error::Config(format!(
                "codebook (K={}, bits={:?}) does not match mode {} (K={}, bits={:?})",
                codebook.latent_dim(),
                codebook.bits(),
                mode.rate(),
                mode.latent_dim(),
                mode.bits()
            )));
        }
        Ok(Self {
            mode,
            analyzer: SpectralAnalyzer::new(&cfg),
            model_hash: crc32(&model.to_bytes()),
            codebook_hash: crc32(&codebook.to_bytes()),
            model,
            codebook,
        })
    }

    pub fn mode(&self) -> CodecMode {
        self.mode
    }

    pub fn frame_config(&self) -> &FrameConfig {
        self.analyzer.config()
    }

    pub fn model(&self) -> &DaeModel {
        &self.model
    }

    pub fn codebook(&self) -> &SplitCodebook {
        &self.codebook
    }

    pub fn model_hash(&self) -> u32 {
        self.model_hash
    }

    pub fn codebook_hash(&self) -> u32 {
        self.codebook_hash
    }

    /// Log spectra of `samples` grouped into super-frames.
    pub fn analyze(&self, samples: &[f64]) -> Result<Vec<Vec<f64>>> {
        let frames = self.analyzer.analyze(samples)?;
        assemble_superframes(&frames, self.mode.frames_per_superframe())
    }

    /// Closed-loop quantization of each super-frame, in time order.
    pub fn quantize_superframes(&self, superframes: &[Vec<f64>], search: SearchConfig) -> Result<Vec<AbsResult>> {
        superframes
            .iter()
            .map(|y| {
                let z = self.model.encode_latent(y)?;
                quantize_abs_svq(y, &z, &self.codebook, &self.model, search)
            })
            .collect()
    }

    pub fn encode(&self, samples: &[f64], search: SearchConfig) -> Result<EncodedFile> {
        let superframes = self.analyze(samples)?;
        let indices: Vec<Vec<usize>> = self
            .quantize_superframes(&superframes, search)?
            .into_iter()
            .map(|r| r.indices)
            .collect();
        self.package(samples.len(), indices)
    }

    /// Open-loop encode path (nearest codeword per split in the latent domain).
    pub fn encode_svq(&self, samples: &[f64]) -> Result<EncodedFile> {
        let indices = self
            .analyze(samples)?
            .iter()
            .map(|y| quantize_svq(&self.model.encode_latent(y)?, &self.codebook))
            .collect::<Result<Vec<_>>>()?;
        self.package(samples.len(), indices)
    }

    fn package(&self, original_len: usize, indices: Vec<Vec<usize>>) -> Result<EncodedFile> {
        let superframe_count =
            u32::try_from(indices.len()).map_err(|_| invalid("input too long for the stream format"))?;
        Ok(EncodedFile {
            mode: self.mode,
            sample_rate: self.frame_config().sample_rate(),
            original_len: original_len as u64,
            superframe_count,
            model_hash: self.model_hash,
            codebook_hash: self.codebook_hash,
            payload: pack_indices(&indices, self.codebook.bits())?,
        })
    }

    /// Decoded log spectra for index tuples, truncated to `frame_count` frames.
    pub fn decode_spectra(&self, indices: &[Vec<usize>], frame_count: usize) -> Result<Vec<LogSpectralFrame>> {
        let latents = indices
            .iter()
            .map(|t| dequantize(t, &self.codebook).map(|z| z.into_vec()))
            .collect::<Result<Vec<_>>>()?;
        self.synthesize_latents(latents, frame_count)
    }

    fn synthesize_latents(&self, latents: Vec<Vec<f64>>, frame_count: usize) -> Result<Vec<LogSpectralFrame>> {
        let k = self.model.latent_dim();
        let n = latents.len();
        let flat: Vec<f64> = latents.into_iter().flatten().collect();
        let batch = Array2::from_shape_vec((n, k), flat).map_err(|e| invalid(e.to_string()))?;
        let decoded = self.model.decode_batch(batch.view())?;
        let rows: Vec<Vec<f64>> = decoded.axis_iter(Axis(0)).map(|r| r.to_vec()).collect();
        Ok(split_superframes(
            &rows,
            self.frame_config().spectrum_len(),
            frame_count,
        ))
    }

    /// Analysis followed by quantization and DAE synthesis, stopping before
    /// phase reconstruction. Returns `(reference, reconstructed)` frames.
    pub fn reconstruct_spectra(
        &self,
        samples: &[f64],
        quantizer: Quantizer,
    ) -> Result<(Vec<LogSpectralFrame>, Vec<LogSpectralFrame>)> {
        let frames = self.analyzer.analyze(samples)?;
        let superframes = assemble_superframes(&frames, self.mode.frames_per_superframe())?;
        let latents = match quantizer {
            Quantizer::AbsSvq(search) => self
                .quantize_superframes(&superframes, search)?
                .iter()
                .map(|r| dequantize(&r.indices, &self.codebook).map(|z| z.into_vec()))
                .collect::<Result<Vec<_>>>()?,
            _ => superframes
                .iter()
                .map(|y| {
                    let z = self.model.encode_latent(y)?;
                    Ok(match quantizer {
                        Quantizer::ScalarBinary => sq_dequantize(&quantize_sq_binary(&z)?)?.into_vec(),
                        Quantizer::Svq => dequantize(&quantize_svq(&z, &self.codebook)?, &self.codebook)?.into_vec(),
                        _ => z.into_vec(),
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let decoded = self.synthesize_latents(latents, frames.len())?;
        Ok((frames, decoded))
    }

    /// Griffin-Lim synthesis truncated to `original_len` and clamped to
    /// `[-1, 1]`.
    pub fn synthesize(&self, frames: &[LogSpectralFrame], original_len: usize, gl_iters: usize) -> Result<Vec<f64>> {
        let mut samples = griffin_lim_invert(frames, self.frame_config(), gl_iters)?;
        samples.truncate(original_len);
        samples.resize(original_len, 0.0);
        samples.iter_mut().for_each(|s| *s = s.clamp(-1.0, 1.0));
        Ok(samples)
    }

    pub fn decode(&self, file: &EncodedFile, gl_iters: usize) -> Result<DecodedStream> {
        if file.mode != self.mode {
            return Err(Error::Config(format!(
                "stream is mode {}, codec is configured for {}",
                file.mode.rate(),
                self.mode.rate()
            )));
        }
        let cfg = self.frame_config();
        if file.sample_rate != cfg.sample_rate() {
            return Err(format_err(format!(
                "stream sample rate {} Hz, codec runs at {} Hz",
                file.sample_rate,
                cfg.sample_rate()
            )));
        }
        let original_len =
            usize::try_from(file.original_len).map_err(|_| format_err("original length does not fit in memory"))?;
        let frame_count = cfg.frame_count(original_len);
        let expected = frame_count.div_ceil(self.mode.frames_per_superframe());
        if file.superframe_count as usize != expected {
            return Err(format_err(format!(
                "{} samples need {expected} super-frames, stream has {}",
                original_len, file.superframe_count
            )));
        }
        let warnings = file.hash_warnings(self.model_hash, self.codebook_hash);
        let indices = file.indices()?;
        let frames = self.decode_spectra(&indices, frame_count)?;
        let samples = self.synthesize(&frames, original_len, gl_iters)?;
        Ok(DecodedStream { samples, warnings })
    }
}

/// Encodes `samples` (8 kHz, full scale `[-1, 1]`) into a stream.
pub fn encode_stream(
    samples: &[f64],
    model: &DaeModel,
    codebook: &SplitCodebook,
    mode: CodecMode,
    search: SearchConfig,
) -> Result<EncodedFile> {
    Codec::new(mode, model.clone(), codebook.clone())?.encode(samples, search)
}

pub fn decode_stream(
    file: &EncodedFile,
    model: &DaeModel,
    codebook: &SplitCodebook,
    gl_iters: usize,
) -> Result<DecodedStream> {
    Codec::new(file.mode, model.clone(), codebook.clone())?.decode(file, gl_iters)
}
