//! Low-rate speech coding with a deep auto-encoder.
//!
//! Log-magnitude spectra of consecutive frames are stacked into super-frames,
//! compressed by the coding layer of a deep auto-encoder, and the latent
//! vectors are split vector quantized. The decoder maps codewords back to
//! spectra and recovers a waveform with Griffin-Lim phase reconstruction.
//!
//! ```no_run
//! use deepvoc_core::{load_codebook, load_model, Codec, CodecMode, SearchConfig};
//!
//! let model = load_model("model.dae")?;
//! let codebook = load_codebook("codebook.vq")?;
//! let codec = Codec::new(CodecMode::Rate2400, model, codebook)?;
//! let samples = vec![0.0; 8000];
//! let stream = codec.encode(&samples, SearchConfig::default())?;
//! let decoded = codec.decode(&stream, 100)?;
//! assert_eq!(decoded.samples.len(), samples.len());
//! # Ok::<(), deepvoc_core::Error>(())
//! ```

pub mod bitstream;
pub mod codec;
pub mod dae;
pub mod dsp;
mod error;
mod io;
pub mod metrics;
pub mod synth;
pub mod vq;

pub use bitstream::{read_container, write_container, EncodedFile};
pub use codec::{decode_stream, encode_stream, superframe_dataset, Codec, CodecMode, DecodedStream, Quantizer};
pub use dae::{load_model, save_model, train_dae, DaeModel, LatentVector, TrainConfig, TrainEvent, TrainingReport};
pub use dsp::{FrameConfig, LogSpectralFrame, SpectralAnalyzer};
pub use error::{Error, Result};
pub use metrics::{fwseg_snr, log_spectral_distortion, stoi_score, MetricReport};
pub use vq::{load_codebook, save_codebook, train_split_codebook, LbgConfig, SearchConfig, SplitCodebook};
