//! WAV ingestion, corpus listing and atomic output files.

use std::fs;
use std::io::{Cursor, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use tempfile::NamedTempFile;
use walkdir::WalkDir;

pub const SAMPLE_RATE: u32 = 8000;
const FULL_SCALE: f64 = 32768.0;

/// Reads a 16-bit mono 8 kHz WAV file as samples in `[-1, 1)`.
pub fn read_wav(path: &Path) -> Result<Vec<f64>> {
    let reader = WavReader::open(path).with_context(|| format!("reading {}", path.display()))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        bail!(
            "{}: expected mono input, got {} channels",
            path.display(),
            spec.channels
        );
    }
    if spec.sample_rate != SAMPLE_RATE {
        bail!(
            "{}: expected a sample rate of {SAMPLE_RATE} Hz, got {} Hz",
            path.display(),
            spec.sample_rate
        );
    }
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        bail!(
            "{}: expected 16-bit PCM, got {} bits ({:?})",
            path.display(),
            spec.bits_per_sample,
            spec.sample_format
        );
    }
    reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / FULL_SCALE))
        .collect::<Result<_, _>>()
        .with_context(|| format!("decoding {}", path.display()))
}

/// Encodes samples as 16-bit mono 8 kHz PCM.
pub fn wav_bytes(samples: &[f64]) -> Result<Vec<u8>> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: SAMPLE_RATE,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut buf = Cursor::new(Vec::new());
    let mut w = WavWriter::new(&mut buf, spec)?;
    for s in samples {
        w.write_sample((s * FULL_SCALE).round().clamp(-FULL_SCALE, FULL_SCALE - 1.0) as i16)?;
    }
    w.finalize()?;
    Ok(buf.into_inner())
}

/// Writes through a temporary file in the destination directory, so a failed
/// run never leaves a partial output behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.as_file().sync_all())
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path)
        .map_err(|e| e.error)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// All `.wav` files below `dir`, sorted by path.
pub fn list_wavs(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        bail!("{} is not a directory", dir.display());
    }
    let mut files = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.with_context(|| format!("listing {}", dir.display()))?;
        let is_wav = entry.path().extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
        if entry.file_type().is_file() && is_wav {
            files.push(entry.into_path());
        }
    }
    files.sort();
    Ok(files)
}

pub fn read_corpus(dir: &Path) -> Result<Vec<Vec<f64>>> {
    let files = list_wavs(dir)?;
    if files.is_empty() {
        bail!("no .wav files found in {}", dir.display());
    }
    files.iter().map(|f| read_wav(f)).collect()
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wav_round_trip_and_clamp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        write_atomic(&path, &wav_bytes(&[0.0, 0.5, -1.0, 1.5, -0.25]).unwrap()).unwrap();
        assert_eq!(read_wav(&path).unwrap(), vec![0.0, 0.5, -1.0, 32767.0 / 32768.0, -0.25]);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn corpus_listing_is_sorted_and_recursive() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("sub")).unwrap();
        for name in ["b.wav", "a.WAV", "sub/c.wav", "notes.txt"] {
            fs::write(dir.path().join(name), b"").unwrap();
        }
        let names: Vec<String> = list_wavs(dir.path())
            .unwrap()
            .iter()
            .map(|p| p.strip_prefix(dir.path()).unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["a.WAV", "b.wav", "sub/c.wav"]);
    }
}
