//! Bit packing of codeword indices and the `DVOC` container.
//!
//! Indices are written MSB first in split order, super-frames back to back
//! with no padding between them; only the end of the stream is zero-padded to
//! a whole byte.
//!
//! Container header (30 bytes, little-endian integers):
//!
//! | offset | size | field              |
//! |--------|------|--------------------|
//! | 0      | 4    | magic `DVOC`       |
//! | 4      | 1    | version (1)        |
//! | 5      | 1    | mode tag           |
//! | 6      | 4    | sample rate        |
//! | 10     | 8    | original length    |
//! | 18     | 4    | super-frame count  |
//! | 22     | 4    | model CRC32        |
//! | 26     | 4    | codebook CRC32     |
//!
//! followed by the packed payload.

use std::fs;
use std::path::Path;

use crate::codec::CodecMode;
use crate::error::{format_err, invalid, Result};
use crate::io::Reader;

pub const CONTAINER_MAGIC: [u8; 4] = *b"DVOC";
pub const CONTAINER_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 30;

/// CRC32 (IEEE) used to bind streams to their model and codebook files.
pub fn crc32(bytes: &[u8]) -> u32 {
    crc32fast::hash(bytes)
}

/// Bytes needed for `superframes` tuples of `bits` widths.
pub fn payload_len(superframes: usize, bits: &[u8]) -> usize {
    let per: usize = bits.iter().map(|b| *b as usize).sum();
    (superframes * per).div_ceil(8)
}

struct BitWriter {
    out: Vec<u8>,
    acc: u64,
    filled: u32,
}

impl BitWriter {
    fn new() -> Self {
        Self {
            out: Vec::new(),
            acc: 0,
            filled: 0,
        }
    }

    fn put(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 32);
        self.acc = (self.acc << width) | value;
        self.filled += width;
        while self.filled >= 8 {
            self.filled -= 8;
            self.out.push((self.acc >> self.filled) as u8);
        }
        self.acc &= (1u64 << self.filled) - 1;
    }

    fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            self.out.push((self.acc << (8 - self.filled)) as u8);
        }
        self.out
    }
}

/// Packs one index tuple per super-frame.
pub fn pack_indices(tuples: &[Vec<usize>], bits: &[u8]) -> Result<Vec<u8>> {
    let mut w = BitWriter::new();
    for (t, tuple) in tuples.iter().enumerate() {
        if tuple.len() != bits.len() {
            return Err(invalid(format!(
                "super-frame {t}: {} indices for {} splits",
                tuple.len(),
                bits.len()
            )));
        }
        for (d, (&index, &b)) in tuple.iter().zip(bits).enumerate() {
            if b == 0 || b > 32 || index as u64 >= 1u64 << b {
                return Err(invalid(format!(
                    "super-frame {t}, split {d}: index {index} does not fit in {b} bits"
                )));
            }
            w.put(index as u64, b as u32);
        }
    }
    Ok(w.finish())
}

/// Inverse of [`pack_indices`]; `bytes` must be exactly the packed length.
pub fn unpack_indices(bytes: &[u8], superframes: usize, bits: &[u8]) -> Result<Vec<Vec<usize>>> {
    let expected = payload_len(superframes, bits);
    if bytes.len() != expected {
        return Err(format_err(format!(
            "payload is {} bytes, {superframes} super-frames need {expected}",
            bytes.len()
        )));
    }
    let mut pos = 0usize;
    let read = |pos: &mut usize, width: u8| -> usize {
        let mut v = 0usize;
        for _ in 0..width {
            let bit = (bytes[*pos / 8] >> (7 - *pos % 8)) & 1;
            v = (v << 1) | bit as usize;
            *pos += 1;
        }
        v
    };
    let tuples: Vec<Vec<usize>> = (0..superframes)
        .map(|_| bits.iter().map(|b| read(&mut pos, *b)).collect())
        .collect();
    if pos % 8 != 0 && bytes[pos / 8] & (0xFFu8 >> (pos % 8)) != 0 {
        return Err(format_err("non-zero padding bits at end of payload"));
    }
    Ok(tuples)
}

/// Encoded stream plus the header needed to decode it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedFile {
    pub mode: CodecMode,
    pub sample_rate: u32,
    pub original_len: u64,
    pub superframe_count: u32,
    pub model_hash: u32,
    pub codebook_hash: u32,
    pub payload: Vec<u8>,
}

impl EncodedFile {
    pub fn payload_bits(&self) -> usize {
        self.superframe_count as usize * self.mode.bits_per_superframe()
    }

    pub fn duration_secs(&self) -> f64 {
        self.original_len as f64 / self.sample_rate as f64
    }

    pub fn indices(&self) -> Result<Vec<Vec<usize>>> {
        unpack_indices(&self.payload, self.superframe_count as usize, &self.mode.bits())
    }

    /// Human-readable warnings for hashes that differ from the given files.
    pub fn hash_warnings(&self, model_hash: u32, codebook_hash: u32) -> Vec<String> {
        let mut warnings = Vec::new();
        if self.model_hash != model_hash {
            warnings.push(format!(
                "model hash mismatch: stream was encoded with {:08x}, decoding with {model_hash:08x}",
                self.model_hash
            ));
        }
        if self.codebook_hash != codebook_hash {
            warnings.push(format!(
                "codebook hash mismatch: stream was encoded with {:08x}, decoding with {codebook_hash:08x}",
                self.codebook_hash
            ));
        }
        warnings
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&CONTAINER_MAGIC);
        out.push(CONTAINER_VERSION);
        out.push(self.mode.tag());
        out.extend_from_slice(&self.sample_rate.to_le_bytes());
        out.extend_from_slice(&self.original_len.to_le_bytes());
        out.extend_from_slice(&self.superframe_count.to_le_bytes());
        out.extend_from_slice(&self.model_hash.to_le_bytes());
        out.extend_from_slice(&self.codebook_hash.to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "stream");
        let magic = r.take(4)?;
        if magic != CONTAINER_MAGIC {
            return Err(format_err(format!(
                "bad stream magic {:?}, expected \"DVOC\"",
                String::from_utf8_lossy(magic)
            )));
        }
        let version = r.u8()?;
        if version != CONTAINER_VERSION {
            return Err(format_err(format!("unsupported stream version {version}")));
        }
        let tag = r.u8()?;
        let mode = CodecMode::from_tag(tag).ok_or_else(|| format_err(format!("unknown mode tag {tag}")))?;
        let sample_rate = r.u32()?;
        let original_len = r.u64()?;
        let superframe_count = r.u32()?;
        let model_hash = r.u32()?;
        let codebook_hash = r.u32()?;
        let payload = r.rest().to_vec();
        let expected = payload_len(superframe_count as usize, &mode.bits());
        if payload.len() != expected {
            return Err(format_err(format!(
                "payload is {} bytes but {superframe_count} super-frames need {expected}",
                payload.len()
            )));
        }
        let file = Self {
            mode,
            sample_rate,
            original_len,
            superframe_count,
            model_hash,
            codebook_hash,
            payload,
        };
        file.indices()?;
        Ok(file)
    }
}

pub fn write_container(file: &EncodedFile, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, file.to_bytes())?;
    Ok(())
}

pub fn read_container(path: impl AsRef<Path>) -> Result<EncodedFile> {
    EncodedFile::from_bytes(&fs::read(path)?)
}
