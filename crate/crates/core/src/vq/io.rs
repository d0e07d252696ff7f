//! `DVCB` codebook files.
//!
//! Layout (little-endian): magic `DVCB`, version `u8`, latent dimension `u16`,
//! split count `u8`, bit widths `u8[D]`, then each sub-codebook as `f32`
//! values, row-major (one codeword per row).

use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::{SplitCodebook, MAX_SPLIT_BITS};
use crate::error::{format_err, Error, Result};
use crate::io::Reader;

pub const CODEBOOK_MAGIC: [u8; 4] = *b"DVCB";
pub const CODEBOOK_VERSION: u8 = 1;

impl SplitCodebook {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&CODEBOOK_MAGIC);
        out.push(CODEBOOK_VERSION);
        out.extend_from_slice(&(self.latent_dim() as u16).to_le_bytes());
        out.push(self.split_count() as u8);
        out.extend_from_slice(self.bits());
        for d in 0..self.split_count() {
            for v in self.split(d).iter() {
                out.extend_from_slice(&(*v as f32).to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "codebook");
        let magic = r.take(4)?;
        if magic != CODEBOOK_MAGIC {
            return Err(format_err(format!(
                "bad codebook magic {:?}, expected \"DVCB\"",
                String::from_utf8_lossy(magic)
            )));
        }
        let version = r.u8()?;
        if version != CODEBOOK_VERSION {
            return Err(format_err(format!("unsupported codebook version {version}")));
        }
        let k = r.u16()? as usize;
        let d = r.u8()? as usize;
        if d == 0 || k % d != 0 {
            return Err(format_err(format!("{d} splits do not divide latent dimension {k}")));
        }
        let bits = r.take(d)?.to_vec();
        if let Some(b) = bits.iter().find(|b| **b == 0 || **b > MAX_SPLIT_BITS) {
            return Err(format_err(format!("unsupported split width {b}")));
        }
        let sub = k / d;
        let splits = bits
            .iter()
            .map(|b| {
                let rows = 1usize << b;
                Ok(Array2::from_shape_vec((rows, sub), r.f32_vec(rows * sub)?).expect("exact length"))
            })
            .collect::<Result<Vec<_>>>()?;
        r.finish()?;
        SplitCodebook::new(k, bits, splits).map_err(|e| match e {
            Error::InvalidArgument(msg) => format_err(msg),
            other => other,
        })
    }
}

pub fn save_codebook(cb: &SplitCodebook, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, cb.to_bytes())?;
    Ok(())
}

pub fn load_codebook(path: impl AsRef<Path>) -> Result<SplitCodebook> {
    SplitCodebook::from_bytes(&fs::read(path)?)
}
