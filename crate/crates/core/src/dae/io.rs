//! `DVAE` model files.
//!
//! Layout (little-endian): magic `DVAE`, version `u8`, layer-size count `u8`,
//! layer sizes `u32[count]`, activation tags `u8[count - 1]`, then `f32`
//! values: `feat_min`, `feat_max`, and per layer its weights (row-major, rows
//! are output units) followed by its biases.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{validate_dims, Activation, DaeModel, Layer};
use crate::error::{format_err, Error, Result};
use crate::io::Reader;

pub const MODEL_MAGIC: [u8; 4] = *b"DVAE";
pub const MODEL_VERSION: u8 = 1;

impl DaeModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let dims = self.layer_dims();
        let mut out = Vec::new();
        out.extend_from_slice(&MODEL_MAGIC);
        out.push(MODEL_VERSION);
        out.push(dims.len() as u8);
        for d in dims {
            out.extend_from_slice(&(*d as u32).to_le_bytes());
        }
        out.extend(self.layers().iter().map(|l| l.activation().tag()));
        let mut put = |v: f64| out.extend_from_slice(&(v as f32).to_le_bytes());
        self.feat_min().iter().for_each(|v| put(*v));
        self.feat_max().iter().for_each(|v| put(*v));
        for layer in self.layers() {
            layer.weights().iter().for_each(|v| put(*v));
            layer.biases().iter().for_each(|v| put(*v));
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "model");
        let magic = r.take(4)?;
        if magic != MODEL_MAGIC {
            return Err(format_err(format!(
                "bad model magic {:?}, expected \"DVAE\"",
                String::from_utf8_lossy(magic)
            )));
        }
        let version = r.u8()?;
        if version != MODEL_VERSION {
            return Err(format_err(format!("unsupported model version {version}")));
        }
        let count = r.u8()? as usize;
        let dims = (0..count)
            .map(|_| r.u32().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        validate_dims(&dims).map_err(|e| format_err(format!("inconsistent model dimensions: {e}")))?;
        let tags = r.take(count - 1)?.to_vec();
        let input = dims[0];
        let feat_min = r.f32_vec(input)?;
        let feat_max = r.f32_vec(input)?;
        let mut layers = Vec::with_capacity(count - 1);
        for (i, tag) in tags.into_iter().enumerate() {
            let activation = Activation::from_tag(tag)
                .ok_or_else(|| format_err(format!("layer {i}: unknown activation tag {tag}")))?;
            let (rows, cols) = (dims[i + 1], dims[i]);
            let w = Array2::from_shape_vec((rows, cols), r.f32_vec(rows * cols)?).expect("exact length");
            let b = Array1::from(r.f32_vec(rows)?);
            layers.push(Layer::new(w, b, activation).map_err(|e| format_err(format!("layer {i}: {e}")))?);
        }
        r.finish()?;
        DaeModel::new(dims, layers, feat_min, feat_max).map_err(|e| match e {
            Error::InvalidArgument(msg) => format_err(msg),
            other => other,
        })
    }
}

pub fn save_model(model: &DaeModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model.to_bytes())?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<DaeModel> {
    DaeModel::from_bytes(&fs::read(path)?)
}
