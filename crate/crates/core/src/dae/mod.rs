//! Mirror-symmetric deep autoencoder over super-frames of log spectra.
//!
//! The encoder half maps a min/max-normalised joint log spectrum to a
//! sigmoid-bounded latent vector; the decoder half maps it back. Parameters
//! are held as `f64` but are always exactly representable as `f32`, which is
//! the precision of the on-disk model format.

mod io;
mod train;

use std::ops::{Deref, Range};

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{invalid, Result};

pub use io::{load_model, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use train::{
    finetune_backprop, pretrain_rbm_stack, train_dae, xavier_network, DenseLayer, Network, Rbm, TrainConfig,
    TrainEvent, TrainingReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Linear,
}

impl Activation {
    pub(crate) fn tag(self) -> u8 {
        match self {
            Activation::Sigmoid => 0,
            Activation::Linear => 1,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Sigmoid),
            1 => Some(Activation::Linear),
            _ => None,
        }
    }

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(x),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the activation output.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Linear => 1.0,
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn round_f32(x: f64) -> f64 {
    x as f32 as f64
}

/// One fully connected layer; `weights` is `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    weights: Array2<f64>,
    biases: Array1<f64>,
    activation: Activation,
}

impl Layer {
    pub fn new(weights: Array2<f64>, biases: Array1<f64>, activation: Activation) -> Result<Self> {
        if weights.nrows() != biases.len() {
            return Err(invalid(format!(
                "layer has {} weight rows but {} biases",
                weights.nrows(),
                biases.len()
            )));
        }
        let weights = weights.mapv(round_f32);
        let biases = biases.mapv(round_f32);
        if weights.iter().chain(biases.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("layer parameters must be finite in single precision"));
        }
        Ok(Self {
            weights,
            biases,
            activation,
        })
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn biases(&self) -> &Array1<f64> {
        &self.biases
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }

    /// Applies the layer to a batch of row vectors.
    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut y = x.dot(&self.weights.t());
        y += &self.biases;
        let act = self.activation;
        y.mapv_inplace(|v| act.apply(v));
        y
    }
}

/// Latent feature vector at the coding layer; entries lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentVector(Vec<f64>);

impl LatentVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(invalid(format!("latent value {v} outside [0, 1]")));
        }
        Ok(Self(values))
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for LatentVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Trained autoencoder plus the per-dimension feature normalisation.
#[derive(Debug, Clone, PartialEq)]
pub struct DaeModel {
    layer_dims: Vec<usize>,
    layers: Vec<Layer>,
    feat_min: Vec<f64>,
    feat_max: Vec<f64>,
}

impl DaeModel {
    pub fn new(layer_dims: Vec<usize>, layers: Vec<Layer>, feat_min: Vec<f64>, feat_max: Vec<f64>) -> Result<Self> {
        validate_dims(&layer_dims)?;
        if layers.len() != layer_dims.len() - 1 {
            return Err(invalid(format!(
                "{} layer sizes need {} weight layers, got {}",
                layer_dims.len(),
                layer_dims.len() - 1,
                layers.len()
            )));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.inputs() != layer_dims[i] || layer.outputs() != layer_dims[i + 1] {
                return Err(invalid(format!(
                    "layer {i} is {}x{}, expected {}x{}",
                    layer.outputs(),
                    layer.inputs(),
                    layer_dims[i + 1],
                    layer_dims[i]
                )));
            }
        }
        let input = layer_dims[0];
        if feat_min.len() != input || feat_max.len() != input {
            return Err(invalid(format!(
                "normalisation vectors must have {input} entries, got {} and {}",
                feat_min.len(),
                feat_max.len()
            )));
        }
        let feat_min: Vec<f64> = feat_min.into_iter().map(round_f32).collect();
        let feat_max: Vec<f64> = feat_max.into_iter().map(round_f32).collect();
        for (i, (lo, hi)) in feat_min.iter().zip(&feat_max).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(invalid(format!("feature {i}: need min < max, got [{lo}, {hi}]")));
            }
        }
        Ok(Self {
            layer_dims,
            layers,
            feat_min,
            feat_max,
        })
    }

    /// Model with every weight and bias zero and sigmoid activations.
    pub fn zeros(layer_dims: Vec<usize>, feat_min: Vec<f64>, feat_max: Vec<f64>) -> Result<Self> {
        validate_dims(&layer_dims)?;
        let layers = layer_dims
            .windows(2)
            .map(|w| Layer::new(Array2::zeros((w[1], w[0])), Array1::zeros(w[1]), Activation::Sigmoid))
            .collect::<Result<Vec<_>>>()?;
        Self::new(layer_dims, layers, feat_min, feat_max)
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn feat_min(&self) -> &[f64] {
        &self.feat_min
    }

    pub fn feat_max(&self) -> &[f64] {
        &self.feat_max
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn latent_dim(&self) -> usize {
        self.layer_dims[self.coding_layer_index()]
    }

    /// Index into `layer_dims` of the bottleneck.
    pub fn coding_layer_index(&self) -> usize {
        self.layer_dims.len() / 2
    }

    fn encoder_range(&self) -> Range<usize> {
        0..self.coding_layer_index()
    }

    fn decoder_range(&self) -> Range<usize> {
        self.coding_layer_index()..self.layers.len()
    }

    pub fn normalize(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(x.iter()
            .zip(self.feat_min.iter().zip(&self.feat_max))
            .map(|(v, (lo, hi))| ((v - lo) / (hi - lo)).clamp(0.0, 1.0))
            .collect())
    }

    pub fn denormalize(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(x.iter()
            .zip(self.feat_min.iter().zip(&self.feat_max))
            .map(|(v, (lo, hi))| lo + v * (hi - lo))
            .collect())
    }

    /// Normalises every row of `rows` (one super-frame per row).
    pub fn normalize_rows(&self, rows: ArrayView2<f64>) -> Result<Array2<f64>> {
        if rows.ncols() != self.input_dim() {
            return Err(invalid(format!(
                "rows have {} columns, model input is {}",
                rows.ncols(),
                self.input_dim()
            )));
        }
        let mut out = rows.to_owned();
        for mut row in out.axis_iter_mut(Axis(0)) {
            for (v, (lo, hi)) in row.iter_mut().zip(self.feat_min.iter().zip(&self.feat_max)) {
                *v = ((*v - lo) / (hi - lo)).clamp(0.0, 1.0);
            }
        }
        Ok(out)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(invalid(format!(
                "expected {} features, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("input contains non-finite values"));
        }
        Ok(())
    }

    fn run(&self, range: Range<usize>, batch: ArrayView2<f64>) -> Array2<f64> {
        let mut cur = batch.to_owned();
        for layer in &self.layers[range] {
            cur = layer.forward(cur.view());
        }
        cur
    }

    /// Analysis: joint log spectrum to latent vector.
    pub fn encode_latent(&self, super_frame: &[f64]) -> Result<LatentVector> {
        let x = self.normalize(super_frame)?;
        let row = Array2::from_shape_vec((1, x.len()), x).expect("shape matches length");
        Ok(LatentVector(
            self.run(self.encoder_range(), row.view()).into_raw_vec_and_offset().0,
        ))
    }

    /// Analysis for a batch of un-normalised super-frames (rows).
    pub fn encode_batch(&self, rows: ArrayView2<f64>) -> Result<Array2<f64>> {
        let x = self.normalize_rows(rows)?;
        Ok(self.run(self.encoder_range(), x.view()))
    }

    /// Synthesis: latent vector to joint log spectrum.
    pub fn decode_spectrum(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.latent_dim() {
            return Err(invalid(format!(
                "latent has {} values, model expects {}",
                z.len(),
                self.latent_dim()
            )));
        }
        let row = Array2::from_shape_vec((1, z.len()), z.to_vec()).expect("shape matches length");
        let y = self.run(self.decoder_range(), row.view());
        self.denormalize(y.as_slice().expect("standard layout"))
    }

    /// Synthesis for a batch of latent rows; returns denormalised spectra.
    pub fn decode_batch(&self, latents: ArrayView2<f64>) -> Result<Array2<f64>> {
        if latents.ncols() != self.latent_dim() {
            return Err(invalid(format!(
                "latents have {} columns, model expects {}",
                latents.ncols(),
                self.latent_dim()
            )));
        }
        let mut y = self.run(self.decoder_range(), latents);
        for mut row in y.axis_iter_mut(Axis(0)) {
            for (v, (lo, hi)) in row.iter_mut().zip(self.feat_min.iter().zip(&self.feat_max)) {
                *v = lo + *v * (hi - lo);
            }
        }
        Ok(y)
    }

    /// Full autoencoder pass in the normalised domain.
    pub fn reconstruct_normalized(&self, normalized: ArrayView2<f64>) -> Array2<f64> {
        self.run(0..self.layers.len(), normalized)
    }
}

/// Checks that `dims` describe a mirror-symmetric bottleneck network.
pub fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 3 || dims.len() % 2 == 0 {
        return Err(invalid(format!(
            "autoencoder needs an odd number (>= 3) of layer sizes, got {}",
            dims.len()
        )));
    }
    if dims.len() > u8::MAX as usize {
        return Err(invalid("too many layers"));
    }
    if dims.contains(&0) {
        return Err(invalid("layer sizes must be positive"));
    }
    if dims.iter().ne(dims.iter().rev()) {
        return Err(invalid(format!("layer sizes {dims:?} are not palindromic")));
    }
    let k = dims[dims.len() / 2];
    if k >= dims[0] {
        return Err(invalid(format!(
            "coding layer ({k}) must be smaller than the input ({})",
            dims[0]
        )));
    }
    Ok(())
}

/// Layer sizes `input-h1-..-hn-latent-hn-..-h1-input`.
pub fn mirrored_dims(input: usize, hidden: &[usize], latent: usize) -> Vec<usize> {
    let mut dims = vec![input];
    dims.extend_from_slice(hidden);
    dims.push(latent);
    dims.extend(hidden.iter().rev());
    dims.push(input);
    dims
}

/// Hidden widths of the default desk-scale architecture.
pub const DEFAULT_HIDDEN: [usize; 4] = [256, 256, 128, 128];

/// Hidden widths of the full-scale 11-layer architecture.
pub const FULL_SCALE_HIDDEN: [usize; 4] = [2048, 2048, 1024, 1024];
