use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{sigmoid, validate_dims, Activation, DaeModel, Layer};
use crate::error::{invalid, Error, Result};

/// Hyperparameters for pre-training and fine-tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub minibatch: usize,
    pub pretrain_lr: f64,
    pub pretrain_momentum: f64,
    pub pretrain_epochs: usize,
    pub finetune_lr_initial: f64,
    /// Subtracted from the learning rate after every epoch.
    pub finetune_lr_decrement: f64,
    /// Lower bound on the decayed learning rate (never above the initial rate).
    pub finetune_lr_floor: f64,
    pub finetune_momentum: f64,
    pub finetune_epochs: usize,
    pub rng_seed: u64,
    pub skip_pretrain: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            minibatch: 512,
            pretrain_lr: 1e-3,
            pretrain_momentum: 0.99,
            pretrain_epochs: 300,
            finetune_lr_initial: 1e-3,
            finetune_lr_decrement: 1e-4,
            finetune_lr_floor: 1e-5,
            finetune_momentum: 0.9,
            finetune_epochs: 1000,
            rng_seed: 0,
            skip_pretrain: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.minibatch == 0 {
            return Err(Error::Config("minibatch must be at least 1".into()));
        }
        for (name, lr) in [
            ("pretrain_lr", self.pretrain_lr),
            ("finetune_lr_initial", self.finetune_lr_initial),
            ("finetune_lr_decrement", self.finetune_lr_decrement),
            ("finetune_lr_floor", self.finetune_lr_floor),
        ] {
            if !(lr.is_finite() && lr >= 0.0) {
                return Err(Error::Config(format!("{name} must be a non-negative number, got {lr}")));
            }
        }
        for (name, mu) in [
            ("pretrain_momentum", self.pretrain_momentum),
            ("finetune_momentum", self.finetune_momentum),
        ] {
            if !(0.0..1.0).contains(&mu) {
                return Err(Error::Config(format!("{name} must be in [0, 1), got {mu}")));
            }
        }
        Ok(())
    }

    /// Fine-tuning learning rate for 0-based `epoch`.
    pub fn finetune_lr(&self, epoch: usize) -> f64 {
        let floor = self.finetune_lr_floor.min(self.finetune_lr_initial);
        (self.finetune_lr_initial - self.finetune_lr_decrement * epoch as f64).max(floor)
    }
}

/// Loss history of a fine-tuning run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    /// Dataset MSE before the first update.
    pub initial_loss: f64,
    /// Dataset MSE after each epoch.
    pub epoch_losses: Vec<f64>,
}

impl TrainingReport {
    pub fn final_loss(&self) -> f64 {
        self.epoch_losses.last().copied().unwrap_or(self.initial_loss)
    }
}

/// Progress notifications from [`train_dae`]; epochs are 1-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainEvent {
    /// Mean reconstruction error of one RBM epoch.
    Pretrain { layer: usize, epoch: usize, error: f64 },
    /// Full-dataset loss after one fine-tuning epoch.
    Finetune { epoch: usize, loss: f64 },
}

/// Trainable layer in full `f64` precision.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut y = x.dot(&self.weights.t());
        y += &self.biases;
        let act = self.activation;
        y.mapv_inplace(|v| act.apply(v));
        y
    }
}

/// Weight and bias gradients, one pair per layer.
pub type Gradient = Vec<(Array2<f64>, Array1<f64>)>;

/// Full-precision feed-forward network used during training.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<DenseLayer>,
}

impl Network {
    pub fn from_model(model: &DaeModel) -> Self {
        Self {
            layers: model
                .layers()
                .iter()
                .map(|l| DenseLayer {
                    weights: l.weights().clone(),
                    biases: l.biases().clone(),
                    activation: l.activation(),
                })
                .collect(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].weights.ncols()];
        dims.extend(self.layers.iter().map(|l| l.weights.nrows()));
        dims
    }

    /// Rounds parameters to the model's storage precision.
    pub fn into_model(self, feat_min: Vec<f64>, feat_max: Vec<f64>) -> Result<DaeModel> {
        let dims = self.dims();
        let layers = self
            .layers
            .into_iter()
            .map(|l| Layer::new(l.weights, l.biases, l.activation))
            .collect::<Result<Vec<_>>>()?;
        DaeModel::new(dims, layers, feat_min, feat_max)
    }

    /// Whether every parameter survives conversion to `f32`.
    fn storable(&self) -> bool {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()))
            .all(|v| v.is_finite() && v.abs() <= f32::MAX as f64)
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut cur = x.to_owned();
        for layer in &self.layers {
            cur = layer.forward(cur.view());
        }
        cur
    }

    /// Mean squared reconstruction error of `x` (rows are samples).
    pub fn loss(&self, x: ArrayView2<f64>) -> f64 {
        let out = self.forward(x);
        mse(out.view(), x)
    }

    pub fn loss_and_gradient(&self, x: ArrayView2<f64>) -> (f64, Gradient) {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_owned());
        for layer in &self.layers {
            let next = layer.forward(acts.last().expect("non-empty").view());
            acts.push(next);
        }
        let out = acts.last().expect("non-empty");
        let loss = mse(out.view(), x);
        let scale = 2.0 / (x.len() as f64);

        let mut delta = (out - &x) * scale;
        let mut grads: Gradient = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let act = layer.activation;
            delta.zip_mut_with(&acts[i + 1], |d, y| *d *= act.derivative_from_output(*y));
            let gw = delta.t().dot(&acts[i]);
            let gb = delta.sum_axis(Axis(0));
            if i > 0 {
                delta = delta.dot(&layer.weights);
            }
            grads.push((gw, gb));
        }
        grads.reverse();
        (loss, grads)
    }

    /// Minibatch gradient descent with classical momentum on the
    /// reconstruction MSE. `on_epoch` receives the 1-based epoch and its loss.
    pub fn finetune(
        &mut self,
        data: ArrayView2<f64>,
        cfg: &TrainConfig,
        mut on_epoch: impl FnMut(usize, f64),
    ) -> Result<TrainingReport> {
        cfg.validate()?;
        if data.nrows() == 0 {
            return Err(invalid("fine-tuning dataset is empty"));
        }
        if data.ncols() != self.layers[0].weights.ncols() {
            return Err(invalid(format!(
                "dataset has {} columns, network input is {}",
                data.ncols(),
                self.layers[0].weights.ncols()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        rng.set_stream(1);

        let initial_loss = self.loss(data);
        if !initial_loss.is_finite() {
            return Err(Error::TrainingDiverged {
                epoch: 0,
                loss: initial_loss,
            });
        }
        let mut velocity: Gradient = self
            .layers
            .iter()
            .map(|l| (Array2::zeros(l.weights.raw_dim()), Array1::zeros(l.biases.len())))
            .collect();
        let mut order: Vec<usize> = (0..data.nrows()).collect();
        let mut epoch_losses = Vec::with_capacity(cfg.finetune_epochs);

        for epoch in 0..cfg.finetune_epochs {
            let lr = cfg.finetune_lr(epoch);
            order.shuffle(&mut rng);
            for chunk in order.chunks(cfg.minibatch) {
                let batch = data.select(Axis(0), chunk);
                let (_, grads) = self.loss_and_gradient(batch.view());
                for ((layer, (vw, vb)), (gw, gb)) in self.layers.iter_mut().zip(&mut velocity).zip(&grads) {
                    vw.zip_mut_with(gw, |v, g| *v = cfg.finetune_momentum * *v - lr * g);
                    vb.zip_mut_with(gb, |v, g| *v = cfg.finetune_momentum * *v - lr * g);
                    layer.weights += &*vw;
                    layer.biases += &*vb;
                }
            }
            let loss = self.loss(data);
            if !loss.is_finite() || !self.storable() {
                return Err(Error::TrainingDiverged { epoch: epoch + 1, loss });
            }
            on_epoch(epoch + 1, loss);
            epoch_losses.push(loss);
        }
        Ok(TrainingReport {
            initial_loss,
            epoch_losses,
        })
    }
}

fn mse(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    let n = a.len().max(1) as f64;
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n
}

fn xavier_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-a..=a))
}

/// Uniform `[-a, a]` initialisation with `a = sqrt(6 / (fan_in + fan_out))`
/// and zero biases.
pub fn xavier_network(dims: &[usize], rng: &mut impl Rng) -> Network {
    Network {
        layers: dims
            .windows(2)
            .map(|w| DenseLayer {
                weights: xavier_matrix(w[1], w[0], rng),
                biases: Array1::zeros(w[1]),
                activation: Activation::Sigmoid,
            })
            .collect(),
    }
}

/// Bernoulli-Bernoulli restricted Boltzmann machine.
///
/// `weights` is `hidden x visible`. Contrastive divergence uses mean-field
/// probabilities at every step, so updates are deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Rbm {
    pub weights: Array2<f64>,
    pub hidden_bias: Array1<f64>,
    pub visible_bias: Array1<f64>,
    vel_weights: Array2<f64>,
    vel_hidden: Array1<f64>,
    vel_visible: Array1<f64>,
}

impl Rbm {
    pub fn new(visible: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        Self::from_parts(
            xavier_matrix(hidden, visible, rng),
            Array1::zeros(hidden),
            Array1::zeros(visible),
        )
    }

    pub fn from_parts(weights: Array2<f64>, hidden_bias: Array1<f64>, visible_bias: Array1<f64>) -> Self {
        Self {
            vel_weights: Array2::zeros(weights.raw_dim()),
            vel_hidden: Array1::zeros(hidden_bias.len()),
            vel_visible: Array1::zeros(visible_bias.len()),
            weights,
            hidden_bias,
            visible_bias,
        }
    }

    pub fn hidden_probs(&self, v: ArrayView2<f64>) -> Array2<f64> {
        let mut h = v.dot(&self.weights.t());
        h += &self.hidden_bias;
        h.mapv_inplace(sigmoid);
        h
    }

    pub fn visible_probs(&self, h: ArrayView2<f64>) -> Array2<f64> {
        let mut v = h.dot(&self.weights);
        v += &self.visible_bias;
        v.mapv_inplace(sigmoid);
        v
    }

    /// One CD-1 update on `batch`; returns the batch reconstruction MSE.
    pub fn cd1_step(&mut self, batch: ArrayView2<f64>, lr: f64, momentum: f64) -> f64 {
        let n = batch.nrows() as f64;
        let h0 = self.hidden_probs(batch);
        let v1 = self.visible_probs(h0.view());
        let h1 = self.hidden_probs(v1.view());

        let gw = (h0.t().dot(&batch) - h1.t().dot(&v1)) / n;
        let gh = (&h0 - &h1).sum_axis(Axis(0)) / n;
        let gv = (&batch - &v1).sum_axis(Axis(0)) / n;

        self.vel_weights.zip_mut_with(&gw, |v, g| *v = momentum * *v + lr * g);
        self.vel_hidden.zip_mut_with(&gh, |v, g| *v = momentum * *v + lr * g);
        self.vel_visible.zip_mut_with(&gv, |v, g| *v = momentum * *v + lr * g);
        self.weights += &self.vel_weights;
        self.hidden_bias += &self.vel_hidden;
        self.visible_bias += &self.vel_visible;

        mse(v1.view(), batch)
    }
}

/// Greedy layer-wise RBM pre-training of the encoder half.
///
/// Each RBM initialises one encoder layer; its transpose and visible bias
/// initialise the mirrored decoder layer. With `skip_pretrain` set the
/// network gets a seeded Xavier initialisation instead.
pub fn pretrain_rbm_stack(data: ArrayView2<f64>, cfg: &TrainConfig, dims: &[usize]) -> Result<Network> {
    pretrain_with(data, cfg, dims, |_, _, _| {})
}

pub(crate) fn pretrain_with(
    data: ArrayView2<f64>,
    cfg: &TrainConfig,
    dims: &[usize],
    mut on_epoch: impl FnMut(usize, usize, f64),
) -> Result<Network> {
    validate_dims(dims)?;
    cfg.validate()?;
    if data.nrows() == 0 {
        return Err(invalid("pre-training dataset is empty"));
    }
    if data.ncols() != dims[0] {
        return Err(invalid(format!(
            "dataset has {} columns, network input is {}",
            data.ncols(),
            dims[0]
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    if cfg.skip_pretrain {
        return Ok(xavier_network(dims, &mut rng));
    }

    let n_layers = dims.len() - 1;
    let coding = dims.len() / 2;
    let mut layers: Vec<Option<DenseLayer>> = vec![None; n_layers];
    let mut input = data.to_owned();
    let mut order: Vec<usize> = (0..input.nrows()).collect();

    for i in 0..coding {
        let mut rbm = Rbm::new(dims[i], dims[i + 1], &mut rng);
        for epoch in 0..cfg.pretrain_epochs {
            order.shuffle(&mut rng);
            let mut err = 0.0;
            for chunk in order.chunks(cfg.minibatch) {
                let batch = input.select(Axis(0), chunk);
                err += rbm.cd1_step(batch.view(), cfg.pretrain_lr, cfg.pretrain_momentum) * chunk.len() as f64;
            }
            let err = err / input.nrows() as f64;
            let storable = rbm
                .weights
                .iter()
                .chain(rbm.hidden_bias.iter())
                .chain(rbm.visible_bias.iter())
                .all(|v| v.is_finite() && v.abs() <= f32::MAX as f64);
            if !err.is_finite() || !storable {
                return Err(Error::TrainingDiverged {
                    epoch: epoch + 1,
                    loss: err,
                });
            }
            on_epoch(i, epoch + 1, err);
        }
        let next = rbm.hidden_probs(input.view());
        layers[n_layers - 1 - i] = Some(DenseLayer {
            weights: rbm.weights.t().to_owned(),
            biases: rbm.visible_bias.clone(),
            activation: Activation::Sigmoid,
        });
        layers[i] = Some(DenseLayer {
            weights: rbm.weights,
            biases: rbm.hidden_bias,
            activation: Activation::Sigmoid,
        });
        input = next;
    }
    Ok(Network {
        layers: layers
            .into_iter()
            .map(|l| l.expect("every layer initialised"))
            .collect(),
    })
}

/// Fine-tunes `model` on normalised rows `data`.
pub fn finetune_backprop(
    model: &DaeModel,
    data: ArrayView2<f64>,
    cfg: &TrainConfig,
) -> Result<(DaeModel, TrainingReport)> {
    let mut net = Network::from_model(model);
    let report = net.finetune(data, cfg, |_, _| {})?;
    let trained = net.into_model(model.feat_min().to_vec(), model.feat_max().to_vec())?;
    Ok((trained, report))
}

/// Per-dimension min/max over `rows`, widened so every range is non-empty
/// after rounding to `f32`.
pub(crate) fn feature_range(rows: ArrayView2<f64>) -> (Vec<f64>, Vec<f64>) {
    const MIN_WIDTH: f64 = 1e-3;
    let mut lo = vec![f64::INFINITY; rows.ncols()];
    let mut hi = vec![f64::NEG_INFINITY; rows.ncols()];
    for row in rows.axis_iter(Axis(0)) {
        for ((l, h), v) in lo.iter_mut().zip(hi.iter_mut()).zip(row) {
            *l = l.min(*v);
            *h = h.max(*v);
        }
    }
    for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
        *l = (*l as f32) as f64;
        *h = ((*h).max(*l + MIN_WIDTH) as f32) as f64;
        if *h <= *l {
            *h = *l + MIN_WIDTH;
        }
    }
    (lo, hi)
}

/// Full training pipeline on raw (un-normalised) super-frame rows:
/// normalisation statistics, RBM pre-training, then fine-tuning.
pub fn train_dae(
    rows: ArrayView2<f64>,
    dims: &[usize],
    cfg: &TrainConfig,
    mut progress: impl FnMut(TrainEvent),
) -> Result<(DaeModel, TrainingReport)> {
    validate_dims(dims)?;
    if rows.nrows() == 0 {
        return Err(invalid("training dataset is empty"));
    }
    if rows.ncols() != dims[0] {
        return Err(invalid(format!(
            "dataset has {} columns, network input is {}",
            rows.ncols(),
            dims[0]
        )));
    }
    if rows.iter().any(|v| !v.is_finite()) {
        return Err(invalid("training data contains non-finite values"));
    }
    let (lo, hi) = feature_range(rows);
    let scaffold = DaeModel::zeros(dims.to_vec(), lo.clone(), hi.clone())?;
    let data = scaffold.normalize_rows(rows)?;
    let mut net = pretrain_with(data.view(), cfg, dims, |layer, epoch, error| {
        progress(TrainEvent::Pretrain { layer, epoch, error })
    })?;
    let report = net.finetune(data.view(), cfg, |epoch, loss| {
        progress(TrainEvent::Finetune { epoch, loss })
    })?;
    Ok((net.into_model(lo, hi)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg() -> TrainConfig {
        TrainConfig {
            minibatch: 16,
            pretrain_lr: 0.1,
            pretrain_momentum: 0.5,
            pretrain_epochs: 20,
            finetune_lr_initial: 2.0,
            finetune_lr_decrement: 0.0,
            finetune_lr_floor: 1e-5,
            finetune_momentum: 0.9,
            finetune_epochs: 200,
            rng_seed: 7,
            skip_pretrain: false,
        }
    }

    fn synthetic(rows: usize, dim: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // two latent factors mixed into `dim` outputs
        let mix = Array2::from_shape_fn((2, dim), |_| rng.random_range(-1.0..1.0));
        let mut out = Array2::zeros((rows, dim));
        for r in 0..rows {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            for c in 0..dim {
                out[[r, c]] = sigmoid(2.0 * (a * mix[[0, c]] + b * mix[[1, c]]));
            }
        }
        out
    }

    #[test]
    fn lr_schedule_floors() {
        let cfg = TrainConfig::default();
        assert_eq!(cfg.finetune_lr(0), 1e-3);
        assert!((cfg.finetune_lr(1) - 9e-4).abs() < 1e-15);
        assert_eq!(cfg.finetune_lr(50), 1e-5);
        let zero = TrainConfig {
            finetune_lr_initial: 0.0,
            ..TrainConfig::default()
        };
        assert_eq!(zero.finetune_lr(3), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        assert!(TrainConfig {
            minibatch: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            finetune_momentum: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            pretrain_lr: f64::NAN,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn tiny_autoencoder_learns() {
        let data = synthetic(64, 8, 3);
        let cfg = tiny_cfg();
        let mut net = pretrain_rbm_stack(data.view(), &cfg, &[8, 4, 2, 4, 8]).unwrap();
        let report = net.finetune(data.view(), &cfg, |_, _| {}).unwrap();
        assert_eq!(report.epoch_losses.len(), 200);
        assert!(
            report.final_loss() < 0.5 * report.initial_loss,
            "{} vs {}",
            report.final_loss(),
            report.initial_loss
        );
        assert!(report.epoch_losses[99] < report.epoch_losses[0]);
    }

    #[test]
    fn zero_learning_rate_is_identity() {
        let data = synthetic(32, 6, 5);
        let cfg = TrainConfig {
            finetune_lr_initial: 0.0,
            finetune_epochs: 5,
            skip_pretrain: true,
            ..tiny_cfg()
        };
        let net = pretrain_rbm_stack(data.view(), &cfg, &[6, 3, 6]).unwrap();
        let model = net.into_model(vec![0.0; 6], vec![1.0; 6]).unwrap();
        let (trained, report) = finetune_backprop(&model, data.view(), &cfg).unwrap();
        assert_eq!(trained, model);
        assert!(report.epoch_losses.iter().all(|l| *l == report.initial_loss));
    }

    #[test]
    fn skip_pretrain_is_bounded_xavier() {
        let data = synthetic(8, 6, 1);
        let cfg = TrainConfig {
            skip_pretrain: true,
            ..tiny_cfg()
        };
        let net = pretrain_rbm_stack(data.view(), &cfg, &[6, 4, 2, 4, 6]).unwrap();
        for layer in &net.layers {
            let (out, inp) = layer.weights.dim();
            let a = (6.0 / (out + inp) as f64).sqrt();
            assert!(layer.weights.iter().all(|w| w.abs() <= a));
            assert!(layer.biases.iter().all(|b| *b == 0.0));
        }
        let again = pretrain_rbm_stack(data.view(), &cfg, &[6, 4, 2, 4, 6]).unwrap();
        assert_eq!(net, again);
    }

    #[test]
    fn pretraining_is_deterministic_and_tied() {
        let data = synthetic(40, 6, 9);
        let cfg = tiny_cfg();
        let a = pretrain_rbm_stack(data.view(), &cfg, &[6, 4, 2, 4, 6]).unwrap();
        let b = pretrain_rbm_stack(data.view(), &cfg, &[6, 4, 2, 4, 6]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.layers[0].weights.t(), a.layers[3].weights);
        assert_eq!(a.layers[1].weights.t(), a.layers[2].weights);
    }

    #[test]
    fn empty_dataset_rejected() {
        let empty = Array2::<f64>::zeros((0, 4));
        assert!(pretrain_rbm_stack(empty.view(), &tiny_cfg(), &[4, 2, 4]).is_err());
        let net = xavier_network(&[4, 2, 4], &mut ChaCha8Rng::seed_from_u64(0));
        let mut n2 = net.clone();
        assert!(n2.finetune(empty.view(), &tiny_cfg(), |_, _| {}).is_err());
    }

    #[test]
    fn divergence_reports_epoch() {
        let mut net = xavier_network(&[3, 2, 3], &mut ChaCha8Rng::seed_from_u64(0));
        for l in &mut net.layers {
            l.activation = Activation::Linear;
        }
        let data = Array2::from_elem((4, 3), 0.9);
        let cfg = TrainConfig {
            finetune_lr_initial: 1e6,
            finetune_lr_decrement: 0.0,
            finetune_momentum: 0.0,
            finetune_epochs: 50,
            minibatch: 4,
            ..tiny_cfg()
        };
        match net.finetune(data.view(), &cfg, |_, _| {}) {
            Err(Error::TrainingDiverged { epoch, .. }) => assert!(epoch >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn feature_range_widens_constant_columns() {
        let rows = Array2::from_shape_vec((2, 2), vec![1.0, -3.0, 2.0, -3.0]).unwrap();
        let (lo, hi) = feature_range(rows.view());
        assert_eq!(lo, vec![1.0, -3.0]);
        assert_eq!(hi[0], 2.0);
        assert!(hi[1] > lo[1]);
    }
}
