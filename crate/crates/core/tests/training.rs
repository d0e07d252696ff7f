use deepvoc_core::dae::{mirrored_dims, pretrain_rbm_stack, sigmoid, train_dae, Activation, DenseLayer, Network, Rbm};
use deepvoc_core::vq::{train_lbg_traced, train_split_codebook, LbgConfig};
use deepvoc_core::{Error, TrainConfig};
use ndarray::{array, Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_cfg() -> TrainConfig {
    TrainConfig {
        minibatch: 8,
        pretrain_lr: 0.1,
        pretrain_momentum: 0.5,
        pretrain_epochs: 5,
        finetune_lr_initial: 2.0,
        finetune_lr_decrement: 0.0,
        finetune_lr_floor: 1e-5,
        finetune_momentum: 0.9,
        finetune_epochs: 30,
        rng_seed: 11,
        skip_pretrain: false,
    }
}

fn log_spectra(rows: usize, dim: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((rows, dim), |_| rng.random_range(-12.0..2.0))
}

#[test]
fn cd1_step_matches_hand_update() {
    let w = array![[0.5, -0.25, 0.125], [-1.0, 0.75, 0.0]];
    let hb = array![0.1, -0.1];
    let vb = array![0.0, 0.2, -0.2];
    let batch = array![[1.0, 0.0, 0.5], [0.25, 1.0, 0.0]];
    let mut rbm = Rbm::from_parts(w.clone(), hb.clone(), vb.clone());
    let lr = 0.3;
    rbm.cd1_step(batch.view(), lr, 0.0);

    let hidden = |v: &[f64]| -> Vec<f64> {
        (0..2)
            .map(|j| sigmoid(hb[j] + (0..3).map(|i| w[[j, i]] * v[i]).sum::<f64>()))
            .collect()
    };
    let visible = |h: &[f64]| -> Vec<f64> {
        (0..3)
            .map(|i| sigmoid(vb[i] + (0..2).map(|j| w[[j, i]] * h[j]).sum::<f64>()))
            .collect()
    };
    let mut dw = Array2::<f64>::zeros((2, 3));
    let mut dh = Array1::<f64>::zeros(2);
    let mut dv = Array1::<f64>::zeros(3);
    for row in batch.rows() {
        let v0 = row.to_vec();
        let h0 = hidden(&v0);
        let v1 = visible(&h0);
        let h1 = hidden(&v1);
        for j in 0..2 {
            for i in 0..3 {
                dw[[j, i]] += (h0[j] * v0[i] - h1[j] * v1[i]) / 2.0;
            }
            dh[j] += (h0[j] - h1[j]) / 2.0;
        }
        for i in 0..3 {
            dv[i] += (v0[i] - v1[i]) / 2.0;
        }
    }
    let close = |a: &Array2<f64>, b: &Array2<f64>| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-14);
    assert!(close(&rbm.weights, &(&w + &(dw * lr))));
    assert!(rbm
        .hidden_bias
        .iter()
        .zip((&hb + &(dh * lr)).iter())
        .all(|(a, b)| (a - b).abs() < 1e-14));
    assert!(rbm
        .visible_bias
        .iter()
        .zip((&vb + &(dv * lr)).iter())
        .all(|(a, b)| (a - b).abs() < 1e-14));
}

#[test]
fn gradient_matches_finite_differences_on_deep_net() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let dims = [6, 4, 2, 4, 6];
    let net = Network {
        layers: dims
            .windows(2)
            .map(|w| DenseLayer {
                weights: Array2::from_shape_fn((w[1], w[0]), |_| rng.random_range(-1.5..1.5)),
                biases: Array1::from_shape_fn(w[1], |_| rng.random_range(-0.5..0.5)),
                activation: Activation::Sigmoid,
            })
            .collect(),
    };
    let x = Array2::from_shape_fn((5, 6), |_| rng.random_range(0.0..1.0));
    let (_, grads) = net.loss_and_gradient(x.view());
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for (l, (gw, _)) in grads.iter().enumerate() {
        for ((r, c), g) in gw.indexed_iter() {
            let mut plus = net.clone();
            plus.layers[l].weights[[r, c]] += eps;
            let mut minus = net.clone();
            minus.layers[l].weights[[r, c]] -= eps;
            let numeric = (plus.loss(x.view()) - minus.loss(x.view())) / (2.0 * eps);
            worst = worst.max((g - numeric).abs() / g.abs().max(numeric.abs()).max(1e-12));
        }
    }
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn training_is_deterministic_and_reduces_loss() {
    let rows = log_spectra(48, 10, 1);
    let dims = mirrored_dims(10, &[6], 3);
    let cfg = small_cfg();
    let (a, report) = train_dae(rows.view(), &dims, &cfg, |_| {}).unwrap();
    let (b, _) = train_dae(rows.view(), &dims, &cfg, |_| {}).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
    assert!(report.final_loss() < report.initial_loss);
    assert_eq!(report.epoch_losses.len(), 30);

    let other = TrainConfig { rng_seed: 12, ..cfg };
    let (c, _) = train_dae(rows.view(), &dims, &other, |_| {}).unwrap();
    assert_ne!(a.to_bytes(), c.to_bytes());
}

#[test]
fn pretraining_ties_decoder_to_encoder() {
    let rows = log_spectra(32, 8, 2).mapv(|v| (v + 12.0) / 14.0);
    let net = pretrain_rbm_stack(rows.view(), &small_cfg(), &[8, 5, 3, 5, 8]).unwrap();
    assert_eq!(net.layers[3].weights, net.layers[0].weights.t());
    assert_eq!(net.layers[2].weights, net.layers[1].weights.t());
}

#[test]
fn training_rejects_bad_input() {
    let rows = log_spectra(16, 10, 3);
    let cfg = small_cfg();
    assert!(train_dae(rows.view(), &[10, 6, 3, 6, 9], &cfg, |_| {}).is_err());
    assert!(train_dae(rows.view(), &mirrored_dims(12, &[6], 3), &cfg, |_| {}).is_err());
    let mut bad = rows.clone();
    bad[[3, 3]] = f64::NAN;
    assert!(train_dae(bad.view(), &mirrored_dims(10, &[6], 3), &cfg, |_| {}).is_err());
}

#[test]
fn exploding_learning_rate_reports_divergence() {
    let rows = log_spectra(32, 10, 4);
    let cfg = TrainConfig {
        finetune_lr_initial: 1e300,
        skip_pretrain: true,
        ..small_cfg()
    };
    match train_dae(rows.view(), &mirrored_dims(10, &[6], 3), &cfg, |_| {}) {
        Err(Error::TrainingDiverged { epoch, .. }) => assert!(epoch >= 1),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn split_codebook_shapes_and_insufficient_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let latents = Array2::from_shape_fn((600, 12), |_| rng.random::<f64>());
    let cb = train_split_codebook(latents.view(), &[9, 9, 9], &LbgConfig::default()).unwrap();
    assert_eq!(cb.split_count(), 3);
    assert!((0..3).all(|d| cb.split(d).dim() == (512, 4)));
    assert!(cb.split(1).iter().all(|v| (0.0..=1.0).contains(v)));
    let again = train_split_codebook(latents.view(), &[9, 9, 9], &LbgConfig::default()).unwrap();
    assert_eq!(cb, again);

    let few = latents.slice(ndarray::s![..500, ..]);
    assert!(matches!(
        train_split_codebook(few, &[9, 9, 9], &LbgConfig::default()),
        Err(Error::InsufficientData(_))
    ));
}

#[test]
fn lbg_levels_double_and_stay_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let data = Array2::from_shape_fn((300, 3), |_| rng.random::<f64>());
    let (book, trace) = train_lbg_traced(data.view(), 5, &LbgConfig::default()).unwrap();
    assert_eq!(book.nrows(), 32);
    assert_eq!(trace.levels.len(), 5);
    for (i, level) in trace.levels.iter().enumerate() {
        assert_eq!(level.initial.nrows(), 2 << i);
        assert!(level.distortions.windows(2).all(|w| w[1] <= w[0]));
    }
    let finals: Vec<f64> = trace.levels.iter().map(|l| *l.distortions.last().unwrap()).collect();
    assert!(finals.windows(2).all(|w| w[1] <= w[0]), "{finals:?}");
}

#[test]
fn exploding_pretraining_reports_divergence() {
    let rows = log_spectra(32, 10, 4);
    let cfg = TrainConfig {
        pretrain_lr: 1e300,
        ..small_cfg()
    };
    assert!(matches!(
        train_dae(rows.view(), &mirrored_dims(10, &[6], 3), &cfg, |_| {}),
        Err(Error::TrainingDiverged { .. })
    ));
}
