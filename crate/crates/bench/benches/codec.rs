use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use deepvoc_bench::{random_codebook, random_model};
use deepvoc_core::bitstream::pack_indices;
use deepvoc_core::dae::DEFAULT_HIDDEN;
use deepvoc_core::dsp::{griffin_lim, log_magnitude, FrameConfig, SpectralAnalyzer};
use deepvoc_core::synth::noisy_vowel_utterance;
use deepvoc_core::vq::{nearest_codewords, quantize_abs_svq, SearchConfig};
use deepvoc_core::CodecMode;

fn analysis(c: &mut Criterion) {
    let cfg = FrameConfig::default();
    let x = noisy_vowel_utterance(8000, 1.0, 1, 1e-3);
    let frame: Vec<f64> = x[..256].iter().zip(cfg.window()).map(|(a, w)| a * w).collect();
    c.bench_function("log_magnitude", |b| {
        b.iter(|| log_magnitude(black_box(&frame), &cfg).unwrap())
    });

    let analyzer = SpectralAnalyzer::new(&cfg);
    let mut group = c.benchmark_group("analyze");
    group.throughput(Throughput::Elements(x.len() as u64));
    group.bench_function("1s", |b| b.iter(|| analyzer.analyze(black_box(&x)).unwrap()));
    group.finish();
}

fn synthesis(c: &mut Criterion) {
    let cfg = FrameConfig::default();
    let x = noisy_vowel_utterance(8000, 1.0, 2, 1e-3);
    let frames = SpectralAnalyzer::new(&cfg).analyze(&x).unwrap();
    let mut group = c.benchmark_group("griffin_lim_1s");
    group.sample_size(10);
    for iters in [10, 100] {
        group.bench_with_input(BenchmarkId::from_parameter(iters), &iters, |b, &n| {
            b.iter(|| griffin_lim(black_box(&frames), &cfg, n).unwrap())
        });
    }
    group.finish();
}

fn search(c: &mut Criterion) {
    let mode = CodecMode::Rate2400;
    let cfg = FrameConfig::default();
    let model = random_model(mode, &DEFAULT_HIDDEN, 0.1, 3);
    let cb = random_codebook(mode, 4);
    let x = noisy_vowel_utterance(8000, 0.1, 5, 1e-3);
    let frames = SpectralAnalyzer::new(&cfg).analyze(&x).unwrap();
    let target: Vec<f64> = frames[..2].iter().flat_map(|f| f.iter().copied()).collect();
    let z = model.encode_latent(&target).unwrap().into_vec();

    let sub = &z[..cb.sub_dim()];
    c.bench_function("nearest_codewords_4096x12_j3", |b| {
        b.iter(|| nearest_codewords(black_box(sub), cb.split(0), 3).unwrap())
    });

    let mut group = c.benchmark_group("abs_search_2400");
    group.sample_size(10);
    for j in [1, 2, 3] {
        group.bench_with_input(BenchmarkId::new("J", j), &j, |b, &j| {
            b.iter(|| quantize_abs_svq(black_box(&target), &z, &cb, &model, SearchConfig { j }).unwrap())
        });
    }
    group.finish();
}

fn packing(c: &mut Criterion) {
    let mode = CodecMode::Rate2400;
    let bits = mode.bits();
    let tuples: Vec<Vec<usize>> = (0..333)
        .map(|i| (0..mode.splits()).map(|d| (i * 131 + d * 977) % 4096).collect())
        .collect();
    c.bench_function("pack_10s_2400", |b| {
        b.iter(|| pack_indices(black_box(&tuples), &bits).unwrap())
    });
}

criterion_group!(benches, analysis, synthesis, search, packing);
criterion_main!(benches);
