use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use deepvoc_core::dae::mirrored_dims;
use deepvoc_core::vq::train_split_codebook;
use deepvoc_core::{
    decode_stream, fwseg_snr, load_codebook, load_model, log_spectral_distortion, stoi_score, superframe_dataset,
    train_dae, Codec, CodecMode, DaeModel, EncodedFile, Error, FrameConfig, MetricReport, SpectralAnalyzer, TrainEvent,
};

use crate::audio::{list_wavs, read_corpus, read_file, read_wav, wav_bytes, write_atomic, SAMPLE_RATE};
use crate::cli::{DecodeArgs, EncodeArgs, EvaluateArgs, InfoArgs, TrainCodebookArgs, TrainDaeArgs};
use crate::config::FileConfig;

fn mode_for_model(model: &DaeModel) -> Result<CodecMode> {
    [CodecMode::Rate2400, CodecMode::Rate1200]
        .into_iter()
        .find(|m| m.latent_dim() == model.latent_dim())
        .ok_or_else(|| {
            Error::Config(format!(
                "model latent width {} matches no codec mode (72 for 2400, 54 for 1200)",
                model.latent_dim()
            ))
            .into()
        })
}

fn check_model_mode(model: &DaeModel, mode: CodecMode, cfg: &FrameConfig) -> Result<()> {
    if model.input_dim() != mode.input_dim(cfg) || model.latent_dim() != mode.latent_dim() {
        return Err(Error::Config(format!(
            "model is {}-{}, mode {} needs {}-{}",
            model.input_dim(),
            model.latent_dim(),
            mode.rate(),
            mode.input_dim(cfg),
            mode.latent_dim()
        ))
        .into());
    }
    Ok(())
}

fn load_model_at(path: &Path) -> Result<DaeModel> {
    load_model(path).with_context(|| format!("loading model {}", path.display()))
}

pub fn train_dae_cmd(args: TrainDaeArgs, file: &FileConfig) -> Result<()> {
    let mode = file.mode(args.mode)?.unwrap_or(CodecMode::Rate2400);
    let hidden = file.hidden(args.arch)?;
    let mut cfg = file.train_config();
    if let Some(v) = args.epochs {
        cfg.finetune_epochs = v;
    }
    if let Some(v) = args.pretrain_epochs {
        cfg.pretrain_epochs = v;
    }
    if let Some(v) = args.minibatch {
        cfg.minibatch = v;
    }
    if let Some(v) = args.lr {
        cfg.finetune_lr_initial = v;
    }
    if let Some(v) = args.lr_decrement {
        cfg.finetune_lr_decrement = v;
    }
    if let Some(v) = args.pretrain_lr {
        cfg.pretrain_lr = v;
    }
    if let Some(v) = args.seed {
        cfg.rng_seed = v;
    }
    cfg.skip_pretrain |= args.skip_pretrain;
    cfg.validate()?;

    let frame_cfg = FrameConfig::default();
    let signals = read_corpus(&args.corpus)?;
    let rows = superframe_dataset(&signals, mode, &frame_cfg)?;
    let dims = mirrored_dims(mode.input_dim(&frame_cfg), &hidden, mode.latent_dim());
    println!(
        "{} files, {} super-frames, network {}",
        signals.len(),
        rows.nrows(),
        dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("-")
    );

    let (model, report) = train_dae(rows.view(), &dims, &cfg, |event| match event {
        TrainEvent::Pretrain { layer, epoch, error } => {
            println!(
                "pretrain layer {} epoch {epoch}: reconstruction error {error:.6}",
                layer + 1
            )
        }
        TrainEvent::Finetune { epoch, loss } => println!("epoch {epoch}: loss {loss:.6}"),
    })?;
    write_atomic(&args.out, &model.to_bytes())?;
    println!(
        "initial loss {:.6}, final loss {:.6}; wrote {}",
        report.initial_loss,
        report.final_loss(),
        args.out.display()
    );
    Ok(())
}

pub fn train_codebook_cmd(args: TrainCodebookArgs, file: &FileConfig) -> Result<()> {
    let model = load_model_at(&file.model(args.model)?)?;
    let frame_cfg = FrameConfig::default();
    let mode = match file.mode(args.mode)? {
        Some(m) => m,
        None => mode_for_model(&model)?,
    };
    check_model_mode(&model, mode, &frame_cfg)?;
    let mut lbg = file.lbg_config();
    if let Some(v) = args.seed {
        lbg.rng_seed = v;
    }
    if let Some(v) = args.max_iters {
        lbg.max_iters = v;
    }
    if let Some(v) = args.split_perturbation {
        lbg.split_perturbation = v;
    }
    if let Some(v) = args.rel_tol {
        lbg.rel_tol = v;
    }
    lbg.validate()?;

    let signals = read_corpus(&args.corpus)?;
    let rows = superframe_dataset(&signals, mode, &frame_cfg)?;
    let latents = model.encode_batch(rows.view())?;
    println!("{} latent vectors of width {}", latents.nrows(), latents.ncols());
    let cb = train_split_codebook(latents.view(), &mode.bits(), &lbg)?;
    write_atomic(&args.out, &cb.to_bytes())?;
    println!(
        "{} sub-codebooks of {} codewords; wrote {}",
        cb.split_count(),
        cb.split(0).nrows(),
        args.out.display()
    );
    Ok(())
}

pub fn encode_cmd(args: EncodeArgs, file: &FileConfig) -> Result<()> {
    let model = load_model_at(&file.model(args.model)?)?;
    let cb_path = file.codebook(args.codebook)?;
    let codebook = load_codebook(&cb_path).with_context(|| format!("loading codebook {}", cb_path.display()))?;
    let mode = match file.mode(args.mode)? {
        Some(m) => m,
        None => mode_for_model(&model)?,
    };
    let search = file.search(args.j)?;
    let samples = read_wav(&args.input)?;
    let codec = Codec::new(mode, model, codebook)?;
    let stream = codec.encode(&samples, search)?;
    write_atomic(&args.output, &stream.to_bytes())?;
    println!(
        "{} samples -> {} super-frames, {} payload bytes ({})",
        samples.len(),
        stream.superframe_count,
        stream.payload.len(),
        mode
    );
    Ok(())
}

pub fn decode_cmd(args: DecodeArgs, file: &FileConfig) -> Result<()> {
    let model = load_model_at(&file.model(args.model)?)?;
    let cb_path = file.codebook(args.codebook)?;
    let codebook = load_codebook(&cb_path).with_context(|| format!("loading codebook {}", cb_path.display()))?;
    let gl_iters = file.gl_iters(args.gl_iters)?;
    let stream = EncodedFile::from_bytes(&read_file(&args.input)?)
        .with_context(|| format!("reading stream {}", args.input.display()))?;
    let decoded = decode_stream(&stream, &model, &codebook, gl_iters)?;
    for w in &decoded.warnings {
        eprintln!("warning: {w}");
    }
    write_atomic(&args.output, &wav_bytes(&decoded.samples)?)?;
    println!("{} samples written to {}", decoded.samples.len(), args.output.display());
    Ok(())
}

fn wavs_by_name(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    Ok(list_wavs(dir)?
        .into_iter()
        .map(|p| {
            let id = p.strip_prefix(dir).unwrap_or(&p).to_string_lossy().replace('\\', "/");
            (id, p)
        })
        .collect())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn evaluate_cmd(args: EvaluateArgs) -> Result<()> {
    let refs = wavs_by_name(&args.reference)?;
    let tests = wavs_by_name(&args.test)?;
    let mut orphans: Vec<String> = refs
        .keys()
        .filter(|k| !tests.contains_key(*k))
        .map(|k| format!("{k} (only in {})", args.reference.display()))
        .collect();
    orphans.extend(
        tests
            .keys()
            .filter(|k| !refs.contains_key(*k))
            .map(|k| format!("{k} (only in {})", args.test.display())),
    );
    if !orphans.is_empty() {
        bail!("unpaired files: {}", orphans.join(", "));
    }
    if refs.is_empty() {
        bail!("no .wav files found in {}", args.reference.display());
    }

    let cfg = FrameConfig::default();
    let analyzer = SpectralAnalyzer::new(&cfg);
    let mut csv = String::from("id,lsd_db,fwsegsnr_db,stoi\n");
    let (mut lsd, mut fw, mut stoi) = (Vec::new(), Vec::new(), Vec::new());
    for (id, ref_path) in &refs {
        let x = read_wav(ref_path)?;
        let y = read_wav(&tests[id])?;
        if x.len() != y.len() {
            bail!("{id}: reference has {} samples, test has {}", x.len(), y.len());
        }
        let row = (|| -> deepvoc_core::Result<(f64, f64, f64)> {
            let l = log_spectral_distortion(&analyzer.analyze(&x)?, &analyzer.analyze(&y)?)?;
            Ok((l, fwseg_snr(&x, &y, &cfg)?, stoi_score(&x, &y, SAMPLE_RATE)?))
        })()
        .with_context(|| format!("scoring {id}"))?;
        writeln!(csv, "{},{:.4},{:.4},{:.4}", csv_field(id), row.0, row.1, row.2)?;
        lsd.push(row.0);
        fw.push(row.1);
        stoi.push(row.2);
    }
    let reports = [lsd, fw, stoi].map(MetricReport::from_values);
    writeln!(
        csv,
        "mean,{:.4},{:.4},{:.4}",
        reports[0].mean, reports[1].mean, reports[2].mean
    )?;
    writeln!(
        csv,
        "std,{:.4},{:.4},{:.4}",
        reports[0].std, reports[1].std, reports[2].std
    )?;
    eprintln!("note: PESQ is not computed (no licensed implementation is bundled)");
    match &args.output {
        Some(path) => write_atomic(path, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    Ok(())
}

pub fn info_cmd(args: InfoArgs) -> Result<()> {
    let stream = EncodedFile::from_bytes(&read_file(&args.file)?)
        .with_context(|| format!("reading stream {}", args.file.display()))?;
    let secs = stream.duration_secs();
    println!("mode: {}", stream.mode);
    println!("sample rate: {} Hz", stream.sample_rate);
    println!("samples: {}", stream.original_len);
    println!("super-frames: {}", stream.superframe_count);
    println!("duration: {secs:.3} s");
    println!(
        "payload: {} bytes ({} bits)",
        stream.payload.len(),
        stream.payload_bits()
    );
    if secs > 0.0 {
        println!("rate: {:.1} bit/s", stream.payload_bits() as f64 / secs);
    }
    println!("model hash: {:08x}", stream.model_hash);
    println!("codebook hash: {:08x}", stream.codebook_hash);
    Ok(())
}
