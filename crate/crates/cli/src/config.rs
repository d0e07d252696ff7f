//! Optional JSON defaults. Every field may be omitted.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use deepvoc_core::dae::DEFAULT_HIDDEN;
use deepvoc_core::vq::SearchConfig;
use deepvoc_core::{CodecMode, LbgConfig, TrainConfig};
use serde::Deserialize;

use crate::UsageError;

pub const DEFAULT_GL_ITERS: usize = 100;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mode: Option<u32>,
    pub model: Option<PathBuf>,
    pub codebook: Option<PathBuf>,
    pub j: Option<usize>,
    pub gl_iters: Option<usize>,
    pub rng_seed: Option<u64>,
    /// Encoder hidden widths.
    pub architecture: Option<Vec<usize>>,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub lbg: LbgSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub minibatch: Option<usize>,
    pub pretrain_lr: Option<f64>,
    pub pretrain_momentum: Option<f64>,
    pub pretrain_epochs: Option<usize>,
    pub finetune_lr_initial: Option<f64>,
    pub finetune_lr_decrement: Option<f64>,
    pub finetune_lr_floor: Option<f64>,
    pub finetune_momentum: Option<f64>,
    pub finetune_epochs: Option<usize>,
    pub skip_pretrain: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LbgSection {
    pub split_perturbation: Option<f64>,
    pub max_iters: Option<usize>,
    pub rel_tol: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
    }

    pub fn mode(&self, flag: Option<u32>) -> Result<Option<CodecMode>> {
        flag.or(self.mode).map(parse_mode).transpose()
    }

    pub fn model(&self, flag: Option<PathBuf>) -> Result<PathBuf> {
        flag.or_else(|| self.model.clone())
            .ok_or_else(|| UsageError("--model is required (flag or config \"model\")".into()).into())
    }

    pub fn codebook(&self, flag: Option<PathBuf>) -> Result<PathBuf> {
        flag.or_else(|| self.codebook.clone())
            .ok_or_else(|| UsageError("--codebook is required (flag or config \"codebook\")".into()).into())
    }

    pub fn search(&self, flag: Option<usize>) -> Result<SearchConfig> {
        let j = flag.or(self.j).unwrap_or(SearchConfig::default().j);
        Ok(SearchConfig {
            j: at_least_one("J", j)?,
        })
    }

    pub fn gl_iters(&self, flag: Option<usize>) -> Result<usize> {
        at_least_one("gl_iters", flag.or(self.gl_iters).unwrap_or(DEFAULT_GL_ITERS))
    }

    pub fn hidden(&self, flag: Option<Vec<usize>>) -> Result<Vec<usize>> {
        let hidden = flag
            .or_else(|| self.architecture.clone())
            .unwrap_or_else(|| DEFAULT_HIDDEN.to_vec());
        for w in &hidden {
            at_least_one("hidden layer width", *w)?;
        }
        Ok(hidden)
    }

    /// Training settings from the file, before command-line overrides.
    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        let d = TrainConfig::default();
        TrainConfig {
            minibatch: t.minibatch.unwrap_or(d.minibatch),
            pretrain_lr: t.pretrain_lr.unwrap_or(d.pretrain_lr),
            pretrain_momentum: t.pretrain_momentum.unwrap_or(d.pretrain_momentum),
            pretrain_epochs: t.pretrain_epochs.unwrap_or(d.pretrain_epochs),
            finetune_lr_initial: t.finetune_lr_initial.unwrap_or(d.finetune_lr_initial),
            finetune_lr_decrement: t.finetune_lr_decrement.unwrap_or(d.finetune_lr_decrement),
            finetune_lr_floor: t.finetune_lr_floor.unwrap_or(d.finetune_lr_floor),
            finetune_momentum: t.finetune_momentum.unwrap_or(d.finetune_momentum),
            finetune_epochs: t.finetune_epochs.unwrap_or(d.finetune_epochs),
            rng_seed: self.rng_seed.unwrap_or(d.rng_seed),
            skip_pretrain: t.skip_pretrain.unwrap_or(d.skip_pretrain),
        }
    }

    pub fn lbg_config(&self) -> LbgConfig {
        let l = &self.lbg;
        let d = LbgConfig::default();
        LbgConfig {
            split_perturbation: l.split_perturbation.unwrap_or(d.split_perturbation),
            max_iters: l.max_iters.unwrap_or(d.max_iters),
            rel_tol: l.rel_tol.unwrap_or(d.rel_tol),
            rng_seed: self.rng_seed.unwrap_or(d.rng_seed),
        }
    }
}

pub fn parse_mode(rate: u32) -> Result<CodecMode> {
    CodecMode::from_rate(rate).ok_or_else(|| UsageError(format!("mode must be 2400 or 1200, got {rate}")).into())
}

fn at_least_one(what: &str, v: usize) -> Result<usize> {
    if v == 0 {
        return Err(UsageError(format!("{what} must be at least 1")).into());
    }
    Ok(v)
}
