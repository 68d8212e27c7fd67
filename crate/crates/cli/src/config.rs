//! Run configuration.
//!
//! The file is TOML restricted to `key = value` lines under `[section]`
//! headers (numbers, quoted strings, and for `skips` an array of pairs).
//! Every key is optional; unknown keys are rejected. Relative paths are
//! resolved against the directory holding the file.
//!
//! ```toml
//! seed = 1
//!
//! [stft]
//! sample_rate = 16000
//! window_ms = 64.0
//! hop_ms = 32.0
//!
//! [train]
//! epochs = 50
//! batch_size = 8
//! segment_length = 32768
//! snr_low_db = -6.0
//! snr_high_db = 0.0
//! initial_lr = 0.001
//! lr_decay_factor = 0.31622776601683794
//! patience_epochs = 2
//! validation_fraction = 0.1
//!
//! [model]
//! hidden_channels = 32
//! blocks = 4
//! kernel_freq = 5
//! kernel_time = 3
//! skips = [[0, 2]]
//!
//! [solver]
//! iterations = 100
//! gamma = 0.99
//!
//! [paths]
//! corpus_dir = "corpus"
//! model_path = "model.degli"
//! output_dir = "run"
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use degli_core::nn::Skip;
use degli_core::{Architecture, Params, SolverConfig, TrainConfig};
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct StftSection {
    pub sample_rate: u32,
    pub window_ms: f64,
    pub hop_ms: f64,
}

impl Default for StftSection {
    fn default() -> Self {
        Self { sample_rate: 16_000, window_ms: 64.0, hop_ms: 32.0 }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub segment_length: usize,
    pub snr_low_db: f64,
    pub snr_high_db: f64,
    pub initial_lr: f64,
    pub lr_decay_factor: f64,
    pub patience_epochs: usize,
    pub validation_fraction: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            epochs: d.epochs,
            batch_size: d.batch_size,
            segment_length: d.segment_length,
            snr_low_db: d.snr_range_db.0,
            snr_high_db: d.snr_range_db.1,
            initial_lr: d.initial_lr,
            lr_decay_factor: d.lr_decay_factor,
            patience_epochs: d.patience_epochs,
            validation_fraction: 0.1,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub hidden_channels: usize,
    pub blocks: usize,
    pub kernel_freq: usize,
    pub kernel_time: usize,
    pub skips: Vec<[usize; 2]>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { hidden_channels: 32, blocks: 4, kernel_freq: 5, kernel_time: 3, skips: vec![[0, 2]] }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub iterations: usize,
    pub gamma: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { iterations: 100, gamma: 0.99 }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub corpus_dir: Option<PathBuf>,
    pub model_path: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub stft: StftSection,
    pub train: TrainSection,
    pub model: ModelSection,
    pub solver: SolverSection,
    pub paths: PathsSection,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text)?;
        cfg.stft_params()?;
        cfg.train_config().validate()?;
        cfg.architecture().validate()?;
        cfg.solver_config(cfg.solver.iterations).validate()?;
        if !(0.0..1.0).contains(&cfg.train.validation_fraction) {
            bail!("train.validation_fraction must lie in [0, 1)");
        }
        Ok(cfg)
    }

    /// Reads `path` and anchors relative paths at its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.paths.corpus_dir, &mut cfg.paths.model_path, &mut cfg.paths.output_dir]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(dir) = &cfg.paths.corpus_dir {
            if !dir.is_dir() {
                bail!("corpus_dir {} does not exist", dir.display());
            }
        }
        Ok(cfg)
    }

    pub fn stft_params(&self) -> Result<Params> {
        Ok(Params::from_durations(self.stft.sample_rate, self.stft.window_ms, self.stft.hop_ms)?)
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            epochs: t.epochs,
            batch_size: t.batch_size,
            segment_length: t.segment_length,
            snr_range_db: (t.snr_low_db, t.snr_high_db),
            initial_lr: t.initial_lr,
            lr_decay_factor: t.lr_decay_factor,
            patience_epochs: t.patience_epochs,
            seed: self.seed,
        }
    }

    pub fn architecture(&self) -> Architecture {
        let m = &self.model;
        let skips = m.skips.iter().map(|&[from, to]| Skip { from, to }).collect();
        Architecture::conv_glu(m.hidden_channels, m.blocks, m.kernel_freq, m.kernel_time, skips)
    }

    pub fn solver_config(&self, iterations: usize) -> SolverConfig {
        SolverConfig { gamma: self.solver.gamma, ..SolverConfig::with_iterations(iterations) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = Config::parse("").unwrap();
        assert_eq!(cfg.train_config(), TrainConfig::default());
        assert_eq!(cfg.architecture(), Architecture::default_denoiser());
        assert_eq!(cfg.stft_params().unwrap(), Params::speech_default());
        assert_eq!(cfg.solver.iterations, 100);
    }

    #[test]
    fn sections_and_overrides() {
        let text = "seed = 7\n[train]\nepochs = 3\nsnr_low_db = -3.0\n[model]\nhidden_channels = 8\nskips = []\n";
        let cfg = Config::parse(text).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.train_config().epochs, 3);
        assert_eq!(cfg.train_config().snr_range_db, (-3.0, 0.0));
        assert_eq!(cfg.train_config().seed, 7);
        assert!(cfg.architecture().skips.is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Config::parse("[train]\nepoch = 3\n").is_err());
        assert!(Config::parse("[train]\nsnr_low_db = 2.0\n").is_err());
        assert!(Config::parse("[model]\nkernel_freq = 4\n").is_err());
        assert!(Config::parse("[train]\nvalidation_fraction = 1.0\n").is_err());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("c")).unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[paths]\ncorpus_dir = \"c\"\nmodel_path = \"m.degli\"\n").unwrap();
        let cfg = Config::load(&path).unwrap();
        assert_eq!(cfg.paths.corpus_dir.unwrap(), dir.path().join("c"));
        assert_eq!(cfg.paths.model_path.unwrap(), dir.path().join("m.degli"));
        std::fs::write(&path, "[paths]\ncorpus_dir = \"missing\"\n").unwrap();
        assert!(Config::load(&path).is_err());
    }
}
