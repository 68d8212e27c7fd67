//! Subcommand implementations.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use degli_core::metrics::write_summary_csv;
use degli_core::{
    degli_run, evaluate_methods, fgla_run, gla_run, read_checkpoint, train, write_checkpoint, Amplitude, Engine,
    Method, Model, NeuralDenoiser, Params, PhaseInit, Signal, Spectrogram,
};
use serde::{Deserialize, Serialize};

use crate::ampl::{read_amplitude, write_amplitude, AmplitudeFile};
use crate::config::Config;
use crate::corpus::{list_wavs, segment_files, split_files};
use crate::synth::{write_corpus, SynthOptions};
use crate::wav::{load_wav, save_wav};

/// Flag combinations the parser cannot rule out on its own.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "degli", version, about = "Phase reconstruction with learned Griffin-Lim blocks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the residual denoiser; writes the checkpoint, the epoch log and a summary.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Recover a waveform from the amplitude of a WAV file or an AMPL1 container.
    Reconstruct(ReconstructArgs),
    /// Score GLA, FGLA and (with a model) DeGLI on every WAV of a directory.
    Eval(EvalArgs),
    /// Print a checkpoint's layers and parameter count.
    InspectModel {
        #[arg(long)]
        model: PathBuf,
    },
    /// Write synthetic speech-like utterances as WAV files.
    SynthCorpus(SynthArgs),
    /// Store the STFT amplitude of a WAV file as an AMPL1 container.
    Amplitude {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Config supplying the STFT framing (default 64 ms / 32 ms Hann).
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Gla,
    Fgla,
    Degli,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Zero,
    Random,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Checkpoint path, or `none`.
    #[arg(long, default_value = "none")]
    pub model: String,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Iterations (GLA, FGLA) or blocks (DeGLI).
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "zero")]
    pub init: InitArg,
    /// Seed of the random initial phase.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// FGLA momentum (default from the config, else 0.99).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Per-iteration metrics CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,32,100")]
    pub grid: Vec<usize>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "gla,fgla,degli")]
    pub methods: Vec<MethodArg>,
    /// Per-utterance CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-cell mean/median/quartile CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2.0)]
    pub min_seconds: f64,
    #[arg(long, default_value_t = 4.0)]
    pub max_seconds: f64,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { config } => run_train(&config).map(|_| ()),
        Command::Reconstruct(args) => run_reconstruct(&args),
        Command::Eval(args) => run_eval(&args),
        Command::InspectModel { model } => {
            let m = load_model(&model)?;
            println!("{}", m.architecture().describe());
            println!("parameter count: {}", m.param_count());
            Ok(())
        }
        Command::SynthCorpus(args) => run_synth(&args),
        Command::Amplitude { input, out, config } => {
            let params = params_from(config.as_deref())?;
            let sig = load_wav(&input)?;
            let a = Engine::new(params.clone()).stft(&sig)?.amplitude();
            let file = AmplitudeFile { amplitude: a, signal_length: sig.len(), params };
            write_amplitude(&file, BufWriter::new(create(&out)?))?;
            Ok(())
        }
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn params_from(config: Option<&Path>) -> Result<Params> {
    match config {
        Some(p) => Config::load(p)?.stft_params(),
        None => Ok(Params::speech_default()),
    }
}

pub fn load_model(path: &Path) -> Result<Model> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_checkpoint(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

/// Writes through a temporary sibling so readers never see a partial file.
fn save_model(model: &Model, path: &Path) -> Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut w = BufWriter::new(create(&tmp)?);
        write_checkpoint(model, &mut w)?;
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Facts about a finished training run, stored as `training_summary.toml`.
#[derive(Clone, Debug, Deserialize, PartialEq, Serialize)]
pub struct TrainingSummary {
    pub seed: u64,
    pub corpus_files: usize,
    pub train_files: usize,
    pub validation_files: usize,
    pub train_segments: usize,
    pub validation_segments: usize,
    pub train_audio_seconds: f64,
    pub validation_audio_seconds: f64,
    pub epochs: usize,
    pub parameters: usize,
    pub skipped_samples: usize,
    pub baseline_val_loss: f64,
    pub final_val_loss: f64,
    pub best_val_loss: f64,
    pub wall_seconds: f64,
}

pub const SUMMARY_FILE: &str = "training_summary.toml";
pub const LOG_FILE: &str = "training_log.csv";

pub fn run_train(config_path: &Path) -> Result<TrainingSummary> {
    let started = Instant::now();
    let cfg = Config::load(config_path)?;
    let corpus = cfg.paths.corpus_dir.clone().context("config lacks paths.corpus_dir")?;
    let model_path = cfg.paths.model_path.clone().context("config lacks paths.model_path")?;
    let out_dir = cfg.paths.output_dir.clone().unwrap_or_else(|| model_path.parent().unwrap_or(Path::new(".")).into());
    std::fs::create_dir_all(&out_dir)?;
    let params = cfg.stft_params()?;
    let stft = Engine::new(params.clone());
    let tc = cfg.train_config();

    let files = list_wavs(&corpus)?;
    let (train_files, val_files) = split_files(&files, cfg.train.validation_fraction, cfg.seed);
    if val_files.is_empty() {
        bail!("need at least two corpus files to hold out a validation set");
    }
    let train_set = segment_files(&train_files, tc.segment_length)?;
    let val_set = segment_files(&val_files, tc.segment_length)?;
    let rate = f64::from(params.sample_rate());
    let seconds = |s: &[degli_core::Segment<f64>]| s.iter().map(|g| g.valid_length as f64).sum::<f64>() / rate;
    log::info!(
        "corpus: {} files ({} train / {} validation), {} + {} segments, {:.1} + {:.1} min of audio",
        files.len(),
        train_files.len(),
        val_files.len(),
        train_set.len(),
        val_set.len(),
        seconds(&train_set) / 60.0,
        seconds(&val_set) / 60.0
    );

    let mut model = Model::initialized_residual(cfg.architecture(), cfg.seed)?;
    let log_path = out_dir.join(LOG_FILE);
    let mut epochs_seen = Vec::new();
    let mut save_error = None;
    let log = train(&mut model, &train_set, &val_set, &stft, &tc, |rec, m| {
        log::info!(
            "epoch {}: train {:.6} val {:.6} lr {:.3e} ({:.0} s)",
            rec.epoch,
            rec.train_loss,
            rec.val_loss,
            rec.lr,
            started.elapsed().as_secs_f64()
        );
        epochs_seen.push(*rec);
        let snapshot = degli_core::TrainingLog { records: epochs_seen.clone(), ..Default::default() };
        let res = save_model(m, &model_path)
            .and_then(|_| Ok(snapshot.write_csv(BufWriter::new(create(&log_path)?))?));
        if let Err(e) = res {
            save_error.get_or_insert(e);
        }
    })?;
    if let Some(e) = save_error {
        return Err(e);
    }
    save_model(&model, &model_path)?;
    log.write_csv(BufWriter::new(create(&log_path)?))?;

    let summary = TrainingSummary {
        seed: cfg.seed,
        corpus_files: files.len(),
        train_files: train_files.len(),
        validation_files: val_files.len(),
        train_segments: train_set.len(),
        validation_segments: val_set.len(),
        train_audio_seconds: seconds(&train_set),
        validation_audio_seconds: seconds(&val_set),
        epochs: log.records.len(),
        parameters: model.param_count(),
        skipped_samples: log.skipped_samples,
        baseline_val_loss: log.baseline_val_loss,
        final_val_loss: log.records.last().map_or(f64::NAN, |r| r.val_loss),
        best_val_loss: log.records.iter().map(|r| r.val_loss).fold(f64::INFINITY, f64::min),
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    std::fs::write(out_dir.join(SUMMARY_FILE), toml::to_string(&summary)?)?;
    log::info!(
        "done: validation loss {:.6} (zero-estimator baseline {:.6}) after {:.0} s",
        summary.final_val_loss,
        summary.baseline_val_loss,
        summary.wall_seconds
    );
    Ok(summary)
}

/// Amplitude, signal length and framing from a WAV or AMPL1 input.
fn load_target(path: &Path, config: Option<&Path>) -> Result<(Amplitude, usize, Params)> {
    let mut magic = [0u8; 5];
    let n = File::open(path).with_context(|| format!("opening {}", path.display()))?.read(&mut magic)?;
    if n == 5 && &magic == crate::ampl::MAGIC {
        let f = read_amplitude(BufReader::new(File::open(path)?))?;
        if config.is_some() {
            log::warn!("framing comes from the amplitude file; config STFT settings ignored");
        }
        return Ok((f.amplitude, f.signal_length, f.params));
    }
    let params = params_from(config)?;
    let sig = load_wav(path)?;
    if sig.is_empty() {
        bail!("{} holds no samples", path.display());
    }
    let a = Engine::new(params.clone()).stft(&sig)?.amplitude();
    Ok((a, sig.len(), params))
}

pub fn run_reconstruct(args: &ReconstructArgs) -> Result<()> {
    let model_path = match args.model.as_str() {
        "none" => None,
        p => Some(PathBuf::from(p)),
    };
    if args.method == MethodArg::Degli && model_path.is_none() {
        return Err(UsageError("--method degli requires --model <checkpoint>".into()).into());
    }
    if args.method != MethodArg::Degli && model_path.is_some() {
        log::warn!("model ignored: --method {:?} does not use a denoiser", args.method);
    }
    let (a, len, params) = load_target(&args.input, args.config.as_deref())?;
    let stft = Engine::new(params);
    let mut solver = match &args.config {
        Some(p) => Config::load(p)?.solver_config(args.iters),
        None => degli_core::SolverConfig::with_iterations(args.iters),
    };
    if let Some(g) = args.gamma {
        solver.gamma = g;
    }
    solver.init = match args.init {
        InitArg::Zero => PhaseInit::Zero,
        InitArg::Random => PhaseInit::Random { seed: args.seed },
    };
    solver.validate()?;
    let init: Spectrogram = solver.init.initial(&a);
    let (signal, report) = match args.method {
        MethodArg::Gla => gla_run(&a, &stft, len, init, &solver)?,
        MethodArg::Fgla => fgla_run(&a, &stft, len, init, &solver)?,
        MethodArg::Degli => {
            let model = load_model(model_path.as_deref().expect("checked above"))?;
            degli_run(&a, &stft, len, init, &solver, NeuralDenoiser::new(model))?
        }
    };
    save_wav(&Signal::new(signal.into_samples(), stft.params().sample_rate())?, &args.out)?;
    if let Some(r) = &args.report {
        report.write_csv(BufWriter::new(create(r)?))?;
    }
    if let Some(last) = report.last() {
        log::info!(
            "{:?} x{}: spectral convergence {:.6}, inconsistency {:.6e}",
            args.method,
            last.iteration,
            last.spectral_convergence,
            last.inconsistency
        );
    }
    Ok(())
}

pub fn run_eval(args: &EvalArgs) -> Result<()> {
    let params = params_from(args.config.as_deref())?;
    let gamma = match &args.config {
        Some(p) => Config::load(p)?.solver.gamma,
        None => 0.99,
    };
    let stft = Engine::new(params);
    let files = list_wavs(&args.corpus)?;
    let mut corpus = Vec::with_capacity(files.len());
    for f in &files {
        let name = f.file_name().map_or_else(|| f.display().to_string(), |n| n.to_string_lossy().into_owned());
        corpus.push((name, load_wav(f)?));
    }
    let denoiser = match &args.model {
        Some(p) => Some(NeuralDenoiser::new(load_model(p)?)),
        None => None,
    };
    let mut methods = Vec::new();
    for m in &args.methods {
        match m {
            MethodArg::Gla => methods.push(Method::Gla),
            MethodArg::Fgla => methods.push(Method::Fgla { gamma }),
            MethodArg::Degli => match &denoiser {
                Some(d) => methods.push(Method::Degli { denoiser: d }),
                None => log::warn!("no --model given: DeGLI rows skipped"),
            },
        }
    }
    if methods.is_empty() {
        bail!("no method left to evaluate");
    }
    let result = evaluate_methods(&corpus, &stft, &methods, &args.grid)?;
    match &args.out {
        Some(p) => result.write_csv(BufWriter::new(create(p)?))?,
        None => result.write_csv(std::io::stdout().lock())?,
    }
    if let Some(p) = &args.summary {
        write_summary_csv(&result.summary(), BufWriter::new(create(p)?))?;
    }
    Ok(())
}

pub fn run_synth(args: &SynthArgs) -> Result<()> {
    if args.min_seconds <= 0.0 || args.max_seconds < args.min_seconds {
        bail!("need 0 < --min-seconds <= --max-seconds");
    }
    let opts = SynthOptions { min_seconds: args.min_seconds, max_seconds: args.max_seconds };
    let total = write_corpus(&args.out, args.count, args.seed, &opts)?;
    log::info!("wrote {} files, {:.1} min of audio", args.count, total as f64 / 16000.0 / 60.0);
    Ok(())
}
