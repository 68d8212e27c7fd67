//! Residual denoising training: corrupt a clean spectrogram with complex
//! Gaussian noise, run one projection pair on it and teach the network the
//! gap between the result and the clean spectrogram.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::projections::{project_amplitude, project_consistent};
use crate::scalar::Real;
use crate::solver::format_f64;
use crate::spectrogram::{AmplitudeSpectrogram, ComplexSpectrogram, TimeSignal};
use crate::stft::Stft;
use crate::Complex;

use super::adam::Adam;
use super::denoiser::{feature_scale, pack_features, pack_residual};
use super::loss::masked_l1;
use super::model::DenoiserModel;
use super::tensor::Tensor;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Samples per training segment.
    pub segment_length: usize,
    /// Inclusive SNR range the per-sample noise level is drawn from.
    pub snr_range_db: (f64, f64),
    pub initial_lr: f64,
    /// Learning-rate multiplier applied after `patience_epochs` epochs
    /// without a new best validation loss.
    pub lr_decay_factor: f64,
    pub patience_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 8,
            segment_length: 32768,
            snr_range_db: (-6.0, 0.0),
            initial_lr: 1e-3,
            lr_decay_factor: 10f64.powf(-0.5),
            patience_epochs: 2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("training config: {m}")));
        let (lo, hi) = self.snr_range_db;
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if self.segment_length == 0 {
            return bad("segment_length must be positive");
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return bad("snr range must be finite with low <= high");
        }
        if !(self.initial_lr.is_finite() && self.initial_lr > 0.0) {
            return bad("initial_lr must be positive");
        }
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor <= 1.0) {
            return bad("lr_decay_factor must lie in (0, 1]");
        }
        if self.patience_epochs == 0 {
            return bad("patience_epochs must be at least 1");
        }
        Ok(())
    }
}

/// Clean spectrogram, its noisy version and the clean amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainSample<T> {
    pub clean: ComplexSpectrogram<T>,
    pub noisy: ComplexSpectrogram<T>,
    pub amplitude: AmplitudeSpectrogram<T>,
}

/// Adds circular complex Gaussian noise, rescaled so that the realized
/// SNR (in the spectrogram norm) is exactly `snr_db`.
pub fn add_noise<T: Real, R: Rng + ?Sized>(
    clean: &ComplexSpectrogram<T>,
    snr_db: f64,
    rng: &mut R,
) -> Result<TrainSample<T>> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidParameter(format!("snr {snr_db} dB")));
    }
    let energy = clean.norm_sqr().to_f64_lossy();
    if !(energy > 0.0) {
        return Err(Error::InvalidInput("clean spectrogram has zero energy; sample skipped".into()));
    }
    let raw: Vec<Complex<T>> = clean
        .data()
        .iter()
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(T::from_f64_lossy(re), T::from_f64_lossy(im))
        })
        .collect();
    let noise = ComplexSpectrogram::from_raw(clean.bins(), clean.frames(), raw);
    let noise_energy = noise.norm_sqr().to_f64_lossy();
    let gain = (energy / noise_energy * 10f64.powf(-snr_db / 10.0)).sqrt();
    let noisy = clean + &noise.scale(T::from_f64_lossy(gain));
    Ok(TrainSample { clean: clean.clone(), amplitude: clean.amplitude(), noisy })
}

/// One training pair in network units.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualExample<T> {
    /// `(X~, Y~, Z~) / s`
    pub input: Tensor<T>,
    /// `(Z~ - X*) / s`
    pub target: Tensor<T>,
    /// Leading frames that touch real (unpadded) audio.
    pub valid_frames: usize,
}

/// Runs the projection pair on the noisy spectrogram and packs the network
/// input and target. `None` when the amplitude is silent.
pub fn prepare_example<T: Real>(
    sample: &TrainSample<T>,
    stft: &Stft<T>,
    signal_length: usize,
    valid_length: usize,
) -> Result<Option<ResidualExample<T>>> {
    let y = project_amplitude(&sample.noisy, &sample.amplitude)?;
    let z = project_consistent(&y, stft, signal_length)?;
    let s = feature_scale(&y);
    if s == T::zero() {
        return Ok(None);
    }
    let input = pack_features(&sample.noisy, &y, &z, s)?;
    let target = pack_residual(&(&z - &sample.clean), s);
    let valid_frames =
        (0..z.frames()).take_while(|&t| stft.params().frame_start(t) < valid_length as isize).count();
    Ok(Some(ResidualExample { input, target, valid_frames }))
}

/// Summed masked l1 loss and entry count of `model` on `examples`,
/// accumulating parameter gradients of the sum into `grads` when given.
pub fn batch_loss<T: Real>(
    model: &DenoiserModel<T>,
    examples: &[ResidualExample<T>],
    mut grads: Option<&mut [T]>,
) -> Result<(T, usize)> {
    let mut total = T::zero();
    let mut count = 0;
    for ex in examples {
        if let Some(acc) = grads.as_deref_mut() {
            let (out, cache) = model.forward_cached(&ex.input)?;
            let (loss, n, g_out) = masked_l1(&out, &ex.target, ex.valid_frames)?;
            let g = model.backward(&cache, &g_out, false)?;
            for (a, &v) in acc.iter_mut().zip(&g.params) {
                *a = *a + v;
            }
            total = total + loss;
            count += n;
        } else {
            let out = model.forward(&ex.input)?;
            let (loss, n, _) = masked_l1(&out, &ex.target, ex.valid_frames)?;
            total = total + loss;
            count += n;
        }
    }
    Ok((total, count))
}

/// One optimizer step on the mean loss over `examples`; returns that mean.
pub fn train_step<T: Real>(
    model: &mut DenoiserModel<T>,
    optimizer: &mut Adam<T>,
    examples: &[ResidualExample<T>],
    lr: f64,
) -> Result<f64> {
    let mut grads = vec![T::zero(); model.param_count()];
    let (total, count) = batch_loss(model, examples, Some(&mut grads))?;
    if count == 0 {
        return Err(Error::InvalidInput("batch has no unmasked entries".into()));
    }
    let mean = total.to_f64_lossy() / count as f64;
    if !mean.is_finite() {
        return Err(Error::TrainingDiverged(format!("training loss became {mean}")));
    }
    let inv = T::one() / T::lit(count as f64);
    for g in &mut grads {
        *g = *g * inv;
    }
    optimizer.step(model.params_mut(), &grads, T::from_f64_lossy(lr))?;
    Ok(mean)
}

/// Fixed-length slice of a clean utterance; audio past `valid_length` is
/// zero padding.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment<T> {
    pub signal: TimeSignal<T>,
    pub valid_length: usize,
    pub source: String,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    /// Learning rate used during the epoch.
    pub lr: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingLog {
    pub records: Vec<EpochRecord>,
    /// Validation loss of the all-zero estimator on the same noisy samples.
    pub baseline_val_loss: f64,
    pub skipped_samples: usize,
}

impl TrainingLog {
    /// CSV with header `epoch,train_loss,val_loss,lr`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["epoch", "train_loss", "val_loss", "lr"])?;
        for r in &self.records {
            w.write_record([r.epoch.to_string(), format_f64(r.train_loss), format_f64(r.val_loss), format_f64(r.lr)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the epoch rows back; the baseline and skip count are not part
    /// of the CSV.
    pub fn read_csv<R: Read>(reader: R) -> Result<Vec<EpochRecord>> {
        let bad = |reason: String| Error::Format { what: "training log CSV", reason };
        let mut r = csv::Reader::from_reader(reader);
        let mut out = Vec::new();
        for row in r.records() {
            let row = row?;
            if row.len() != 4 {
                return Err(bad(format!("expected 4 columns, got {}", row.len())));
            }
            let num = |i: usize| row[i].parse::<f64>().map_err(|e| bad(format!("{}: {e}", &row[i])));
            out.push(EpochRecord {
                epoch: row[0].parse().map_err(|e| bad(format!("{}: {e}", &row[0])))?,
                train_loss: num(1)?,
                val_loss: num(2)?,
                lr: num(3)?,
            });
        }
        Ok(out)
    }
}

/// Multiplies the learning rate by `factor` once the validation loss has
/// gone `patience` epochs without a new minimum.
#[derive(Clone, Debug, PartialEq)]
pub struct PlateauSchedule {
    lr: f64,
    factor: f64,
    patience: usize,
    best: f64,
    stale: usize,
}

impl PlateauSchedule {
    pub fn new(initial_lr: f64, factor: f64, patience: usize) -> Self {
        Self { lr: initial_lr, factor, patience, best: f64::INFINITY, stale: 0 }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    /// Feeds one epoch's validation loss; returns the rate for the next epoch.
    pub fn observe(&mut self, val_loss: f64) -> f64 {
        if val_loss < self.best {
            self.best = val_loss;
            self.stale = 0;
        } else {
            self.stale += 1;
            if self.stale >= self.patience {
                self.lr *= self.factor;
                self.stale = 0;
            }
        }
        self.lr
    }
}

fn draw_snr<R: Rng>(range: (f64, f64), rng: &mut R) -> f64 {
    if range.0 < range.1 {
        rng.random_range(range.0..=range.1)
    } else {
        range.0
    }
}

fn make_example<T: Real, R: Rng>(
    seg: &Segment<T>,
    stft: &Stft<T>,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Option<ResidualExample<T>>> {
    let clean = stft.stft(&seg.signal)?;
    let snr = draw_snr(cfg.snr_range_db, rng);
    match add_noise(&clean, snr, rng) {
        Ok(sample) => prepare_example(&sample, stft, seg.signal.len(), seg.valid_length),
        Err(Error::InvalidInput(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Mean per-segment loss of `model` (and of the zero estimator) on the
/// validation set, with noise drawn from a stream fixed by the seed.
pub fn validation_losses<T: Real>(
    model: &DenoiserModel<T>,
    val_set: &[Segment<T>],
    stft: &Stft<T>,
    cfg: &TrainConfig,
) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let (mut sum, mut base, mut used) = (0.0, 0.0, 0usize);
    for seg in val_set {
        let Some(ex) = make_example(seg, stft, cfg, &mut rng)? else { continue };
        let (loss, n) = batch_loss(model, std::slice::from_ref(&ex), None)?;
        if n == 0 {
            continue;
        }
        let zero = Tensor::zeros(ex.target.channels, ex.target.height, ex.target.width);
        let (b, _, _) = masked_l1(&zero, &ex.target, ex.valid_frames)?;
        sum += loss.to_f64_lossy() / n as f64;
        base += b.to_f64_lossy() / n as f64;
        used += 1;
    }
    if used == 0 {
        return Err(Error::InvalidInput("validation set has no usable segments".into()));
    }
    Ok((sum / used as f64, base / used as f64))
}

/// Trains `model` in place. `on_epoch` sees every finished epoch together
/// with the current weights.
pub fn train<T: Real>(
    model: &mut DenoiserModel<T>,
    train_set: &[Segment<T>],
    val_set: &[Segment<T>],
    stft: &Stft<T>,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord, &DenoiserModel<T>),
) -> Result<TrainingLog> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::InvalidInput("empty training corpus".into()));
    }
    if val_set.is_empty() {
        return Err(Error::InvalidInput("empty validation set".into()));
    }
    if let Some(seg) = train_set.iter().chain(val_set).find(|s| s.signal.len() != cfg.segment_length) {
        return Err(Error::InvalidInput(format!(
            "segment from {} has {} samples, expected {}",
            seg.source,
            seg.signal.len(),
            cfg.segment_length
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut optimizer = Adam::new(model.param_count());
    let mut schedule = PlateauSchedule::new(cfg.initial_lr, cfg.lr_decay_factor, cfg.patience_epochs);
    let mut log = TrainingLog { baseline_val_loss: validation_losses(model, val_set, stft, cfg)?.1, ..Default::default() };
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut batches) = (0.0, 0usize);
        for chunk in order.chunks(cfg.batch_size) {
            let mut batch = Vec::with_capacity(chunk.len());
            for &i in chunk {
                match make_example(&train_set[i], stft, cfg, &mut rng)? {
                    Some(ex) if ex.valid_frames > 0 => batch.push(ex),
                    _ => log.skipped_samples += 1,
                }
            }
            if batch.is_empty() {
                continue;
            }
            loss_sum += train_step(model, &mut optimizer, &batch, schedule.lr())?;
            batches += 1;
        }
        if batches == 0 {
            return Err(Error::InvalidInput("no usable training segments".into()));
        }
        let (val_loss, _) = validation_losses(model, val_set, stft, cfg)?;
        if !val_loss.is_finite() {
            return Err(Error::TrainingDiverged(format!("validation loss became {val_loss} in epoch {epoch}")));
        }
        let record = EpochRecord { epoch, train_loss: loss_sum / batches as f64, val_loss, lr: schedule.lr() };
        log.records.push(record);
        on_epoch(&record, model);
        schedule.observe(val_loss);
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::model::{Architecture, Skip};
    use crate::stft::StftParams;

    fn small_stft() -> Stft<f64> {
        Stft::new(StftParams::hann(64, 32, 16000).unwrap())
    }

    fn voiced(len: usize, f0: f64, seed: u64) -> TimeSignal<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase: f64 = rng.random_range(0.0..6.28);
        let samples = (0..len)
            .map(|n| {
                let t = n as f64 / 16000.0;
                (1..6).map(|h| (2.0 * std::f64::consts::PI * f0 * h as f64 * t + phase * h as f64).sin() / h as f64).sum::<f64>()
                    * (1.0 + 0.5 * (6.0 * t).sin())
                    * 0.3
            })
            .collect();
        TimeSignal::new(samples, 16000).unwrap()
    }

    fn segment(len: usize, valid: usize, seed: u64) -> Segment<f64> {
        let mut s = voiced(len, 120.0 + 37.0 * seed as f64, seed).into_samples();
        s[valid..].fill(0.0);
        Segment { signal: TimeSignal::new(s, 16000).unwrap(), valid_length: valid, source: format!("s{seed}") }
    }

    fn tiny_arch() -> Architecture {
        Architecture::conv_glu(6, 2, 3, 3, vec![])
    }

    #[test]
    fn defaults() {
        let c = TrainConfig::default();
        assert_eq!((c.epochs, c.batch_size, c.segment_length, c.patience_epochs), (50, 8, 32768, 2));
        assert_eq!(c.snr_range_db, (-6.0, 0.0));
        assert_eq!(c.initial_lr, 1e-3);
        assert!((c.lr_decay_factor - 0.31622776601683794).abs() < 1e-15);
        c.validate().unwrap();
    }

    #[test]
    fn config_validation() {
        let ok = TrainConfig::default();
        for bad in [
            TrainConfig { snr_range_db: (1.0, 0.0), ..ok.clone() },
            TrainConfig { initial_lr: 0.0, ..ok.clone() },
            TrainConfig { patience_epochs: 0, ..ok.clone() },
            TrainConfig { batch_size: 0, ..ok.clone() },
            TrainConfig { lr_decay_factor: 1.5, ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn noise_hits_the_requested_snr() {
        let stft = small_stft();
        let clean = stft.stft(&voiced(1000, 200.0, 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (snr, ratio) in [(0.0, 1.0), (-6.0, 10f64.powf(0.6)), (-3.3, 10f64.powf(0.33))] {
            let s = add_noise(&clean, snr, &mut rng).unwrap();
            let noise = &s.noisy - &s.clean;
            let r = noise.norm_sqr() / clean.norm_sqr();
            assert!((r / ratio - 1.0).abs() < 1e-10, "{snr} dB: {r}");
            assert_eq!(s.amplitude, clean.amplitude());
        }
    }

    #[test]
    fn noise_is_seeded() {
        let stft = small_stft();
        let clean = stft.stft(&voiced(700, 150.0, 2)).unwrap();
        let a = add_noise(&clean, -2.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = add_noise(&clean, -2.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let c = add_noise(&clean, -2.0, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.noisy, c.noisy);
    }

    #[test]
    fn zero_energy_is_reported() {
        let clean = ComplexSpectrogram::<f64>::zeros(33, 4);
        let err = add_noise(&clean, 0.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap_err();
        assert!(err.to_string().contains("skipped"));
    }

    #[test]
    fn mask_counts_frames_touching_audio() {
        let stft = small_stft();
        let seg = segment(640, 100, 1);
        let clean = stft.stft(&seg.signal).unwrap();
        let s = add_noise(&clean, 0.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let ex = prepare_example(&s, &stft, 640, 100).unwrap().unwrap();
        // Frames start at -32, 0, 32, 64, 96, 128, ...
        assert_eq!(ex.valid_frames, 5);
        assert_eq!(ex.input.shape(), (6, 33, 21));
    }

    #[test]
    fn zero_model_loss_is_l1_of_the_residual() {
        let stft = small_stft();
        let seg = segment(800, 800, 3);
        let clean = stft.stft(&seg.signal).unwrap();
        let s = add_noise(&clean, -4.0, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let ex = prepare_example(&s, &stft, 800, 800).unwrap().unwrap();
        let model = DenoiserModel::<f64>::zeros(Architecture::default_denoiser()).unwrap();
        let (loss, count) = batch_loss(&model, std::slice::from_ref(&ex), None).unwrap();

        let y = project_amplitude(&s.noisy, &s.amplitude).unwrap();
        let z = project_consistent(&y, &stft, 800).unwrap();
        let scale = feature_scale(&y);
        let residual = &z - &s.clean;
        let (expected, _) =
            crate::nn::loss::l1_loss(&ComplexSpectrogram::zeros(33, z.frames()), &residual).unwrap();
        assert_eq!(count, 2 * 33 * z.frames());
        assert!((loss * scale - expected).abs() <= 1e-10 * expected);
    }

    #[test]
    fn overfits_a_single_sample() {
        let stft = small_stft();
        let seg = segment(1024, 1024, 4);
        let clean = stft.stft(&seg.signal).unwrap();
        let s = add_noise(&clean, -3.0, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let ex = prepare_example(&s, &stft, 1024, 1024).unwrap().unwrap();
        let arch = Architecture::conv_glu(8, 3, 5, 3, vec![Skip { from: 0, to: 2 }]);
        let mut model = DenoiserModel::<f64>::initialized(arch, 1).unwrap();
        let mut opt = Adam::new(model.param_count());
        let batch = [ex];
        let losses: Vec<f64> = (0..200).map(|_| train_step(&mut model, &mut opt, &batch, 3e-4).unwrap()).collect();
        let ups = losses.windows(2).filter(|w| w[1] > w[0]).count();
        assert!(ups <= 10, "{ups} increasing steps");
        assert!(losses[199] < 0.5 * losses[0], "{} -> {}", losses[0], losses[199]);
    }

    #[test]
    fn plateau_schedule() {
        let mut s = PlateauSchedule::new(1.0, 0.5, 2);
        assert_eq!(s.observe(3.0), 1.0);
        assert_eq!(s.observe(2.0), 1.0);
        assert_eq!(s.observe(2.5), 1.0);
        assert_eq!(s.observe(2.0), 0.5);
        assert_eq!(s.observe(1.0), 0.5);
        assert_eq!(s.observe(1.0), 0.5);
        assert_eq!(s.observe(1.2), 0.25);
    }

    fn tiny_corpus() -> (Vec<Segment<f64>>, Vec<Segment<f64>>, TrainConfig) {
        let train: Vec<_> = (0..5).map(|i| segment(512, if i == 2 { 300 } else { 512 }, i)).collect();
        let val = vec![segment(512, 512, 7), segment(512, 400, 8)];
        let cfg = TrainConfig { epochs: 3, batch_size: 2, segment_length: 512, seed: 17, ..TrainConfig::default() };
        (train, val, cfg)
    }

    #[test]
    fn training_is_deterministic_and_logged() {
        let stft = small_stft();
        let (train_set, val_set, cfg) = tiny_corpus();
        let run = || {
            let mut m = DenoiserModel::<f64>::initialized(tiny_arch(), 3).unwrap();
            let mut seen = Vec::new();
            let log = train(&mut m, &train_set, &val_set, &stft, &cfg, |r, _| seen.push(r.epoch)).unwrap();
            assert_eq!(seen, vec![1, 2, 3]);
            (m, log)
        };
        let (m1, log1) = run();
        let (m2, log2) = run();
        assert_eq!(m1, m2);
        assert_eq!(log1, log2);
        assert_eq!(log1.records.len(), 3);
        assert!(log1.baseline_val_loss > 0.0);
        assert_eq!(log1.records[0].lr, 1e-3);

        let mut buf = Vec::new();
        log1.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("epoch,train_loss,val_loss,lr\n"));
        assert_eq!(TrainingLog::read_csv(buf.as_slice()).unwrap(), log1.records);
    }

    #[test]
    fn training_input_errors() {
        let stft = small_stft();
        let (train_set, val_set, cfg) = tiny_corpus();
        let mut m = DenoiserModel::<f64>::initialized(tiny_arch(), 3).unwrap();
        assert!(train(&mut m, &[], &val_set, &stft, &cfg, |_, _| {}).is_err());
        assert!(train(&mut m, &train_set, &[], &stft, &cfg, |_, _| {}).is_err());
        let wrong = TrainConfig { segment_length: 256, ..cfg };
        assert!(train(&mut m, &train_set, &val_set, &stft, &wrong, |_, _| {}).is_err());
    }
}
