//! Objective reconstruction measures and the method comparison harness.

use std::io::{Read, Write};

use crate::degli::{Degli, Denoiser};
use crate::error::{invalid_input, Error, Result};
use crate::gla::{Fgla, Gla};
use crate::solver::{format_f64, iterate, state_metrics, synthesize, PhaseInit, PhaseUpdate};
use crate::scalar::Real;
use crate::spectrogram::{bin_weight, AmplitudeSpectrogram, ComplexSpectrogram, TimeSignal};
use crate::stft::Stft;

/// Reported in place of an infinite SNR.
pub const SNR_CAP_DB: f64 = 300.0;

/// `||A - |S||| / ||A||`.
pub fn spectral_convergence_of<T: Real>(
    a: &AmplitudeSpectrogram<T>,
    s: &ComplexSpectrogram<T>,
) -> Result<T> {
    if a.shape() != s.shape() {
        return Err(invalid_input(format!(
            "spectral convergence: amplitude {:?} vs spectrogram {:?}",
            a.shape(),
            s.shape()
        )));
    }
    let denom = a.norm_sqr();
    if denom == T::zero() {
        return Err(Error::UndefinedMetric("spectral convergence of an all-zero amplitude".into()));
    }
    let bins = a.bins();
    let mut num = T::zero();
    for (i, (&target, c)) in a.data().iter().zip(s.data()).enumerate() {
        let d = target - c.norm();
        num = num + bin_weight::<T>(i % bins, bins) * d * d;
    }
    Ok((num / denom).sqrt())
}

/// `||A - |stft(x)||| / ||A||`.
pub fn spectral_convergence<T: Real>(
    a: &AmplitudeSpectrogram<T>,
    x: &TimeSignal<T>,
    stft: &Stft<T>,
) -> Result<T> {
    spectral_convergence_of(a, &stft.stft(x)?)
}

/// Signal-to-error ratio in dB after the best integer shift in
/// `[-max_shift, max_shift]` and the best scalar gain (which absorbs sign
/// flips). Identical signals report [`SNR_CAP_DB`].
pub fn waveform_snr<T: Real>(
    reference: &TimeSignal<T>,
    estimate: &TimeSignal<T>,
    max_shift: usize,
) -> Result<f64> {
    let r: Vec<f64> = reference.samples().iter().map(|v| v.to_f64_lossy()).collect();
    let e: Vec<f64> = estimate.samples().iter().map(|v| v.to_f64_lossy()).collect();
    if r.len() != e.len() {
        return Err(invalid_input(format!(
            "SNR needs equal lengths, got {} and {}",
            r.len(),
            e.len()
        )));
    }
    let ref_energy: f64 = r.iter().map(|v| v * v).sum();
    if ref_energy == 0.0 {
        return Err(Error::UndefinedMetric("SNR against a silent reference".into()));
    }
    let n = r.len() as isize;
    let mut best = f64::NEG_INFINITY;
    for shift in -(max_shift as isize)..=(max_shift as isize) {
        // shifted[i] = e[i - shift]
        let lo = shift.max(0);
        let hi = (n + shift).min(n);
        let mut cross = 0.0;
        let mut energy = 0.0;
        for i in lo..hi {
            let v = e[(i - shift) as usize];
            cross += r[i as usize] * v;
            energy += v * v;
        }
        let gain = if energy > 0.0 { cross / energy } else { 0.0 };
        let mut err = 0.0;
        for i in 0..n {
            let j = i - shift;
            let v = if (0..n).contains(&j) { e[j as usize] } else { 0.0 };
            let d = r[i as usize] - gain * v;
            err += d * d;
        }
        let snr = if err <= ref_energy * 1e-30 {
            SNR_CAP_DB
        } else {
            (10.0 * (ref_energy / err).log10()).min(SNR_CAP_DB)
        };
        best = best.max(snr);
    }
    Ok(best)
}

/// A phase-reconstruction method under evaluation.
pub enum Method<'a, T: Real> {
    Gla,
    Fgla { gamma: T },
    Degli { denoiser: &'a (dyn Denoiser<T> + 'a) },
}

impl<T: Real> Method<'_, T> {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Gla => "gla",
            Method::Fgla { .. } => "fgla",
            Method::Degli { .. } => "degli",
        }
    }

    fn update(&self) -> Box<dyn PhaseUpdate<T> + '_> {
        match self {
            Method::Gla => Box::new(Gla),
            Method::Fgla { gamma } => Box::new(Fgla { gamma: *gamma }),
            Method::Degli { denoiser } => Box::new(Degli { denoiser: *denoiser }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalRecord {
    pub utterance: String,
    pub method: String,
    pub iterations: usize,
    pub spectral_convergence: f64,
    pub inconsistency: f64,
    pub waveform_snr_db: f64,
    pub seconds: f64,
}

const EVAL_HEADER: [&str; 7] = [
    "utterance",
    "method",
    "iterations",
    "spectral_convergence",
    "inconsistency",
    "waveform_snr_db",
    "seconds",
];

/// Evaluation table, sorted by `(method, iterations)` and corpus order
/// within each group.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalResult {
    pub records: Vec<EvalRecord>,
}

impl EvalResult {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(EVAL_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.utterance.clone(),
                r.method.clone(),
                r.iterations.to_string(),
                format_f64(r.spectral_convergence),
                format_f64(r.inconsistency),
                format_f64(r.waveform_snr_db),
                format_f64(r.seconds),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let bad = |reason: String| Error::Format { what: "evaluation CSV", reason };
        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row?;
            if row.len() != EVAL_HEADER.len() {
                return Err(bad(format!("expected {} columns, got {}", EVAL_HEADER.len(), row.len())));
            }
            let num = |i: usize| -> Result<f64> { row[i].parse().map_err(|e| bad(format!("{e}"))) };
            records.push(EvalRecord {
                utterance: row[0].to_string(),
                method: row[1].to_string(),
                iterations: row[2].parse().map_err(|e| bad(format!("{e}")))?,
                spectral_convergence: num(3)?,
                inconsistency: num(4)?,
                waveform_snr_db: num(5)?,
                seconds: num(6)?,
            });
        }
        Ok(Self { records })
    }

    /// Rows for one `(method, iterations)` cell in corpus order.
    pub fn cell(&self, method: &str, iterations: usize) -> Vec<&EvalRecord> {
        self.records.iter().filter(|r| r.method == method && r.iterations == iterations).collect()
    }

    /// Mean, median and quartiles per `(method, iterations)`.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(String, usize)> =
            self.records.iter().map(|r| (r.method.clone(), r.iterations)).collect();
        keys.dedup();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|(method, iterations)| {
                let cell = self.cell(&method, iterations);
                let sc: Vec<f64> = cell.iter().map(|r| r.spectral_convergence).collect();
                let snr: Vec<f64> = cell.iter().map(|r| r.waveform_snr_db).collect();
                let secs: Vec<f64> = cell.iter().map(|r| r.seconds).collect();
                SummaryRow {
                    method,
                    iterations,
                    count: cell.len(),
                    spectral_convergence: Stats::of(&sc),
                    waveform_snr_db: Stats::of(&snr),
                    mean_seconds: Stats::of(&secs).mean,
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Stats {
    /// Quartiles by linear interpolation between order statistics.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: f64::NAN, q1: f64::NAN, median: f64::NAN, q3: f64::NAN };
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Self {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub iterations: usize,
    pub count: usize,
    pub spectral_convergence: Stats,
    pub waveform_snr_db: Stats,
    pub mean_seconds: f64,
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "method", "iterations", "count", "sc_mean", "sc_q1", "sc_median", "sc_q3", "snr_mean",
        "snr_q1", "snr_median", "snr_q3", "seconds_mean",
    ])?;
    for r in rows {
        let s = &r.spectral_convergence;
        let n = &r.waveform_snr_db;
        let mut rec = vec![r.method.clone(), r.iterations.to_string(), r.count.to_string()];
        rec.extend(
            [s.mean, s.q1, s.median, s.q3, n.mean, n.q1, n.median, n.q3, r.mean_seconds]
                .map(format_f64),
        );
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reconstructs every utterance from its own amplitude with zero-phase
/// initialization and scores each method at every depth in `grid`.
pub fn evaluate_methods<T: Real>(
    corpus: &[(String, TimeSignal<T>)],
    stft: &Stft<T>,
    methods: &[Method<'_, T>],
    grid: &[usize],
) -> Result<EvalResult> {
    let mut grid: Vec<usize> = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.first() == Some(&0) || grid.is_empty() {
        return Err(invalid_input("iteration grid must be non-empty and positive"));
    }
    let depth = *grid.last().expect("non-empty grid");
    let max_shift = stft.params().hop_length();
    let mut records = Vec::new();
    for (name, signal) in corpus {
        let len = signal.len();
        let a = stft.stft(signal)?.amplitude();
        for method in methods {
            let update = method.update();
            let mut next_grid = grid.iter().copied().peekable();
            iterate(&*update, &a, stft, len, PhaseInit::Zero.initial(&a), depth, |m, x, seconds| {
                if next_grid.peek() == Some(&m) {
                    next_grid.next();
                    let (inconsistency, spectral_convergence) = state_metrics(x, &a, stft, len)?;
                    let delivered = synthesize(x, &a, stft, len)?;
                    records.push(EvalRecord {
                        utterance: name.clone(),
                        method: method.name().to_string(),
                        iterations: m,
                        spectral_convergence,
                        inconsistency,
                        waveform_snr_db: waveform_snr(signal, &delivered, max_shift)?,
                        seconds,
                    });
                }
                Ok(())
            })?;
        }
    }
    // Stable sort keeps corpus order inside each cell.
    records.sort_by(|p, q| (&p.method, p.iterations).cmp(&(&q.method, q.iterations)));
    Ok(EvalResult { records })
}
