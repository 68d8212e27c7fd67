//! Shared iteration driver for every phase-reconstruction method.
//!
//! A method only supplies the map `X^[m] -> X^[m+1]` ([`PhaseUpdate`]); the
//! driver handles initialization, timing, metric recording and the final
//! amplitude projection before synthesis.

use std::io::{Read, Write};
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid_parameter, Error, Result};
use crate::metrics::spectral_convergence_of;
use crate::projections::{project_amplitude, project_consistent};
use crate::scalar::Real;
use crate::spectrogram::{AmplitudeSpectrogram, ComplexSpectrogram, TimeSignal};
use crate::stft::Stft;

/// One iteration of a phase-reconstruction method.
pub trait PhaseUpdate<T: Real> {
    fn step(
        &self,
        x: &ComplexSpectrogram<T>,
        a: &AmplitudeSpectrogram<T>,
        stft: &Stft<T>,
        signal_length: usize,
    ) -> Result<ComplexSpectrogram<T>>;
}

/// Starting phase for `X^[0]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PhaseInit {
    /// `X^[0] = A` read as a complex grid with zero phase.
    #[default]
    Zero,
    /// Phases drawn uniformly from `[0, 2 pi)` with a fixed seed.
    Random { seed: u64 },
}

impl PhaseInit {
    pub fn initial<T: Real>(self, a: &AmplitudeSpectrogram<T>) -> ComplexSpectrogram<T> {
        match self {
            PhaseInit::Zero => ComplexSpectrogram::from_amplitude(a),
            PhaseInit::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let data = a
                    .data()
                    .iter()
                    .map(|&v| {
                        let phase = T::lit(rng.random_range(0.0..std::f64::consts::TAU));
                        Complex::from_polar(v, phase)
                    })
                    .collect();
                ComplexSpectrogram::from_raw(a.bins(), a.frames(), data)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Iteration count for GLA/FGLA, stack depth `M` for DeGLI.
    pub max_iterations: usize,
    /// FGLA momentum, unused by the other methods.
    pub gamma: f64,
    /// Record metrics every this many iterations (the last one is always
    /// recorded).
    pub record_metrics_every: usize,
    pub init: PhaseInit,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_iterations: 100, gamma: 0.99, record_metrics_every: 1, init: PhaseInit::Zero }
    }
}

impl SolverConfig {
    pub fn with_iterations(max_iterations: usize) -> Self {
        Self { max_iterations, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(invalid_parameter("max_iterations must be at least 1"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(invalid_parameter(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if self.record_metrics_every == 0 {
            return Err(invalid_parameter("record_metrics_every must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `||P_A(X) - P_C(P_A(X))||^2` for the state after this iteration.
    pub inconsistency: f64,
    /// Spectral convergence of the signal that would be delivered if the
    /// run stopped here; NaN when the target amplitude is all zero.
    pub spectral_convergence: f64,
    /// Cumulative solver time, excluding metric evaluation.
    pub seconds: f64,
}

/// Per-iteration metrics of one reconstruction run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReconstructionReport {
    records: Vec<IterationRecord>,
}

impl ReconstructionReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; iteration indices must strictly increase.
    pub fn push(&mut self, record: IterationRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.iteration <= last.iteration {
                return Err(Error::ContractViolation(format!(
                    "report iteration {} does not follow {}",
                    record.iteration, last.iteration
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// CSV with header `iteration,inconsistency,spectral_convergence,seconds`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["iteration", "inconsistency", "spectral_convergence", "seconds"])?;
        for r in &self.records {
            w.write_record([
                r.iteration.to_string(),
                format_f64(r.inconsistency),
                format_f64(r.spectral_convergence),
                format_f64(r.seconds),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut report = Self::new();
        for row in r.records() {
            let row = row?;
            let field = |i: usize| -> Result<&str> {
                row.get(i).ok_or_else(|| Error::Format {
                    what: "report CSV",
                    reason: format!("missing column {i}"),
                })
            };
            let parse = |s: &str| -> Result<f64> {
                s.parse().map_err(|e| Error::Format { what: "report CSV", reason: format!("{s}: {e}") })
            };
            report.push(IterationRecord {
                iteration: field(0)?.parse().map_err(|e| Error::Format {
                    what: "report CSV",
                    reason: format!("iteration: {e}"),
                })?,
                inconsistency: parse(field(1)?)?,
                spectral_convergence: parse(field(2)?)?,
                seconds: parse(field(3)?)?,
            })?;
        }
        Ok(report)
    }
}

/// Shortest decimal form that parses back to the same `f64`.
pub(crate) fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Metrics of the state `x`: inconsistency of `P_A(x)` and the spectral
/// convergence of the consistent spectrogram `P_C(P_A(x))`.
pub fn state_metrics<T: Real>(
    x: &ComplexSpectrogram<T>,
    a: &AmplitudeSpectrogram<T>,
    stft: &Stft<T>,
    signal_length: usize,
) -> Result<(f64, f64)> {
    let y = project_amplitude(x, a)?;
    let z = project_consistent(&y, stft, signal_length)?;
    let inconsistency = y.distance_sqr(&z).to_f64_lossy();
    let sc = spectral_convergence_of(a, &z).map(|v| v.to_f64_lossy()).unwrap_or(f64::NAN);
    Ok((inconsistency, sc))
}

/// `istft(P_A(x))`: the delivered signal always carries amplitude `A`
/// before synthesis.
pub fn synthesize<T: Real>(
    x: &ComplexSpectrogram<T>,
    a: &AmplitudeSpectrogram<T>,
    stft: &Stft<T>,
    signal_length: usize,
) -> Result<TimeSignal<T>> {
    stft.inverse(&project_amplitude(x, a)?, signal_length)
}

/// Runs `iterations` updates from `init`, calling `observe(m, X^[m], t)`
/// after every update with the cumulative solver time `t` in seconds.
/// Returns the final state.
pub fn iterate<T, U, O>(
    update: &U,
    a: &AmplitudeSpectrogram<T>,
    stft: &Stft<T>,
    signal_length: usize,
    init: ComplexSpectrogram<T>,
    iterations: usize,
    mut observe: O,
) -> Result<ComplexSpectrogram<T>>
where
    T: Real,
    U: PhaseUpdate<T> + ?Sized,
    O: FnMut(usize, &ComplexSpectrogram<T>, f64) -> Result<()>,
{
    if iterations == 0 {
        return Err(invalid_parameter("at least one iteration is required"));
    }
    if init.shape() != a.shape() {
        return Err(Error::InvalidInput(format!(
            "initial spectrogram {:?} does not match amplitude {:?}",
            init.shape(),
            a.shape()
        )));
    }
    if a.shape() != (stft.bins(), stft.frames_for(signal_length.max(1))) {
        return Err(Error::InvalidInput(format!(
            "amplitude {:?} does not fit {signal_length} samples under the STFT framing",
            a.shape()
        )));
    }
    let mut x = init;
    let mut elapsed = 0.0;
    for m in 1..=iterations {
        let start = Instant::now();
        x = update.step(&x, a, stft, signal_length)?;
        elapsed += start.elapsed().as_secs_f64();
        observe(m, &x, elapsed)?;
    }
    Ok(x)
}

/// Full run: iterate, record metrics per `cfg`, synthesize.
pub fn reconstruct<T, U>(
    update: &U,
    a: &AmplitudeSpectrogram<T>,
    stft: &Stft<T>,
    signal_length: usize,
    init: ComplexSpectrogram<T>,
    cfg: &SolverConfig,
) -> Result<(TimeSignal<T>, ReconstructionReport)>
where
    T: Real,
    U: PhaseUpdate<T> + ?Sized,
{
    cfg.validate()?;
    let mut report = ReconstructionReport::new();
    let every = cfg.record_metrics_every;
    let last = cfg.max_iterations;
    let x = iterate(update, a, stft, signal_length, init, last, |m, x, seconds| {
        if m % every == 0 || m == last {
            let (inconsistency, spectral_convergence) = state_metrics(x, a, stft, signal_length)?;
            report.push(IterationRecord { iteration: m, inconsistency, spectral_convergence, seconds })?;
        }
        Ok(())
    })?;
    Ok((synthesize(&x, a, stft, signal_length)?, report))
}
