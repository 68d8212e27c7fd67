//! Forward STFT and its least-squares inverse.
//!
//! Frame `t` covers samples `[t * hop - (L - hop), t * hop + hop)` where `L`
//! is the window length: the first frame starts `L - hop` samples before the
//! signal so that every sample, including sample 0, is seen by the same
//! number of overlapping frames. Frames are appended until the last sample is
//! covered; samples outside `[0, len)` read as zero.
//!
//! The inverse is the Moore-Penrose pseudo-inverse of the forward map under
//! the two-sided spectral inner product (see [`crate::spectrogram`]): inverse
//! DFT per frame, synthesis with the analysis window, overlap-add, then
//! pointwise division by the accumulated squared window.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid_input, invalid_parameter, Error, Result};
use crate::scalar::Real;
use crate::spectrogram::{ComplexSpectrogram, TimeSignal};

/// Periodic Hann window `w[n] = 0.5 (1 - cos(2 pi n / L))`.
pub fn make_hann<T: Real>(window_length: usize) -> Result<Vec<T>> {
    if window_length < 2 {
        return Err(invalid_parameter(format!(
            "Hann window needs at least 2 samples, got {window_length}"
        )));
    }
    let l = T::lit(window_length as f64);
    let half = T::lit(0.5);
    Ok((0..window_length)
        .map(|n| half * (T::one() - (T::TAU() * T::lit(n as f64) / l).cos()))
        .collect())
}

/// Framing contract shared by every transform.
#[derive(Clone, Debug, PartialEq)]
pub struct StftParams<T> {
    window_length: usize,
    hop_length: usize,
    fft_size: usize,
    sample_rate: u32,
    window: Vec<T>,
}

impl<T: Real> StftParams<T> {
    pub fn new(window: Vec<T>, hop_length: usize, fft_size: usize, sample_rate: u32) -> Result<Self> {
        let window_length = window.len();
        if window_length < 2 {
            return Err(invalid_parameter("window must have at least 2 samples"));
        }
        if hop_length == 0 || hop_length > window_length {
            return Err(invalid_parameter(format!(
                "hop_length must be in 1..={window_length}, got {hop_length}"
            )));
        }
        if fft_size < window_length || fft_size % 2 != 0 {
            return Err(invalid_parameter(format!(
                "fft_size must be even and >= window_length ({window_length}), got {fft_size}"
            )));
        }
        if sample_rate == 0 {
            return Err(invalid_parameter("sample_rate must be positive"));
        }
        if window.iter().any(|w| !w.is_finite()) {
            return Err(invalid_parameter("window has non-finite values"));
        }
        // Every sample sees the window positions congruent to one residue
        // modulo hop; each residue class needs positive energy.
        for r in 0..hop_length {
            let energy: T = window.iter().skip(r).step_by(hop_length).map(|&w| w * w).sum();
            if energy <= T::zero() {
                return Err(Error::InvalidWindow(format!(
                    "squared window sums to zero at offset {r} for hop {hop_length}"
                )));
            }
        }
        Ok(Self { window_length, hop_length, fft_size, sample_rate, window })
    }

    /// Periodic Hann analysis window with `fft_size = window_length`.
    pub fn hann(window_length: usize, hop_length: usize, sample_rate: u32) -> Result<Self> {
        Self::new(make_hann(window_length)?, hop_length, window_length, sample_rate)
    }

    /// Hann framing from durations in milliseconds.
    pub fn from_durations(sample_rate: u32, window_ms: f64, hop_ms: f64) -> Result<Self> {
        let to_samples = |ms: f64| (ms * sample_rate as f64 / 1000.0).round() as usize;
        Self::hann(to_samples(window_ms), to_samples(hop_ms), sample_rate)
    }

    /// 64 ms Hann window with 32 ms hop at 16 kHz (1024 / 512 samples).
    pub fn speech_default() -> Self {
        Self::hann(1024, 512, 16_000).expect("default framing is valid")
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn hop_length(&self) -> usize {
        self.hop_length
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn window(&self) -> &[T] {
        &self.window
    }

    pub fn bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Samples of look-behind before the first frame.
    pub fn lead_in(&self) -> usize {
        self.window_length - self.hop_length
    }

    /// Number of frames needed to cover a signal of `len >= 1` samples.
    pub fn frames_for(&self, len: usize) -> usize {
        assert!(len > 0, "frames_for needs a non-empty signal");
        (len - 1 + self.lead_in()) / self.hop_length + 1
    }

    /// First sample index (possibly negative) of frame `t`.
    pub fn frame_start(&self, t: usize) -> isize {
        (t * self.hop_length) as isize - self.lead_in() as isize
    }
}

/// STFT engine: parameters plus cached FFT plans.
#[derive(Clone)]
pub struct Stft<T: Real> {
    params: StftParams<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Stft<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stft").field("params", &self.params).finish_non_exhaustive()
    }
}

impl<T: Real> Stft<T> {
    pub fn new(params: StftParams<T>) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(params.fft_size);
        let inverse = planner.plan_fft_inverse(params.fft_size);
        Self { params, forward, inverse }
    }

    pub fn params(&self) -> &StftParams<T> {
        &self.params
    }

    pub fn bins(&self) -> usize {
        self.params.bins()
    }

    pub fn frames_for(&self, len: usize) -> usize {
        self.params.frames_for(len)
    }

    /// Forward transform `G` of a real signal.
    pub fn forward(&self, x: &[T]) -> Result<ComplexSpectrogram<T>> {
        if x.is_empty() {
            return Err(invalid_input("cannot transform an empty signal"));
        }
        let p = &self.params;
        let n_fft = p.fft_size;
        let bins = p.bins();
        let frames = p.frames_for(x.len());
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; n_fft];
        let mut scratch = vec![zero; self.forward.get_inplace_scratch_len()];
        let mut data = Vec::with_capacity(bins * frames);
        for t in 0..frames {
            let start = p.frame_start(t);
            buf.fill(zero);
            for (pos, (&w, slot)) in p.window.iter().zip(buf.iter_mut()).enumerate() {
                let n = start + pos as isize;
                if n >= 0 && (n as usize) < x.len() {
                    slot.re = w * x[n as usize];
                }
            }
            self.forward.process_with_scratch(&mut buf, &mut scratch);
            data.extend_from_slice(&buf[..bins]);
        }
        Ok(ComplexSpectrogram::from_raw(bins, frames, data))
    }

    /// Convenience wrapper over [`Stft::forward`].
    pub fn stft(&self, x: &TimeSignal<T>) -> Result<ComplexSpectrogram<T>> {
        self.forward(x.samples())
    }

    /// Least-squares inverse `G^+`, returning exactly `out_length` samples.
    pub fn inverse(&self, s: &ComplexSpectrogram<T>, out_length: usize) -> Result<TimeSignal<T>> {
        let (mut y, norm) = self.overlap_add(s, out_length)?;
        for (n, (v, &d)) in y.iter_mut().zip(&norm).enumerate() {
            if d <= T::zero() {
                return Err(Error::InvalidWindow(format!("zero window energy at sample {n}")));
            }
            *v = *v / d;
        }
        Ok(TimeSignal::from_raw(y, self.params.sample_rate))
    }

    /// Adjoint `G^*` under the two-sided spectral inner product, so that
    /// `<G x, S> = <x, G^* S>`.
    pub fn adjoint(&self, s: &ComplexSpectrogram<T>, out_length: usize) -> Result<Vec<T>> {
        let (mut y, _) = self.overlap_add(s, out_length)?;
        let n_fft = T::lit(self.params.fft_size as f64);
        for v in &mut y {
            *v = *v * n_fft;
        }
        Ok(y)
    }

    /// Windowed overlap-add of the per-frame inverse DFTs (normalized by
    /// `1/N`), together with the accumulated squared window.
    fn overlap_add(&self, s: &ComplexSpectrogram<T>, out_length: usize) -> Result<(Vec<T>, Vec<T>)> {
        let p = &self.params;
        if out_length == 0 {
            return Err(invalid_input("output length must be positive"));
        }
        s.check_shape(p.bins(), p.frames_for(out_length), "istft input")?;
        let n_fft = p.fft_size;
        let bins = p.bins();
        let inv_n = T::one() / T::lit(n_fft as f64);
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; n_fft];
        let mut scratch = vec![zero; self.inverse.get_inplace_scratch_len()];
        let mut y = vec![T::zero(); out_length];
        let mut norm = vec![T::zero(); out_length];
        for t in 0..s.frames() {
            let frame = s.frame(t);
            buf[..bins].copy_from_slice(frame);
            for k in bins..n_fft {
                buf[k] = frame[n_fft - k].conj();
            }
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            let start = p.frame_start(t);
            for (pos, &w) in p.window.iter().enumerate() {
                let n = start + pos as isize;
                if n >= 0 && (n as usize) < out_length {
                    let n = n as usize;
                    y[n] = y[n] + w * buf[pos].re * inv_n;
                    norm[n] = norm[n] + w * w;
                }
            }
        }
        Ok((y, norm))
    }
}
