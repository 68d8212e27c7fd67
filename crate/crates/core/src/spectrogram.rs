//! Time-frequency containers: complex and amplitude spectrograms plus the
//! real time-domain signal they come from.
//!
//! Spectrograms are one-sided (`bins = fft_size / 2 + 1`) and stored
//! frame-major: entry `(k, t)` lives at `t * bins + k`.
//!
//! Norms and inner products are those of the full two-sided spectrum the
//! one-sided grid stands for. Interior bins appear twice in that spectrum
//! (once as their conjugate mirror) and therefore carry weight 2, while the
//! DC and Nyquist bins carry weight 1. Under this metric the consistency
//! projection is orthogonal, which is what makes the alternating projections
//! in [`crate::gla`] a true descent method.

use std::ops::{Add, Sub};

use num_complex::Complex;

use crate::error::{invalid_input, Result};
use crate::scalar::Real;

/// Multiplicity of one-sided bin `k` in the two-sided spectrum.
#[inline]
pub fn bin_weight<T: Real>(k: usize, bins: usize) -> T {
    if k == 0 || k + 1 == bins {
        T::one()
    } else {
        T::lit(2.0)
    }
}

/// Complex STFT-domain grid: the state `X`, `Y`, `Z` of every solver.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSpectrogram<T> {
    bins: usize,
    frames: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexSpectrogram<T> {
    pub fn zeros(bins: usize, frames: usize) -> Self {
        Self { bins, frames, data: vec![Complex::new(T::zero(), T::zero()); bins * frames] }
    }

    /// Wraps frame-major data, rejecting wrong lengths and non-finite entries.
    pub fn from_vec(bins: usize, frames: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if bins == 0 || frames == 0 {
            return Err(invalid_input("spectrogram must have at least one bin and frame"));
        }
        if data.len() != bins * frames {
            return Err(invalid_input(format!(
                "expected {} entries for {bins}x{frames}, got {}",
                bins * frames,
                data.len()
            )));
        }
        if data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(invalid_input("spectrogram contains non-finite entries"));
        }
        Ok(Self { bins, frames, data })
    }

    /// Zero-phase lift of an amplitude grid.
    pub fn from_amplitude(a: &AmplitudeSpectrogram<T>) -> Self {
        Self {
            bins: a.bins,
            frames: a.frames,
            data: a.data.iter().map(|&v| Complex::new(v, T::zero())).collect(),
        }
    }

    pub(crate) fn from_raw(bins: usize, frames: usize, data: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(data.len(), bins * frames);
        Self { bins, frames, data }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.bins, self.frames)
    }

    pub fn get(&self, k: usize, t: usize) -> Complex<T> {
        self.data[t * self.bins + k]
    }

    pub fn set(&mut self, k: usize, t: usize, v: Complex<T>) {
        self.data[t * self.bins + k] = v;
    }

    pub fn frame(&self, t: usize) -> &[Complex<T>] {
        &self.data[t * self.bins..(t + 1) * self.bins]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [Complex<T>] {
        &mut self.data[t * self.bins..(t + 1) * self.bins]
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn same_shape<U>(&self, other: &ComplexSpectrogram<U>) -> bool {
        self.bins == other.bins && self.frames == other.frames
    }

    pub(crate) fn check_shape(&self, bins: usize, frames: usize, what: &str) -> Result<()> {
        if self.shape() != (bins, frames) {
            return Err(invalid_input(format!(
                "{what}: shape {}x{} does not match {bins}x{frames}",
                self.bins, self.frames
            )));
        }
        Ok(())
    }

    /// Real inner product `Re <self, other>` of the two-sided spectra.
    pub fn inner(&self, other: &Self) -> T {
        assert!(self.same_shape(other), "inner product of mismatched spectrograms");
        let mut acc = T::zero();
        for (fa, fb) in self.data.chunks(self.bins).zip(other.data.chunks(self.bins)) {
            for (k, (a, b)) in fa.iter().zip(fb).enumerate() {
                acc = acc + bin_weight::<T>(k, self.bins) * (a.re * b.re + a.im * b.im);
            }
        }
        acc
    }

    /// Squared Frobenius norm of the two-sided spectrum.
    pub fn norm_sqr(&self) -> T {
        let mut acc = T::zero();
        for frame in self.data.chunks(self.bins) {
            for (k, c) in frame.iter().enumerate() {
                acc = acc + bin_weight::<T>(k, self.bins) * c.norm_sqr();
            }
        }
        acc
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// `||self - other||^2` without materializing the difference.
    pub fn distance_sqr(&self, other: &Self) -> T {
        assert!(self.same_shape(other), "distance between mismatched spectrograms");
        let mut acc = T::zero();
        for (fa, fb) in self.data.chunks(self.bins).zip(other.data.chunks(self.bins)) {
            for (k, (a, b)) in fa.iter().zip(fb).enumerate() {
                acc = acc + bin_weight::<T>(k, self.bins) * (*a - *b).norm_sqr();
            }
        }
        acc
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_raw(self.bins, self.frames, self.data.iter().map(|c| c.scale(s)).collect())
    }

    pub fn amplitude(&self) -> AmplitudeSpectrogram<T> {
        AmplitudeSpectrogram {
            bins: self.bins,
            frames: self.frames,
            data: self.data.iter().map(|c| c.norm()).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexSpectrogram<T> {
    type Output = ComplexSpectrogram<T>;

    fn sub(self, rhs: Self) -> ComplexSpectrogram<T> {
        assert!(self.same_shape(rhs), "subtracting mismatched spectrograms");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect();
        ComplexSpectrogram::from_raw(self.bins, self.frames, data)
    }
}

impl<T: Real> Add for &ComplexSpectrogram<T> {
    type Output = ComplexSpectrogram<T>;

    fn add(self, rhs: Self) -> ComplexSpectrogram<T> {
        assert!(self.same_shape(rhs), "adding mismatched spectrograms");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect();
        ComplexSpectrogram::from_raw(self.bins, self.frames, data)
    }
}

/// Non-negative target magnitudes `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeSpectrogram<T> {
    bins: usize,
    frames: usize,
    data: Vec<T>,
}

impl<T: Real> AmplitudeSpectrogram<T> {
    pub fn from_vec(bins: usize, frames: usize, data: Vec<T>) -> Result<Self> {
        if bins == 0 || frames == 0 {
            return Err(invalid_input("amplitude grid must have at least one bin and frame"));
        }
        if data.len() != bins * frames {
            return Err(invalid_input(format!(
                "expected {} amplitudes for {bins}x{frames}, got {}",
                bins * frames,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(invalid_input("amplitudes must be finite and non-negative"));
        }
        Ok(Self { bins, frames, data })
    }

    pub fn zeros(bins: usize, frames: usize) -> Self {
        Self { bins, frames, data: vec![T::zero(); bins * frames] }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.bins, self.frames)
    }

    pub fn get(&self, k: usize, t: usize) -> T {
        self.data[t * self.bins + k]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn norm_sqr(&self) -> T {
        let mut acc = T::zero();
        for frame in self.data.chunks(self.bins) {
            for (k, &v) in frame.iter().enumerate() {
                acc = acc + bin_weight::<T>(k, self.bins) * v * v;
            }
        }
        acc
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Weighted root-mean-square entry, the scale used to normalize
    /// network inputs.
    pub fn rms(&self) -> T {
        let count = T::lit((2 * self.bins - 2).max(1) as f64 * self.frames as f64);
        (self.norm_sqr() / count).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        assert!(s >= T::zero(), "amplitudes scale by a non-negative factor");
        Self { bins: self.bins, frames: self.frames, data: self.data.iter().map(|&v| v * s).collect() }
    }
}

/// Real-valued signal at a fixed sample rate.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSignal<T> {
    samples: Vec<T>,
    sample_rate: u32,
}

impl<T: Real> TimeSignal<T> {
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Result<Self> {
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(invalid_input("signal contains non-finite samples"));
        }
        Ok(Self { samples, sample_rate })
    }

    pub(crate) fn from_raw(samples: Vec<T>, sample_rate: u32) -> Self {
        Self { samples, sample_rate }
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> T {
        self.samples.iter().map(|&v| v * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_count_mirrored_bins_twice() {
        assert_eq!(bin_weight::<f64>(0, 5), 1.0);
        assert_eq!(bin_weight::<f64>(1, 5), 2.0);
        assert_eq!(bin_weight::<f64>(4, 5), 1.0);
    }

    #[test]
    fn norm_is_two_sided() {
        // bins = 3 <=> fft_size = 4: spectrum [a, b, c, conj(b)].
        let s = ComplexSpectrogram::from_vec(
            3,
            1,
            vec![Complex::new(1.0, 0.0), Complex::new(3.0, 4.0), Complex::new(2.0, 0.0)],
        )
        .unwrap();
        assert_eq!(s.norm_sqr(), 1.0 + 2.0 * 25.0 + 4.0);
        assert_eq!(s.inner(&s), s.norm_sqr());
        assert_eq!(s.distance_sqr(&ComplexSpectrogram::zeros(3, 1)), s.norm_sqr());
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(ComplexSpectrogram::<f64>::from_vec(2, 2, vec![Complex::new(0.0, 0.0); 3]).is_err());
        assert!(ComplexSpectrogram::from_vec(1, 1, vec![Complex::new(f64::NAN, 0.0)]).is_err());
        assert!(AmplitudeSpectrogram::from_vec(1, 1, vec![-1.0f64]).is_err());
        assert!(TimeSignal::new(vec![f64::INFINITY], 16000).is_err());
    }

    #[test]
    fn zero_phase_lift_keeps_amplitude() {
        let a = AmplitudeSpectrogram::from_vec(2, 2, vec![1.0, 2.0, 0.0, 3.5]).unwrap();
        let x = ComplexSpectrogram::from_amplitude(&a);
        assert_eq!(x.amplitude(), a);
        assert!(x.data().iter().all(|c| c.im == 0.0));
    }
}
