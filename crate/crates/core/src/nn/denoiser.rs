//! Adapter running the network as the residual estimator of a block.

use crate::degli::Denoiser;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectrogram::ComplexSpectrogram;
use crate::Complex;

use super::model::{DenoiserModel, INPUT_CHANNELS, OUTPUT_CHANNELS};
use super::tensor::Tensor;

/// Weighted RMS of `|y|`; network inputs and outputs are measured in this
/// unit, which makes the estimator positively homogeneous.
pub fn feature_scale<T: Real>(y: &ComplexSpectrogram<T>) -> T {
    let count = T::lit((2 * y.bins() - 2).max(1) as f64 * y.frames() as f64);
    (y.norm_sqr() / count).sqrt()
}

/// Stacks `Re X, Im X, Re Y, Im Y, Re Z, Im Z` (each divided by `scale`)
/// into a `6 x bins x frames` map.
pub fn pack_features<T: Real>(
    x: &ComplexSpectrogram<T>,
    y: &ComplexSpectrogram<T>,
    z: &ComplexSpectrogram<T>,
    scale: T,
) -> Result<Tensor<T>> {
    if !x.same_shape(y) || !x.same_shape(z) {
        return Err(Error::InvalidInput(format!(
            "denoiser inputs have shapes {:?}, {:?}, {:?}",
            x.shape(),
            y.shape(),
            z.shape()
        )));
    }
    let (bins, frames) = x.shape();
    let inv = T::one() / scale;
    let mut t = Tensor::zeros(INPUT_CHANNELS, bins, frames);
    for k in 0..bins {
        for f in 0..frames {
            let px = &mut t.data[(k * frames + f) * INPUT_CHANNELS..][..INPUT_CHANNELS];
            for (j, s) in [x, y, z].into_iter().enumerate() {
                let v = s.get(k, f);
                px[2 * j] = v.re * inv;
                px[2 * j + 1] = v.im * inv;
            }
        }
    }
    Ok(t)
}

/// `2 x bins x frames` map of `Re, Im` of `r / scale`.
pub fn pack_residual<T: Real>(r: &ComplexSpectrogram<T>, scale: T) -> Tensor<T> {
    let (bins, frames) = r.shape();
    let inv = T::one() / scale;
    let mut t = Tensor::zeros(OUTPUT_CHANNELS, bins, frames);
    for k in 0..bins {
        for f in 0..frames {
            let v = r.get(k, f);
            t.data[(k * frames + f) * 2] = v.re * inv;
            t.data[(k * frames + f) * 2 + 1] = v.im * inv;
        }
    }
    t
}

/// Inverse of [`pack_residual`].
pub fn unpack_residual<T: Real>(t: &Tensor<T>, scale: T) -> Result<ComplexSpectrogram<T>> {
    if t.channels != OUTPUT_CHANNELS {
        return Err(Error::ContractViolation(format!(
            "network emitted {} channels, expected {OUTPUT_CHANNELS}",
            t.channels
        )));
    }
    let (bins, frames) = (t.height, t.width);
    let mut r = ComplexSpectrogram::zeros(bins, frames);
    for k in 0..bins {
        for f in 0..frames {
            let re = t.data[(k * frames + f) * 2] * scale;
            let im = t.data[(k * frames + f) * 2 + 1] * scale;
            r.set(k, f, Complex::new(re, im));
        }
    }
    Ok(r)
}

/// The trained network as `F(X, Y, Z) = s * net((X, Y, Z) / s)` with
/// `s = feature_scale(Y)`; zero when `Y` is silent.
#[derive(Clone, Debug, PartialEq)]
pub struct NeuralDenoiser<T> {
    model: DenoiserModel<T>,
}

impl<T: Real> NeuralDenoiser<T> {
    pub fn new(model: DenoiserModel<T>) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &DenoiserModel<T> {
        &self.model
    }

    pub fn into_model(self) -> DenoiserModel<T> {
        self.model
    }
}

impl<T: Real> Denoiser<T> for NeuralDenoiser<T> {
    fn residual(
        &self,
        x: &ComplexSpectrogram<T>,
        y: &ComplexSpectrogram<T>,
        z: &ComplexSpectrogram<T>,
    ) -> Result<ComplexSpectrogram<T>> {
        let s = feature_scale(y);
        if s == T::zero() {
            pack_features(x, y, z, T::one())?;
            return Ok(ComplexSpectrogram::zeros(x.bins(), x.frames()));
        }
        let input = pack_features(x, y, z, s)?;
        let out = self.model.forward(&input)?;
        unpack_residual(&out, s)
    }
}
