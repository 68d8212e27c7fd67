//! l1 distance on the stacked real/imaginary representation.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectrogram::ComplexSpectrogram;

use super::tensor::Tensor;

#[inline]
fn sign<T: Real>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// `sum |Re(est - target)| + |Im(est - target)|` and its (sub)gradient with
/// respect to `est`; the subgradient at an exact tie is zero.
pub fn l1_loss<T: Real>(
    est: &ComplexSpectrogram<T>,
    target: &ComplexSpectrogram<T>,
) -> Result<(T, ComplexSpectrogram<T>)> {
    if !est.same_shape(target) {
        return Err(Error::InvalidInput(format!(
            "l1 loss of {:?} against {:?}",
            est.shape(),
            target.shape()
        )));
    }
    let mut grad = ComplexSpectrogram::zeros(est.bins(), est.frames());
    let mut total = T::zero();
    for ((g, e), t) in grad.data_mut().iter_mut().zip(est.data()).zip(target.data()) {
        let d = e - t;
        total = total + d.re.abs() + d.im.abs();
        g.re = sign(d.re);
        g.im = sign(d.im);
    }
    Ok((total, grad))
}

/// l1 loss between network maps restricted to the first `valid_width`
/// columns (frames). Returns the sum, the number of entries counted and
/// the subgradient with respect to `est` (zero outside the mask).
pub fn masked_l1<T: Real>(est: &Tensor<T>, target: &Tensor<T>, valid_width: usize) -> Result<(T, usize, Tensor<T>)> {
    if est.shape() != target.shape() {
        return Err(Error::InvalidInput(format!(
            "l1 loss of {:?} against {:?}",
            est.shape(),
            target.shape()
        )));
    }
    let (c, h, w) = est.shape();
    let valid = valid_width.min(w);
    let mut grad = Tensor::zeros(c, h, w);
    let mut total = T::zero();
    for y in 0..h {
        let span = (y * w * c)..((y * w + valid) * c);
        for ((g, &e), &t) in grad.data[span.clone()].iter_mut().zip(&est.data[span.clone()]).zip(&target.data[span]) {
            let d = e - t;
            total = total + d.abs();
            *g = sign(d);
        }
    }
    Ok((total, c * h * valid, grad))
}
