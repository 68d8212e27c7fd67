//! Stacked learned Griffin-Lim blocks.
//!
//! One block maps `X` to `Z - F(X, Y, Z)` with `Y = P_A(X)` and
//! `Z = P_C(Y)`, where `F` estimates the residual separating `Z` from the
//! clean spectrogram. The same `F` is reused by every block, so the stack
//! depth is a free inference-time choice.

use crate::error::{Error, Result};
use crate::gla::momentum_residual;
use crate::projections::{project_amplitude, project_consistent};
use crate::scalar::Real;
use crate::solver::{reconstruct, PhaseUpdate, ReconstructionReport, SolverConfig};
use crate::spectrogram::{AmplitudeSpectrogram, ComplexSpectrogram, TimeSignal};
use crate::stft::Stft;

/// Residual estimator `F(X, Y, Z)` used inside every block.
pub trait Denoiser<T: Real> {
    fn residual(
        &self,
        x: &ComplexSpectrogram<T>,
        y: &ComplexSpectrogram<T>,
        z: &ComplexSpectrogram<T>,
    ) -> Result<ComplexSpectrogram<T>>;
}

impl<T: Real, D: Denoiser<T> + ?Sized> Denoiser<T> for &D {
    fn residual(
        &self,
        x: &ComplexSpectrogram<T>,
        y: &ComplexSpectrogram<T>,
        z: &ComplexSpectrogram<T>,
    ) -> Result<ComplexSpectrogram<T>> {
        (**self).residual(x, y, z)
    }
}

/// `F = 0`: the stack reduces to plain GLA.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroDenoiser;

impl<T: Real> Denoiser<T> for ZeroDenoiser {
    fn residual(
        &self,
        x: &ComplexSpectrogram<T>,
        _y: &ComplexSpectrogram<T>,
        _z: &ComplexSpectrogram<T>,
    ) -> Result<ComplexSpectrogram<T>> {
        Ok(ComplexSpectrogram::zeros(x.bins(), x.frames()))
    }
}

/// `F = gamma (X - Z)`: the stack reduces to FGLA.
#[derive(Clone, Copy, Debug)]
pub struct AffineGammaDenoiser<T> {
    pub gamma: T,
}

impl<T: Real> Denoiser<T> for AffineGammaDenoiser<T> {
    fn residual(
        &self,
        x: &ComplexSpectrogram<T>,
        _y: &ComplexSpectrogram<T>,
        z: &ComplexSpectrogram<T>,
    ) -> Result<ComplexSpectrogram<T>> {
        Ok(momentum_residual(x, z, self.gamma))
    }
}

/// Everything one block computes.
#[derive(Clone, Debug, PartialEq)]
pub struct DegliState<T> {
    pub x: ComplexSpectrogram<T>,
    /// `P_A(x)`
    pub y: ComplexSpectrogram<T>,
    /// `P_C(y)`
    pub z: ComplexSpectrogram<T>,
    /// `z - F(x, y, z)`
    pub next: ComplexSpectrogram<T>,
}

/// Applies one block to `x`, returning all intermediates.
pub fn degli_block<T: Real, D: Denoiser<T> + ?Sized>(
    x: &ComplexSpectrogram<T>,
    a: &AmplitudeSpectrogram<T>,
    stft: &Stft<T>,
    signal_length: usize,
    denoiser: &D,
) -> Result<DegliState<T>> {
    let y = project_amplitude(x, a)?;
    let z = project_consistent(&y, stft, signal_length)?;
    let r = denoiser.residual(x, &y, &z)?;
    if !r.same_shape(&z) {
        return Err(Error::ContractViolation(format!(
            "denoiser returned {:?} for input {:?}",
            r.shape(),
            z.shape()
        )));
    }
    if !r.is_finite() {
        return Err(Error::ContractViolation("denoiser returned non-finite values".into()));
    }
    let next = &z - &r;
    Ok(DegliState { x: x.clone(), y, z, next })
}

/// A block as an iteration rule, sharing one denoiser across all depths.
#[derive(Clone, Copy, Debug)]
pub struct Degli<D> {
    pub denoiser: D,
}

impl<T: Real, D: Denoiser<T>> PhaseUpdate<T> for Degli<D> {
    fn step(
        &self,
        x: &ComplexSpectrogram<T>,
        a: &AmplitudeSpectrogram<T>,
        stft: &Stft<T>,
        signal_length: usize,
    ) -> Result<ComplexSpectrogram<T>> {
        degli_block(x, a, stft, signal_length, &self.denoiser).map(|s| s.next)
    }
}

/// Stacks `cfg.max_iterations` blocks from `init` and synthesizes
/// `istft(P_A(X^[M]))`.
pub fn degli_run<T: Real, D: Denoiser<T>>(
    a: &AmplitudeSpectrogram<T>,
    stft: &Stft<T>,
    signal_length: usize,
    init: ComplexSpectrogram<T>,
    cfg: &SolverConfig,
    denoiser: D,
) -> Result<(TimeSignal<T>, ReconstructionReport)> {
    reconstruct(&Degli { denoiser }, a, stft, signal_length, init, cfg)
}
