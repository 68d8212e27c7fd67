//! Griffin-Lim baselines: plain alternating projections and the momentum
//! variant.

use crate::error::{invalid_parameter, Result};
use crate::projections::{project_amplitude, project_consistent};
use crate::scalar::Real;
use crate::solver::{reconstruct, PhaseUpdate, ReconstructionReport, SolverConfig};
use crate::spectrogram::{AmplitudeSpectrogram, ComplexSpectrogram, TimeSignal};
use crate::stft::Stft;

/// `P_C(P_A(X))`.
pub fn gla_step<T: Real>(
    x: &ComplexSpectrogram<T>,
    a: &AmplitudeSpectrogram<T>,
    stft: &Stft<T>,
    signal_length: usize,
) -> Result<ComplexSpectrogram<T>> {
    let y = project_amplitude(x, a)?;
    project_consistent(&y, stft, signal_length)
}

/// Momentum step `Z - gamma (X - Z)` with `Z = P_C(P_A(X))`.
///
/// Returns `(next X, Z)`.
pub fn fgla_step<T: Real>(
    x: &ComplexSpectrogram<T>,
    a: &AmplitudeSpectrogram<T>,
    stft: &Stft<T>,
    signal_length: usize,
    gamma: T,
) -> Result<(ComplexSpectrogram<T>, ComplexSpectrogram<T>)> {
    if !(gamma > T::zero() && gamma < T::one()) {
        return Err(invalid_parameter(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let z = gla_step(x, a, stft, signal_length)?;
    let next = &z - &momentum_residual(x, &z, gamma);
    Ok((next, z))
}

/// `gamma (X - Z)`, the residual FGLA subtracts from `Z`.
pub(crate) fn momentum_residual<T: Real>(
    x: &ComplexSpectrogram<T>,
    z: &ComplexSpectrogram<T>,
    gamma: T,
) -> ComplexSpectrogram<T> {
    (x - z).scale(gamma)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Gla;

impl<T: Real> PhaseUpdate<T> for Gla {
    fn step(
        &self,
        x: &ComplexSpectrogram<T>,
        a: &AmplitudeSpectrogram<T>,
        stft: &Stft<T>,
        signal_length: usize,
    ) -> Result<ComplexSpectrogram<T>> {
        gla_step(x, a, stft, signal_length)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Fgla<T> {
    pub gamma: T,
}

impl<T: Real> PhaseUpdate<T> for Fgla<T> {
    fn step(
        &self,
        x: &ComplexSpectrogram<T>,
        a: &AmplitudeSpectrogram<T>,
        stft: &Stft<T>,
        signal_length: usize,
    ) -> Result<ComplexSpectrogram<T>> {
        fgla_step(x, a, stft, signal_length, self.gamma).map(|(next, _)| next)
    }
}

/// `cfg.max_iterations` GLA iterations from `init`, then `istft(P_A(X))`.
pub fn gla_run<T: Real>(
    a: &AmplitudeSpectrogram<T>,
    stft: &Stft<T>,
    signal_length: usize,
    init: ComplexSpectrogram<T>,
    cfg: &SolverConfig,
) -> Result<(TimeSignal<T>, ReconstructionReport)> {
    reconstruct(&Gla, a, stft, signal_length, init, cfg)
}

/// FGLA with momentum `cfg.gamma`.
pub fn fgla_run<T: Real>(
    a: &AmplitudeSpectrogram<T>,
    stft: &Stft<T>,
    signal_length: usize,
    init: ComplexSpectrogram<T>,
    cfg: &SolverConfig,
) -> Result<(TimeSignal<T>, ReconstructionReport)> {
    let update = Fgla { gamma: T::from_f64_lossy(cfg.gamma) };
    reconstruct(&update, a, stft, signal_length, init, cfg)
}
