//! Phase reconstruction from amplitude spectrograms.
//!
//! The building blocks are an STFT with an exact least-squares inverse, the
//! two metric projections built on it (consistency and amplitude), the
//! Griffin-Lim family of alternating-projection solvers, and a stack of
//! learned denoising blocks that reuse one trainable convolutional network at
//! every depth.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the double-precision types used by the tools.

pub mod degli;
pub mod error;
pub mod gla;
pub mod metrics;
pub mod nn;
pub mod projections;
pub mod scalar;
pub mod solver;
pub mod spectrogram;
pub mod stft;

pub use degli::{degli_block, degli_run, AffineGammaDenoiser, Degli, DegliState, Denoiser, ZeroDenoiser};
pub use error::{Error, Result};
pub use gla::{fgla_run, fgla_step, gla_run, gla_step, Fgla, Gla};
pub use metrics::{
    evaluate_methods, spectral_convergence, spectral_convergence_of, waveform_snr, EvalRecord, EvalResult,
    Method,
};
pub use nn::{
    read_checkpoint, train, write_checkpoint, Architecture, DenoiserModel, NeuralDenoiser, Segment, TrainConfig,
    TrainingLog,
};
pub use projections::{inconsistency_energy, project_amplitude, project_consistent};
pub use scalar::Real;
pub use solver::{
    iterate, reconstruct, IterationRecord, PhaseInit, PhaseUpdate, ReconstructionReport, SolverConfig,
};
pub use spectrogram::{AmplitudeSpectrogram, ComplexSpectrogram, TimeSignal};
pub use stft::{make_hann, Stft, StftParams};

pub use num_complex::Complex;

pub type Spectrogram = ComplexSpectrogram<f64>;
pub type Amplitude = AmplitudeSpectrogram<f64>;
pub type Signal = TimeSignal<f64>;
pub type Params = StftParams<f64>;
pub type Engine = Stft<f64>;
pub type Model = DenoiserModel<f64>;

pub type Spectrogram32 = ComplexSpectrogram<f32>;
pub type Amplitude32 = AmplitudeSpectrogram<f32>;
pub type Signal32 = TimeSignal<f32>;
