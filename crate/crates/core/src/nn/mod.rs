//! Trainable residual estimator for the denoising blocks: a small
//! convolutional network with gated linear units, its reverse-mode
//! gradients, the Adam optimizer and the residual training loop.

pub mod adam;
pub mod checkpoint;
mod conv;
pub mod denoiser;
pub mod loss;
pub mod model;
pub mod tensor;
pub mod train;

pub use adam::Adam;
pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use denoiser::{feature_scale, pack_features, pack_residual, unpack_residual, NeuralDenoiser};
pub use loss::{l1_loss, masked_l1};
pub use model::{
    Activation, Architecture, DenoiserModel, ForwardCache, Gradients, LayerSpec, Skip, INPUT_CHANNELS,
    OUTPUT_CHANNELS,
};
pub use tensor::Tensor;
pub use train::{
    add_noise, batch_loss, prepare_example, train, train_step, validation_losses, EpochRecord, PlateauSchedule, ResidualExample, Segment,
    TrainConfig,
    TrainSample, TrainingLog,
};
