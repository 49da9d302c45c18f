//! Convolutional estimator: network, losses, Adam and training.

pub mod adam;
pub mod checkpoint;
pub mod network;
pub mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::Checkpoint;
pub use network::{
    default_architecture, default_architecture_with_dilations, Activation, LayerSpec, ModelParams, DEFAULT_DILATIONS,
};
pub use train::{
    backward, data_loss, estimate, forward, loss_and_output_grad, loss_log_csv, total_loss, train,
    train_with_progress, EpochLog, InputTensor, LossParts, TrainConfig, TrainedModel,
};
