//! A small deterministic CPU neural-network kernel: tensors, convolution,
//! dense and pooling layers, residual multi-branch blocks, the fused
//! image + caption classifier, Adam and plateau learning-rate decay.

mod blocks;
mod checkpoint;
mod layers;
mod model;
mod optim;
mod tensor;
mod train;

use thiserror::Error;

pub use blocks::{Reduction, Residual, ResidualKind};
pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use layers::{Conv2d, ConvSpec, Dense, GlobalAvgPool, Layer, MaxPool2d, Param, ParamVisitor, Relu, Sequential};
pub use model::{bce_with_logits, sigmoid, Batch, Model, ModelConfig, MIN_IMAGE_SIDE};
pub use optim::{Adam, Plateau, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};
pub use tensor::{matmul, Scalar, Tensor};
pub use train::{
    evaluate_auc, mean_loss, predict_examples, train, EpochRecord, TrainConfig, TrainFailure, TrainOutcome,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NnError {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: Vec<usize>, found: Vec<usize> },
    #[error("invalid configuration: {0}")]
    ConfigError(String),
    #[error("non-finite loss")]
    NonFiniteLoss,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
