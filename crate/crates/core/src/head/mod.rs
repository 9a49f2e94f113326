//! Text-conditioned scale/shift head: architecture, objective, optimizer and
//! training loop.

pub mod loss;
pub mod mlp;
pub mod optim;
pub mod train;

pub use loss::{alignment_loss, masked_l1_loss, AlignmentLoss};
pub use mlp::{
    accumulate_gradient, forward, forward_generic, loss_and_gradient, predict, Aggregation, Linear, MlpConfig,
    MlpParameters, Scalar, TextEmbedding,
};
pub use optim::{adam_step, adam_update, cosine_lr, AdamConfig, AdamState};
pub use train::{initial_parameters, sample_caption, train, EpochRecord, TrainConfig, TrainOutcome, TrainingSample};
