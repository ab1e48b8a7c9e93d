//! Convolutional network engine: tensors, layer kernels with hand-written
//! backward passes, softmax cross-entropy, momentum SGD, training,
//! checkpoints and a finite-difference gradient checker.

mod checkpoint;
mod config;
mod gradcheck;
pub mod layers;
pub mod loss;
mod model;
mod optim;
mod tensor;
mod train;

pub use self::checkpoint::{Checkpoint, EpochStats, MAGIC as CHECKPOINT_MAGIC};
pub use self::config::{LayerSpec, ModelConfig, ParamShape};
pub use self::gradcheck::{gradient_check, gradient_check_with_fault, GradientFault};
pub use self::loss::{cross_entropy, softmax};
pub use self::model::{
    argmax, backward, forward, init_parameters, loss_and_gradients, predict, zero_grads, Trace,
};
pub use self::optim::sgd_step;
pub use self::tensor::Tensor;
pub use self::train::{evaluate, train, Sample, TrainConfig};
