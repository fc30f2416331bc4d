//! Residual convolutional networks built from scratch: layers, training,
//! parameter and FLOP accounting, checkpoints.

pub mod arch;
pub mod checkpoint;
pub mod layers;
pub mod layout;
pub mod loss;
pub mod network;
pub mod optim;
pub mod tensor;
pub mod train;

pub use arch::{ArchitectureVariant, Dimensionality, ReportedSize};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointMeta, Precision};
pub use layers::Mode;
pub use layout::{input_shape, layout_2d, network_input, stack_real_imag_1d};
pub use loss::{loss_bce, sigmoid};
pub use network::{build_network, Network, Tape};
pub use optim::{Adam, AdamConfig};
pub use tensor::{Activations, Tensor};
pub use train::{
    infer_in_chunks, train, Batch, BatchSource, EpochRecord, InMemorySource, TrainConfig,
    TrainOutcome, TrainProgress, Trainer, ValidationSet,
};
