//! Federated averaging with a softmax-regression model and pluggable
//! aggregation channels.

mod data;
mod federated;
mod model;

pub use data::{
    load_mnist_idx, parse_idx_header, partition, read_idx_images, read_idx_labels, synth_gaussian_mixture, IdxHeader,
    LabeledDataset, PartitionMode, PartitionSpec, Provenance, Shard,
};
pub use federated::{federated_train, local_sgd_stream, Aggregation, FederatedSetup, RoundRecord, TrainConfig, TrainTrace};
pub use model::{global_average, global_loss, local_loss, local_sgd, ModelParams, SoftmaxRegression};
