//! Small dense network with a hazard head or a median-survival classification
//! head.
//!
//! Hazard mode trains on the Cox partial likelihood with risk sets formed
//! inside each minibatch, so it needs at least two subjects per batch.
//! Classification mode trains on censoring-weighted binary cross-entropy
//! and works with any batch size, including one.

mod checkpoint;
mod features;
mod loss;
mod net;
mod train;

pub use checkpoint::{config_hash, load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use features::{extract_features, learned_feature_names, FeatureBundle, LayerSelector};
pub use loss::{
    bce_batch_gradients, bce_batch_loss, cox_batch_gradients, cox_batch_loss, weighted_bce, CoxBatchLoss,
};
pub use net::{Activation, Dense, DenseNet, ForwardPass, Gradients, Head};
pub use train::{train, train_classifier, EpochRecord, TrainConfig, TrainHistory, ValidationMetric};
