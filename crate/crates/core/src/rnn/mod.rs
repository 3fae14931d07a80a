//! Stacked recurrent network trained with backpropagation through time and ADAM.

mod adam;
mod checkpoint;
mod config;
mod forward;
mod grad;
mod metrics;
mod params;
mod scaler;
mod train;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use config::{Activation, AdamConfig, BatchMode, RnnConfig, SecondPass};
pub use forward::{forward, predict, ForwardCache};
pub use grad::{batch_loss, bptt_grads, loss_and_grad, SequenceBatch};
pub use metrics::{mse_loss, rmse, series_rmse};
pub use params::RnnParams;
pub use scaler::ChannelScaler;
pub use train::{best_epoch, train_epochs, train_two_pass, TrainOutcome};
