//! Recurrent forecasters: LSTM and bidirectional LSTM layers with a linear
//! head, trained by backpropagation through time and RMSProp.

mod cell;
mod checkpoint;
mod init;
mod model;
mod optim;
mod train;

pub use cell::{
    lstm_cell_forward, lstm_sequence_forward, sequence_forward_into, CellStep, Direction,
    LstmParams, Matrix, SequenceCache,
};
pub use checkpoint::{load_checkpoint, save_checkpoint, checkpoint_to_string, checkpoint_from_str, CHECKPOINT_VERSION};
pub use init::init_parameters;
pub use model::{
    blstm_forward, mse_loss, predict_head, Arch, DenseHead, DropoutMask, Parameters, Provenance,
    RecurrentModel, Sample, Workspace,
};
pub use optim::{OptimState, RmsProp};
pub use train::{predict_holdout, train, Hyper, TrainOutcome};
