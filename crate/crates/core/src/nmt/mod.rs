//! Neural translation: LSTM encoder-decoder models with optional
//! attention, trained by backpropagation through time.

pub mod attention;
pub mod checkpoint;
pub mod gradcheck;
pub mod lstm;
pub mod model;
pub mod tensor;
pub mod train;

pub use attention::{attend, AttentionParams};
pub use gradcheck::{grad_check, grad_check_with, GradCheckReport, DEFAULT_EPS};
pub use lstm::{LstmParams, LstmState};
pub use model::{nll_loss, Example, ExampleStats, ModelDims, ModelKind, Params, Seq2SeqModel};
pub use train::{
    clip_global_norm, examples_for, exact_match_rate, next_token_accuracy, train_char_nmt, train_model, train_nmt,
    train_word_nmt, EpochStats, Optimizer, RmsProp, TrainConfig, TrainOutcome,
};
