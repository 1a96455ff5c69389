//! A desk-scale machine translation workbench.
//!
//! The crate bundles everything needed to compare phrase-based statistical
//! translation against word- and character-level neural translation on
//! corpora of simple sentences versus corpora of mixed complexity:
//!
//! * [`corpus`]: tokenization, truecasing, length cleaning, vocabularies.
//! * [`simplex`]: simple-sentence extraction from chunk-tag patterns, both
//!   with mined rules and with a small feed-forward classifier.
//! * [`lm`]: interpolated Kneser-Ney n-gram language models in ARPA format.
//! * [`smt`]: IBM Model 1 alignment, grow-diag-final symmetrization,
//!   phrase extraction and scoring, and a stack decoder.
//! * [`nmt`]: LSTM encoder/decoder models with soft attention, trained
//!   with hand-written backpropagation and RMSProp.
//! * [`metrics`]: BLEU, TER, confusion-matrix statistics and manual
//!   adequacy/fluency rating sheets.
//! * [`pipeline`]: the command implementations behind the `minimt` binary.

pub mod corpus;
pub mod error;
pub mod lm;
pub mod metrics;
pub mod nmt;
pub mod pipeline;
pub mod simplex;
pub mod smt;
pub mod synthetic;
pub mod util;

pub use error::{Error, Result};
