//! Structured prediction by anytime search over complete outputs.
//!
//! A recurrent classifier trained by exact imitation defines a search space
//! over full label sequences (either the Flipbit space or the
//! limited-discrepancy space). A linear cost function, trained from pairwise
//! ranking decisions recorded while imitating loss-guided search, guides
//! greedy or best-first beam search at prediction time; the least-cost output
//! uncovered so far can be returned at any point.

pub mod classifier;
pub mod costlearn;
pub mod data;
pub mod features;
pub mod io;
pub mod loss;
pub mod model;
pub mod pipeline;
pub mod search;
pub mod spaces;
pub mod synth;

pub use data::{Dataset, Label, LabelAlphabet, ObservationVector, SequenceExample};
pub use features::{FeatureInterner, NamedVector, SparseVector};
pub use model::{LinearModel, ModelKind};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("model/config mismatch: {0}")]
    ModelMismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
