//! A small reverse-mode differentiation engine.
//!
//! Only the operations the classifier needs are provided: matrix product,
//! additions, row lookup, softmax along either axis, row normalization,
//! ReLU, valid 1D convolution, grouped max-pool, dropout and cross-entropy.
//! Everything runs in `f64`.

mod tape;
mod tensor;

pub use tape::{Gradients, Tape, Var, PROB_FLOOR};
pub use tensor::Tensor;


use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GradError {
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("row index {index} out of range for table with {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },
    #[error("dropout probability {0} outside [0, 1)")]
    BadProbability(f64),
    #[error("backward needs a scalar, got shape {0:?}")]
    NotScalar(Vec<usize>),
    #[error("graph already consumed by an earlier backward pass")]
    GraphConsumed,
}
