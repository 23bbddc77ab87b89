//! The external-attention classifier.
//!
//! ```text
//! bytes ─► byte embedding + position embedding ─► dropout
//!       ─► external attention (shared memories M_K, M_V) ─► dropout
//!       ─► valid 1D conv (L kernels of width Q) ─► ReLU ─► max over positions
//!       ─► linear (no bias) ─► softmax
//! ```
//!
//! External attention scores every input row against `S` shared memory
//! rows, applies a softmax down each memory column (over the input bytes),
//! then rescales every row to sum to one before mixing the value memory.
//!
//! Bytes enter as indices into the 256-row embedding table, which is the
//! same as multiplying their one-hot vectors by the table.

use std::fs;
use std::path::Path;

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grad::{GradError, Gradients, Tape, Tensor, Var};

pub const FORMAT_NAME: &str = "hdrclass-eam";
pub const FORMAT_VERSION: u32 = 1;
const VOCAB: usize = 256;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    Config(String),
    #[error("input has {got} bytes, model expects {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("model file version {found} is not supported (expected {expected})")]
    VersionMismatch { found: String, expected: u32 },
    #[error("tensor {tensor}: shape {found:?} does not match config shape {expected:?}")]
    ShapeMismatch {
        tensor: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error(transparent)]
    Grad(#[from] GradError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Input length N in bytes.
    pub input_len: usize,
    /// Embedding width D.
    pub embed_dim: usize,
    /// External memory rows S.
    pub memory_rows: usize,
    /// Number of convolution kernels L.
    pub kernels: usize,
    /// Kernel width Q.
    pub kernel_width: usize,
    /// Number of classes T.
    pub classes: usize,
    pub dropout_p: f64,
    pub dropout_after_embedding: bool,
    pub dropout_after_attention: bool,
    /// Seed for parameter initialization.
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            input_len: 12,
            embed_dim: 32,
            memory_rows: 128,
            kernels: 64,
            kernel_width: 3,
            classes: 6,
            dropout_p: 0.1,
            dropout_after_embedding: true,
            dropout_after_attention: true,
            seed: 7,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let dims = [
            ("input_len", self.input_len),
            ("embed_dim", self.embed_dim),
            ("memory_rows", self.memory_rows),
            ("kernels", self.kernels),
            ("kernel_width", self.kernel_width),
            ("classes", self.classes),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(ModelError::Config(format!("{name} must be at least 1")));
        }
        if self.kernel_width > self.input_len {
            return Err(ModelError::Config(format!(
                "kernel width {} exceeds input length {}",
                self.kernel_width, self.input_len
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(ModelError::Config(format!("dropout {} outside [0, 1)", self.dropout_p)));
        }
        Ok(())
    }

    /// Convolution output positions per kernel.
    pub fn positions(&self) -> usize {
        self.input_len - self.kernel_width + 1
    }

    /// Expected tensor shapes, in [`ModelParams`] field order.
    pub fn shapes(&self) -> [(&'static str, Vec<usize>); 6] {
        let (n, d, s, l, q, t) = (
            self.input_len,
            self.embed_dim,
            self.memory_rows,
            self.kernels,
            self.kernel_width,
            self.classes,
        );
        [
            ("byte_embedding", vec![VOCAB, d]),
            ("position_embedding", vec![n, d]),
            ("memory_key", vec![s, d]),
            ("memory_value", vec![s, d]),
            ("kernels", vec![l, q, d]),
            ("output_weight", vec![t, l]),
        ]
    }
}

/// Every learnable tensor. There are no bias terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// 256×D
    pub byte_embedding: Tensor,
    /// N×D
    pub position_embedding: Tensor,
    /// S×D
    pub memory_key: Tensor,
    /// S×D
    pub memory_value: Tensor,
    /// L×Q×D; kernel `l` is a Q×D window laid out row-major.
    pub kernels: Tensor,
    /// T×L
    pub output_weight: Tensor,
}

impl ModelParams {
    /// Glorot-uniform initialization, deterministic in `config.seed`.
    pub fn init(config: &ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (n, d, s, l, q, t) = (
            config.input_len,
            config.embed_dim,
            config.memory_rows,
            config.kernels,
            config.kernel_width,
            config.classes,
        );
        let mut glorot = |shape: &[usize], fan_in: usize, fan_out: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            let len = shape.iter().product();
            let data = (0..len).map(|_| dist.sample(&mut rng)).collect();
            Tensor::new(shape.to_vec(), data).expect("shape and length agree")
        };
        Ok(ModelParams {
            byte_embedding: glorot(&[VOCAB, d], VOCAB, d),
            position_embedding: glorot(&[n, d], n, d),
            memory_key: glorot(&[s, d], d, s),
            memory_value: glorot(&[s, d], s, d),
            kernels: glorot(&[l, q, d], q * d, l),
            output_weight: glorot(&[t, l], l, t),
        })
    }

    pub fn tensors(&self) -> [&Tensor; 6] {
        [
            &self.byte_embedding,
            &self.position_embedding,
            &self.memory_key,
            &self.memory_value,
            &self.kernels,
            &self.output_weight,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 6] {
        [
            &mut self.byte_embedding,
            &mut self.position_embedding,
            &mut self.memory_key,
            &mut self.memory_value,
            &mut self.kernels,
            &mut self.output_weight,
        ]
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn check_shapes(&self, config: &ModelConfig) -> Result<(), ModelError> {
        for ((name, expected), t) in config.shapes().into_iter().zip(self.tensors()) {
            if t.shape() != expected.as_slice() {
                return Err(ModelError::ShapeMismatch {
                    tensor: name.to_string(),
                    expected,
                    found: t.shape().to_vec(),
                });
            }
        }
        Ok(())
    }

    /// Puts every parameter on the tape as a trainable leaf.
    pub fn register<'a>(&'a self, tape: &mut Tape<'a>) -> ParamVars {
        ParamVars {
            byte_embedding: tape.param(&self.byte_embedding),
            position_embedding: tape.param(&self.position_embedding),
            memory_key: tape.param(&self.memory_key),
            memory_value: tape.param(&self.memory_value),
            kernels: tape.param(&self.kernels),
            output_weight: tape.param(&self.output_weight),
        }
    }
}

/// Tape handles for the parameters of one forward pass.
#[derive(Debug, Clone, Copy)]
pub struct ParamVars {
    pub byte_embedding: Var,
    pub position_embedding: Var,
    pub memory_key: Var,
    pub memory_value: Var,
    pub kernels: Var,
    pub output_weight: Var,
}

impl ParamVars {
    pub fn vars(&self) -> [Var; 6] {
        [
            self.byte_embedding,
            self.position_embedding,
            self.memory_key,
            self.memory_value,
            self.kernels,
            self.output_weight,
        ]
    }

    /// Gradients in [`ModelParams::tensors`] order; parameters the loss does
    /// not touch get zeros.
    pub fn collect_grads(&self, grads: &mut Gradients, params: &ModelParams) -> [Tensor; 6] {
        let vars = self.vars();
        let tensors = params.tensors();
        std::array::from_fn(|i| {
            grads
                .take(vars[i])
                .unwrap_or_else(|| Tensor::zeros(tensors[i].shape()))
        })
    }
}

/// Byte plus position embedding for a stacked batch: `(B·N)×D`.
pub fn embed(tape: &mut Tape<'_>, pv: &ParamVars, batch: &[&[u8]]) -> Result<Var, ModelError> {
    let n = tape.value(pv.position_embedding).rows();
    let mut idx = Vec::with_capacity(batch.len() * n);
    for bytes in batch {
        if bytes.len() != n {
            return Err(ModelError::InputLength {
                expected: n,
                got: bytes.len(),
            });
        }
        idx.extend(bytes.iter().map(|&b| usize::from(b)));
    }
    let x = tape.lookup_rows(pv.byte_embedding, &idx)?;
    Ok(tape.add_tiled(x, pv.position_embedding)?)
}

/// Intermediate tape nodes of external attention.
#[derive(Debug, Clone, Copy)]
pub struct AttentionVars {
    /// Raw scores, `(B·N)×S`.
    pub scores: Var,
    /// Scores after the softmax over the N input rows of each sample.
    pub column_softmax: Var,
    /// Attention map with every row summing to one.
    pub attention: Var,
    /// `attention × M_V`, `(B·N)×D`.
    pub output: Var,
}

/// External attention for a stacked batch of samples with `block` rows each.
pub fn external_attention(
    tape: &mut Tape<'_>,
    input: Var,
    memory_key: Var,
    memory_value: Var,
    block: usize,
) -> Result<AttentionVars, ModelError> {
    let key_t = tape.transpose(memory_key)?;
    let scores = tape.matmul(input, key_t)?;
    let column_softmax = tape.softmax_cols_blocked(scores, block)?;
    let attention = tape.row_l1_normalize(column_softmax)?;
    let output = tape.matmul(attention, memory_value)?;
    Ok(AttentionVars {
        scores,
        column_softmax,
        attention,
        output,
    })
}

/// Convolution, ReLU and max-pool: returns the `B×L` feature matrix.
pub fn conv_head(
    tape: &mut Tape<'_>,
    input: Var,
    kernels: Var,
    config: &ModelConfig,
) -> Result<Var, ModelError> {
    let c = tape.conv1d_valid(input, kernels, config.input_len, config.kernel_width)?;
    let c = tape.relu(c);
    Ok(tape.max_pool_groups(c, config.positions())?)
}

/// Linear layer and softmax: returns `B×T` class probabilities.
pub fn classify(tape: &mut Tape<'_>, features: Var, output_weight: Var) -> Result<Var, ModelError> {
    let w_t = tape.transpose(output_weight)?;
    let logits = tape.matmul(features, w_t)?;
    Ok(tape.softmax_rows(logits)?)
}

/// Full forward pass over a batch. Dropout is active only when `train`.
pub fn forward<R: Rng + ?Sized>(
    tape: &mut Tape<'_>,
    pv: &ParamVars,
    config: &ModelConfig,
    batch: &[&[u8]],
    train: bool,
    rng: &mut R,
) -> Result<Var, ModelError> {
    let mut y = embed(tape, pv, batch)?;
    if config.dropout_after_embedding {
        y = tape.dropout(y, config.dropout_p, rng, train)?;
    }
    let mut y = external_attention(tape, y, pv.memory_key, pv.memory_value, config.input_len)?.output;
    if config.dropout_after_attention {
        y = tape.dropout(y, config.dropout_p, rng, train)?;
    }
    let features = conv_head(tape, y, pv.kernels, config)?;
    classify(tape, features, pv.output_weight)
}

/// Index of the largest probability; the first one wins ties.
pub fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

/// A trained (or freshly initialized) classifier with its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct EamModel {
    pub config: ModelConfig,
    pub params: ModelParams,
    pub class_names: Vec<String>,
    /// Training settings stamped into the model file.
    pub training: Option<serde_json::Value>,
}

impl EamModel {
    pub fn new(config: ModelConfig, class_names: Vec<String>) -> Result<Self, ModelError> {
        if class_names.len() != config.classes {
            return Err(ModelError::Config(format!(
                "{} class names for {} classes",
                class_names.len(),
                config.classes
            )));
        }
        let params = ModelParams::init(&config)?;
        Ok(EamModel {
            config,
            params,
            class_names,
            training: None,
        })
    }

    /// Eval-mode class probabilities for one sample.
    pub fn predict_proba(&self, bytes: &[u8]) -> Result<Vec<f64>, ModelError> {
        Ok(self.predict_proba_batch(&[bytes])?.pop().expect("one row"))
    }

    pub fn predict_proba_batch(&self, batch: &[&[u8]]) -> Result<Vec<Vec<f64>>, ModelError> {
        if batch.is_empty() {
            return Ok(Vec::new());
        }
        let mut tape = Tape::new();
        let pv = self.params.register(&mut tape);
        // eval mode never draws from the rng
        let mut rng = rand::rngs::mock::StepRng::new(0, 0);
        let probs = forward(&mut tape, &pv, &self.config, batch, false, &mut rng)?;
        let t = tape.value(probs);
        Ok((0..t.rows()).map(|r| t.row(r).to_vec()).collect())
    }

    pub fn predict(&self, bytes: &[u8]) -> Result<usize, ModelError> {
        Ok(argmax(&self.predict_proba(bytes)?))
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        let file = ModelFile {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            config: self.config.clone(),
            class_names: self.class_names.clone(),
            training: self.training.clone(),
            tensors: self
                .config
                .shapes()
                .iter()
                .zip(self.params.tensors())
                .map(|((name, _), t)| NamedTensor {
                    name: name.to_string(),
                    shape: t.shape().to_vec(),
                    values: t.data().to_vec(),
                })
                .collect(),
        };
        serde_json::to_string(&file).map_err(|e| ModelError::CorruptFile(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ModelError::CorruptFile(e.to_string()))?;
        if raw.get("format").and_then(|f| f.as_str()) != Some(FORMAT_NAME) {
            return Err(ModelError::CorruptFile("not an hdrclass model file".into()));
        }
        match raw.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(FORMAT_VERSION) => {}
            other => {
                return Err(ModelError::VersionMismatch {
                    found: other.map_or_else(|| "missing".to_string(), |v| v.to_string()),
                    expected: FORMAT_VERSION,
                })
            }
        }
        let file: ModelFile =
            serde_json::from_value(raw).map_err(|e| ModelError::CorruptFile(e.to_string()))?;
        file.config.validate()?;
        if file.class_names.len() != file.config.classes {
            return Err(ModelError::CorruptFile(format!(
                "{} class names for {} classes",
                file.class_names.len(),
                file.config.classes
            )));
        }
        let expected = file.config.shapes();
        if file.tensors.len() != expected.len() {
            return Err(ModelError::CorruptFile(format!(
                "expected {} tensors, found {}",
                expected.len(),
                file.tensors.len()
            )));
        }
        let mut tensors = Vec::with_capacity(expected.len());
        for ((name, shape), nt) in expected.into_iter().zip(file.tensors) {
            if nt.name != name {
                return Err(ModelError::CorruptFile(format!(
                    "expected tensor {name}, found {}",
                    nt.name
                )));
            }
            if nt.shape != shape {
                return Err(ModelError::ShapeMismatch {
                    tensor: name.to_string(),
                    expected: shape,
                    found: nt.shape,
                });
            }
            let t = Tensor::checked(nt.shape, nt.values)
                .map_err(|e| ModelError::CorruptFile(format!("tensor {name}: {e}")))?;
            tensors.push(t);
        }
        let mut it = tensors.into_iter();
        let mut next = || it.next().expect("six tensors");
        let params = ModelParams {
            byte_embedding: next(),
            position_embedding: next(),
            memory_key: next(),
            memory_value: next(),
            kernels: next(),
            output_weight: next(),
        };
        Ok(EamModel {
            config: file.config,
            params,
            class_names: file.class_names,
            training: file.training,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct NamedTensor {
    name: String,
    shape: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    config: ModelConfig,
    class_names: Vec<String>,
    #[serde(default)]
    training: Option<serde_json::Value>,
    tensors: Vec<NamedTensor>,
}
