//! From-scratch trainable models: logistic regression, RBF kernel ridge
//! regression, influence relevance voting, multitask/bypass dense networks
//! and a minimal graph convolutional network.
//!
//! Training is plain mini-batch gradient descent with optional momentum,
//! single-threaded and bit-deterministic given (data, config, seed). Every
//! gradient-trained model exposes its loss-and-gradient function plus flat
//! parameter accessors so finite-difference checks can probe it directly.

mod dense;
mod graphconv;
mod irv;
mod krr;
mod logreg;

pub use dense::{dense_loss_grad, train_multitask_nn, DenseParams, Layer};
pub use graphconv::{graphconv_loss_grad, train_graphconv, GraphConvParams};
pub use irv::{irv_loss_grad, top_k_neighbors, train_irv, IrvNet, IrvParams};
pub use krr::{train_krr, KrrParams};
pub use logreg::{logreg_loss_grad, train_logreg, LogregParams};

use crate::data::ZScore;
use crate::featurize::AtomGraphFeatures;
use crate::linalg::Mat;
use crate::metrics::TaskKind;
use crate::stablehash::{tag, StableHasher};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("labels must be 0/1 where weighted (row {row}, task {task})")]
    NonBinaryLabels { row: usize, task: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("kernel matrix is singular (duplicate rows with zero penalty?)")]
    SingularKernel,
    #[error("KRR capped at {max} rows, got {n}; raise max_train_rows explicitly")]
    TooManyRows { n: usize, max: usize },
    #[error("K = {k} too large for {n_train} training rows (need K ≤ n_train − 1)")]
    KTooLarge { k: usize, n_train: usize },
    #[error("molecule {0} has no atoms")]
    EmptyGraph(usize),
    #[error("model expects {expected} input, got {got}")]
    FeaturizerMismatch {
        expected: &'static str,
        got: &'static str,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("bad model file: {0}")]
    BadModelFile(String),
}

/// Hyperparameters shared across model families. Every model reads the
/// fields it understands and ignores the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// L2 strength, applied to weight matrices (not biases) at each step.
    pub l2: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Shared-stack widths for the dense networks; conv widths for the GC.
    pub layer_sizes: Vec<usize>,
    /// Per-task bypass path widths (bypass networks only).
    pub bypass_layer_sizes: Vec<usize>,
    /// Fully-connected width after the conv stack (graph conv only).
    pub graph_dense_size: usize,
    pub init_std: f64,
    pub bias_init: f64,
    pub momentum: f64,
    /// IRV neighbor count.
    pub k_neighbors: usize,
    /// IRV relevance-network hidden width.
    pub irv_hidden: usize,
    /// KRR ridge penalty λ in (K + λ·n·I).
    pub krr_penalty: f64,
    /// RBF kernel width γ in exp(−γ‖x−x'‖²).
    pub krr_gamma: f64,
    /// Hard cap for the dense KRR solve.
    pub max_train_rows: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            l2: 1e-4,
            batch_size: 32,
            epochs: 60,
            seed: 0,
            layer_sizes: vec![64],
            bypass_layer_sizes: vec![8],
            graph_dense_size: 64,
            init_std: 0.05,
            bias_init: 0.0,
            momentum: 0.9,
            k_neighbors: 5,
            irv_hidden: 8,
            krr_penalty: 1e-3,
            krr_gamma: 0.05,
            max_train_rows: 20_000,
        }
    }
}

impl TrainConfig {
    pub fn config_hash(&self) -> u64 {
        let mut h = StableHasher::new(tag::CONFIG);
        h.write_f64(self.learning_rate);
        h.write_f64(self.l2);
        h.write_u64(self.batch_size as u64);
        h.write_u64(self.epochs as u64);
        h.write_u64(self.seed);
        for &s in &self.layer_sizes {
            h.write_u64(s as u64);
        }
        h.write_byte(0xfe);
        for &s in &self.bypass_layer_sizes {
            h.write_u64(s as u64);
        }
        h.write_u64(self.graph_dense_size as u64);
        h.write_f64(self.init_std);
        h.write_f64(self.bias_init);
        h.write_f64(self.momentum);
        h.write_u64(self.k_neighbors as u64);
        h.write_u64(self.irv_hidden as u64);
        h.write_f64(self.krr_penalty);
        h.write_f64(self.krr_gamma);
        h.write_u64(self.max_train_rows as u64);
        h.finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logreg,
    Krr,
    Irv,
    Multitask,
    Bypass,
    GraphConv,
}

impl ModelKind {
    pub fn expected_input(self) -> &'static str {
        match self {
            ModelKind::Logreg | ModelKind::Krr | ModelKind::Multitask | ModelKind::Bypass => {
                "dense"
            }
            ModelKind::Irv => "fingerprints",
            ModelKind::GraphConv => "graphs",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelKind::Logreg => "logreg",
            ModelKind::Krr => "krr",
            ModelKind::Irv => "irv",
            ModelKind::Multitask => "multitask",
            ModelKind::Bypass => "bypass",
            ModelKind::GraphConv => "graphconv",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    Logreg(LogregParams),
    Krr(KrrParams),
    Irv(IrvParams),
    Dense(DenseParams),
    GraphConv(GraphConvParams),
}

/// A trained model with everything needed to reload and predict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub task_kind: TaskKind,
    pub featurizer_id: String,
    pub config: TrainConfig,
    pub params: ModelParams,
    /// Regression label transform; predictions are mapped back through its
    /// inverse.
    pub label_transform: Option<ZScore>,
}

/// Model inputs at prediction time.
pub enum ModelInput<'a> {
    Dense(&'a Mat),
    Fingerprints(&'a [crate::featurize::Fingerprint]),
    Graphs(&'a [AtomGraphFeatures]),
}

impl ModelInput<'_> {
    fn name(&self) -> &'static str {
        match self {
            ModelInput::Dense(_) => "dense",
            ModelInput::Fingerprints(_) => "fingerprints",
            ModelInput::Graphs(_) => "graphs",
        }
    }
}

/// Score inputs with a trained model. Classification returns probabilities
/// in [0,1]; regression returns label-transform-inverted values.
pub fn predict(model: &TrainedModel, input: ModelInput<'_>) -> Result<Mat, ModelError> {
    let raw = match (&model.params, &input) {
        (ModelParams::Logreg(p), ModelInput::Dense(x)) => logreg::predict(p, x),
        (ModelParams::Krr(p), ModelInput::Dense(x)) => krr::predict(p, x),
        (ModelParams::Irv(p), ModelInput::Fingerprints(f)) => irv::predict(p, f)?,
        (ModelParams::Dense(p), ModelInput::Dense(x)) => dense::predict(p, x)?,
        (ModelParams::GraphConv(p), ModelInput::Graphs(g)) => graphconv::predict(p, g)?,
        _ => {
            return Err(ModelError::FeaturizerMismatch {
                expected: model.kind.expected_input(),
                got: input.name(),
            })
        }
    };
    Ok(match (&model.label_transform, model.task_kind) {
        (Some(z), TaskKind::Regression) => z.invert(&raw),
        _ => raw,
    })
}

const MODEL_MAGIC: &[u8; 4] = b"MBMD";
const MODEL_VERSION: u32 = 1;

/// Header of the versioned model container.
#[derive(Debug, Serialize, Deserialize)]
struct ModelHeader {
    kind: ModelKind,
    config_hash: u64,
    featurizer_id: String,
}

/// Write the binary/JSON hybrid container: magic, version, length-prefixed
/// JSON header (kind, config hash, featurizer id), length-prefixed JSON
/// payload (the full model).
pub fn save_model(model: &TrainedModel, path: &Path) -> Result<(), ModelError> {
    let header = serde_json::to_vec(&ModelHeader {
        kind: model.kind,
        config_hash: model.config.config_hash(),
        featurizer_id: model.featurizer_id.clone(),
    })?;
    let payload = serde_json::to_vec(model)?;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MODEL_MAGIC)?;
    w.write_all(&MODEL_VERSION.to_le_bytes())?;
    w.write_all(&(header.len() as u32).to_le_bytes())?;
    w.write_all(&header)?;
    w.write_all(&(payload.len() as u64).to_le_bytes())?;
    w.write_all(&payload)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<TrainedModel, ModelError> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MODEL_MAGIC {
        return Err(ModelError::BadModelFile("bad magic".into()));
    }
    let mut buf4 = [0u8; 4];
    r.read_exact(&mut buf4)?;
    let version = u32::from_le_bytes(buf4);
    if version != MODEL_VERSION {
        return Err(ModelError::BadModelFile(format!(
            "unsupported version {version}"
        )));
    }
    r.read_exact(&mut buf4)?;
    let header_len = u32::from_le_bytes(buf4) as usize;
    let mut header = vec![0u8; header_len];
    r.read_exact(&mut header)?;
    let header: ModelHeader = serde_json::from_slice(&header)?;
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8)?;
    let payload_len = u64::from_le_bytes(buf8) as usize;
    let mut payload = vec![0u8; payload_len];
    r.read_exact(&mut payload)?;
    let model: TrainedModel = serde_json::from_slice(&payload)?;
    if model.config.config_hash() != header.config_hash {
        return Err(ModelError::BadModelFile("config hash mismatch".into()));
    }
    Ok(model)
}

/// Numerically stable binary cross-entropy from the logit:
/// max(z,0) − z·y + ln(1 + e^(−|z|)).
#[inline]
pub(crate) fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mini-batch SGD with momentum over flat parameter vectors.
pub(crate) struct SgdLoop {
    pub velocity: Vec<f64>,
    pub learning_rate: f64,
    pub momentum: f64,
}

impl SgdLoop {
    pub fn new(n_params: usize, cfg: &TrainConfig) -> Self {
        SgdLoop {
            velocity: vec![0.0; n_params],
            learning_rate: cfg.learning_rate,
            momentum: cfg.momentum,
        }
    }

    pub fn step(&mut self, theta: &mut [f64], grad: &[f64]) {
        for i in 0..theta.len() {
            self.velocity[i] = self.momentum * self.velocity[i] - self.learning_rate * grad[i];
            theta[i] += self.velocity[i];
        }
    }
}

/// Validate classification labels: 0/1 wherever weighted.
pub(crate) fn check_binary_labels(y: &Mat, w: &Mat) -> Result<(), ModelError> {
    for r in 0..y.rows() {
        for t in 0..y.cols() {
            let v = y.get(r, t);
            if w.get(r, t) > 0.0 && v != 0.0 && v != 1.0 {
                return Err(ModelError::NonBinaryLabels { row: r, task: t });
            }
        }
    }
    Ok(())
}

/// Finite-difference helpers shared by the gradient-check tests.
pub mod check {
    /// Central difference of `f` along coordinate `idx` at `theta`.
    pub fn central_difference<F: FnMut(&[f64]) -> f64>(
        mut f: F,
        theta: &[f64],
        idx: usize,
        h: f64,
    ) -> f64 {
        let mut plus = theta.to_vec();
        plus[idx] += h;
        let mut minus = theta.to_vec();
        minus[idx] -= h;
        (f(&plus) - f(&minus)) / (2.0 * h)
    }

    /// |a − b| / max(|a|, |b|, 1e-6).
    pub fn relative_error(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
    }
}
