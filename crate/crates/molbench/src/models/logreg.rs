//! Per-task logistic regression trained by mini-batch gradient descent.

use super::{
    bce_from_logit, check_binary_labels, sigmoid, ModelError, ModelKind, ModelParams, SgdLoop,
    TrainConfig, TrainedModel,
};
use crate::linalg::{dot, Mat};
use crate::metrics::TaskKind;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Independent weight vector and bias per task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogregParams {
    /// tasks × features
    pub weights: Mat,
    pub bias: Vec<f64>,
}

impl LogregParams {
    pub fn zeros(n_tasks: usize, n_features: usize) -> Self {
        LogregParams {
            weights: Mat::zeros(n_tasks, n_features),
            bias: vec![0.0; n_tasks],
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut v = self.weights.data().to_vec();
        v.extend_from_slice(&self.bias);
        v
    }

    pub fn assign_from_flat(&mut self, theta: &[f64]) {
        let nw = self.weights.data().len();
        self.weights.data_mut().copy_from_slice(&theta[..nw]);
        self.bias.copy_from_slice(&theta[nw..]);
    }
}

/// Weighted cross-entropy (normalized by the batch weight sum) plus
/// (l2/2)·‖W‖² on the weights; returns the loss and its gradient in the
/// same parameter layout.
pub fn logreg_loss_grad(
    params: &LogregParams,
    x: &Mat,
    y: &Mat,
    w: &Mat,
    rows: &[usize],
    l2: f64,
) -> (f64, LogregParams) {
    let n_tasks = params.weights.rows();
    let mut grads = LogregParams::zeros(n_tasks, params.weights.cols());

    let mut weight_sum = 0.0;
    for &r in rows {
        for t in 0..n_tasks {
            weight_sum += w.get(r, t);
        }
    }
    let mut loss = 0.0;
    if weight_sum > 0.0 {
        for &r in rows {
            let xr = x.row(r);
            for t in 0..n_tasks {
                let wt = w.get(r, t);
                if wt == 0.0 {
                    continue;
                }
                let z = dot(params.weights.row(t), xr) + params.bias[t];
                let yv = y.get(r, t);
                loss += wt * bce_from_logit(z, yv);
                let dz = wt * (sigmoid(z) - yv) / weight_sum;
                let grow = grads.weights.row_mut(t);
                for (g, &xi) in grow.iter_mut().zip(xr) {
                    *g += dz * xi;
                }
                grads.bias[t] += dz;
            }
        }
        loss /= weight_sum;
    }
    // L2 on weights, not biases.
    let mut reg = 0.0;
    for (g, &wv) in grads
        .weights
        .data_mut()
        .iter_mut()
        .zip(params.weights.data())
    {
        reg += wv * wv;
        *g += l2 * wv;
    }
    (loss + 0.5 * l2 * reg, grads)
}

/// Train per-task logistic regressions. Deterministic given the seed.
pub fn train_logreg(
    x: &Mat,
    y: &Mat,
    w: &Mat,
    cfg: &TrainConfig,
    featurizer_id: &str,
) -> Result<TrainedModel, ModelError> {
    if x.rows() != y.rows() || y.rows() != w.rows() || y.cols() != w.cols() {
        return Err(ModelError::ShapeMismatch(format!(
            "x {}x{}, y {}x{}, w {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols(),
            w.rows(),
            w.cols()
        )));
    }
    check_binary_labels(y, w)?;
    let mut params = LogregParams::zeros(y.cols(), x.cols());
    let mut theta = params.flatten();
    let mut sgd = SgdLoop::new(theta.len(), cfg);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..x.rows()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let (_, grads) = logreg_loss_grad(&params, x, y, w, batch, cfg.l2);
            sgd.step(&mut theta, &grads.flatten());
            params.assign_from_flat(&theta);
        }
    }
    Ok(TrainedModel {
        kind: ModelKind::Logreg,
        task_kind: TaskKind::Classification,
        featurizer_id: featurizer_id.to_string(),
        config: cfg.clone(),
        params: ModelParams::Logreg(params),
        label_transform: None,
    })
}

pub(super) fn predict(params: &LogregParams, x: &Mat) -> Mat {
    let n_tasks = params.weights.rows();
    let mut out = Mat::zeros(x.rows(), n_tasks);
    for r in 0..x.rows() {
        for t in 0..n_tasks {
            let z = dot(params.weights.row(t), x.row(r)) + params.bias[t];
            out.set(r, t, sigmoid(z));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::predict as model_predict;
    use crate::models::ModelInput;

    /// Linearly separable 2D toy set.
    fn separable() -> (Mat, Mat, Mat) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..20 {
            let t = i as f64 / 19.0;
            xs.push(vec![t, 1.0 - t]);
            ys.push(vec![if t > 0.5 { 1.0 } else { 0.0 }]);
        }
        let n = xs.len();
        (
            Mat::from_rows(&xs),
            Mat::from_rows(&ys),
            Mat::from_vec(n, 1, vec![1.0; n]),
        )
    }

    #[test]
    fn separable_reaches_full_training_accuracy() {
        let (x, y, w) = separable();
        let cfg = TrainConfig {
            epochs: 200,
            learning_rate: 0.5,
            l2: 0.0,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let model = train_logreg(&x, &y, &w, &cfg, "ecfp").unwrap();
        let preds = model_predict(&model, ModelInput::Dense(&x)).unwrap();
        for r in 0..x.rows() {
            let correct = (preds.get(r, 0) > 0.5) == (y.get(r, 0) > 0.5);
            assert!(correct, "row {r}: p={} y={}", preds.get(r, 0), y.get(r, 0));
        }
    }

    #[test]
    fn stronger_l2_shrinks_weights() {
        let (x, y, w) = separable();
        let base = TrainConfig {
            epochs: 300,
            learning_rate: 0.3,
            batch_size: 20,
            ..TrainConfig::default()
        };
        let norm = |l2: f64| {
            let cfg = TrainConfig { l2, ..base.clone() };
            let model = train_logreg(&x, &y, &w, &cfg, "ecfp").unwrap();
            match model.params {
                ModelParams::Logreg(p) => {
                    p.weights.data().iter().map(|v| v * v).sum::<f64>().sqrt()
                }
                _ => unreachable!(),
            }
        };
        assert!(norm(1.0) < norm(0.0));
    }

    #[test]
    fn all_zero_features_predict_bias() {
        let x = Mat::zeros(6, 3);
        let y = Mat::from_vec(6, 1, vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let w = Mat::from_vec(6, 1, vec![1.0; 6]);
        let cfg = TrainConfig::default();
        let model = train_logreg(&x, &y, &w, &cfg, "ecfp").unwrap();
        let preds = model_predict(&model, ModelInput::Dense(&x)).unwrap();
        let first = preds.get(0, 0);
        for r in 1..6 {
            assert_eq!(preds.get(r, 0), first);
        }
        // Balanced labels keep the bias near zero -> predictions near 0.5.
        assert!((first - 0.5).abs() < 0.05);
    }

    #[test]
    fn zero_parameter_model_outputs_half() {
        let params = LogregParams::zeros(2, 4);
        let x = Mat::from_rows(&[vec![1.0, -2.0, 0.5, 3.0], vec![0.0; 4]]);
        let preds = predict(&params, &x);
        for r in 0..2 {
            for t in 0..2 {
                assert_eq!(preds.get(r, t), 0.5);
            }
        }
    }

    #[test]
    fn nonbinary_labels_rejected() {
        let x = Mat::zeros(2, 2);
        let y = Mat::from_vec(2, 1, vec![0.5, 1.0]);
        let w = Mat::from_vec(2, 1, vec![1.0, 1.0]);
        assert!(matches!(
            train_logreg(&x, &y, &w, &TrainConfig::default(), "ecfp"),
            Err(ModelError::NonBinaryLabels { row: 0, task: 0 })
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let (x, y, w) = separable();
        let cfg = TrainConfig {
            epochs: 10,
            ..TrainConfig::default()
        };
        let a = train_logreg(&x, &y, &w, &cfg, "ecfp").unwrap();
        let b = train_logreg(&x, &y, &w, &cfg, "ecfp").unwrap();
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn masked_rows_do_not_influence_training() {
        let (x, mut y, mut w) = separable();
        w.set(3, 0, 0.0);
        let cfg = TrainConfig {
            epochs: 20,
            ..TrainConfig::default()
        };
        let a = train_logreg(&x, &y, &w, &cfg, "ecfp").unwrap();
        y.set(3, 0, 1.0 - y.get(3, 0)); // flip the masked label
        let b = train_logreg(&x, &y, &w, &cfg, "ecfp").unwrap();
        assert_eq!(a.params, b.params);
    }
}
