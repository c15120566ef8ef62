//! Multitask fully-connected networks with optional per-task bypass paths,
//! trained by manual backpropagation.

use super::{
    bce_from_logit, check_binary_labels, sigmoid, ModelError, ModelKind, ModelParams, SgdLoop,
    TrainConfig, TrainedModel,
};
use crate::linalg::{dot, Mat};
use crate::metrics::TaskKind;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

/// One fully-connected layer: out × in weights plus a bias per output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub w: Mat,
    pub b: Vec<f64>,
}

impl Layer {
    pub fn zeros(out: usize, input: usize) -> Layer {
        Layer {
            w: Mat::zeros(out, input),
            b: vec![0.0; out],
        }
    }

    pub fn out_dim(&self) -> usize {
        self.b.len()
    }

    fn preactivation(&self, x: &[f64]) -> Vec<f64> {
        (0..self.out_dim())
            .map(|o| dot(self.w.row(o), x) + self.b[o])
            .collect()
    }
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

/// Per-task independent input→hidden→output path whose output adds to the
/// shared head pre-activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BypassPath {
    pub layers: Vec<Layer>,
    pub head_w: Vec<f64>,
    pub head_b: f64,
}

/// Shared stack → per-task linear heads, with optional bypass paths
/// (realizing n_tasks + 1 independent components). Inputs are standardized
/// with training-set statistics in place of batch normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    pub shared: Vec<Layer>,
    /// tasks × last-hidden
    pub head_w: Mat,
    pub head_b: Vec<f64>,
    pub bypass: Option<Vec<BypassPath>>,
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    pub kind: TaskKind,
}

impl DenseParams {
    fn zeros_like(other: &DenseParams) -> DenseParams {
        DenseParams {
            shared: other
                .shared
                .iter()
                .map(|l| Layer::zeros(l.w.rows(), l.w.cols()))
                .collect(),
            head_w: Mat::zeros(other.head_w.rows(), other.head_w.cols()),
            head_b: vec![0.0; other.head_b.len()],
            bypass: other.bypass.as_ref().map(|paths| {
                paths
                    .iter()
                    .map(|p| BypassPath {
                        layers: p
                            .layers
                            .iter()
                            .map(|l| Layer::zeros(l.w.rows(), l.w.cols()))
                            .collect(),
                        head_w: vec![0.0; p.head_w.len()],
                        head_b: 0.0,
                    })
                    .collect()
            }),
            input_mean: vec![0.0; other.input_mean.len()],
            input_std: vec![0.0; other.input_std.len()],
            kind: other.kind,
        }
    }

    /// Trainable parameters in a fixed order (input statistics excluded).
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for l in &self.shared {
            v.extend_from_slice(l.w.data());
            v.extend_from_slice(&l.b);
        }
        v.extend_from_slice(self.head_w.data());
        v.extend_from_slice(&self.head_b);
        if let Some(paths) = &self.bypass {
            for p in paths {
                for l in &p.layers {
                    v.extend_from_slice(l.w.data());
                    v.extend_from_slice(&l.b);
                }
                v.extend_from_slice(&p.head_w);
                v.push(p.head_b);
            }
        }
        v
    }

    pub fn assign_from_flat(&mut self, theta: &[f64]) {
        let mut pos = 0;
        let mut take = |n: usize| {
            let s = &theta[pos..pos + n];
            pos += n;
            s
        };
        for l in &mut self.shared {
            let n = l.w.data().len();
            l.w.data_mut().copy_from_slice(take(n));
            let n = l.b.len();
            l.b.copy_from_slice(take(n));
        }
        let n = self.head_w.data().len();
        self.head_w.data_mut().copy_from_slice(take(n));
        let n = self.head_b.len();
        self.head_b.copy_from_slice(take(n));
        if let Some(paths) = &mut self.bypass {
            for p in paths {
                for l in &mut p.layers {
                    let n = l.w.data().len();
                    l.w.data_mut().copy_from_slice(take(n));
                    let n = l.b.len();
                    l.b.copy_from_slice(take(n));
                }
                let n = p.head_w.len();
                p.head_w.copy_from_slice(take(n));
                p.head_b = take(1)[0];
            }
        }
        debug_assert_eq!(pos, theta.len());
    }

    fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.input_mean)
            .zip(&self.input_std)
            .map(|((&v, &m), &s)| (v - m) / s)
            .collect()
    }

    /// Task logits for one input row, keeping every activation for backprop.
    fn forward(&self, x: &[f64]) -> DenseForward {
        let x0 = self.standardize(x);
        let mut activations = vec![x0.clone()];
        for layer in &self.shared {
            let z = layer.preactivation(activations.last().unwrap());
            activations.push(relu(&z));
        }
        let last = activations.last().unwrap();
        let n_tasks = self.head_b.len();
        let mut logits: Vec<f64> = (0..n_tasks)
            .map(|t| dot(self.head_w.row(t), last) + self.head_b[t])
            .collect();
        let mut bypass_acts = Vec::new();
        if let Some(paths) = &self.bypass {
            for (t, path) in paths.iter().enumerate() {
                let mut acts = vec![x0.clone()];
                for layer in &path.layers {
                    let z = layer.preactivation(acts.last().unwrap());
                    acts.push(relu(&z));
                }
                logits[t] += dot(&path.head_w, acts.last().unwrap()) + path.head_b;
                bypass_acts.push(acts);
            }
        }
        DenseForward {
            activations,
            bypass_acts,
            logits,
        }
    }
}

struct DenseForward {
    /// activations[0] is the standardized input.
    activations: Vec<Vec<f64>>,
    bypass_acts: Vec<Vec<Vec<f64>>>,
    logits: Vec<f64>,
}

/// Backprop a linear stack given the gradient at its output activation.
/// ReLU masks use the stored (post-activation) values.
fn backprop_stack(
    layers: &[Layer],
    grads: &mut [Layer],
    activations: &[Vec<f64>],
    mut d_out: Vec<f64>,
) {
    for (li, layer) in layers.iter().enumerate().rev() {
        let a_out = &activations[li + 1];
        let a_in = &activations[li];
        // d pre-activation: ReLU derivative is 1 where output > 0.
        let dz: Vec<f64> = d_out
            .iter()
            .zip(a_out)
            .map(|(&d, &a)| if a > 0.0 { d } else { 0.0 })
            .collect();
        let g = &mut grads[li];
        for (o, &dzo) in dz.iter().enumerate() {
            if dzo != 0.0 {
                let row = g.w.row_mut(o);
                for (gi, &ai) in row.iter_mut().zip(a_in) {
                    *gi += dzo * ai;
                }
                g.b[o] += dzo;
            }
        }
        let mut d_in = vec![0.0; a_in.len()];
        for (o, &dzo) in dz.iter().enumerate() {
            if dzo != 0.0 {
                for (i, di) in d_in.iter_mut().enumerate() {
                    *di += layer.w.get(o, i) * dzo;
                }
            }
        }
        d_out = d_in;
    }
}

/// Weighted loss over `rows` (cross-entropy for classification, half
/// squared error for regression), normalized by the batch weight sum, plus
/// (l2/2) on all weight matrices.
pub fn dense_loss_grad(
    params: &DenseParams,
    x: &Mat,
    y: &Mat,
    w: &Mat,
    rows: &[usize],
    l2: f64,
) -> (f64, DenseParams) {
    let n_tasks = params.head_b.len();
    let mut grads = DenseParams::zeros_like(params);

    let mut weight_sum = 0.0;
    for &r in rows {
        for t in 0..n_tasks {
            weight_sum += w.get(r, t);
        }
    }
    let mut loss = 0.0;
    if weight_sum > 0.0 {
        for &r in rows {
            let fwd = params.forward(x.row(r));
            let last = fwd.activations.last().unwrap();
            let mut d_last = vec![0.0; last.len()];
            for t in 0..n_tasks {
                let wt = w.get(r, t);
                if wt == 0.0 {
                    continue;
                }
                let yv = y.get(r, t);
                let z = fwd.logits[t];
                let dlogit = match params.kind {
                    TaskKind::Classification => {
                        loss += wt * bce_from_logit(z, yv);
                        wt * (sigmoid(z) - yv) / weight_sum
                    }
                    TaskKind::Regression => {
                        loss += wt * 0.5 * (z - yv) * (z - yv);
                        wt * (z - yv) / weight_sum
                    }
                };
                // Shared head.
                let grow = grads.head_w.row_mut(t);
                for (g, &a) in grow.iter_mut().zip(last) {
                    *g += dlogit * a;
                }
                grads.head_b[t] += dlogit;
                for (d, &hw) in d_last.iter_mut().zip(params.head_w.row(t)) {
                    *d += dlogit * hw;
                }
                // Bypass path for this task.
                if let (Some(paths), Some(gpaths)) = (&params.bypass, &mut grads.bypass) {
                    let path = &paths[t];
                    let acts = &fwd.bypass_acts[t];
                    let blast = acts.last().unwrap();
                    let gp = &mut gpaths[t];
                    for (g, &a) in gp.head_w.iter_mut().zip(blast) {
                        *g += dlogit * a;
                    }
                    gp.head_b += dlogit;
                    let d_bl: Vec<f64> = path.head_w.iter().map(|&hw| dlogit * hw).collect();
                    backprop_stack(&path.layers, &mut gp.layers, acts, d_bl);
                }
            }
            backprop_stack(
                &params.shared,
                &mut grads.shared,
                &fwd.activations,
                d_last,
            );
        }
        loss /= weight_sum;
    }

    // L2 on weight matrices only.
    let mut reg = 0.0;
    for (gl, pl) in grads.shared.iter_mut().zip(&params.shared) {
        for (g, &wv) in gl.w.data_mut().iter_mut().zip(pl.w.data()) {
            reg += wv * wv;
            *g += l2 * wv;
        }
    }
    for (g, &wv) in grads
        .head_w
        .data_mut()
        .iter_mut()
        .zip(params.head_w.data())
    {
        reg += wv * wv;
        *g += l2 * wv;
    }
    if let (Some(gpaths), Some(paths)) = (&mut grads.bypass, &params.bypass) {
        for (gp, p) in gpaths.iter_mut().zip(paths) {
            for (gl, pl) in gp.layers.iter_mut().zip(&p.layers) {
                for (g, &wv) in gl.w.data_mut().iter_mut().zip(pl.w.data()) {
                    reg += wv * wv;
                    *g += l2 * wv;
                }
            }
            for (g, &wv) in gp.head_w.iter_mut().zip(&p.head_w) {
                reg += wv * wv;
                *g += l2 * wv;
            }
        }
    }
    (loss + 0.5 * l2 * reg, grads)
}

fn init_layer(
    out: usize,
    input: usize,
    std: f64,
    bias: f64,
    rng: &mut ChaCha20Rng,
) -> Layer {
    let normal = rand_distr::Normal::new(0.0, std).expect("init std");
    let data: Vec<f64> = (0..out * input).map(|_| normal.sample(rng)).collect();
    Layer {
        w: Mat::from_vec(out, input, data),
        b: vec![bias; out],
    }
}

/// Train a multitask (or, with `bypass`, a bypass multitask) network. With
/// a single task this reduces to a plain fully-connected network.
pub fn train_multitask_nn(
    x: &Mat,
    y: &Mat,
    w: &Mat,
    cfg: &TrainConfig,
    bypass: bool,
    kind: TaskKind,
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
    if kind == TaskKind::Classification {
        check_binary_labels(y, w)?;
    }
    let n_tasks = y.cols();
    let (input_mean, input_std) = x.column_mean_std();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);

    let mut shared = Vec::new();
    let mut in_dim = x.cols();
    for &width in &cfg.layer_sizes {
        shared.push(init_layer(width, in_dim, cfg.init_std, cfg.bias_init, &mut rng));
        in_dim = width;
    }
    let head_w = {
        let normal = rand_distr::Normal::new(0.0, cfg.init_std).expect("init std");
        let data: Vec<f64> = (0..n_tasks * in_dim).map(|_| normal.sample(&mut rng)).collect();
        Mat::from_vec(n_tasks, in_dim, data)
    };
    let bypass_paths = if bypass {
        let mut paths = Vec::with_capacity(n_tasks);
        for _ in 0..n_tasks {
            let mut layers = Vec::new();
            let mut dim = x.cols();
            for &width in &cfg.bypass_layer_sizes {
                layers.push(init_layer(width, dim, cfg.init_std, cfg.bias_init, &mut rng));
                dim = width;
            }
            let normal = rand_distr::Normal::new(0.0, cfg.init_std).expect("init std");
            let head_w: Vec<f64> = (0..dim).map(|_| normal.sample(&mut rng)).collect();
            paths.push(BypassPath {
                layers,
                head_w,
                head_b: cfg.bias_init,
            });
        }
        Some(paths)
    } else {
        None
    };

    let mut params = DenseParams {
        shared,
        head_w,
        head_b: vec![cfg.bias_init; n_tasks],
        bypass: bypass_paths,
        input_mean,
        input_std,
        kind,
    };

    let mut theta = params.flatten();
    let mut sgd = SgdLoop::new(theta.len(), cfg);
    let mut order: Vec<usize> = (0..x.rows()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let (_, grads) = dense_loss_grad(&params, x, y, w, batch, cfg.l2);
            sgd.step(&mut theta, &grads.flatten());
            params.assign_from_flat(&theta);
        }
    }
    Ok(TrainedModel {
        kind: if bypass {
            ModelKind::Bypass
        } else {
            ModelKind::Multitask
        },
        task_kind: kind,
        featurizer_id: featurizer_id.to_string(),
        config: cfg.clone(),
        params: ModelParams::Dense(params),
        label_transform: None,
    })
}

pub(super) fn predict(params: &DenseParams, x: &Mat) -> Result<Mat, ModelError> {
    if x.cols() != params.input_mean.len() {
        return Err(ModelError::ShapeMismatch(format!(
            "model expects {} features, got {}",
            params.input_mean.len(),
            x.cols()
        )));
    }
    let n_tasks = params.head_b.len();
    let mut out = Mat::zeros(x.rows(), n_tasks);
    for r in 0..x.rows() {
        let fwd = params.forward(x.row(r));
        for t in 0..n_tasks {
            let v = match params.kind {
                TaskKind::Classification => sigmoid(fwd.logits[t]),
                TaskKind::Regression => fwd.logits[t],
            };
            out.set(r, t, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{predict as model_predict, ModelInput};

    fn xor_like() -> (Mat, Mat, Mat) {
        // Not linearly separable; a hidden layer is required.
        let x = Mat::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ]);
        let y = Mat::from_vec(4, 1, vec![0.0, 1.0, 1.0, 0.0]);
        let w = Mat::from_vec(4, 1, vec![1.0; 4]);
        (x, y, w)
    }

    #[test]
    fn single_task_reduces_to_singletask_network() {
        let (x, y, w) = xor_like();
        let cfg = TrainConfig {
            layer_sizes: vec![8],
            epochs: 800,
            learning_rate: 0.5,
            l2: 0.0,
            batch_size: 4,
            seed: 3,
            ..TrainConfig::default()
        };
        let model =
            train_multitask_nn(&x, &y, &w, &cfg, false, TaskKind::Classification, "ecfp").unwrap();
        let preds = model_predict(&model, ModelInput::Dense(&x)).unwrap();
        for r in 0..4 {
            assert_eq!(
                preds.get(r, 0) > 0.5,
                y.get(r, 0) > 0.5,
                "row {r}: {}",
                preds.get(r, 0)
            );
        }
    }

    #[test]
    fn masked_labels_leave_parameters_bit_identical() {
        let (x, mut y, mut w) = xor_like();
        w.set(2, 0, 0.0);
        let cfg = TrainConfig {
            epochs: 30,
            ..TrainConfig::default()
        };
        let a = train_multitask_nn(&x, &y, &w, &cfg, true, TaskKind::Classification, "ecfp")
            .unwrap();
        y.set(2, 0, 1.0 - y.get(2, 0));
        let b = train_multitask_nn(&x, &y, &w, &cfg, true, TaskKind::Classification, "ecfp")
            .unwrap();
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn bypass_adds_per_task_parameters() {
        let (x, y, w) = xor_like();
        let cfg = TrainConfig {
            epochs: 1,
            ..TrainConfig::default()
        };
        let plain =
            train_multitask_nn(&x, &y, &w, &cfg, false, TaskKind::Classification, "ecfp").unwrap();
        let bypass =
            train_multitask_nn(&x, &y, &w, &cfg, true, TaskKind::Classification, "ecfp").unwrap();
        let count = |m: &TrainedModel| match &m.params {
            ModelParams::Dense(p) => p.flatten().len(),
            _ => unreachable!(),
        };
        assert!(count(&bypass) > count(&plain));
    }

    #[test]
    fn regression_mode_fits_linear_target() {
        let xs: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 40.0]).collect();
        let ys: Vec<Vec<f64>> = xs.iter().map(|v| vec![2.0 * v[0] - 0.5]).collect();
        let x = Mat::from_rows(&xs);
        let y = Mat::from_rows(&ys);
        let w = Mat::from_vec(40, 1, vec![1.0; 40]);
        let cfg = TrainConfig {
            layer_sizes: vec![8],
            epochs: 400,
            learning_rate: 0.05,
            l2: 0.0,
            batch_size: 8,
            ..TrainConfig::default()
        };
        let model =
            train_multitask_nn(&x, &y, &w, &cfg, false, TaskKind::Regression, "ecfp").unwrap();
        let preds = model_predict(&model, ModelInput::Dense(&x)).unwrap();
        let mut mse = 0.0;
        for r in 0..40 {
            let d = preds.get(r, 0) - y.get(r, 0);
            mse += d * d;
        }
        mse /= 40.0;
        assert!(mse < 0.01, "mse = {mse}");
    }

    #[test]
    fn shape_mismatch_rejected() {
        let x = Mat::zeros(3, 2);
        let y = Mat::zeros(4, 1);
        let w = Mat::zeros(4, 1);
        assert!(matches!(
            train_multitask_nn(
                &x,
                &y,
                &w,
                &TrainConfig::default(),
                false,
                TaskKind::Classification,
                "ecfp"
            ),
            Err(ModelError::ShapeMismatch(_))
        ));
    }
}
