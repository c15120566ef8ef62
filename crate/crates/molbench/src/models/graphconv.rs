//! Minimal graph convolutional network: shared-weight convolutions over
//! atom neighborhoods, a neighborhood max-pool after each convolution,
//! sum readout and a dense head. Manual backpropagation throughout.

use super::{
    bce_from_logit, check_binary_labels, sigmoid, Layer, ModelError, ModelKind, ModelParams,
    SgdLoop, TrainConfig, TrainedModel,
};
use crate::featurize::AtomGraphFeatures;
use crate::linalg::{dot, Mat};
use crate::metrics::TaskKind;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

/// One graph convolution: h_i' = ReLU(W_self·h_i + W_nbr·Σ_{j∈N(i)} h_j + b),
/// weights shared across atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvLayer {
    pub w_self: Mat,
    pub w_nbr: Mat,
    pub b: Vec<f64>,
}

impl ConvLayer {
    fn zeros(out: usize, input: usize) -> ConvLayer {
        ConvLayer {
            w_self: Mat::zeros(out, input),
            w_nbr: Mat::zeros(out, input),
            b: vec![0.0; out],
        }
    }

    fn out_dim(&self) -> usize {
        self.b.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphConvParams {
    pub convs: Vec<ConvLayer>,
    pub dense: Layer,
    /// tasks × dense width
    pub head_w: Mat,
    pub head_b: Vec<f64>,
    /// Fixed input standardization in place of batch normalization.
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    pub kind: TaskKind,
}

impl GraphConvParams {
    fn zeros_like(other: &GraphConvParams) -> GraphConvParams {
        GraphConvParams {
            convs: other
                .convs
                .iter()
                .map(|c| ConvLayer::zeros(c.w_self.rows(), c.w_self.cols()))
                .collect(),
            dense: Layer::zeros(other.dense.w.rows(), other.dense.w.cols()),
            head_w: Mat::zeros(other.head_w.rows(), other.head_w.cols()),
            head_b: vec![0.0; other.head_b.len()],
            input_mean: vec![0.0; other.input_mean.len()],
            input_std: vec![0.0; other.input_std.len()],
            kind: other.kind,
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for c in &self.convs {
            v.extend_from_slice(c.w_self.data());
            v.extend_from_slice(c.w_nbr.data());
            v.extend_from_slice(&c.b);
        }
        v.extend_from_slice(self.dense.w.data());
        v.extend_from_slice(&self.dense.b);
        v.extend_from_slice(self.head_w.data());
        v.extend_from_slice(&self.head_b);
        v
    }

    pub fn assign_from_flat(&mut self, theta: &[f64]) {
        let mut pos = 0;
        let mut take = |n: usize| {
            let s = &theta[pos..pos + n];
            pos += n;
            s
        };
        for c in &mut self.convs {
            let n = c.w_self.data().len();
            c.w_self.data_mut().copy_from_slice(take(n));
            let n = c.w_nbr.data().len();
            c.w_nbr.data_mut().copy_from_slice(take(n));
            let n = c.b.len();
            c.b.copy_from_slice(take(n));
        }
        let n = self.dense.w.data().len();
        self.dense.w.data_mut().copy_from_slice(take(n));
        let n = self.dense.b.len();
        self.dense.b.copy_from_slice(take(n));
        let n = self.head_w.data().len();
        self.head_w.data_mut().copy_from_slice(take(n));
        let n = self.head_b.len();
        self.head_b.copy_from_slice(take(n));
        debug_assert_eq!(pos, theta.len());
    }
}

/// Everything the backward pass needs from one molecule's forward pass.
struct GraphForward {
    /// Input to each conv layer (index 0 = standardized atom features).
    layer_inputs: Vec<Vec<Vec<f64>>>,
    /// Post-ReLU, pre-pool activations per layer.
    zs: Vec<Vec<Vec<f64>>>,
    /// Pool provenance: which atom supplied each pooled channel.
    pool_src: Vec<Vec<Vec<usize>>>,
    readout: Vec<f64>,
    dense_act: Vec<f64>,
    logits: Vec<f64>,
}

fn forward(params: &GraphConvParams, graph: &AtomGraphFeatures) -> GraphForward {
    let n = graph.num_atoms();
    let mut h: Vec<Vec<f64>> = graph
        .features
        .iter()
        .map(|row| {
            row.iter()
                .zip(&params.input_mean)
                .zip(&params.input_std)
                .map(|((&v, &m), &s)| (v - m) / s)
                .collect()
        })
        .collect();

    let mut layer_inputs = Vec::with_capacity(params.convs.len());
    let mut zs = Vec::with_capacity(params.convs.len());
    let mut pool_src = Vec::with_capacity(params.convs.len());
    for conv in &params.convs {
        let width = conv.out_dim();
        let mut z = vec![vec![0.0; width]; n];
        for i in 0..n {
            let mut nbr_sum = vec![0.0; h[i].len()];
            for &j in &graph.neighbors[i] {
                for (s, &v) in nbr_sum.iter_mut().zip(&h[j]) {
                    *s += v;
                }
            }
            for o in 0..width {
                let pre =
                    dot(conv.w_self.row(o), &h[i]) + dot(conv.w_nbr.row(o), &nbr_sum) + conv.b[o];
                z[i][o] = pre.max(0.0);
            }
        }
        // Neighborhood max-pool over {i} ∪ N(i); first maximum wins.
        let mut pooled = vec![vec![0.0; width]; n];
        let mut src = vec![vec![0usize; width]; n];
        for i in 0..n {
            for c in 0..width {
                let mut best = z[i][c];
                let mut best_at = i;
                for &j in &graph.neighbors[i] {
                    if z[j][c] > best {
                        best = z[j][c];
                        best_at = j;
                    }
                }
                pooled[i][c] = best;
                src[i][c] = best_at;
            }
        }
        layer_inputs.push(h);
        zs.push(z);
        pool_src.push(src);
        h = pooled;
    }

    let width = h.first().map_or(0, |r| r.len());
    let mut readout = vec![0.0; width];
    for row in &h {
        for (g, &v) in readout.iter_mut().zip(row) {
            *g += v;
        }
    }
    let dense_pre = (0..params.dense.out_dim())
        .map(|o| dot(params.dense.w.row(o), &readout) + params.dense.b[o]);
    let dense_act: Vec<f64> = dense_pre.map(|p| p.max(0.0)).collect();
    let logits = (0..params.head_b.len())
        .map(|t| dot(params.head_w.row(t), &dense_act) + params.head_b[t])
        .collect();
    GraphForward {
        layer_inputs,
        zs,
        pool_src,
        readout,
        dense_act,
        logits,
    }
}

/// Weighted loss over the molecules in `rows`, normalized by the batch
/// weight sum, plus (l2/2) on all weight matrices.
pub fn graphconv_loss_grad(
    params: &GraphConvParams,
    graphs: &[AtomGraphFeatures],
    y: &Mat,
    w: &Mat,
    rows: &[usize],
    l2: f64,
) -> (f64, GraphConvParams) {
    let n_tasks = params.head_b.len();
    let mut grads = GraphConvParams::zeros_like(params);

    let mut weight_sum = 0.0;
    for &r in rows {
        for t in 0..n_tasks {
            weight_sum += w.get(r, t);
        }
    }
    let mut loss = 0.0;
    if weight_sum > 0.0 {
        for &r in rows {
            let graph = &graphs[r];
            let fwd = forward(params, graph);
            let mut d_dense = vec![0.0; fwd.dense_act.len()];
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
                let grow = grads.head_w.row_mut(t);
                for (g, &a) in grow.iter_mut().zip(&fwd.dense_act) {
                    *g += dlogit * a;
                }
                grads.head_b[t] += dlogit;
                for (d, &hw) in d_dense.iter_mut().zip(params.head_w.row(t)) {
                    *d += dlogit * hw;
                }
            }
            // Dense layer (ReLU).
            let d_dense_pre: Vec<f64> = d_dense
                .iter()
                .zip(&fwd.dense_act)
                .map(|(&d, &a)| if a > 0.0 { d } else { 0.0 })
                .collect();
            for (o, &dz) in d_dense_pre.iter().enumerate() {
                if dz != 0.0 {
                    let row = grads.dense.w.row_mut(o);
                    for (g, &v) in row.iter_mut().zip(&fwd.readout) {
                        *g += dz * v;
                    }
                    grads.dense.b[o] += dz;
                }
            }
            let mut d_readout = vec![0.0; fwd.readout.len()];
            for (o, &dz) in d_dense_pre.iter().enumerate() {
                if dz != 0.0 {
                    for (i, d) in d_readout.iter_mut().enumerate() {
                        *d += params.dense.w.get(o, i) * dz;
                    }
                }
            }
            // Sum readout broadcasts the gradient to every atom.
            let n_atoms = graph.num_atoms();
            let mut d_pooled: Vec<Vec<f64>> = vec![d_readout.clone(); n_atoms];
            // Conv layers in reverse.
            for (li, conv) in params.convs.iter().enumerate().rev() {
                let width = conv.out_dim();
                let z = &fwd.zs[li];
                let src = &fwd.pool_src[li];
                let inputs = &fwd.layer_inputs[li];
                // Route pooled gradients back to their source atoms.
                let mut d_z = vec![vec![0.0; width]; n_atoms];
                for i in 0..n_atoms {
                    for c in 0..width {
                        let d = d_pooled[i][c];
                        if d != 0.0 {
                            d_z[src[i][c]][c] += d;
                        }
                    }
                }
                let in_dim = inputs.first().map_or(0, |r| r.len());
                let mut d_in = vec![vec![0.0; in_dim]; n_atoms];
                let gconv = &mut grads.convs[li];
                for i in 0..n_atoms {
                    let mut nbr_sum = vec![0.0; in_dim];
                    for &j in &graph.neighbors[i] {
                        for (s, &v) in nbr_sum.iter_mut().zip(&inputs[j]) {
                            *s += v;
                        }
                    }
                    for c in 0..width {
                        // ReLU mask from the stored post-activation.
                        let dz = if z[i][c] > 0.0 { d_z[i][c] } else { 0.0 };
                        if dz == 0.0 {
                            continue;
                        }
                        {
                            let row = gconv.w_self.row_mut(c);
                            for (g, &v) in row.iter_mut().zip(&inputs[i]) {
                                *g += dz * v;
                            }
                        }
                        {
                            let row = gconv.w_nbr.row_mut(c);
                            for (g, &v) in row.iter_mut().zip(&nbr_sum) {
                                *g += dz * v;
                            }
                        }
                        gconv.b[c] += dz;
                        for (k, d) in d_in[i].iter_mut().enumerate() {
                            *d += conv.w_self.get(c, k) * dz;
                        }
                        for &j in &graph.neighbors[i] {
                            for (k, d) in d_in[j].iter_mut().enumerate() {
                                *d += conv.w_nbr.get(c, k) * dz;
                            }
                        }
                    }
                }
                d_pooled = d_in;
            }
        }
        loss /= weight_sum;
    }

    // L2 on weight matrices only.
    let mut reg = 0.0;
    for (gc, pc) in grads.convs.iter_mut().zip(&params.convs) {
        for (g, &wv) in gc.w_self.data_mut().iter_mut().zip(pc.w_self.data()) {
            reg += wv * wv;
            *g += l2 * wv;
        }
        for (g, &wv) in gc.w_nbr.data_mut().iter_mut().zip(pc.w_nbr.data()) {
            reg += wv * wv;
            *g += l2 * wv;
        }
    }
    for (g, &wv) in grads.dense.w.data_mut().iter_mut().zip(params.dense.w.data()) {
        reg += wv * wv;
        *g += l2 * wv;
    }
    for (g, &wv) in grads.head_w.data_mut().iter_mut().zip(params.head_w.data()) {
        reg += wv * wv;
        *g += l2 * wv;
    }
    (loss + 0.5 * l2 * reg, grads)
}

/// Train the graph convolutional model. `cfg.layer_sizes` sets the conv
/// widths, `cfg.graph_dense_size` the fully-connected width.
pub fn train_graphconv(
    graphs: &[AtomGraphFeatures],
    y: &Mat,
    w: &Mat,
    cfg: &TrainConfig,
    kind: TaskKind,
    featurizer_id: &str,
) -> Result<TrainedModel, ModelError> {
    if graphs.len() != y.rows() || y.rows() != w.rows() || y.cols() != w.cols() {
        return Err(ModelError::ShapeMismatch(format!(
            "{} graphs, y {}x{}, w {}x{}",
            graphs.len(),
            y.rows(),
            y.cols(),
            w.rows(),
            w.cols()
        )));
    }
    for (i, g) in graphs.iter().enumerate() {
        if g.num_atoms() == 0 {
            return Err(ModelError::EmptyGraph(i));
        }
    }
    if kind == TaskKind::Classification {
        check_binary_labels(y, w)?;
    }
    let feat_width = graphs[0].features[0].len();
    // Standardization statistics over all atoms of all training molecules.
    let stacked: Vec<Vec<f64>> = graphs
        .iter()
        .flat_map(|g| g.features.iter().cloned())
        .collect();
    let (input_mean, input_std) = Mat::from_rows(&stacked).column_mean_std();

    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let normal = rand_distr::Normal::new(0.0, cfg.init_std).expect("init std");
    let sample = |count: usize, rng: &mut ChaCha20Rng| -> Vec<f64> {
        (0..count).map(|_| normal.sample(rng)).collect()
    };

    let mut convs = Vec::new();
    let mut in_dim = feat_width;
    for &width in &cfg.layer_sizes {
        let w_self = Mat::from_vec(width, in_dim, sample(width * in_dim, &mut rng));
        let w_nbr = Mat::from_vec(width, in_dim, sample(width * in_dim, &mut rng));
        convs.push(ConvLayer {
            w_self,
            w_nbr,
            b: vec![cfg.bias_init; width],
        });
        in_dim = width;
    }
    let dense = Layer {
        w: Mat::from_vec(
            cfg.graph_dense_size,
            in_dim,
            sample(cfg.graph_dense_size * in_dim, &mut rng),
        ),
        b: vec![cfg.bias_init; cfg.graph_dense_size],
    };
    let head_w = Mat::from_vec(
        y.cols(),
        cfg.graph_dense_size,
        sample(y.cols() * cfg.graph_dense_size, &mut rng),
    );
    let mut params = GraphConvParams {
        convs,
        dense,
        head_w,
        head_b: vec![cfg.bias_init; y.cols()],
        input_mean,
        input_std,
        kind,
    };

    let mut theta = params.flatten();
    let mut sgd = SgdLoop::new(theta.len(), cfg);
    let mut order: Vec<usize> = (0..graphs.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let (_, grads) = graphconv_loss_grad(&params, graphs, y, w, batch, cfg.l2);
            sgd.step(&mut theta, &grads.flatten());
            params.assign_from_flat(&theta);
        }
    }
    Ok(TrainedModel {
        kind: ModelKind::GraphConv,
        task_kind: kind,
        featurizer_id: featurizer_id.to_string(),
        config: cfg.clone(),
        params: ModelParams::GraphConv(params),
        label_transform: None,
    })
}

pub(super) fn predict(
    params: &GraphConvParams,
    graphs: &[AtomGraphFeatures],
) -> Result<Mat, ModelError> {
    let n_tasks = params.head_b.len();
    let mut out = Mat::zeros(graphs.len(), n_tasks);
    for (r, graph) in graphs.iter().enumerate() {
        if graph.num_atoms() == 0 {
            return Err(ModelError::EmptyGraph(r));
        }
        let fwd = forward(params, graph);
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
