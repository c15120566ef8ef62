//! Influence relevance voting: a K-nearest-neighbor classifier whose votes
//! are weighted by a small learned network of (similarity, rank).

use super::{
    bce_from_logit, check_binary_labels, sigmoid, ModelError, ModelKind, ModelParams, SgdLoop,
    TrainConfig, TrainedModel,
};
use crate::featurize::{tanimoto, Fingerprint};
use crate::linalg::Mat;
use crate::metrics::TaskKind;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Trainable part: the shared one-hidden-layer relevance network
/// (tanh hidden, linear output) over (similarity, rank one-hot), plus a
/// per-task bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrvNet {
    /// hidden × (1 + K)
    pub w1: Mat,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    pub task_bias: Vec<f64>,
}

impl IrvNet {
    fn zeros_like(other: &IrvNet) -> IrvNet {
        IrvNet {
            w1: Mat::zeros(other.w1.rows(), other.w1.cols()),
            b1: vec![0.0; other.b1.len()],
            w2: vec![0.0; other.w2.len()],
            b2: 0.0,
            task_bias: vec![0.0; other.task_bias.len()],
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut v = self.w1.data().to_vec();
        v.extend_from_slice(&self.b1);
        v.extend_from_slice(&self.w2);
        v.push(self.b2);
        v.extend_from_slice(&self.task_bias);
        v
    }

    pub fn assign_from_flat(&mut self, theta: &[f64]) {
        let mut pos = 0;
        let nw1 = self.w1.data().len();
        self.w1.data_mut().copy_from_slice(&theta[pos..pos + nw1]);
        pos += nw1;
        let nb1 = self.b1.len();
        self.b1.copy_from_slice(&theta[pos..pos + nb1]);
        pos += nb1;
        let nw2 = self.w2.len();
        self.w2.copy_from_slice(&theta[pos..pos + nw2]);
        pos += nw2;
        self.b2 = theta[pos];
        pos += 1;
        let nt = self.task_bias.len();
        self.task_bias.copy_from_slice(&theta[pos..pos + nt]);
    }
}

/// Full IRV model: the relevance network plus the retained training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrvParams {
    pub net: IrvNet,
    pub train_fps: Vec<Fingerprint>,
    pub train_y: Mat,
    pub train_w: Mat,
    pub k: usize,
}

/// Top-K training neighbors of `fp` by Tanimoto similarity, excluding
/// `exclude` (a training query never votes for itself). Ties break by
/// training index, so ranking is stable and deterministic.
pub fn top_k_neighbors(
    train_fps: &[Fingerprint],
    fp: &Fingerprint,
    k: usize,
    exclude: Option<usize>,
) -> Vec<(usize, f64)> {
    let mut sims: Vec<(usize, f64)> = train_fps
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, t)| (i, tanimoto(fp, t).expect("equal fingerprint lengths")))
        .collect();
    sims.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    sims.truncate(k);
    sims
}

struct Forward {
    /// Per-neighbor hidden activations, plus the combined task logits.
    hidden: Vec<Vec<f64>>,
    logits: Vec<f64>,
}

fn forward(net: &IrvNet, neighbors: &[(usize, f64)], y: &Mat, w: &Mat) -> Forward {
    let k = neighbors.len();
    let hidden_dim = net.b1.len();
    let n_tasks = net.task_bias.len();
    let mut hidden = Vec::with_capacity(k);
    let mut logits = net.task_bias.clone();
    for (rank, &(nbr, sim)) in neighbors.iter().enumerate() {
        let mut h = vec![0.0; hidden_dim];
        for j in 0..hidden_dim {
            // Input layout: [similarity, rank one-hot]; only two entries of
            // the input are non-zero, so the matvec collapses.
            let pre = net.w1.get(j, 0) * sim + net.w1.get(j, 1 + rank) + net.b1[j];
            h[j] = pre.tanh();
        }
        let r: f64 = net.w2.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>() + net.b2;
        for t in 0..n_tasks {
            if w.get(nbr, t) > 0.0 {
                logits[t] += r * (2.0 * y.get(nbr, t) - 1.0);
            }
        }
        hidden.push(h);
    }
    Forward { hidden, logits }
}

/// Weighted cross-entropy over the given training queries (each query's
/// neighbor list excludes itself), normalized by the batch weight sum, plus
/// (l2/2) on the network weights.
pub fn irv_loss_grad(
    params: &IrvParams,
    queries: &[usize],
    neighbor_lists: &[Vec<(usize, f64)>],
    l2: f64,
) -> (f64, IrvNet) {
    let net = &params.net;
    let n_tasks = net.task_bias.len();
    let mut grads = IrvNet::zeros_like(net);

    let mut weight_sum = 0.0;
    for &q in queries {
        for t in 0..n_tasks {
            weight_sum += params.train_w.get(q, t);
        }
    }
    let mut loss = 0.0;
    if weight_sum > 0.0 {
        for &q in queries {
            let neighbors = &neighbor_lists[q];
            let fwd = forward(net, neighbors, &params.train_y, &params.train_w);
            let mut d_relevance = vec![0.0; neighbors.len()];
            for t in 0..n_tasks {
                let wq = params.train_w.get(q, t);
                if wq == 0.0 {
                    continue;
                }
                let yq = params.train_y.get(q, t);
                loss += wq * bce_from_logit(fwd.logits[t], yq);
                let dlogit = wq * (sigmoid(fwd.logits[t]) - yq) / weight_sum;
                grads.task_bias[t] += dlogit;
                for (rank, &(nbr, _)) in neighbors.iter().enumerate() {
                    if params.train_w.get(nbr, t) > 0.0 {
                        d_relevance[rank] += dlogit * (2.0 * params.train_y.get(nbr, t) - 1.0);
                    }
                }
            }
            for (rank, &(_, sim)) in neighbors.iter().enumerate() {
                let dr = d_relevance[rank];
                if dr == 0.0 {
                    continue;
                }
                grads.b2 += dr;
                let h = &fwd.hidden[rank];
                for j in 0..h.len() {
                    grads.w2[j] += dr * h[j];
                    let dpre = dr * net.w2[j] * (1.0 - h[j] * h[j]);
                    grads.b1[j] += dpre;
                    grads.w1.add_assign_at(j, 0, dpre * sim);
                    grads.w1.add_assign_at(j, 1 + rank, dpre);
                }
            }
        }
        loss /= weight_sum;
    }
    let mut reg = 0.0;
    for (g, &wv) in grads.w1.data_mut().iter_mut().zip(net.w1.data()) {
        reg += wv * wv;
        *g += l2 * wv;
    }
    for (g, &wv) in grads.w2.iter_mut().zip(&net.w2) {
        reg += wv * wv;
        *g += l2 * wv;
    }
    (loss + 0.5 * l2 * reg, grads)
}

/// Train the relevance network on the retained fingerprints.
pub fn train_irv(
    fps: &[Fingerprint],
    y: &Mat,
    w: &Mat,
    cfg: &TrainConfig,
    featurizer_id: &str,
) -> Result<TrainedModel, ModelError> {
    let n = fps.len();
    if n != y.rows() || y.rows() != w.rows() || y.cols() != w.cols() {
        return Err(ModelError::ShapeMismatch(format!(
            "{} fingerprints, y {}x{}, w {}x{}",
            n,
            y.rows(),
            y.cols(),
            w.rows(),
            w.cols()
        )));
    }
    check_binary_labels(y, w)?;
    let k = cfg.k_neighbors;
    if k == 0 || k > n.saturating_sub(1) {
        return Err(ModelError::KTooLarge { k, n_train: n });
    }

    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let hidden = cfg.irv_hidden;
    let normal = rand_distr::Normal::new(0.0, cfg.init_std).expect("init std");
    let mut sample = |count: usize| -> Vec<f64> {
        use rand_distr::Distribution;
        (0..count).map(|_| normal.sample(&mut rng)).collect()
    };
    let net = IrvNet {
        w1: Mat::from_vec(hidden, 1 + k, sample(hidden * (1 + k))),
        b1: vec![cfg.bias_init; hidden],
        w2: sample(hidden),
        b2: cfg.bias_init,
        task_bias: vec![0.0; y.cols()],
    };
    let mut params = IrvParams {
        net,
        train_fps: fps.to_vec(),
        train_y: y.clone(),
        train_w: w.clone(),
        k,
    };

    // Neighbor lists are fixed by the fingerprints; compute once.
    let neighbor_lists: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|q| top_k_neighbors(fps, &fps[q], k, Some(q)))
        .collect();

    let mut theta = params.net.flatten();
    let mut sgd = SgdLoop::new(theta.len(), cfg);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let (_, grads) = irv_loss_grad(&params, batch, &neighbor_lists, cfg.l2);
            sgd.step(&mut theta, &grads.flatten());
            params.net.assign_from_flat(&theta);
        }
    }
    Ok(TrainedModel {
        kind: ModelKind::Irv,
        task_kind: TaskKind::Classification,
        featurizer_id: featurizer_id.to_string(),
        config: cfg.clone(),
        params: ModelParams::Irv(params),
        label_transform: None,
    })
}

pub(super) fn predict(params: &IrvParams, fps: &[Fingerprint]) -> Result<Mat, ModelError> {
    let n_tasks = params.net.task_bias.len();
    let mut out = Mat::zeros(fps.len(), n_tasks);
    for (r, fp) in fps.iter().enumerate() {
        let neighbors = top_k_neighbors(&params.train_fps, fp, params.k, None);
        let fwd = forward(&params.net, &neighbors, &params.train_y, &params.train_w);
        for t in 0..n_tasks {
            out.set(r, t, sigmoid(fwd.logits[t]));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;
    use crate::featurize::ecfp;
    use crate::models::{predict as model_predict, ModelInput};

    /// Toy set: nitrogen-bearing molecules are positive, and near-duplicates
    /// exist so similarity is informative.
    fn toy_set() -> (Vec<Fingerprint>, Mat, Mat) {
        let smiles = [
            ("CCN", 1.0),
            ("CCCN", 1.0),
            ("CCCCN", 1.0),
            ("NCCN", 1.0),
            ("CCO", 0.0),
            ("CCCO", 0.0),
            ("CCCCO", 0.0),
            ("OCCO", 0.0),
        ];
        let fps: Vec<Fingerprint> = smiles
            .iter()
            .map(|(s, _)| ecfp(&parse_smiles(s).unwrap(), 2, 256).unwrap())
            .collect();
        let n = fps.len();
        let y = Mat::from_vec(n, 1, smiles.iter().map(|&(_, y)| y).collect());
        let w = Mat::from_vec(n, 1, vec![1.0; n]);
        (fps, y, w)
    }

    #[test]
    fn learns_separable_toy_set() {
        let (fps, y, w) = toy_set();
        let cfg = TrainConfig {
            k_neighbors: 1,
            epochs: 300,
            learning_rate: 0.3,
            l2: 0.0,
            batch_size: 8,
            ..TrainConfig::default()
        };
        let model = train_irv(&fps, &y, &w, &cfg, "ecfp").unwrap();
        // A query identical to a positive training compound.
        let query = ecfp(&parse_smiles("CCN").unwrap(), 2, 256).unwrap();
        let p = model_predict(&model, ModelInput::Fingerprints(&[query])).unwrap();
        assert!(p.get(0, 0) > 0.5, "p = {}", p.get(0, 0));
        // And a negative one.
        let query = ecfp(&parse_smiles("CCO").unwrap(), 2, 256).unwrap();
        let p = model_predict(&model, ModelInput::Fingerprints(&[query])).unwrap();
        assert!(p.get(0, 0) < 0.5, "p = {}", p.get(0, 0));
    }

    #[test]
    fn k_too_large_rejected() {
        let (fps, y, w) = toy_set();
        let cfg = TrainConfig {
            k_neighbors: fps.len(),
            ..TrainConfig::default()
        };
        assert!(matches!(
            train_irv(&fps, &y, &w, &cfg, "ecfp"),
            Err(ModelError::KTooLarge { .. })
        ));
    }

    #[test]
    fn tied_similarities_rank_stably() {
        // All-identical fingerprints: every similarity is 1.0, ranks resolve
        // by index.
        let fp = ecfp(&parse_smiles("CCO").unwrap(), 2, 128).unwrap();
        let fps = vec![fp.clone(), fp.clone(), fp.clone(), fp.clone()];
        let neighbors = top_k_neighbors(&fps, &fp, 3, Some(2));
        let idx: Vec<usize> = neighbors.iter().map(|&(i, _)| i).collect();
        assert_eq!(idx, vec![0, 1, 3]);
    }

    #[test]
    fn self_excluded_during_training() {
        let (fps, _, _) = toy_set();
        let neighbors = top_k_neighbors(&fps, &fps[0], 3, Some(0));
        assert!(neighbors.iter().all(|&(i, _)| i != 0));
    }

    #[test]
    fn deterministic_given_seed() {
        let (fps, y, w) = toy_set();
        let cfg = TrainConfig {
            k_neighbors: 3,
            epochs: 20,
            ..TrainConfig::default()
        };
        let a = train_irv(&fps, &y, &w, &cfg, "ecfp").unwrap();
        let b = train_irv(&fps, &y, &w, &cfg, "ecfp").unwrap();
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn scaling_relevance_weights_preserves_neighbor_ranking_and_score_order() {
        let (fps, y, w) = toy_set();
        let cfg = TrainConfig {
            k_neighbors: 3,
            epochs: 50,
            ..TrainConfig::default()
        };
        let model = train_irv(&fps, &y, &w, &cfg, "ecfp").unwrap();
        let mut params = match model.params {
            ModelParams::Irv(p) => p,
            _ => unreachable!(),
        };
        params.net.b2 = 0.0;
        params.net.task_bias = vec![0.0];
        let queries: Vec<Fingerprint> = ["CCCN", "CCCCO", "NCCN", "CCO"]
            .iter()
            .map(|s| ecfp(&parse_smiles(s).unwrap(), 2, 256).unwrap())
            .collect();
        let scores_before = predict(&params, &queries).unwrap();
        let lists_before: Vec<Vec<(usize, f64)>> = queries
            .iter()
            .map(|q| top_k_neighbors(&params.train_fps, q, params.k, None))
            .collect();

        // Scale the output weights by a positive constant.
        for v in params.net.w2.iter_mut() {
            *v *= 3.5;
        }
        let scores_after = predict(&params, &queries).unwrap();
        let lists_after: Vec<Vec<(usize, f64)>> = queries
            .iter()
            .map(|q| top_k_neighbors(&params.train_fps, q, params.k, None))
            .collect();
        assert_eq!(lists_before, lists_after);

        // Ranking of query scores is preserved (monotone logit change).
        let order = |m: &Mat| {
            let mut idx: Vec<usize> = (0..m.rows()).collect();
            idx.sort_by(|&a, &b| m.get(a, 0).partial_cmp(&m.get(b, 0)).unwrap());
            idx
        };
        assert_eq!(order(&scores_before), order(&scores_after));
    }
}
