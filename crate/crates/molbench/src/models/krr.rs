//! Kernel ridge regression with an RBF kernel, solved in closed form.

use super::{ModelError, ModelKind, ModelParams, TrainConfig, TrainedModel};
use crate::linalg::{cholesky_solve_in_place, squared_distance, Mat};
use crate::metrics::TaskKind;
use serde::{Deserialize, Serialize};

/// Dual coefficients plus the training features needed at prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrrParams {
    pub alpha: Vec<f64>,
    pub train_x: Mat,
    pub gamma: f64,
}

/// Solve (K + λ·n·I) α = y with K_ij = exp(−γ‖x_i − x_j‖²) by Cholesky
/// factorization. Single-task regression; the dense solve is capped at
/// `cfg.max_train_rows`.
pub fn train_krr(
    x: &Mat,
    y: &[f64],
    cfg: &TrainConfig,
    featurizer_id: &str,
) -> Result<TrainedModel, ModelError> {
    let n = x.rows();
    if n != y.len() {
        return Err(ModelError::ShapeMismatch(format!(
            "x has {n} rows, y has {}",
            y.len()
        )));
    }
    if n > cfg.max_train_rows {
        return Err(ModelError::TooManyRows {
            n,
            max: cfg.max_train_rows,
        });
    }
    let gamma = cfg.krr_gamma;
    let lambda = cfg.krr_penalty;

    // Gram matrix via ‖a‖² + ‖b‖² − 2a·b, clamped at zero.
    let norms: Vec<f64> = (0..n)
        .map(|i| x.row(i).iter().map(|v| v * v).sum::<f64>())
        .collect();
    let mut k = Mat::zeros(n, n);
    for i in 0..n {
        k.set(i, i, 1.0 + lambda * n as f64);
        for j in (i + 1)..n {
            let d2 = (norms[i] + norms[j] - 2.0 * crate::linalg::dot(x.row(i), x.row(j))).max(0.0);
            let v = (-gamma * d2).exp();
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    let mut alpha = y.to_vec();
    cholesky_solve_in_place(&mut k, &mut alpha).map_err(|_| ModelError::SingularKernel)?;
    Ok(TrainedModel {
        kind: ModelKind::Krr,
        task_kind: TaskKind::Regression,
        featurizer_id: featurizer_id.to_string(),
        config: cfg.clone(),
        params: ModelParams::Krr(KrrParams {
            alpha,
            train_x: x.clone(),
            gamma,
        }),
        label_transform: None,
    })
}

pub(super) fn predict(params: &KrrParams, x: &Mat) -> Mat {
    let n_train = params.train_x.rows();
    let mut out = Mat::zeros(x.rows(), 1);
    for r in 0..x.rows() {
        let q = x.row(r);
        let mut acc = 0.0;
        for i in 0..n_train {
            let d2 = squared_distance(q, params.train_x.row(i));
            acc += params.alpha[i] * (-params.gamma * d2).exp();
        }
        out.set(r, 0, acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{predict as model_predict, ModelInput};

    fn toy() -> (Mat, Vec<f64>) {
        let x = Mat::from_rows(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![0.5, 0.2],
        ]);
        let y = vec![0.0, 1.0, 2.0, 3.0, 0.9];
        (x, y)
    }

    #[test]
    fn interpolates_at_tiny_penalty() {
        let (x, y) = toy();
        let cfg = TrainConfig {
            krr_penalty: 1e-12,
            krr_gamma: 1.0,
            ..TrainConfig::default()
        };
        let model = train_krr(&x, &y, &cfg, "ecfp").unwrap();
        let preds = model_predict(&model, ModelInput::Dense(&x)).unwrap();
        for (r, &target) in y.iter().enumerate() {
            assert!(
                (preds.get(r, 0) - target).abs() < 1e-6,
                "row {r}: {} vs {target}",
                preds.get(r, 0)
            );
        }
    }

    #[test]
    fn gamma_zero_gives_shrunken_mean() {
        // K all ones: rank-1 system (11^T + λn I) α = y has
        // Σα = Σy / (n(1 + λ)), and every prediction equals Σα.
        let (x, y) = toy();
        let lambda = 0.5;
        let cfg = TrainConfig {
            krr_penalty: lambda,
            krr_gamma: 0.0,
            ..TrainConfig::default()
        };
        let model = train_krr(&x, &y, &cfg, "ecfp").unwrap();
        let preds = model_predict(&model, ModelInput::Dense(&x)).unwrap();
        let n = y.len() as f64;
        let expected = y.iter().sum::<f64>() / (n * (1.0 + lambda));
        for r in 0..y.len() {
            assert!((preds.get(r, 0) - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn duplicate_rows_zero_penalty_singular() {
        let x = Mat::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![0.0, 0.0]]);
        let y = vec![1.0, 1.0, 0.0];
        let cfg = TrainConfig {
            krr_penalty: 0.0,
            krr_gamma: 1.0,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train_krr(&x, &y, &cfg, "ecfp"),
            Err(ModelError::SingularKernel)
        ));
    }

    #[test]
    fn row_cap_enforced() {
        let (x, y) = toy();
        let cfg = TrainConfig {
            max_train_rows: 3,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train_krr(&x, &y, &cfg, "ecfp"),
            Err(ModelError::TooManyRows { n: 5, max: 3 })
        ));
    }

    #[test]
    fn regularized_objective_beats_zero() {
        // Objective: ‖y − Kα‖² + λn·αᵀKα must be no worse than α = 0.
        let (x, y) = toy();
        let cfg = TrainConfig {
            krr_penalty: 0.3,
            krr_gamma: 0.8,
            ..TrainConfig::default()
        };
        let model = train_krr(&x, &y, &cfg, "ecfp").unwrap();
        let p = match &model.params {
            ModelParams::Krr(p) => p,
            _ => unreachable!(),
        };
        let n = y.len();
        let mut k = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let d2 = squared_distance(x.row(i), x.row(j));
                k[i][j] = (-cfg.krr_gamma * d2).exp();
            }
        }
        let objective = |alpha: &[f64]| {
            let mut fit = 0.0;
            let mut quad = 0.0;
            for i in 0..n {
                let ki: f64 = (0..n).map(|j| k[i][j] * alpha[j]).sum();
                fit += (y[i] - ki) * (y[i] - ki);
                quad += alpha[i] * ki;
            }
            fit + cfg.krr_penalty * n as f64 * quad
        };
        let zero = vec![0.0; n];
        assert!(objective(&p.alpha) <= objective(&zero) + 1e-12);
    }
}
