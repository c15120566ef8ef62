//! The `run_benchmark` pipeline: dataset → featurizer → split → model →
//! metrics, repeated over seeds, with optional hyperparameter search and
//! report emission.

pub mod config;
mod report;

pub use config::{
    canonical_echo, config_from_map, parse_flat, BenchmarkConfig, ConfigError, DatasetSource,
    MetricChoice, ModelSpec, SearchMode, SearchSpec, SplitStrategy,
};
pub use report::{emit_report, render_markdown, ReportFormat};

use crate::data::{
    balance_weights, featurize_table, fingerprints_to_dense, load_csv, smoke_classification,
    smoke_regression, zscore_transform, CsvSchema, DatasetTable, FeatureData, TableFeaturizer,
};
use crate::featurize::{export_binary, import_binary, FeatureMeta, Fingerprint};
use crate::linalg::Mat;
use crate::metrics::{
    evaluate, mean_over_tasks, recommend_metric, MetricId, MetricReport, ScoredLabels, TaskKind,
};
use crate::models::{
    predict, train_graphconv, train_irv, train_krr, train_logreg, train_multitask_nn, ModelInput,
    TrainConfig, TrainedModel,
};
use crate::split::{random_split, scaffold_split, stratified_split, time_split, SplitIndices};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::time::Instant;
use thiserror::Error;

/// Pipeline stages, used to tag propagated errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Load,
    Split,
    Featurize,
    Transform,
    Train,
    Evaluate,
    Report,
    Search,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("model '{model}' is incompatible with featurizer '{featurizer}'")]
    IncompatibleModelFeaturizer { model: String, featurizer: String },
    #[error("[{stage:?}] {message}")]
    Stage { stage: Stage, message: String },
    #[error("hyperparameter search space is empty")]
    EmptySpace,
}

impl From<ConfigError> for HarnessError {
    fn from(e: ConfigError) -> Self {
        HarnessError::Config(e.0)
    }
}

fn stage_err(stage: Stage, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Stage {
        stage,
        message: e.to_string(),
    }
}

/// Mean ± standard deviation over repeats (population std; 0 for a single
/// repeat).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    MeanStd {
        mean,
        std: var.sqrt(),
    }
}

/// Per-subset metric reports for one seeded repeat. A subset is `None` when
/// every task was skipped (e.g. single-class subsets under small splits).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatOutcome {
    pub seed: u64,
    pub train: Option<MetricReport>,
    pub valid: Option<MetricReport>,
    pub test: Option<MetricReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSummary {
    pub train: Option<MeanStd>,
    pub valid: Option<MeanStd>,
    pub test: Option<MeanStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingInfo {
    pub load_seconds: f64,
    pub featurize_seconds: f64,
    pub train_seconds: f64,
    pub evaluate_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEcho {
    pub description: String,
    pub validation_score: f64,
}

/// Full benchmark report: per-repeat, per-subset metric values with
/// mean ± std, a config echo and the library version. Wall-clock timing is
/// included only when the config asks for it, so default reports are
/// byte-identical across invocations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub library_version: String,
    pub dataset: String,
    pub model: String,
    pub featurizer: String,
    pub split: String,
    pub metric: MetricId,
    pub fracs: [f64; 3],
    pub n_repeats: usize,
    pub base_seed: u64,
    pub config_echo: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_trials: Option<Vec<TrialEcho>>,
    pub repeats: Vec<RepeatOutcome>,
    pub summary: SubsetSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingInfo>,
}

/// Featurized table in all the shapes the models consume.
struct Prepared {
    fingerprints: Option<Vec<Fingerprint>>,
    dense: Option<Mat>,
    graphs: Option<Vec<crate::featurize::AtomGraphFeatures>>,
}

fn load_dataset(source: &DatasetSource) -> Result<DatasetTable, HarnessError> {
    match source {
        DatasetSource::Smoke => Ok(smoke_classification()),
        DatasetSource::SmokeRegression => Ok(smoke_regression()),
        DatasetSource::Csv {
            name,
            path,
            smiles_col,
            id_col,
            time_col,
            tasks,
            kind,
        } => {
            let schema = CsvSchema {
                smiles_col: smiles_col.clone(),
                task_cols: tasks.clone(),
                id_col: id_col.clone(),
                time_col: time_col.clone(),
                kind: *kind,
                dataset_name: name.clone(),
            };
            let load = load_csv(path, &schema).map_err(|e| stage_err(Stage::Load, e))?;
            if load.dropped_smiles > 0 {
                eprintln!(
                    "molbench: dropped {} rows with unparseable SMILES from {}",
                    load.dropped_smiles,
                    path.display()
                );
            }
            Ok(load.table)
        }
    }
}

/// Feature cache keyed by (featurizer id, params hash, dataset content
/// hash) under MOLBENCH_CACHE_DIR. Only dense-representable featurizations
/// (ECFP) hit the disk; fingerprints are rebuilt from the cached 0/1 matrix.
fn cache_path(featurizer: &TableFeaturizer, table: &DatasetTable) -> Option<PathBuf> {
    let dir = std::env::var("MOLBENCH_CACHE_DIR").ok()?;
    if !matches!(featurizer, TableFeaturizer::Ecfp { .. }) {
        return None;
    }
    Some(PathBuf::from(dir).join(format!(
        "{}-{:016x}-{:016x}.mbfx",
        featurizer.id(),
        featurizer.params_hash(),
        table.content_hash()
    )))
}

fn dense_to_fingerprints(dense: &Mat, nbits: u32) -> Vec<Fingerprint> {
    (0..dense.rows())
        .map(|r| {
            let mut fp = Fingerprint::new(nbits);
            for (c, &v) in dense.row(r).iter().enumerate() {
                if v != 0.0 {
                    fp.set(c as u32);
                }
            }
            fp
        })
        .collect()
}

fn prepare_features(
    table: &DatasetTable,
    featurizer: &TableFeaturizer,
) -> Result<Prepared, HarnessError> {
    if let TableFeaturizer::Ecfp { nbits, .. } = featurizer {
        if let Some(path) = cache_path(featurizer, table) {
            if path.exists() {
                let (dense, meta) = import_binary(&path).map_err(|e| stage_err(Stage::Featurize, e))?;
                if meta.params_hash == featurizer.params_hash() && dense.rows() == table.n_rows() {
                    let fingerprints = dense_to_fingerprints(&dense, *nbits);
                    return Ok(Prepared {
                        fingerprints: Some(fingerprints),
                        dense: Some(dense),
                        graphs: None,
                    });
                }
                // Stale or mismatched cache entry: fall through and rebuild.
            }
        }
    }
    let featurized =
        featurize_table(table, featurizer).map_err(|e| stage_err(Stage::Featurize, e))?;
    let prepared = match featurized.x {
        FeatureData::Fingerprints(fps) => {
            let dense = fingerprints_to_dense(&fps);
            Prepared {
                fingerprints: Some(fps),
                dense: Some(dense),
                graphs: None,
            }
        }
        FeatureData::Graphs(graphs) => Prepared {
            fingerprints: None,
            dense: None,
            graphs: Some(graphs),
        },
        FeatureData::Weave(pairs) => Prepared {
            fingerprints: None,
            dense: None,
            graphs: Some(pairs.into_iter().map(|(atoms, _)| atoms).collect()),
        },
        FeatureData::Dense(dense) => Prepared {
            fingerprints: None,
            dense: Some(dense),
            graphs: None,
        },
    };
    if let (Some(dense), Some(path)) = (&prepared.dense, cache_path(featurizer, table)) {
        if let Some(parent) = path.parent() {
            let _ = std::fs::create_dir_all(parent);
        }
        let meta = FeatureMeta {
            featurizer_id: featurizer.id().to_string(),
            version: crate::featurize::FORMAT_VERSION,
            params_hash: featurizer.params_hash(),
        };
        export_binary(&path, dense, &meta).map_err(|e| stage_err(Stage::Featurize, e))?;
    }
    Ok(prepared)
}

fn check_compatibility(cfg: &BenchmarkConfig) -> Result<(), HarnessError> {
    let ok = match cfg.model {
        ModelSpec::GraphConv => matches!(
            cfg.featurizer,
            TableFeaturizer::Graph | TableFeaturizer::Weave { .. }
        ),
        _ => matches!(cfg.featurizer, TableFeaturizer::Ecfp { .. }),
    };
    if !ok {
        return Err(HarnessError::IncompatibleModelFeaturizer {
            model: cfg.model.name().to_string(),
            featurizer: cfg.featurizer.id().to_string(),
        });
    }
    let kind = cfg.dataset.kind();
    let model_ok = match cfg.model {
        ModelSpec::Logreg | ModelSpec::Irv => kind == TaskKind::Classification,
        ModelSpec::Krr => kind == TaskKind::Regression,
        ModelSpec::Multitask | ModelSpec::Bypass | ModelSpec::GraphConv => true,
    };
    if !model_ok {
        return Err(HarnessError::Config(format!(
            "model '{}' does not support {:?} tasks",
            cfg.model.name(),
            kind
        )));
    }
    Ok(())
}

fn make_split(
    strategy: SplitStrategy,
    table: &DatasetTable,
    fracs: (f64, f64, f64),
    seed: u64,
) -> Result<SplitIndices, HarnessError> {
    let n = table.n_rows();
    match strategy {
        SplitStrategy::Random => random_split(n, fracs, seed),
        SplitStrategy::Scaffold => scaffold_split(&table.smiles, fracs),
        SplitStrategy::Stratified => {
            if table.n_tasks() != 1 {
                return Err(HarnessError::Config(
                    "stratified split requires a single-task dataset".into(),
                ));
            }
            let y: Vec<f64> = (0..n).map(|r| table.y.get(r, 0)).collect();
            stratified_split(&y, fracs, seed)
        }
        SplitStrategy::Time => {
            let times: Vec<Option<f64>> = match &table.time {
                Some(t) => t.iter().map(|&v| Some(v)).collect(),
                None => vec![None; n],
            };
            time_split(&times, fracs)
        }
    }
    .map_err(|e| stage_err(Stage::Split, e))
}

/// Train one model on the train subset. Regression models see z-scored
/// labels and carry the transform; classification models see balanced
/// weights when enabled.
fn train_one(
    cfg: &BenchmarkConfig,
    train_cfg: &TrainConfig,
    table: &DatasetTable,
    prepared: &Prepared,
    split: &SplitIndices,
) -> Result<TrainedModel, HarnessError> {
    let kind = table.task_spec.kind;
    let (train_table, transform) = match kind {
        TaskKind::Regression => {
            let (t, z) =
                zscore_transform(table, &split.train).map_err(|e| stage_err(Stage::Transform, e))?;
            (t, Some(z))
        }
        TaskKind::Classification => {
            if cfg.balance_weights {
                let (t, _flagged) =
                    balance_weights(table).map_err(|e| stage_err(Stage::Transform, e))?;
                (t, None)
            } else {
                (table.clone(), None)
            }
        }
    };
    let y_train = train_table.y.select_rows(&split.train);
    let w_train = train_table.w.select_rows(&split.train);
    let featurizer_id = cfg.featurizer.id();

    let mut model = match cfg.model {
        ModelSpec::Logreg => {
            let x = prepared.dense.as_ref().expect("checked compatibility");
            train_logreg(&x.select_rows(&split.train), &y_train, &w_train, train_cfg, featurizer_id)
        }
        ModelSpec::Krr => {
            if table.n_tasks() != 1 {
                return Err(HarnessError::Config(
                    "krr supports single-task regression only".into(),
                ));
            }
            let x = prepared.dense.as_ref().expect("checked compatibility");
            // Weight-0 rows carry no label; exclude them from the solve.
            let rows: Vec<usize> = split
                .train
                .iter()
                .copied()
                .filter(|&r| train_table.w.get(r, 0) > 0.0)
                .collect();
            let y: Vec<f64> = rows.iter().map(|&r| train_table.y.get(r, 0)).collect();
            train_krr(&x.select_rows(&rows), &y, train_cfg, featurizer_id)
        }
        ModelSpec::Irv => {
            let fps = prepared.fingerprints.as_ref().expect("checked compatibility");
            let train_fps: Vec<Fingerprint> =
                split.train.iter().map(|&r| fps[r].clone()).collect();
            train_irv(&train_fps, &y_train, &w_train, train_cfg, featurizer_id)
        }
        ModelSpec::Multitask | ModelSpec::Bypass => {
            let x = prepared.dense.as_ref().expect("checked compatibility");
            train_multitask_nn(
                &x.select_rows(&split.train),
                &y_train,
                &w_train,
                train_cfg,
                cfg.model == ModelSpec::Bypass,
                kind,
                featurizer_id,
            )
        }
        ModelSpec::GraphConv => {
            let graphs = prepared.graphs.as_ref().expect("checked compatibility");
            let train_graphs: Vec<_> = split.train.iter().map(|&r| graphs[r].clone()).collect();
            train_graphconv(&train_graphs, &y_train, &w_train, train_cfg, kind, featurizer_id)
        }
    }
    .map_err(|e| stage_err(Stage::Train, e))?;
    model.label_transform = transform;
    Ok(model)
}

/// Score one subset: predictions against the original labels/weights,
/// per-task metrics, mean over non-skipped tasks. `Ok(None)` means every
/// task was skipped.
fn evaluate_subset(
    model: &TrainedModel,
    prepared: &Prepared,
    table: &DatasetTable,
    rows: &[usize],
    metric: MetricId,
    subset: &str,
) -> Result<Option<MetricReport>, HarnessError> {
    if rows.is_empty() {
        return Ok(None);
    }
    let preds = match model.kind.expected_input() {
        "dense" => {
            let x = prepared.dense.as_ref().expect("checked compatibility");
            predict(model, ModelInput::Dense(&x.select_rows(rows)))
        }
        "fingerprints" => {
            let fps = prepared.fingerprints.as_ref().expect("checked compatibility");
            let subset_fps: Vec<Fingerprint> = rows.iter().map(|&r| fps[r].clone()).collect();
            predict(model, ModelInput::Fingerprints(&subset_fps))
        }
        _ => {
            let graphs = prepared.graphs.as_ref().expect("checked compatibility");
            let subset_graphs: Vec<_> = rows.iter().map(|&r| graphs[r].clone()).collect();
            predict(model, ModelInput::Graphs(&subset_graphs))
        }
    }
    .map_err(|e| stage_err(Stage::Evaluate, e))?;

    let n_tasks = table.n_tasks();
    let mut per_task = Vec::with_capacity(n_tasks);
    for t in 0..n_tasks {
        let scores: Vec<f64> = (0..rows.len()).map(|i| preds.get(i, t.min(preds.cols() - 1))).collect();
        let labels: Vec<f64> = rows.iter().map(|&r| table.y.get(r, t)).collect();
        let weights: Vec<f64> = rows.iter().map(|&r| table.w.get(r, t)).collect();
        let scored = ScoredLabels::new(&scores, &labels, &weights)
            .map_err(|e| stage_err(Stage::Evaluate, e))?;
        per_task.push(evaluate(metric, &scored).ok());
    }
    match mean_over_tasks(metric, subset, per_task) {
        Ok(report) => Ok(Some(report)),
        Err(crate::metrics::MetricError::AllTasksSkipped) => Ok(None),
        Err(e) => Err(stage_err(Stage::Evaluate, e)),
    }
}

fn resolve_metric(cfg: &BenchmarkConfig, table: &DatasetTable) -> MetricId {
    match &cfg.metric {
        MetricChoice::Fixed(m) => *m,
        MetricChoice::Auto { regression_default } => recommend_metric(
            table.task_spec.kind,
            table.positive_rate(),
            *regression_default,
        ),
    }
}

/// Apply a named search parameter to a train config.
pub fn set_search_param(cfg: &mut TrainConfig, name: &str, value: f64) -> Result<(), HarnessError> {
    match name {
        "learning_rate" => cfg.learning_rate = value,
        "l2" => cfg.l2 = value,
        "batch_size" => cfg.batch_size = value as usize,
        "epochs" => cfg.epochs = value as usize,
        "hidden" => cfg.layer_sizes = vec![value as usize],
        "graph_dense" => cfg.graph_dense_size = value as usize,
        "init_std" => cfg.init_std = value,
        "momentum" => cfg.momentum = value,
        "k" => cfg.k_neighbors = value as usize,
        "irv_hidden" => cfg.irv_hidden = value as usize,
        "krr_penalty" => cfg.krr_penalty = value,
        "krr_gamma" => cfg.krr_gamma = value,
        other => {
            return Err(HarnessError::Config(format!(
                "unknown search parameter '{other}'"
            )))
        }
    }
    Ok(())
}

/// Candidate configs for a search: full cartesian grid (truncated at
/// budget) or seeded random draws.
fn candidates(
    base: &TrainConfig,
    spec: &SearchSpec,
    seed: u64,
) -> Result<Vec<(TrainConfig, String)>, HarnessError> {
    if spec.space.is_empty() || spec.budget == 0 {
        return Err(HarnessError::EmptySpace);
    }
    let mut out = Vec::new();
    match spec.mode {
        SearchMode::Grid => {
            let mut idx = vec![0usize; spec.space.len()];
            loop {
                let mut cfg = base.clone();
                let mut desc = Vec::new();
                for (d, (name, values)) in spec.space.iter().enumerate() {
                    set_search_param(&mut cfg, name, values[idx[d]])?;
                    desc.push(format!("{name}={}", values[idx[d]]));
                }
                out.push((cfg, desc.join(",")));
                if out.len() >= spec.budget {
                    break;
                }
                // Odometer increment.
                let mut d = 0;
                loop {
                    idx[d] += 1;
                    if idx[d] < spec.space[d].1.len() {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                    if d == spec.space.len() {
                        return Ok(out);
                    }
                }
            }
        }
        SearchMode::Random => {
            use rand::Rng;
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            use rand::SeedableRng;
            for _ in 0..spec.budget {
                let mut cfg = base.clone();
                let mut desc = Vec::new();
                for (name, values) in &spec.space {
                    let v = values[rng.gen_range(0..values.len())];
                    set_search_param(&mut cfg, name, v)?;
                    desc.push(format!("{name}={v}"));
                }
                out.push((cfg, desc.join(",")));
            }
        }
    }
    Ok(out)
}

pub struct SearchOutcome {
    pub best: TrainConfig,
    pub trials: Vec<TrialEcho>,
}

/// Evaluate candidates with `eval` (which must score on the validation
/// subset only) and return the best by metric direction; ties keep the
/// first-seen candidate. The API hands candidates to the caller-supplied
/// closure, so test labels never flow through the search itself.
pub fn hyperparameter_search(
    base: &TrainConfig,
    spec: &SearchSpec,
    seed: u64,
    higher_is_better: bool,
    mut eval: impl FnMut(&TrainConfig) -> Result<f64, HarnessError>,
) -> Result<SearchOutcome, HarnessError> {
    let cands = candidates(base, spec, seed)?;
    let mut best: Option<(TrainConfig, f64)> = None;
    let mut trials = Vec::with_capacity(cands.len());
    for (cfg, desc) in cands {
        let score = eval(&cfg)?;
        trials.push(TrialEcho {
            description: desc,
            validation_score: score,
        });
        let better = match &best {
            None => true,
            Some((_, s)) => {
                if higher_is_better {
                    score > *s
                } else {
                    score < *s
                }
            }
        };
        if better {
            best = Some((cfg, score));
        }
    }
    let (best, _) = best.ok_or(HarnessError::EmptySpace)?;
    Ok(SearchOutcome { best, trials })
}

/// Run the full benchmark: optional search on the validation subset, then
/// `n_repeats` seeded repeats, aggregated as mean ± std per subset.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkReport, HarnessError> {
    let t0 = Instant::now();
    check_compatibility(cfg)?;

    let table = load_dataset(&cfg.dataset)?;
    let t_load = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let prepared = prepare_features(&table, &cfg.featurizer)?;
    let t_featurize = t1.elapsed().as_secs_f64();

    let metric = resolve_metric(cfg, &table);

    // Optional hyperparameter search on repeat-0's validation subset; test
    // rows are not touched until the final repeats below.
    let mut train_cfg = cfg.train.clone();
    let mut search_trials = None;
    if let Some(spec) = &cfg.search {
        let split = make_split(cfg.split, &table, cfg.fracs, cfg.seed)?;
        let outcome = hyperparameter_search(
            &cfg.train,
            spec,
            cfg.seed,
            metric.higher_is_better(),
            |candidate| {
                let model = train_one(cfg, candidate, &table, &prepared, &split)?;
                let report =
                    evaluate_subset(&model, &prepared, &table, &split.valid, metric, "valid")?;
                report.map(|r| r.mean).ok_or_else(|| {
                    stage_err(Stage::Search, "validation subset unscoreable")
                })
            },
        )?;
        train_cfg = outcome.best;
        search_trials = Some(outcome.trials);
    }

    let mut repeats = Vec::with_capacity(cfg.n_repeats);
    let mut t_train = 0.0;
    let mut t_eval = 0.0;
    for r in 0..cfg.n_repeats {
        let seed = cfg.seed + r as u64;
        let split = make_split(cfg.split, &table, cfg.fracs, seed)?;
        let mut repeat_cfg = train_cfg.clone();
        repeat_cfg.seed = seed;

        let ts = Instant::now();
        let model = train_one(cfg, &repeat_cfg, &table, &prepared, &split)?;
        t_train += ts.elapsed().as_secs_f64();

        let te = Instant::now();
        let train = evaluate_subset(&model, &prepared, &table, &split.train, metric, "train")?;
        let valid = evaluate_subset(&model, &prepared, &table, &split.valid, metric, "valid")?;
        let test = evaluate_subset(&model, &prepared, &table, &split.test, metric, "test")?;
        t_eval += te.elapsed().as_secs_f64();

        repeats.push(RepeatOutcome {
            seed,
            train,
            valid,
            test,
        });
        if let Some(budget) = cfg.budget_seconds {
            let elapsed = t0.elapsed().as_secs_f64();
            if elapsed > budget {
                return Err(stage_err(
                    Stage::Train,
                    format!("wall-clock budget exceeded: {elapsed:.1}s > {budget:.1}s"),
                ));
            }
        }
    }

    let summarize = |pick: fn(&RepeatOutcome) -> &Option<MetricReport>| {
        let vals: Vec<f64> = repeats
            .iter()
            .filter_map(|r| pick(r).as_ref().map(|m| m.mean))
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(mean_std(&vals))
        }
    };
    let summary = SubsetSummary {
        train: summarize(|r| &r.train),
        valid: summarize(|r| &r.valid),
        test: summarize(|r| &r.test),
    };
    let timing = cfg.include_timing.then(|| TimingInfo {
        load_seconds: t_load,
        featurize_seconds: t_featurize,
        train_seconds: t_train,
        evaluate_seconds: t_eval,
        total_seconds: t0.elapsed().as_secs_f64(),
    });
    Ok(BenchmarkReport {
        library_version: crate::VERSION.to_string(),
        dataset: cfg.dataset.name(),
        model: cfg.model.name().to_string(),
        featurizer: cfg.featurizer.id().to_string(),
        split: cfg.split.name().to_string(),
        metric,
        fracs: [cfg.fracs.0, cfg.fracs.1, cfg.fracs.2],
        n_repeats: cfg.n_repeats,
        base_seed: cfg.seed,
        config_echo: canonical_echo(cfg),
        search_trials,
        repeats,
        summary,
        timing,
    })
}
