//! End-to-end pipeline tests on the bundled smoke corpus.

mod common;

use molbench::data::{self, TableFeaturizer};
use molbench::harness::{
    config_from_map, hyperparameter_search, parse_flat, render_markdown, run_benchmark,
    BenchmarkConfig, DatasetSource, HarnessError, MetricChoice, ModelSpec, SearchMode, SearchSpec,
    SplitStrategy,
};
use molbench::metrics::MetricId;
use molbench::models::TrainConfig;
use std::cell::Cell;
use std::collections::BTreeMap;

fn quick_train() -> TrainConfig {
    TrainConfig {
        epochs: 10,
        ..TrainConfig::default()
    }
}

#[test]
fn smoke_logreg_overfits_train() {
    let cfg = BenchmarkConfig {
        train: TrainConfig {
            epochs: 60,
            ..TrainConfig::default()
        },
        n_repeats: 3,
        ..BenchmarkConfig::default()
    };
    let report = run_benchmark(&cfg).unwrap();
    assert_eq!(report.metric, MetricId::RocAuc);
    assert_eq!(report.repeats.len(), 3);
    let train = report.summary.train.unwrap();
    let valid = report.summary.valid.unwrap();
    assert!(
        train.mean >= valid.mean,
        "train {} < valid {}",
        train.mean,
        valid.mean
    );
}

#[test]
fn single_repeat_has_zero_std() {
    let cfg = BenchmarkConfig {
        train: quick_train(),
        n_repeats: 1,
        ..BenchmarkConfig::default()
    };
    let report = run_benchmark(&cfg).unwrap();
    for ms in [
        report.summary.train,
        report.summary.valid,
        report.summary.test,
    ]
    .into_iter()
    .flatten()
    {
        assert_eq!(ms.std, 0.0);
    }
}

#[test]
fn krr_with_graph_features_is_incompatible() {
    let cfg = BenchmarkConfig {
        dataset: DatasetSource::SmokeRegression,
        featurizer: TableFeaturizer::Graph,
        model: ModelSpec::Krr,
        ..BenchmarkConfig::default()
    };
    match run_benchmark(&cfg) {
        Err(HarnessError::IncompatibleModelFeaturizer { model, featurizer }) => {
            assert_eq!(model, "krr");
            assert_eq!(featurizer, "graph");
        }
        other => panic!("expected incompatibility, got {other:?}"),
    }
}

#[test]
fn end_to_end_determinism_json() {
    let cfg = BenchmarkConfig {
        train: quick_train(),
        n_repeats: 2,
        ..BenchmarkConfig::default()
    };
    let a = run_benchmark(&cfg).unwrap();
    let b = run_benchmark(&cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn every_model_runs_on_the_smoke_corpus() {
    for (model, dataset, featurizer) in [
        (ModelSpec::Logreg, DatasetSource::Smoke, data::default_ecfp()),
        (ModelSpec::Irv, DatasetSource::Smoke, data::default_ecfp()),
        (
            ModelSpec::Multitask,
            DatasetSource::Smoke,
            data::default_ecfp(),
        ),
        (ModelSpec::Bypass, DatasetSource::Smoke, data::default_ecfp()),
        (
            ModelSpec::GraphConv,
            DatasetSource::Smoke,
            TableFeaturizer::Graph,
        ),
        (
            ModelSpec::Krr,
            DatasetSource::SmokeRegression,
            data::default_ecfp(),
        ),
        (
            ModelSpec::Multitask,
            DatasetSource::SmokeRegression,
            data::default_ecfp(),
        ),
    ] {
        let cfg = BenchmarkConfig {
            dataset: dataset.clone(),
            featurizer,
            model,
            train: TrainConfig {
                epochs: 8,
                layer_sizes: vec![16],
                graph_dense_size: 8,
                k_neighbors: 3,
                ..TrainConfig::default()
            },
            n_repeats: 1,
            ..BenchmarkConfig::default()
        };
        let report = run_benchmark(&cfg)
            .unwrap_or_else(|e| panic!("{} failed: {e}", model.name()));
        assert!(report.summary.test.is_some(), "{}", model.name());
    }
}

#[test]
fn split_strategies_run_through_harness() {
    for split in [
        SplitStrategy::Random,
        SplitStrategy::Scaffold,
        SplitStrategy::Time,
    ] {
        let cfg = BenchmarkConfig {
            split,
            train: quick_train(),
            n_repeats: 1,
            ..BenchmarkConfig::default()
        };
        run_benchmark(&cfg).unwrap_or_else(|e| panic!("{} failed: {e}", split.name()));
    }
    // Stratified needs single-task regression labels.
    let cfg = BenchmarkConfig {
        dataset: DatasetSource::SmokeRegression,
        model: ModelSpec::Krr,
        split: SplitStrategy::Stratified,
        train: quick_train(),
        n_repeats: 1,
        ..BenchmarkConfig::default()
    };
    run_benchmark(&cfg).unwrap();
}

#[test]
fn auto_metric_resolves_by_positive_rate() {
    let cfg = BenchmarkConfig {
        train: quick_train(),
        n_repeats: 1,
        ..BenchmarkConfig::default()
    };
    // Smoke corpus positive rate is ~34%, so auto resolves to ROC-AUC.
    let report = run_benchmark(&cfg).unwrap();
    assert_eq!(report.metric, MetricId::RocAuc);
    // Regression resolves to the configured default.
    let cfg = BenchmarkConfig {
        dataset: DatasetSource::SmokeRegression,
        model: ModelSpec::Krr,
        metric: MetricChoice::Auto {
            regression_default: MetricId::Mae,
        },
        train: quick_train(),
        n_repeats: 1,
        ..BenchmarkConfig::default()
    };
    let report = run_benchmark(&cfg).unwrap();
    assert_eq!(report.metric, MetricId::Mae);
}

#[test]
fn search_returns_better_candidate_and_never_reads_test_labels() {
    // Two candidates where one is plainly better: 0 epochs vs 60 epochs.
    let spec = SearchSpec {
        budget: 2,
        mode: SearchMode::Grid,
        space: vec![("epochs".into(), vec![0.0, 60.0])],
    };
    let base = TrainConfig::default();
    let test_labels_read = Cell::new(false);
    let outcome = hyperparameter_search(&base, &spec, 0, true, |cand| {
        // The closure only sees train+valid data by construction; flag if
        // anything were to pull test labels through this path.
        assert!(!test_labels_read.get());
        let cfg = BenchmarkConfig {
            train: cand.clone(),
            n_repeats: 1,
            ..BenchmarkConfig::default()
        };
        let report = run_benchmark(&cfg)?;
        Ok(report.summary.valid.unwrap().mean)
    })
    .unwrap();
    assert_eq!(outcome.best.epochs, 60);
    assert_eq!(outcome.trials.len(), 2);
    assert!(!test_labels_read.get());
}

#[test]
fn search_budget_one_returns_single_candidate() {
    let spec = SearchSpec {
        budget: 1,
        mode: SearchMode::Grid,
        space: vec![("krr_gamma".into(), vec![0.42])],
    };
    let outcome =
        hyperparameter_search(&TrainConfig::default(), &spec, 0, false, |c| Ok(c.krr_gamma))
            .unwrap();
    assert_eq!(outcome.best.krr_gamma, 0.42);
    assert_eq!(outcome.trials.len(), 1);
}

#[test]
fn harness_search_path_improves_validation() {
    let mut map = BTreeMap::new();
    map.insert("dataset".to_string(), "smoke_regression".to_string());
    map.insert("model".to_string(), "krr".to_string());
    map.insert("repeats".to_string(), "1".to_string());
    map.insert("search.budget".to_string(), "3".to_string());
    map.insert(
        "search.space".to_string(),
        "krr_gamma:0.001|0.02|0.3".to_string(),
    );
    let cfg = config_from_map(&map).unwrap();
    let report = run_benchmark(&cfg).unwrap();
    let trials = report.search_trials.as_ref().unwrap();
    assert_eq!(trials.len(), 3);
    // The chosen config's validation score matches the best trial.
    let best = trials
        .iter()
        .map(|t| t.validation_score)
        .fold(f64::INFINITY, f64::min);
    assert!(best.is_finite());
}

#[test]
fn config_file_round_trip_through_cli_types() {
    let text = "\
dataset = smoke
featurizer = ecfp
model = logreg
model.epochs = 5
split = random
repeats = 2
seed = 13
";
    let map = parse_flat(text).unwrap();
    let cfg = config_from_map(&map).unwrap();
    assert_eq!(cfg.n_repeats, 2);
    assert_eq!(cfg.seed, 13);
    let report = run_benchmark(&cfg).unwrap();
    assert_eq!(report.base_seed, 13);
    let md = render_markdown(&report);
    assert!(md.contains("| logreg (ecfp) |"));
}

#[test]
fn feature_cache_round_trip() {
    // Drive the cache through the CLI so MOLBENCH_CACHE_DIR stays scoped to
    // the child process (env vars are process-global otherwise).
    let exe = env!("CARGO_BIN_EXE_molbench");
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let run = |out: &std::path::Path| {
        let status = std::process::Command::new(exe)
            .args(["run", "--repeats", "1", "--seed", "5", "--out"])
            .arg(out)
            .env("MOLBENCH_CACHE_DIR", &cache)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    };
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    run(&out_a);
    let cached: Vec<_> = std::fs::read_dir(&cache).unwrap().collect();
    assert_eq!(cached.len(), 1, "expected one cache file");
    // Second run hits the cache; the report must be identical.
    run(&out_b);
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap()
    );
}

#[test]
fn cli_binary_runs_and_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_molbench");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let config = dir.path().join("bench.conf");
    std::fs::write(&config, "dataset = smoke\nmodel.epochs = 5\nrepeats = 1\n").unwrap();

    let status = std::process::Command::new(exe)
        .args(["run", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.exists());

    // Unknown model -> config error, exit 2.
    let status = std::process::Command::new(exe)
        .args(["run", "--model", "svm"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Missing dataset file -> stage failure, exit 3.
    let bad = dir.path().join("bad.conf");
    std::fs::write(
        &bad,
        "dataset = csv\ndataset.path = /nonexistent.csv\ndataset.tasks = y\ndataset.kind = regression\nmodel = krr\n",
    )
    .unwrap();
    let status = std::process::Command::new(exe)
        .args(["run", "--config"])
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn trained_model_save_load_predict_round_trip() {
    let table = data::smoke_classification();
    let feats = data::featurize_table(&table, &data::default_ecfp()).unwrap();
    let fps = match &feats.x {
        data::FeatureData::Fingerprints(f) => f.clone(),
        _ => unreachable!(),
    };
    let dense = data::fingerprints_to_dense(&fps);
    let cfg = TrainConfig {
        epochs: 15,
        ..TrainConfig::default()
    };
    let model =
        molbench::models::train_logreg(&dense, &table.y, &table.w, &cfg, "ecfp").unwrap();
    let before =
        molbench::models::predict(&model, molbench::models::ModelInput::Dense(&dense)).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.mbmd");
    molbench::models::save_model(&model, &path).unwrap();
    let loaded = molbench::models::load_model(&path).unwrap();
    assert_eq!(model, loaded);
    let after =
        molbench::models::predict(&loaded, molbench::models::ModelInput::Dense(&dense)).unwrap();
    assert_eq!(before, after);

    // Wrong input shape surfaces as a featurizer mismatch.
    let err = molbench::models::predict(
        &loaded,
        molbench::models::ModelInput::Fingerprints(&fps),
    )
    .unwrap_err();
    assert!(matches!(
        err,
        molbench::models::ModelError::FeaturizerMismatch { .. }
    ));
}

#[test]
fn search_selection_is_independent_of_test_labels() {
    // Two CSVs identical except for the labels of rows that land in the
    // test subset under the pinned seed. Search trials and the selected
    // config must be identical; only final test scores may differ.
    let table = data::smoke_regression();
    let n = table.n_rows();
    let split = molbench::split::random_split(n, (0.8, 0.1, 0.1), 7).unwrap();
    let write_csv = |poison: bool, path: &std::path::Path| {
        let mut text = String::from("id,smiles,y\n");
        for r in 0..n {
            let mut y = table.y.get(r, 0);
            if poison && split.test.contains(&r) {
                y += 1000.0;
            }
            text.push_str(&format!("{},{},{}\n", table.ids[r], table.smiles[r], y));
        }
        std::fs::write(path, text).unwrap();
    };
    let dir = tempfile::tempdir().unwrap();
    let clean = dir.path().join("clean.csv");
    let poisoned = dir.path().join("poisoned.csv");
    write_csv(false, &clean);
    write_csv(true, &poisoned);

    let run = |path: &std::path::Path| {
        let cfg = BenchmarkConfig {
            dataset: DatasetSource::Csv {
                name: "iso".into(),
                path: path.to_path_buf(),
                smiles_col: "smiles".into(),
                id_col: Some("id".into()),
                time_col: None,
                tasks: vec!["y".into()],
                kind: molbench::metrics::TaskKind::Regression,
            },
            model: ModelSpec::Krr,
            seed: 7,
            n_repeats: 1,
            search: Some(SearchSpec {
                budget: 3,
                mode: SearchMode::Grid,
                space: vec![("krr_gamma".into(), vec![0.01, 0.05, 0.2])],
            }),
            ..BenchmarkConfig::default()
        };
        run_benchmark(&cfg).unwrap()
    };
    let a = run(&clean);
    let b = run(&poisoned);
    // Selection saw only train+valid: identical trials, identical choice.
    assert_eq!(a.search_trials, b.search_trials);
    assert_eq!(a.summary.valid, b.summary.valid);
    // The poisoned test labels do change the final test score, proving the
    // test subset is where the runs differ.
    let (ta, tb) = (a.summary.test.unwrap().mean, b.summary.test.unwrap().mean);
    assert!((ta - tb).abs() > 1.0, "poisoning had no effect: {ta} vs {tb}");
}
