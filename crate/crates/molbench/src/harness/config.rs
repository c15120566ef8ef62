//! Benchmark configuration: a flat key/value config file plus CLI
//! overrides.
//!
//! File format: UTF-8 lines of `key = value`; blank lines and lines whose
//! first non-space character is `#` are ignored (no inline comments).
//! Recognized keys:
//!
//! ```text
//! dataset              smoke | smoke_regression | csv
//! dataset.name         dataset label (csv only)
//! dataset.path         CSV path (csv only)
//! dataset.smiles_col   SMILES column name
//! dataset.id_col       optional id column
//! dataset.time_col     optional timestamp column
//! dataset.tasks        comma-separated task column names
//! dataset.kind         classification | regression
//! featurizer           ecfp | graph | weave
//! featurizer.radius    ECFP radius (default 2)
//! featurizer.nbits     ECFP length (default 1024)
//! featurizer.max_graph_dist  weave distance clip (default 7)
//! split                random | scaffold | stratified | time
//! split.train / split.valid / split.test   fractions (default 0.8/0.1/0.1)
//! model                logreg | krr | irv | multitask | bypass | graphconv
//! model.learning_rate, model.l2, model.batch_size, model.epochs,
//! model.hidden (comma list), model.bypass_hidden (comma list),
//! model.graph_dense, model.init_std, model.bias_init, model.momentum,
//! model.k, model.irv_hidden, model.krr_penalty, model.krr_gamma,
//! model.max_train_rows
//! metric               auto | roc_auc | prc_auc | rmse | mae
//! metric.regression_default   rmse | mae (used when metric = auto)
//! seed                 base seed (default 0)
//! repeats              number of seeded repeats (default 3)
//! out                  report path (JSON)
//! balance_weights      true | false (default true for classification)
//! report.timing        none | summary (default none; summary adds
//!                      wall-clock fields to the JSON report)
//! budget_seconds       optional wall-clock guard for the whole run
//! search.budget        >0 enables hyperparameter search
//! search.mode          grid | random (default grid)
//! search.space         name:v1|v2;name2:v1|v2  (TrainConfig field names:
//!                      learning_rate, l2, batch_size, epochs, hidden,
//!                      graph_dense, init_std, momentum, k, irv_hidden,
//!                      krr_penalty, krr_gamma)
//! ```

use crate::data::TableFeaturizer;
use crate::metrics::{MetricId, TaskKind};
use crate::models::TrainConfig;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Smoke,
    SmokeRegression,
    Csv {
        name: String,
        path: PathBuf,
        smiles_col: String,
        id_col: Option<String>,
        time_col: Option<String>,
        tasks: Vec<String>,
        kind: TaskKind,
    },
}

impl DatasetSource {
    pub fn name(&self) -> String {
        match self {
            DatasetSource::Smoke => "smoke".into(),
            DatasetSource::SmokeRegression => "smoke_regression".into(),
            DatasetSource::Csv { name, .. } => name.clone(),
        }
    }

    pub fn kind(&self) -> TaskKind {
        match self {
            DatasetSource::Smoke => TaskKind::Classification,
            DatasetSource::SmokeRegression => TaskKind::Regression,
            DatasetSource::Csv { kind, .. } => *kind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitStrategy {
    Random,
    Scaffold,
    Stratified,
    Time,
}

impl SplitStrategy {
    pub fn name(self) -> &'static str {
        match self {
            SplitStrategy::Random => "random",
            SplitStrategy::Scaffold => "scaffold",
            SplitStrategy::Stratified => "stratified",
            SplitStrategy::Time => "time",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSpec {
    Logreg,
    Krr,
    Irv,
    Multitask,
    Bypass,
    GraphConv,
}

impl ModelSpec {
    pub fn name(self) -> &'static str {
        match self {
            ModelSpec::Logreg => "logreg",
            ModelSpec::Krr => "krr",
            ModelSpec::Irv => "irv",
            ModelSpec::Multitask => "multitask",
            ModelSpec::Bypass => "bypass",
            ModelSpec::GraphConv => "graphconv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricChoice {
    /// Resolve via the positive-rate recommendation (classification) or the
    /// configured regression default.
    Auto { regression_default: MetricId },
    Fixed(MetricId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Grid,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpec {
    pub budget: usize,
    pub mode: SearchMode,
    /// Ordered (parameter name, candidate values).
    pub space: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub dataset: DatasetSource,
    pub featurizer: TableFeaturizer,
    pub split: SplitStrategy,
    pub fracs: (f64, f64, f64),
    pub model: ModelSpec,
    pub train: TrainConfig,
    pub metric: MetricChoice,
    pub seed: u64,
    pub n_repeats: usize,
    pub out: Option<PathBuf>,
    pub balance_weights: bool,
    pub include_timing: bool,
    pub budget_seconds: Option<f64>,
    pub search: Option<SearchSpec>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            dataset: DatasetSource::Smoke,
            featurizer: crate::data::default_ecfp(),
            split: SplitStrategy::Random,
            fracs: (0.8, 0.1, 0.1),
            model: ModelSpec::Logreg,
            train: TrainConfig::default(),
            metric: MetricChoice::Auto {
                regression_default: MetricId::Rmse,
            },
            seed: 0,
            n_repeats: 3,
            out: None,
            balance_weights: true,
            include_timing: false,
            budget_seconds: None,
            search: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("config: {0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Parse the flat key/value document into a key map.
pub fn parse_flat(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("line {}: expected 'key = value'", no + 1)))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) if v.is_empty() => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| bad(format!("{key}: invalid value '{v}'"))),
    }
}

fn parse_usize_list(value: &str) -> Result<Vec<usize>, ConfigError> {
    value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| bad(format!("invalid layer size '{s}'")))
        })
        .collect()
}

/// Build a config from a key map (already merged with any overrides).
pub fn config_from_map(map: &BTreeMap<String, String>) -> Result<BenchmarkConfig, ConfigError> {
    let mut cfg = BenchmarkConfig::default();

    match map.get("dataset").map(|s| s.as_str()) {
        None | Some("smoke") => cfg.dataset = DatasetSource::Smoke,
        Some("smoke_regression") => cfg.dataset = DatasetSource::SmokeRegression,
        Some("csv") => {
            let path = map
                .get("dataset.path")
                .ok_or_else(|| bad("dataset = csv requires dataset.path"))?;
            let smiles_col = map
                .get("dataset.smiles_col")
                .cloned()
                .unwrap_or_else(|| "smiles".to_string());
            let tasks: Vec<String> = map
                .get("dataset.tasks")
                .ok_or_else(|| bad("dataset = csv requires dataset.tasks"))?
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if tasks.is_empty() {
                return Err(bad("dataset.tasks is empty"));
            }
            let kind = match map.get("dataset.kind").map(|s| s.as_str()) {
                Some("classification") => TaskKind::Classification,
                Some("regression") => TaskKind::Regression,
                Some(other) => return Err(bad(format!("dataset.kind: unknown '{other}'"))),
                None => return Err(bad("dataset = csv requires dataset.kind")),
            };
            cfg.dataset = DatasetSource::Csv {
                name: map
                    .get("dataset.name")
                    .cloned()
                    .unwrap_or_else(|| "csv".to_string()),
                path: PathBuf::from(path),
                smiles_col,
                id_col: map.get("dataset.id_col").filter(|s| !s.is_empty()).cloned(),
                time_col: map.get("dataset.time_col").filter(|s| !s.is_empty()).cloned(),
                tasks,
                kind,
            };
        }
        Some(other) => return Err(bad(format!("dataset: unknown '{other}'"))),
    }

    let radius = parse_num::<usize>(map, "featurizer.radius")?.unwrap_or(2);
    let nbits = parse_num::<u32>(map, "featurizer.nbits")?.unwrap_or(1024);
    let max_graph_dist = parse_num::<usize>(map, "featurizer.max_graph_dist")?.unwrap_or(7);
    cfg.featurizer = match map.get("featurizer").map(|s| s.as_str()) {
        None | Some("ecfp") => TableFeaturizer::Ecfp { radius, nbits },
        Some("graph") => TableFeaturizer::Graph,
        Some("weave") => TableFeaturizer::Weave { max_graph_dist },
        Some(other) => return Err(bad(format!("featurizer: unknown '{other}'"))),
    };

    cfg.split = match map.get("split").map(|s| s.as_str()) {
        None | Some("random") => SplitStrategy::Random,
        Some("scaffold") => SplitStrategy::Scaffold,
        Some("stratified") => SplitStrategy::Stratified,
        Some("time") => SplitStrategy::Time,
        Some(other) => return Err(bad(format!("split: unknown '{other}'"))),
    };
    let ft = parse_num::<f64>(map, "split.train")?.unwrap_or(0.8);
    let fv = parse_num::<f64>(map, "split.valid")?.unwrap_or(0.1);
    let fe = parse_num::<f64>(map, "split.test")?.unwrap_or(1.0 - ft - fv);
    cfg.fracs = (ft, fv, fe);

    cfg.model = match map.get("model").map(|s| s.as_str()) {
        None | Some("logreg") => ModelSpec::Logreg,
        Some("krr") => ModelSpec::Krr,
        Some("irv") => ModelSpec::Irv,
        Some("multitask") => ModelSpec::Multitask,
        Some("bypass") => ModelSpec::Bypass,
        Some("graphconv") => ModelSpec::GraphConv,
        Some(other) => return Err(bad(format!("model: unknown '{other}'"))),
    };

    let t = &mut cfg.train;
    if let Some(v) = parse_num::<f64>(map, "model.learning_rate")? {
        t.learning_rate = v;
    }
    if let Some(v) = parse_num::<f64>(map, "model.l2")? {
        t.l2 = v;
    }
    if let Some(v) = parse_num::<usize>(map, "model.batch_size")? {
        t.batch_size = v;
    }
    if let Some(v) = parse_num::<usize>(map, "model.epochs")? {
        t.epochs = v;
    }
    if let Some(v) = map.get("model.hidden").filter(|s| !s.is_empty()) {
        t.layer_sizes = parse_usize_list(v)?;
    }
    if let Some(v) = map.get("model.bypass_hidden").filter(|s| !s.is_empty()) {
        t.bypass_layer_sizes = parse_usize_list(v)?;
    }
    if let Some(v) = parse_num::<usize>(map, "model.graph_dense")? {
        t.graph_dense_size = v;
    }
    if let Some(v) = parse_num::<f64>(map, "model.init_std")? {
        t.init_std = v;
    }
    if let Some(v) = parse_num::<f64>(map, "model.bias_init")? {
        t.bias_init = v;
    }
    if let Some(v) = parse_num::<f64>(map, "model.momentum")? {
        t.momentum = v;
    }
    if let Some(v) = parse_num::<usize>(map, "model.k")? {
        t.k_neighbors = v;
    }
    if let Some(v) = parse_num::<usize>(map, "model.irv_hidden")? {
        t.irv_hidden = v;
    }
    if let Some(v) = parse_num::<f64>(map, "model.krr_penalty")? {
        t.krr_penalty = v;
    }
    if let Some(v) = parse_num::<f64>(map, "model.krr_gamma")? {
        t.krr_gamma = v;
    }
    if let Some(v) = parse_num::<usize>(map, "model.max_train_rows")? {
        t.max_train_rows = v;
    }

    let regression_default = match map.get("metric.regression_default").map(|s| s.as_str()) {
        None | Some("rmse") => MetricId::Rmse,
        Some("mae") => MetricId::Mae,
        Some(other) => {
            return Err(bad(format!(
                "metric.regression_default: unknown '{other}'"
            )))
        }
    };
    cfg.metric = match map.get("metric").map(|s| s.as_str()) {
        None | Some("auto") => MetricChoice::Auto { regression_default },
        Some(name) => MetricChoice::Fixed(
            name.parse::<MetricId>()
                .map_err(|e| bad(format!("metric: {e}")))?,
        ),
    };

    if let Some(v) = parse_num::<u64>(map, "seed")? {
        cfg.seed = v;
        cfg.train.seed = v;
    }
    if let Some(v) = parse_num::<usize>(map, "repeats")? {
        if v == 0 {
            return Err(bad("repeats must be >= 1"));
        }
        cfg.n_repeats = v;
    }
    if let Some(v) = map.get("out").filter(|s| !s.is_empty()) {
        cfg.out = Some(PathBuf::from(v));
    }
    match map.get("balance_weights").map(|s| s.as_str()) {
        None => {}
        Some("true") => cfg.balance_weights = true,
        Some("false") => cfg.balance_weights = false,
        Some(other) => return Err(bad(format!("balance_weights: unknown '{other}'"))),
    }
    match map.get("report.timing").map(|s| s.as_str()) {
        None | Some("none") => cfg.include_timing = false,
        Some("summary") => cfg.include_timing = true,
        Some(other) => return Err(bad(format!("report.timing: unknown '{other}'"))),
    }
    cfg.budget_seconds = parse_num::<f64>(map, "budget_seconds")?;

    let search_budget = parse_num::<usize>(map, "search.budget")?.unwrap_or(0);
    if search_budget > 0 {
        let mode = match map.get("search.mode").map(|s| s.as_str()) {
            None | Some("grid") => SearchMode::Grid,
            Some("random") => SearchMode::Random,
            Some(other) => return Err(bad(format!("search.mode: unknown '{other}'"))),
        };
        let space_text = map
            .get("search.space")
            .ok_or_else(|| bad("search.budget > 0 requires search.space"))?;
        let mut space = Vec::new();
        for part in space_text.split(';').filter(|s| !s.trim().is_empty()) {
            let (name, values) = part
                .split_once(':')
                .ok_or_else(|| bad(format!("search.space: expected name:v1|v2 in '{part}'")))?;
            let values: Vec<f64> = values
                .split('|')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("search.space: bad value '{v}'")))
                })
                .collect::<Result<_, _>>()?;
            if values.is_empty() {
                return Err(bad(format!("search.space: no values for '{name}'")));
            }
            space.push((name.trim().to_string(), values));
        }
        if space.is_empty() {
            return Err(bad("search.space is empty"));
        }
        cfg.search = Some(SearchSpec {
            budget: search_budget,
            mode,
            space,
        });
    }

    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &BenchmarkConfig) -> Result<(), ConfigError> {
    let (a, b, c) = cfg.fracs;
    if (a + b + c - 1.0).abs() > 1e-6 || a <= 0.0 || b < 0.0 || c < 0.0 {
        return Err(bad(format!(
            "split fractions must sum to 1 with train > 0 (got {a}/{b}/{c})"
        )));
    }
    Ok(())
}

/// Canonical flat rendition of a config; echoed into reports so two runs of
/// the same config produce identical bytes.
pub fn canonical_echo(cfg: &BenchmarkConfig) -> String {
    let mut parts: Vec<String> = Vec::new();
    parts.push(format!("dataset={}", cfg.dataset.name()));
    if let DatasetSource::Csv { path, tasks, kind, smiles_col, .. } = &cfg.dataset {
        parts.push(format!("dataset.path={}", path.display()));
        parts.push(format!("dataset.smiles_col={smiles_col}"));
        parts.push(format!("dataset.tasks={}", tasks.join(",")));
        parts.push(format!(
            "dataset.kind={}",
            match kind {
                TaskKind::Classification => "classification",
                TaskKind::Regression => "regression",
            }
        ));
    }
    match &cfg.featurizer {
        TableFeaturizer::Ecfp { radius, nbits } => {
            parts.push("featurizer=ecfp".into());
            parts.push(format!("featurizer.radius={radius}"));
            parts.push(format!("featurizer.nbits={nbits}"));
        }
        TableFeaturizer::Graph => parts.push("featurizer=graph".into()),
        TableFeaturizer::Weave { max_graph_dist } => {
            parts.push("featurizer=weave".into());
            parts.push(format!("featurizer.max_graph_dist={max_graph_dist}"));
        }
    }
    parts.push(format!("split={}", cfg.split.name()));
    parts.push(format!(
        "split.fracs={}/{}/{}",
        cfg.fracs.0, cfg.fracs.1, cfg.fracs.2
    ));
    parts.push(format!("model={}", cfg.model.name()));
    parts.push(format!("model.config_hash={:016x}", cfg.train.config_hash()));
    parts.push(format!(
        "metric={}",
        match &cfg.metric {
            MetricChoice::Auto { .. } => "auto".to_string(),
            MetricChoice::Fixed(m) => m.to_string(),
        }
    ));
    parts.push(format!("seed={}", cfg.seed));
    parts.push(format!("repeats={}", cfg.n_repeats));
    parts.push(format!("balance_weights={}", cfg.balance_weights));
    parts.join(" ")
}
