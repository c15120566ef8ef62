//! Labeled molecule tables: CSV ingestion, missing-label weights, label
//! transforms, class balancing and featurized dataset assembly.

mod corpus;

pub use corpus::{smoke_classification, smoke_regression, SMOKE_SMILES};

use crate::chem::parse_smiles;
use crate::featurize::{
    ecfp, graph_features, weave_features, AtomGraphFeatures, FeatureMeta, Fingerprint,
    PairFeatureMatrix, DEFAULT_MAX_GRAPH_DIST,
};
use crate::linalg::Mat;
use crate::metrics::TaskKind;
use crate::stablehash::{tag, StableHasher};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("column '{0}' missing from CSV header")]
    MissingColumn(String),
    #[error("no valid rows after parsing")]
    NoValidRows,
    #[error("row {row}, column '{col}': invalid label '{value}'")]
    InvalidLabel {
        row: usize,
        col: String,
        value: String,
    },
    #[error("task {0} has zero variance on the training subset")]
    ZeroVariance(usize),
    #[error("operation requires a {0:?} task")]
    WrongTaskKind(TaskKind),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Cell tokens treated as missing labels.
pub const NA_TOKENS: [&str; 3] = ["", "NA", "nan"];

/// Task metadata for a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    pub kind: TaskKind,
    pub task_names: Vec<String>,
}

impl TaskSpec {
    pub fn n_tasks(&self) -> usize {
        self.task_names.len()
    }
}

/// In-memory dataset: ids, SMILES, an n×T label matrix Y and weight matrix W
/// (weight 0 marks a missing label), plus optional per-row timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetTable {
    pub ids: Vec<String>,
    pub smiles: Vec<String>,
    pub y: Mat,
    pub w: Mat,
    pub time: Option<Vec<f64>>,
    pub task_spec: TaskSpec,
}

impl DatasetTable {
    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn n_tasks(&self) -> usize {
        self.task_spec.n_tasks()
    }

    /// Fraction of weighted labels that are positive, over all tasks.
    /// Feeds the metric recommendation for classification datasets.
    pub fn positive_rate(&self) -> f64 {
        let mut pos = 0.0;
        let mut total = 0.0;
        for r in 0..self.y.rows() {
            for t in 0..self.y.cols() {
                if self.w.get(r, t) > 0.0 {
                    total += 1.0;
                    if self.y.get(r, t) > 0.5 {
                        pos += 1.0;
                    }
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            pos / total
        }
    }

    /// Content hash over ids, SMILES, labels and weights; keys the feature
    /// cache.
    pub fn content_hash(&self) -> u64 {
        let mut h = StableHasher::new(tag::DATASET_CONTENT);
        for id in &self.ids {
            h.write_str(id);
        }
        for s in &self.smiles {
            h.write_str(s);
        }
        for v in self.y.data() {
            h.write_f64(*v);
        }
        for v in self.w.data() {
            h.write_f64(*v);
        }
        h.finish()
    }
}

/// Column mapping for [`load_csv`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub smiles_col: String,
    pub task_cols: Vec<String>,
    pub id_col: Option<String>,
    pub time_col: Option<String>,
    pub kind: TaskKind,
    pub dataset_name: String,
}

/// Result of loading a CSV: the table plus how many rows were dropped
/// because their SMILES failed to parse.
#[derive(Debug)]
pub struct CsvLoad {
    pub table: DatasetTable,
    pub dropped_smiles: usize,
}

/// Load a UTF-8, header-rowed CSV. Blank/NA cells become weight-0 labels;
/// rows whose SMILES fail to parse are dropped and counted.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<CsvLoad, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let col_index = |name: &str| -> Result<usize, DataError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let smiles_idx = col_index(&schema.smiles_col)?;
    let task_idx: Vec<usize> = schema
        .task_cols
        .iter()
        .map(|c| col_index(c))
        .collect::<Result<_, _>>()?;
    let id_idx = schema.id_col.as_deref().map(col_index).transpose()?;
    let time_idx = schema.time_col.as_deref().map(col_index).transpose()?;

    let mut ids = Vec::new();
    let mut smiles = Vec::new();
    let mut y_rows: Vec<Vec<f64>> = Vec::new();
    let mut w_rows: Vec<Vec<f64>> = Vec::new();
    let mut times = Vec::new();
    let mut dropped = 0usize;

    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        let smi = record.get(smiles_idx).unwrap_or("").trim().to_string();
        if parse_smiles(&smi).is_err() {
            dropped += 1;
            continue;
        }
        let mut y_row = Vec::with_capacity(task_idx.len());
        let mut w_row = Vec::with_capacity(task_idx.len());
        for (&ti, col) in task_idx.iter().zip(&schema.task_cols) {
            let cell = record.get(ti).unwrap_or("").trim();
            if NA_TOKENS.contains(&cell) {
                y_row.push(0.0);
                w_row.push(0.0);
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| DataError::InvalidLabel {
                row: row_no,
                col: col.clone(),
                value: cell.to_string(),
            })?;
            if schema.kind == TaskKind::Classification && value != 0.0 && value != 1.0 {
                return Err(DataError::InvalidLabel {
                    row: row_no,
                    col: col.clone(),
                    value: cell.to_string(),
                });
            }
            y_row.push(value);
            w_row.push(1.0);
        }
        let id = match id_idx {
            Some(i) => record.get(i).unwrap_or("").trim().to_string(),
            None => format!("row{row_no}"),
        };
        if let Some(ti) = time_idx {
            let cell = record.get(ti).unwrap_or("").trim();
            let t: f64 = cell.parse().map_err(|_| DataError::InvalidLabel {
                row: row_no,
                col: schema.time_col.clone().unwrap_or_default(),
                value: cell.to_string(),
            })?;
            times.push(t);
        }
        ids.push(id);
        smiles.push(smi);
        y_rows.push(y_row);
        w_rows.push(w_row);
    }

    if ids.is_empty() {
        return Err(DataError::NoValidRows);
    }
    let table = DatasetTable {
        ids,
        smiles,
        y: Mat::from_rows(&y_rows),
        w: Mat::from_rows(&w_rows),
        time: if time_idx.is_some() { Some(times) } else { None },
        task_spec: TaskSpec {
            name: schema.dataset_name.clone(),
            kind: schema.kind,
            task_names: schema.task_cols.clone(),
        },
    };
    Ok(CsvLoad {
        table,
        dropped_smiles: dropped,
    })
}

/// Per-task standardization parameters fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScore {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl ZScore {
    pub fn apply_value(&self, task: usize, y: f64) -> f64 {
        (y - self.mu[task]) / self.sigma[task]
    }

    pub fn invert_value(&self, task: usize, z: f64) -> f64 {
        z * self.sigma[task] + self.mu[task]
    }

    /// Invert a whole prediction matrix (rows × tasks).
    pub fn invert(&self, preds: &Mat) -> Mat {
        let mut out = preds.clone();
        for r in 0..out.rows() {
            for t in 0..out.cols() {
                out.set(r, t, self.invert_value(t, preds.get(r, t)));
            }
        }
        out
    }
}

/// Standardize regression labels with mean and sample standard deviation
/// computed on weighted training rows only. The returned table carries
/// transformed labels everywhere; the inverse restores originals to 1e-12.
pub fn zscore_transform(
    table: &DatasetTable,
    train: &[usize],
) -> Result<(DatasetTable, ZScore), DataError> {
    if table.task_spec.kind != TaskKind::Regression {
        return Err(DataError::WrongTaskKind(TaskKind::Regression));
    }
    let t_count = table.n_tasks();
    let mut mu = vec![0.0; t_count];
    let mut sigma = vec![0.0; t_count];
    for t in 0..t_count {
        let vals: Vec<f64> = train
            .iter()
            .filter(|&&r| table.w.get(r, t) > 0.0)
            .map(|&r| table.y.get(r, t))
            .collect();
        if vals.len() < 2 {
            return Err(DataError::ZeroVariance(t));
        }
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (vals.len() - 1) as f64;
        let s = var.sqrt();
        if s <= 1e-12 {
            return Err(DataError::ZeroVariance(t));
        }
        mu[t] = m;
        sigma[t] = s;
    }
    let z = ZScore { mu, sigma };
    let mut out = table.clone();
    for r in 0..out.y.rows() {
        for t in 0..t_count {
            out.y.set(r, t, z.apply_value(t, table.y.get(r, t)));
        }
    }
    Ok((out, z))
}

/// Rescale weights per task so positives and negatives carry equal total
/// weight. Tasks with a single class are left unchanged and flagged.
/// Zero-weight (missing) entries are untouched.
pub fn balance_weights(table: &DatasetTable) -> Result<(DatasetTable, Vec<usize>), DataError> {
    if table.task_spec.kind != TaskKind::Classification {
        return Err(DataError::WrongTaskKind(TaskKind::Classification));
    }
    let mut out = table.clone();
    let mut flagged = Vec::new();
    for t in 0..table.n_tasks() {
        let mut pos_sum = 0.0;
        let mut neg_sum = 0.0;
        for r in 0..table.n_rows() {
            let w = table.w.get(r, t);
            if w > 0.0 {
                if table.y.get(r, t) > 0.5 {
                    pos_sum += w;
                } else {
                    neg_sum += w;
                }
            }
        }
        if pos_sum == 0.0 || neg_sum == 0.0 {
            flagged.push(t);
            continue;
        }
        let scale = neg_sum / pos_sum;
        for r in 0..table.n_rows() {
            let w = table.w.get(r, t);
            if w > 0.0 && table.y.get(r, t) > 0.5 {
                out.w.set(r, t, w * scale);
            }
        }
    }
    Ok((out, flagged))
}

/// Featurized form of a table, aligned row-for-row with ids, Y and W.
#[derive(Debug, Clone)]
pub struct FeaturizedDataset {
    pub x: FeatureData,
    pub y: Mat,
    pub w: Mat,
    pub ids: Vec<String>,
    pub meta: FeatureMeta,
}

/// Featurized inputs in the shape each model family expects.
#[derive(Debug, Clone)]
pub enum FeatureData {
    Dense(Mat),
    Fingerprints(Vec<Fingerprint>),
    Graphs(Vec<AtomGraphFeatures>),
    /// Graphs plus pair features (weave).
    Weave(Vec<(AtomGraphFeatures, PairFeatureMatrix)>),
}

impl FeatureData {
    pub fn n_rows(&self) -> usize {
        match self {
            FeatureData::Dense(m) => m.rows(),
            FeatureData::Fingerprints(v) => v.len(),
            FeatureData::Graphs(v) => v.len(),
            FeatureData::Weave(v) => v.len(),
        }
    }
}

/// SMILES-driven featurizers the table pipeline knows how to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TableFeaturizer {
    /// Folded circular fingerprint, reported both as bits and dense 0/1.
    Ecfp { radius: usize, nbits: u32 },
    /// Graph-convolution atom features.
    Graph,
    /// Graph features plus pair features.
    Weave { max_graph_dist: usize },
}

impl TableFeaturizer {
    pub fn id(&self) -> &'static str {
        match self {
            TableFeaturizer::Ecfp { .. } => "ecfp",
            TableFeaturizer::Graph => "graph",
            TableFeaturizer::Weave { .. } => "weave",
        }
    }

    pub fn params_hash(&self) -> u64 {
        let mut h = StableHasher::new(tag::FEATURIZER_PARAMS);
        h.write_str(self.id());
        match self {
            TableFeaturizer::Ecfp { radius, nbits } => {
                h.write_u64(*radius as u64);
                h.write_u64(*nbits as u64);
            }
            TableFeaturizer::Graph => {}
            TableFeaturizer::Weave { max_graph_dist } => {
                h.write_u64(*max_graph_dist as u64);
            }
        }
        h.finish()
    }
}

pub fn default_ecfp() -> TableFeaturizer {
    TableFeaturizer::Ecfp {
        radius: 2,
        nbits: 1024,
    }
}

pub fn default_weave() -> TableFeaturizer {
    TableFeaturizer::Weave {
        max_graph_dist: DEFAULT_MAX_GRAPH_DIST,
    }
}

/// Featurize every row of a table. Rows are expected to be parseable (CSV
/// loading already dropped anything else).
pub fn featurize_table(
    table: &DatasetTable,
    featurizer: &TableFeaturizer,
) -> Result<FeaturizedDataset, crate::featurize::FeaturizeError> {
    let meta = FeatureMeta {
        featurizer_id: featurizer.id().to_string(),
        version: crate::featurize::FORMAT_VERSION,
        params_hash: featurizer.params_hash(),
    };
    let x = match featurizer {
        TableFeaturizer::Ecfp { radius, nbits } => {
            let mut fps = Vec::with_capacity(table.n_rows());
            for smi in &table.smiles {
                let mol = parse_smiles(smi).expect("table rows pre-validated");
                fps.push(ecfp(&mol, *radius, *nbits)?);
            }
            FeatureData::Fingerprints(fps)
        }
        TableFeaturizer::Graph => {
            let graphs = table
                .smiles
                .iter()
                .map(|smi| graph_features(&parse_smiles(smi).expect("pre-validated")))
                .collect();
            FeatureData::Graphs(graphs)
        }
        TableFeaturizer::Weave { max_graph_dist } => {
            let pairs = table
                .smiles
                .iter()
                .map(|smi| {
                    weave_features(&parse_smiles(smi).expect("pre-validated"), *max_graph_dist)
                })
                .collect();
            FeatureData::Weave(pairs)
        }
    };
    Ok(FeaturizedDataset {
        x,
        y: table.y.clone(),
        w: table.w.clone(),
        ids: table.ids.clone(),
        meta,
    })
}

/// Dense view of a fingerprint list (rows of 0/1), the input form for
/// logreg, KRR and the dense networks.
pub fn fingerprints_to_dense(fps: &[Fingerprint]) -> Mat {
    let nbits = fps.first().map_or(0, |f| f.nbits()) as usize;
    let mut m = Mat::zeros(fps.len(), nbits);
    for (r, fp) in fps.iter().enumerate() {
        for bit in fp.set_bits() {
            m.set(r, bit as usize, 1.0);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        (dir, path)
    }

    fn schema(kind: TaskKind) -> CsvSchema {
        CsvSchema {
            smiles_col: "smiles".into(),
            task_cols: vec!["y".into()],
            id_col: Some("id".into()),
            time_col: None,
            kind,
            dataset_name: "test".into(),
        }
    }

    #[test]
    fn blank_cell_becomes_weight_zero() {
        let (_d, path) = write_csv("id,smiles,y\na,CCO,1\nb,CCN,\nc,CCC,0\n");
        let load = load_csv(&path, &schema(TaskKind::Classification)).unwrap();
        assert_eq!(load.table.n_rows(), 3);
        let zeros: Vec<f64> = (0..3).map(|r| load.table.w.get(r, 0)).collect();
        assert_eq!(zeros, vec![1.0, 0.0, 1.0]);
        assert_eq!(load.table.y.get(1, 0), 0.0);
    }

    #[test]
    fn bad_smiles_dropped_and_counted() {
        let (_d, path) = write_csv(
            "id,smiles,y\na,CCO,1\nb,XYZ###,0\nc,CCC,0\nd,CCN,1\ne,C1CC,0\nf,CO,1\ng,CN,0\nh,CC,1\ni,CCCl,0\nj,CCBr,1\n",
        );
        let load = load_csv(&path, &schema(TaskKind::Classification)).unwrap();
        assert_eq!(load.dropped_smiles, 2);
        assert_eq!(load.table.n_rows(), 8);
    }

    #[test]
    fn missing_column_rejected() {
        let (_d, path) = write_csv("id,smiles,other\na,CCO,1\n");
        assert!(matches!(
            load_csv(&path, &schema(TaskKind::Classification)),
            Err(DataError::MissingColumn(c)) if c == "y"
        ));
    }

    #[test]
    fn no_valid_rows() {
        let (_d, path) = write_csv("id,smiles,y\na,!!!,1\n");
        assert!(matches!(
            load_csv(&path, &schema(TaskKind::Classification)),
            Err(DataError::NoValidRows)
        ));
    }

    #[test]
    fn nonbinary_classification_label_rejected() {
        let (_d, path) = write_csv("id,smiles,y\na,CCO,0.7\n");
        assert!(matches!(
            load_csv(&path, &schema(TaskKind::Classification)),
            Err(DataError::InvalidLabel { .. })
        ));
    }

    #[test]
    fn zscore_round_trip() {
        let table = smoke_regression();
        let train: Vec<usize> = (0..table.n_rows()).collect();
        let (transformed, z) = zscore_transform(&table, &train).unwrap();
        // Train mean ~0 after transform.
        let mean: f64 = (0..transformed.n_rows())
            .map(|r| transformed.y.get(r, 0))
            .sum::<f64>()
            / transformed.n_rows() as f64;
        assert!(mean.abs() < 1e-10);
        // Inverse restores originals.
        for r in 0..table.n_rows() {
            let back = z.invert_value(0, transformed.y.get(r, 0));
            assert!((back - table.y.get(r, 0)).abs() < 1e-12);
        }
    }

    #[test]
    fn zscore_sample_std() {
        let mut table = smoke_regression();
        table.ids.truncate(3);
        table.smiles.truncate(3);
        table.time = None;
        table.y = Mat::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]);
        table.w = Mat::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]);
        let (_, z) = zscore_transform(&table, &[0, 1, 2]).unwrap();
        assert!((z.mu[0] - 2.0).abs() < 1e-12);
        assert!((z.sigma[0] - 1.0).abs() < 1e-12); // sample std of [1,2,3]
    }

    #[test]
    fn zscore_constant_labels() {
        let mut table = smoke_regression();
        for r in 0..table.n_rows() {
            table.y.set(r, 0, 5.0);
        }
        let train: Vec<usize> = (0..table.n_rows()).collect();
        assert!(matches!(
            zscore_transform(&table, &train),
            Err(DataError::ZeroVariance(0))
        ));
    }

    #[test]
    fn balance_weights_ratios() {
        let mut table = smoke_classification();
        // Craft 1 positive, 9 negatives on the first ten rows, rest missing.
        for r in 0..table.n_rows() {
            let (y, w) = if r == 0 {
                (1.0, 1.0)
            } else if r < 10 {
                (0.0, 1.0)
            } else {
                (0.0, 0.0)
            };
            table.y.set(r, 0, y);
            table.w.set(r, 0, w);
        }
        let (balanced, flagged) = balance_weights(&table).unwrap();
        assert!(flagged.is_empty());
        assert!((balanced.w.get(0, 0) - 9.0).abs() < 1e-12);
        assert_eq!(balanced.w.get(1, 0), 1.0);
        // Missing entries untouched.
        assert_eq!(balanced.w.get(20, 0), 0.0);
    }

    #[test]
    fn balance_weights_single_class_flagged() {
        let mut table = smoke_classification();
        for r in 0..table.n_rows() {
            table.y.set(r, 0, 1.0);
            table.w.set(r, 0, 1.0);
        }
        let (out, flagged) = balance_weights(&table).unwrap();
        assert_eq!(flagged, vec![0]);
        assert_eq!(out.w, table.w);
    }

    #[test]
    fn id_alignment_preserved() {
        let table = smoke_classification();
        let feats = featurize_table(&table, &default_ecfp()).unwrap();
        assert_eq!(feats.ids, table.ids);
        assert_eq!(feats.y, table.y);
        let split = crate::split::random_split(table.n_rows(), (0.8, 0.1, 0.1), 5).unwrap();
        for &i in &split.test {
            assert_eq!(feats.ids[i], table.ids[i]);
        }
    }
}
