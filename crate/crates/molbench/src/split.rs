//! Dataset splitters: random, scaffold, stratified and time-based
//! train/validation/test partitions.

use crate::chem::{graph_key, murcko_scaffold, parse_smiles};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum SplitError {
    #[error("fractions must be in [0,1] and sum to 1 (got {0:?})")]
    BadFractions([f64; 3]),
    #[error("too few rows for a stratified split: {0} < 10")]
    TooFewRows(usize),
    #[error("row {0} has no timestamp")]
    MissingTimestamps(usize),
    #[error("row {row}: SMILES failed to parse: {message}")]
    UnparseableSmiles { row: usize, message: String },
    #[error("split file does not match dataset: {0}")]
    IdMismatch(String),
    #[error("need at least 3 rows, got {0}")]
    TooSmall(usize),
}

/// Disjoint, covering index partition with the provenance needed to
/// reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
    pub fracs: [f64; 3],
    pub strategy: String,
    pub seed: u64,
}

impl SplitIndices {
    pub fn n_total(&self) -> usize {
        self.train.len() + self.valid.len() + self.test.len()
    }

    /// Id-based serialization so splits can be pinned in version control
    /// independent of row order.
    pub fn to_file(&self, ids: &[String]) -> SplitFile {
        let pick = |idx: &[usize]| idx.iter().map(|&i| ids[i].clone()).collect();
        SplitFile {
            strategy: self.strategy.clone(),
            seed: self.seed,
            fracs: self.fracs,
            train_ids: pick(&self.train),
            valid_ids: pick(&self.valid),
            test_ids: pick(&self.test),
        }
    }

    pub fn from_file(file: &SplitFile, ids: &[String]) -> Result<SplitIndices, SplitError> {
        let lookup: BTreeMap<&str, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let resolve = |names: &[String]| -> Result<Vec<usize>, SplitError> {
            names
                .iter()
                .map(|n| {
                    lookup
                        .get(n.as_str())
                        .copied()
                        .ok_or_else(|| SplitError::IdMismatch(n.clone()))
                })
                .collect()
        };
        Ok(SplitIndices {
            train: resolve(&file.train_ids)?,
            valid: resolve(&file.valid_ids)?,
            test: resolve(&file.test_ids)?,
            fracs: file.fracs,
            strategy: file.strategy.clone(),
            seed: file.seed,
        })
    }
}

/// JSON-serializable split pinned by row ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitFile {
    pub strategy: String,
    pub seed: u64,
    pub fracs: [f64; 3],
    pub train_ids: Vec<String>,
    pub valid_ids: Vec<String>,
    pub test_ids: Vec<String>,
}

fn validate_fracs(fracs: (f64, f64, f64)) -> Result<[f64; 3], SplitError> {
    let arr = [fracs.0, fracs.1, fracs.2];
    let sum: f64 = arr.iter().sum();
    if arr.iter().any(|&f| !(0.0..=1.0).contains(&f)) || (sum - 1.0).abs() > 1e-6 {
        return Err(SplitError::BadFractions(arr));
    }
    Ok(arr)
}

/// Contiguous subset sizes: round train and valid to the nearest row, give
/// the remainder to test. Each subset lands within ±1 row of its fraction.
fn cut_sizes(n: usize, fracs: [f64; 3]) -> (usize, usize) {
    let n_train = ((n as f64 * fracs[0]).round() as usize).min(n);
    let n_valid = ((n as f64 * fracs[1]).round() as usize).min(n - n_train);
    (n_train, n_valid)
}

/// Seeded Fisher–Yates shuffle, then a contiguous cut.
pub fn random_split(
    n: usize,
    fracs: (f64, f64, f64),
    seed: u64,
) -> Result<SplitIndices, SplitError> {
    let fracs = validate_fracs(fracs)?;
    if n < 3 {
        return Err(SplitError::TooSmall(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let (n_train, n_valid) = cut_sizes(n, fracs);
    Ok(SplitIndices {
        train: order[..n_train].to_vec(),
        valid: order[n_train..n_train + n_valid].to_vec(),
        test: order[n_train + n_valid..].to_vec(),
        fracs,
        strategy: "random".into(),
        seed,
    })
}

/// Group rows by the graph key of their Bemis–Murcko scaffold, sort groups
/// largest-first (ties by key), then greedily fill train, then valid, then
/// test with whole groups. No scaffold ever appears in two subsets.
pub fn scaffold_split(smiles: &[String], fracs: (f64, f64, f64)) -> Result<SplitIndices, SplitError> {
    let fracs = validate_fracs(fracs)?;
    let n = smiles.len();
    if n < 3 {
        return Err(SplitError::TooSmall(n));
    }
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (row, smi) in smiles.iter().enumerate() {
        let mol = parse_smiles(smi).map_err(|e| SplitError::UnparseableSmiles {
            row,
            message: e.to_string(),
        })?;
        let key = graph_key(&murcko_scaffold(&mol));
        groups.entry(key).or_default().push(row);
    }
    let mut ordered: Vec<(String, Vec<usize>)> = groups.into_iter().collect();
    ordered.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));

    let target_train = n as f64 * fracs[0];
    let target_valid = n as f64 * fracs[1];
    let (mut train, mut valid, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for (_, rows) in ordered {
        if (train.len() as f64) < target_train {
            train.extend(rows);
        } else if (valid.len() as f64) < target_valid {
            valid.extend(rows);
        } else {
            test.extend(rows);
        }
    }
    Ok(SplitIndices {
        train,
        valid,
        test,
        fracs,
        strategy: "scaffold".into(),
        seed: 0,
    })
}

/// Sort by label, slice into consecutive blocks of 10, and draw the
/// within-block assignment (8/1/1 under the default fractions) with a seeded
/// shuffle, so every subset spans the full label range up to block
/// granularity.
pub fn stratified_split(
    y: &[f64],
    fracs: (f64, f64, f64),
    seed: u64,
) -> Result<SplitIndices, SplitError> {
    const BLOCK: usize = 10;
    let fracs = validate_fracs(fracs)?;
    let n = y.len();
    if n < BLOCK {
        return Err(SplitError::TooFewRows(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        y[a].partial_cmp(&y[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (mut train, mut valid, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for block in order.chunks(BLOCK) {
        let mut rows = block.to_vec();
        rows.shuffle(&mut rng);
        let k = rows.len();
        let n_train = ((k as f64 * fracs[0]).round() as usize).min(k);
        let n_valid = ((k as f64 * fracs[1]).round() as usize).min(k - n_train);
        train.extend_from_slice(&rows[..n_train]);
        valid.extend_from_slice(&rows[n_train..n_train + n_valid]);
        test.extend_from_slice(&rows[n_train + n_valid..]);
    }
    Ok(SplitIndices {
        train,
        valid,
        test,
        fracs,
        strategy: "stratified".into(),
        seed,
    })
}

/// Sort ascending by timestamp (ties by row index) and cut contiguously:
/// oldest rows train, newest rows test.
pub fn time_split(
    times: &[Option<f64>],
    fracs: (f64, f64, f64),
) -> Result<SplitIndices, SplitError> {
    let fracs = validate_fracs(fracs)?;
    let n = times.len();
    if n < 3 {
        return Err(SplitError::TooSmall(n));
    }
    for (row, t) in times.iter().enumerate() {
        if t.is_none() {
            return Err(SplitError::MissingTimestamps(row));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        times[a]
            .unwrap()
            .partial_cmp(&times[b].unwrap())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let (n_train, n_valid) = cut_sizes(n, fracs);
    Ok(SplitIndices {
        train: order[..n_train].to_vec(),
        valid: order[n_train..n_train + n_valid].to_vec(),
        test: order[n_train + n_valid..].to_vec(),
        fracs,
        strategy: "time".into(),
        seed: 0,
    })
}
