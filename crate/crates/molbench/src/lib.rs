//! molbench — a self-contained molecular machine-learning benchmark toolkit.
//!
//! The crate wires a SMILES parser, molecular featurizers, dataset splitters,
//! evaluation metrics and a set of from-scratch trainable models into a
//! reproducible `run_benchmark` pipeline. Everything is deterministic given a
//! seed: fingerprints, splits, training runs and reports are bit-reproducible
//! across invocations and platforms.
//!
//! Module map:
//! - [`chem`]: SMILES parsing, ring perception, Bemis–Murcko scaffolds.
//! - [`featurize`]: ECFP, Coulomb matrices, symmetry functions, graph and
//!   weave features, feature-matrix export.
//! - [`structbio`]: PDB-subset ingestion and the protein–ligand grid
//!   featurizer (length-2052 descriptor).
//! - [`data`]: CSV dataset tables, label transforms, class balancing, the
//!   bundled smoke corpus.
//! - [`split`]: random / scaffold / stratified / time splitters.
//! - [`metrics`]: ROC-AUC, PRC-AUC, RMSE, MAE, metric recommendation.
//! - [`models`]: logistic regression, kernel ridge regression, IRV,
//!   multitask/bypass dense networks, a minimal graph convolutional network.
//! - [`harness`]: benchmark configuration, pipeline, hyperparameter search
//!   and report emission (backs the `molbench` CLI).

pub mod chem;
pub mod data;
pub mod featurize;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod split;
pub mod stablehash;
pub mod structbio;

/// Library version, echoed into benchmark reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
