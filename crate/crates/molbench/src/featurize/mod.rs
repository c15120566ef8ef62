//! Molecular featurizers: fixed-length numeric representations of 2D graphs
//! and 3D geometries.
//!
//! Everything here is a pure function of (input, parameters, seed); featurized
//! values are bit-reproducible across platforms because all hashing goes
//! through [`crate::stablehash`].

mod coulomb;
mod ecfp;
mod export;
mod graph;
mod symmetry;

pub use coulomb::{cm_randomize_expand, coulomb_matrix, CoulombMatrix, Geometry};
pub use ecfp::{ecfp, ecfp_atom_identifiers, tanimoto};
pub use export::{export_csv, export_binary, import_binary, FeatureMeta, FORMAT_VERSION};
pub use graph::{
    graph_features, weave_features, AtomGraphFeatures, PairFeatureMatrix, ATOM_FEATURE_WIDTH,
    DEFAULT_MAX_GRAPH_DIST, ELEMENT_LIST,
};
pub use symmetry::{symmetry_functions, SymmetryParams};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum FeaturizeError {
    #[error("molecule has no atoms")]
    EmptyMolecule,
    #[error("fingerprint lengths differ: {0} vs {1}")]
    LengthMismatch(u32, u32),
    #[error("geometry has {natoms} atoms but max_atoms is {max_atoms}")]
    TooManyAtoms { natoms: usize, max_atoms: usize },
    #[error("atoms {0} and {1} are coincident (distance < 1e-8)")]
    CoincidentAtoms(usize, usize),
    #[error("element '{0}' is not in the symmetry-function element set")]
    UnknownElement(String),
    #[error("geometry fields have mismatched lengths")]
    GeometryShape,
}

/// Fixed-length binary fingerprint with optional per-bit counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    nbits: u32,
    words: Vec<u64>,
    counts: Option<BTreeMap<u32, u32>>,
}

impl Fingerprint {
    pub fn new(nbits: u32) -> Self {
        let words = (nbits as usize).div_ceil(64);
        Fingerprint {
            nbits,
            words: vec![0; words],
            counts: None,
        }
    }

    pub fn nbits(&self) -> u32 {
        self.nbits
    }

    #[inline]
    pub fn set(&mut self, bit: u32) {
        debug_assert!(bit < self.nbits);
        self.words[(bit / 64) as usize] |= 1u64 << (bit % 64);
    }

    #[inline]
    pub fn contains(&self, bit: u32) -> bool {
        bit < self.nbits && self.words[(bit / 64) as usize] >> (bit % 64) & 1 == 1
    }

    /// Set a bit and bump its count.
    pub fn add(&mut self, bit: u32) {
        self.set(bit);
        *self
            .counts
            .get_or_insert_with(BTreeMap::new)
            .entry(bit)
            .or_insert(0) += 1;
    }

    pub fn popcount(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn set_bits(&self) -> Vec<u32> {
        let mut bits = Vec::with_capacity(self.popcount() as usize);
        for (wi, &w) in self.words.iter().enumerate() {
            let mut word = w;
            while word != 0 {
                let b = word.trailing_zeros();
                bits.push(wi as u32 * 64 + b);
                word &= word - 1;
            }
        }
        bits
    }

    pub fn counts(&self) -> Option<&BTreeMap<u32, u32>> {
        self.counts.as_ref()
    }

    pub fn intersection_count(&self, other: &Fingerprint) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    pub fn union_count(&self, other: &Fingerprint) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a | b).count_ones())
            .sum()
    }

    /// Dense 0/1 expansion, the form consumed by dense-feature models.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.nbits as usize];
        for bit in self.set_bits() {
            v[bit as usize] = 1.0;
        }
        v
    }
}
