//! Protein–ligand complexes: PDB-subset ingestion, binding-pocket
//! extraction and the length-2052 grid featurizer.

mod grid;
mod pdb;

pub use grid::{extract_pocket, grid_featurize, ComplexFeature, GRID_FEATURE_LEN};
pub use pdb::parse_structure;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum StructBioError {
    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("no ATOM/HETATM records found")]
    NoAtoms,
    #[error("structure is empty")]
    EmptyStructure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoleculeRole {
    Protein,
    Ligand,
}

/// Formal-charge class assigned from residue/atom-name tables or explicit
/// PDB charge columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargeClass {
    Cationic,
    Anionic,
    Neutral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructAtom {
    pub element: String,
    pub pos: [f64; 3],
    pub residue: String,
    pub atom_name: String,
    pub chain: char,
    pub charge_class: ChargeClass,
}

impl StructAtom {
    pub fn distance(&self, other: &StructAtom) -> f64 {
        let d0 = self.pos[0] - other.pos[0];
        let d1 = self.pos[1] - other.pos[1];
        let d2 = self.pos[2] - other.pos[2];
        (d0 * d0 + d1 * d1 + d2 * d2).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    pub atoms: Vec<StructAtom>,
    pub role: MoleculeRole,
}

impl Structure {
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }
}
