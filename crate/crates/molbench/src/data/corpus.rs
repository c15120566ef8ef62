//! Bundled 50-molecule synthetic smoke corpus.
//!
//! Small enough to keep every pipeline test fast, varied enough to exercise
//! aromatics, aliphatic rings, charges, halogens and a dot-disconnected
//! salt. Labels are synthetic and deterministic: the classification task
//! marks nitrogen-containing molecules, the regression task scores graph
//! size and ring content. Timestamps are synthetic years with ties.

use super::{DatasetTable, TaskSpec};
use crate::chem::parse_smiles;
use crate::linalg::Mat;
use crate::metrics::TaskKind;

pub const SMOKE_SMILES: [&str; 50] = [
    "CCO",
    "CC(=O)O",
    "c1ccccc1",
    "Cc1ccccc1",
    "CCN",
    "CCCCCC",
    "c1ccncc1",
    "Cc1ccncc1",
    "CC(C)O",
    "CC(C)N",
    "C1CCCCC1",
    "C1CCNCC1",
    "OCC(O)CO",
    "CCOC(=O)C",
    "CCNC(=O)C",
    "Clc1ccccc1",
    "Brc1ccccc1",
    "Oc1ccccc1",
    "Nc1ccccc1",
    "CCc1ccccc1",
    "COc1ccccc1",
    "CN(C)C",
    "CCOCC",
    "CCSCC",
    "O=C(O)c1ccccc1",
    "O=C(N)c1ccccc1",
    "CC(=O)Oc1ccccc1C(=O)O",
    "Cc1ccc(C)cc1",
    "Cc1ccc(N)cc1",
    "Cc1ccc(O)cc1",
    "Cc1ccc(Cl)cc1",
    "FC(F)(F)c1ccccc1",
    "CC1CCCCC1",
    "CC1CCNCC1",
    "c1ccc2ccccc2c1",
    "Cc1ccc2ccccc2c1",
    "c1ccc(-c2ccccc2)cc1",
    "CCCCO",
    "CCCCN",
    "CCCCCl",
    "CC(C)(C)O",
    "CC(C)(C)N",
    "[NH4+].[Cl-]",
    "CC(=O)[O-]",
    "C[N+](C)(C)C",
    "O=S(=O)(O)O",
    "NCCO",
    "NCCN",
    "CP(C)C",
    "ClCCCl",
];

fn ids() -> Vec<String> {
    (0..SMOKE_SMILES.len())
        .map(|i| format!("m{:03}", i + 1))
        .collect()
}

fn times() -> Vec<f64> {
    // Two molecules per synthetic year, so the time splitter sees ties.
    (0..SMOKE_SMILES.len())
        .map(|i| (1980 + i / 2) as f64)
        .collect()
}

/// Single-task classification table: label 1 when the molecule contains
/// nitrogen.
pub fn smoke_classification() -> DatasetTable {
    let n = SMOKE_SMILES.len();
    let mut y = Mat::zeros(n, 1);
    for (i, smi) in SMOKE_SMILES.iter().enumerate() {
        let mol = parse_smiles(smi).expect("corpus molecules parse");
        let has_n = mol.atoms.iter().any(|a| a.element == "N");
        y.set(i, 0, if has_n { 1.0 } else { 0.0 });
    }
    DatasetTable {
        ids: ids(),
        smiles: SMOKE_SMILES.iter().map(|s| s.to_string()).collect(),
        y,
        w: Mat::from_vec(n, 1, vec![1.0; n]),
        time: Some(times()),
        task_spec: TaskSpec {
            name: "smoke".into(),
            kind: TaskKind::Classification,
            task_names: vec!["has_nitrogen".into()],
        },
    }
}

/// Single-task regression table: a deterministic structural score.
pub fn smoke_regression() -> DatasetTable {
    let n = SMOKE_SMILES.len();
    let mut y = Mat::zeros(n, 1);
    for (i, smi) in SMOKE_SMILES.iter().enumerate() {
        let mol = parse_smiles(smi).expect("corpus molecules parse");
        let halogens = mol
            .atoms
            .iter()
            .filter(|a| matches!(a.element.as_str(), "F" | "Cl" | "Br" | "I"))
            .count() as f64;
        let nitrogens = mol.atoms.iter().filter(|a| a.element == "N").count() as f64;
        let score = 0.4 * mol.num_atoms() as f64 + 2.0 * mol.rings.len() as f64
            - 0.7 * halogens
            + 0.5 * nitrogens;
        y.set(i, 0, score);
    }
    DatasetTable {
        ids: ids(),
        smiles: SMOKE_SMILES.iter().map(|s| s.to_string()).collect(),
        y,
        w: Mat::from_vec(n, 1, vec![1.0; n]),
        time: Some(times()),
        task_spec: TaskSpec {
            name: "smoke_regression".into(),
            kind: TaskKind::Regression,
            task_names: vec!["size_score".into()],
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_parses_and_has_both_classes() {
        let table = smoke_classification();
        assert_eq!(table.n_rows(), 50);
        let pos: f64 = (0..50).map(|r| table.y.get(r, 0)).sum();
        assert!((10.0..=40.0).contains(&pos), "positives = {pos}");
        let rate = table.positive_rate();
        assert!(rate > 0.2 && rate < 0.8);
    }

    #[test]
    fn regression_labels_vary() {
        let table = smoke_regression();
        let vals: Vec<f64> = (0..50).map(|r| table.y.get(r, 0)).collect();
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max - min > 2.0);
    }

    #[test]
    fn valence_bookkeeping_over_corpus() {
        // degree + implicit + explicit H respects a standard valence for
        // organic-subset atoms; non-aromatic atoms additionally hit an
        // allowed valence exactly via their bond-order sum.
        for smi in SMOKE_SMILES {
            let mol = parse_smiles(smi).unwrap();
            for (i, atom) in mol.atoms.iter().enumerate() {
                if atom.bracket {
                    continue;
                }
                let allowed: &[f64] = match atom.element.as_str() {
                    "B" => &[3.0],
                    "C" => &[4.0],
                    "N" => &[3.0],
                    "O" => &[2.0],
                    "P" => &[3.0, 5.0],
                    "S" => &[2.0, 4.0, 6.0],
                    "F" | "Cl" | "Br" | "I" => &[1.0],
                    _ => continue,
                };
                let max = allowed[allowed.len() - 1];
                let loose = (mol.degree(i) + atom.total_h() as usize) as f64;
                assert!(
                    loose <= max,
                    "{smi}: atom {i} ({}) connections {loose} > {max}",
                    atom.element
                );
                if !atom.aromatic {
                    let bond_sum: f64 = mol
                        .neighbors(i)
                        .iter()
                        .map(|&(_, bi)| mol.bonds[bi].order.valence_contribution())
                        .sum();
                    let total = bond_sum.ceil() + atom.total_h() as f64;
                    assert!(
                        allowed.contains(&total),
                        "{smi}: atom {i} ({}) valence {total}",
                        atom.element
                    );
                }
            }
        }
    }
}
