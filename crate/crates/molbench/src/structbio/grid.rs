//! Grid featurizer: a 2052-entry protein–ligand descriptor built from
//! circular fingerprints, binned contact fingerprints and salt-bridge /
//! hydrogen-bond counts.

use super::{ChargeClass, StructAtom, StructBioError, Structure};
use crate::chem::Molecule;
use crate::featurize::ecfp_atom_identifiers;
use crate::stablehash::{tag, StableHasher};

/// 512 intra-molecular counts + 3×512 contact bins + 4 interaction counts.
pub const GRID_FEATURE_LEN: usize = 2052;
const HASH_LEN: usize = 512;

/// Pocket cutoff (Å): protein atoms within this distance of any ligand atom.
pub const DEFAULT_POCKET_CUTOFF: f64 = 4.5;
/// Distance (Å) below which two pocket atoms count as covalently bonded in
/// the proxy bond graph (PDB files carry no bond table).
const PROXY_BOND_DIST: f64 = 1.8;
/// Salt bridge: cationic vs anionic class within this distance (Å).
const SALT_BRIDGE_DIST: f64 = 5.0;
/// Hydrogen-bond heavy-atom distance bins (Å), lower inclusive.
const HBOND_BINS: [(f64, f64); 3] = [(2.2, 2.5), (2.5, 3.2), (3.2, 4.0)];
/// Ligand–pocket contact distance bins (Å).
const CONTACT_BINS: [(f64, f64); 3] = [(0.0, 2.0), (2.0, 3.0), (3.0, 4.5)];

/// Fixed-length complex descriptor. `pocket_size` lets callers surface the
/// empty-pocket condition (contact sections all zero) as a warning.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFeature {
    pub values: Vec<f64>,
    pub pocket_size: usize,
}

impl ComplexFeature {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Protein atoms within `cutoff` of any ligand atom. May return an empty
/// pocket.
pub fn extract_pocket(protein: &Structure, ligand: &Structure, cutoff: f64) -> Structure {
    let atoms = protein
        .atoms
        .iter()
        .filter(|p| ligand.atoms.iter().any(|l| p.distance(l) < cutoff))
        .cloned()
        .collect();
    Structure {
        atoms,
        role: protein.role,
    }
}

/// Environment identifiers over a distance-derived bond graph: atoms within
/// [`PROXY_BOND_DIST`] are treated as bonded, the seed invariant is
/// (element, degree), and each refinement round hashes the sorted neighbor
/// identifiers.
fn proxy_env_ids(atoms: &[StructAtom], rounds: usize) -> Vec<u64> {
    let n = atoms.len();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if atoms[i].distance(&atoms[j]) < PROXY_BOND_DIST {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    let mut ids: Vec<u64> = (0..n)
        .map(|i| {
            let mut h = StableHasher::new(tag::GRID_ENV);
            h.write_str(&atoms[i].element);
            h.write_u64(adjacency[i].len() as u64);
            h.finish()
        })
        .collect();
    for _ in 0..rounds {
        let mut next = vec![0u64; n];
        for i in 0..n {
            let mut nbrs: Vec<u64> = adjacency[i].iter().map(|&j| ids[j]).collect();
            nbrs.sort_unstable();
            let mut h = StableHasher::new(tag::GRID_ENV);
            h.write_u64(ids[i]);
            for id in nbrs {
                h.write_u64(id);
            }
            next[i] = h.finish();
        }
        ids = next;
    }
    ids
}

fn fold_counts(ids: impl IntoIterator<Item = u64>, counts: &mut [f64]) {
    for id in ids {
        counts[(id % HASH_LEN as u64) as usize] += 1.0;
    }
}

fn pair_id(a: u64, b: u64) -> u64 {
    let (lo, hi) = (a.min(b), a.max(b));
    let mut h = StableHasher::new(tag::GRID_PAIR);
    h.write_u64(lo);
    h.write_u64(hi);
    h.finish()
}

fn is_donor_acceptor(element: &str) -> bool {
    matches!(element, "N" | "O")
}

/// Build the 2052-entry descriptor:
/// 1. intra-ligand circular identifiers (radius 2, from the parsed ligand
///    molecule) and intra-pocket identifiers (radius 2 over the proxy bond
///    graph), hashed together into 512 counts;
/// 2. three contact-pair fingerprints for ligand–pocket atom pairs with
///    distance in 0–2 / 2–3 / 3–4.5 Å, each pair hashed from its two
///    radius-1 environment identifiers into 512 counts (both sides use
///    distance-derived graphs, which keeps 3D atoms and SMILES atoms from
///    needing an alignment);
/// 3. salt-bridge count and hydrogen-bond counts in three distance bins.
pub fn grid_featurize(
    protein: &Structure,
    ligand: &Structure,
    ligand_mol: &Molecule,
) -> Result<ComplexFeature, StructBioError> {
    if protein.is_empty() || ligand.is_empty() {
        return Err(StructBioError::EmptyStructure);
    }
    let pocket = extract_pocket(protein, ligand, DEFAULT_POCKET_CUTOFF);

    let mut values = vec![0.0; GRID_FEATURE_LEN];

    // Section 1: intra-molecular circular fingerprints, hashed together.
    let intra = &mut values[0..HASH_LEN];
    fold_counts(ecfp_atom_identifiers(ligand_mol, 2), intra);
    fold_counts(proxy_env_ids(&pocket.atoms, 2), intra);

    // Section 2: contact fingerprints per distance bin.
    let lig_env = proxy_env_ids(&ligand.atoms, 1);
    let pocket_env = proxy_env_ids(&pocket.atoms, 1);
    for (bin, (lo, hi)) in CONTACT_BINS.iter().enumerate() {
        let section = &mut values[HASH_LEN * (1 + bin)..HASH_LEN * (2 + bin)];
        for (li, l) in ligand.atoms.iter().enumerate() {
            for (pi, p) in pocket.atoms.iter().enumerate() {
                let d = l.distance(p);
                if d >= *lo && d < *hi {
                    let id = pair_id(lig_env[li], pocket_env[pi]);
                    section[(id % HASH_LEN as u64) as usize] += 1.0;
                }
            }
        }
    }

    // Section 3: salt bridges and hydrogen bonds.
    let tail = GRID_FEATURE_LEN - 4;
    for l in &ligand.atoms {
        for p in &pocket.atoms {
            let d = l.distance(p);
            let opposite = matches!(
                (l.charge_class, p.charge_class),
                (ChargeClass::Cationic, ChargeClass::Anionic)
                    | (ChargeClass::Anionic, ChargeClass::Cationic)
            );
            if opposite && d < SALT_BRIDGE_DIST {
                values[tail] += 1.0;
            }
            if is_donor_acceptor(&l.element) && is_donor_acceptor(&p.element) {
                for (bin, (lo, hi)) in HBOND_BINS.iter().enumerate() {
                    if d >= *lo && d < *hi {
                        values[tail + 1 + bin] += 1.0;
                    }
                }
            }
        }
    }

    Ok(ComplexFeature {
        values,
        pocket_size: pocket.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;
    use crate::structbio::MoleculeRole;

    fn atom(element: &str, pos: [f64; 3], charge: ChargeClass) -> StructAtom {
        StructAtom {
            element: element.to_string(),
            pos,
            residue: "LIG".into(),
            atom_name: element.to_string(),
            chain: 'A',
            charge_class: charge,
        }
    }

    fn structure(atoms: Vec<StructAtom>, role: MoleculeRole) -> Structure {
        Structure { atoms, role }
    }

    fn simple_ligand() -> (Structure, Molecule) {
        let mol = parse_smiles("CCO").unwrap();
        let s = structure(
            vec![
                atom("C", [0.0, 0.0, 0.0], ChargeClass::Neutral),
                atom("C", [1.5, 0.0, 0.0], ChargeClass::Neutral),
                atom("O", [2.9, 0.0, 0.0], ChargeClass::Neutral),
            ],
            MoleculeRole::Ligand,
        );
        (s, mol)
    }

    #[test]
    fn pocket_cutoff_boundary() {
        let ligand = structure(
            vec![atom("C", [0.0; 3], ChargeClass::Neutral)],
            MoleculeRole::Ligand,
        );
        let protein = structure(
            vec![
                atom("N", [4.4, 0.0, 0.0], ChargeClass::Neutral),
                atom("N", [4.6, 0.0, 0.0], ChargeClass::Neutral),
            ],
            MoleculeRole::Protein,
        );
        let pocket = extract_pocket(&protein, &ligand, 4.5);
        assert_eq!(pocket.len(), 1);
        assert_eq!(pocket.atoms[0].pos, [4.4, 0.0, 0.0]);

        assert_eq!(extract_pocket(&protein, &ligand, 0.0).len(), 0);
        assert_eq!(extract_pocket(&protein, &ligand, 100.0).len(), 2);
    }

    #[test]
    fn output_length_always_2052() {
        let (ligand, mol) = simple_ligand();
        let near = structure(
            vec![atom("N", [0.0, 3.0, 0.0], ChargeClass::Neutral)],
            MoleculeRole::Protein,
        );
        let far = structure(
            vec![atom("N", [100.0, 0.0, 0.0], ChargeClass::Neutral)],
            MoleculeRole::Protein,
        );
        for protein in [near, far] {
            let f = grid_featurize(&protein, &ligand, &mol).unwrap();
            assert_eq!(f.len(), GRID_FEATURE_LEN);
            assert!(f.values.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn no_contacts_zeroes_sections_two_and_three() {
        let (ligand, mol) = simple_ligand();
        let protein = structure(
            vec![atom("N", [50.0, 0.0, 0.0], ChargeClass::Neutral)],
            MoleculeRole::Protein,
        );
        let f = grid_featurize(&protein, &ligand, &mol).unwrap();
        assert_eq!(f.pocket_size, 0);
        assert!(f.values[512..].iter().all(|&v| v == 0.0));
        // Intra-ligand section still populated.
        assert!(f.values[..512].iter().sum::<f64>() > 0.0);
    }

    #[test]
    fn salt_bridge_counted() {
        let mol = parse_smiles("CC(=O)[O-]").unwrap();
        let ligand = structure(
            vec![atom("O", [0.0; 3], ChargeClass::Anionic)],
            MoleculeRole::Ligand,
        );
        let protein = structure(
            vec![atom("N", [3.5, 0.0, 0.0], ChargeClass::Cationic)],
            MoleculeRole::Protein,
        );
        let f = grid_featurize(&protein, &ligand, &mol).unwrap();
        assert_eq!(f.values[2048], 1.0);
    }

    #[test]
    fn hydrogen_bond_bins() {
        let (_, mol) = simple_ligand();
        let ligand = structure(
            vec![atom("O", [0.0; 3], ChargeClass::Neutral)],
            MoleculeRole::Ligand,
        );
        let protein = structure(
            vec![
                atom("N", [2.4, 0.0, 0.0], ChargeClass::Neutral),
                atom("O", [0.0, 3.0, 0.0], ChargeClass::Neutral),
                atom("N", [0.0, 0.0, 3.5], ChargeClass::Neutral),
                atom("C", [2.4, 0.1, 0.0], ChargeClass::Neutral), // carbon: not counted
            ],
            MoleculeRole::Protein,
        );
        let f = grid_featurize(&protein, &ligand, &mol).unwrap();
        assert_eq!(f.values[2049], 1.0); // [2.2, 2.5)
        assert_eq!(f.values[2050], 1.0); // [2.5, 3.2)
        assert_eq!(f.values[2051], 1.0); // [3.2, 4.0)
    }

    #[test]
    fn invariant_to_atom_order_and_rigid_motion() {
        let mol = parse_smiles("CCO").unwrap();
        let lig_atoms = vec![
            atom("C", [0.0, 0.0, 0.0], ChargeClass::Neutral),
            atom("C", [1.5, 0.0, 0.0], ChargeClass::Neutral),
            atom("O", [2.9, 0.0, 0.0], ChargeClass::Neutral),
        ];
        let prot_atoms = vec![
            atom("N", [0.0, 3.0, 0.0], ChargeClass::Neutral),
            atom("O", [1.5, -2.8, 0.0], ChargeClass::Neutral),
            atom("C", [3.0, 2.0, 1.0], ChargeClass::Neutral),
        ];
        let base = grid_featurize(
            &structure(prot_atoms.clone(), MoleculeRole::Protein),
            &structure(lig_atoms.clone(), MoleculeRole::Ligand),
            &mol,
        )
        .unwrap();

        // Reverse atom order within each structure.
        let rev = grid_featurize(
            &structure(
                prot_atoms.iter().rev().cloned().collect(),
                MoleculeRole::Protein,
            ),
            &structure(
                lig_atoms.iter().rev().cloned().collect(),
                MoleculeRole::Ligand,
            ),
            &mol,
        )
        .unwrap();
        assert_eq!(base.values, rev.values);

        // Rotate 90° about z and translate both structures together.
        let motion = |a: &StructAtom| {
            let [x, y, z] = a.pos;
            let mut m = a.clone();
            m.pos = [-y + 10.0, x - 4.0, z + 2.5];
            m
        };
        let moved = grid_featurize(
            &structure(prot_atoms.iter().map(&motion).collect(), MoleculeRole::Protein),
            &structure(lig_atoms.iter().map(&motion).collect(), MoleculeRole::Ligand),
            &mol,
        )
        .unwrap();
        for (a, b) in base.values.iter().zip(&moved.values) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
