//! Extended-connectivity fingerprints (Morgan algorithm) and Tanimoto
//! similarity.

use super::{FeaturizeError, Fingerprint};
use crate::chem::Molecule;
use crate::stablehash::{tag, StableHasher};

/// Circular fingerprint by iterative neighborhood hashing. `radius = 2`
/// reproduces the ECFP4 construction.
///
/// The initial per-atom identifier hashes (element, heavy degree, implicit
/// hydrogen count, formal charge, ring flag, aromatic flag); each round
/// rehashes an atom's identifier with the sorted multiset of (bond order,
/// neighbor identifier) pairs. Identifiers from every round fold into
/// `nbits` by modulo. Hashing is the crate's fixed 64-bit mix, so outputs
/// are identical across runs and platforms.
pub fn ecfp(mol: &Molecule, radius: usize, nbits: u32) -> Result<Fingerprint, FeaturizeError> {
    if mol.num_atoms() == 0 {
        return Err(FeaturizeError::EmptyMolecule);
    }
    let mut fp = Fingerprint::new(nbits);
    for ids in ecfp_identifier_rounds(mol, radius) {
        for id in ids {
            fp.add((id % nbits as u64) as u32);
        }
    }
    Ok(fp)
}

/// Per-atom identifiers after `rounds` refinement rounds (round 0 = initial
/// invariants). Exposed for the grid featurizer, which reuses the same
/// environment identifiers.
pub fn ecfp_atom_identifiers(mol: &Molecule, rounds: usize) -> Vec<u64> {
    let mut per_round = ecfp_identifier_rounds(mol, rounds);
    per_round.pop().unwrap_or_default()
}

/// Identifiers for rounds 0..=radius. Atoms with no neighbors keep their
/// identifier, and unchanged identifiers are not re-emitted — a single atom
/// contributes exactly one identifier regardless of radius.
fn ecfp_identifier_rounds(mol: &Molecule, radius: usize) -> Vec<Vec<u64>> {
    let n = mol.num_atoms();
    let mut current: Vec<u64> = (0..n)
        .map(|i| {
            let atom = &mol.atoms[i];
            let mut h = StableHasher::new(tag::ATOM_INVARIANT);
            h.write_str(&atom.element);
            h.write_u64(mol.degree(i) as u64);
            h.write_u64(atom.implicit_h as u64);
            h.write_i64(atom.formal_charge as i64);
            h.write_bool(atom.in_ring);
            h.write_bool(atom.aromatic);
            h.finish()
        })
        .collect();

    let mut rounds = Vec::with_capacity(radius + 1);
    rounds.push(current.clone());
    for _ in 0..radius {
        let mut next = vec![0u64; n];
        let mut emitted = Vec::new();
        for i in 0..n {
            if mol.degree(i) == 0 {
                next[i] = current[i];
                continue;
            }
            let mut env: Vec<(u8, u64)> = mol
                .neighbors(i)
                .iter()
                .map(|&(j, bi)| (mol.bonds[bi].order.code(), current[j]))
                .collect();
            env.sort_unstable();
            let mut h = StableHasher::new(tag::ECFP_ROUND);
            h.write_u64(current[i]);
            for (code, id) in env {
                h.write_byte(code);
                h.write_u64(id);
            }
            next[i] = h.finish();
            emitted.push(next[i]);
        }
        rounds.push(emitted);
        current = next;
    }
    rounds
}

/// Jaccard–Tanimoto similarity |A ∩ B| / |A ∪ B| over set bits.
/// Two empty fingerprints compare as identical (1.0).
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, FeaturizeError> {
    if a.nbits() != b.nbits() {
        return Err(FeaturizeError::LengthMismatch(a.nbits(), b.nbits()));
    }
    let union = a.union_count(b);
    if union == 0 {
        return Ok(1.0);
    }
    Ok(a.intersection_count(b) as f64 / union as f64)
}


#[cfg(test)]
mod permutation_tests {
    use super::*;
    use crate::chem::parse_smiles;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn fingerprint_constant_under_100_random_permutations() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        for smi in crate::data::SMOKE_SMILES {
            let mol = parse_smiles(smi).unwrap();
            let bits = ecfp(&mol, 2, 1024).unwrap().set_bits();
            let n = mol.num_atoms();
            for _ in 0..100 {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                let permuted = mol.permute(&perm);
                assert_eq!(ecfp(&permuted, 2, 1024).unwrap().set_bits(), bits, "{smi}");
            }
        }
    }
}
