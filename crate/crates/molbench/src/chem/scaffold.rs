//! Bemis–Murcko scaffolds and a permutation-invariant graph key.

use super::{BondOrder, Molecule};
use crate::stablehash::{tag, StableHasher};

/// Key returned for the empty molecule.
pub const EMPTY_GRAPH_KEY: &str = "0000000000000000";

/// Extract the two-dimensional framework: iteratively delete degree-1 heavy
/// atoms that are not in rings until fixpoint, leaving rings plus linkers.
/// A degree-1 atom attached to a ring atom by a double bond is kept
/// (exocyclic double bonds such as quinone oxygens stay on the scaffold).
/// Acyclic molecules collapse to the empty molecule.
pub fn murcko_scaffold(mol: &Molecule) -> Molecule {
    let n = mol.num_atoms();
    if n == 0 {
        return Molecule::empty();
    }
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|i| mol.degree(i)).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            if !alive[i] || mol.atoms[i].in_ring || degree[i] > 1 {
                continue;
            }
            if degree[i] == 0 {
                // Isolated non-ring atom (degree-0 input or eroded fragment).
                alive[i] = false;
                changed = true;
                continue;
            }
            let (nbr, bond_idx) = mol
                .neighbors(i)
                .iter()
                .copied()
                .find(|&(v, _)| alive[v])
                .expect("degree-1 atom has a live neighbor");
            let bond = &mol.bonds[bond_idx];
            if bond.order == BondOrder::Double && mol.atoms[nbr].in_ring {
                continue;
            }
            alive[i] = false;
            degree[i] = 0;
            degree[nbr] -= 1;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    // Everything acyclic erodes away entirely.
    if !alive
        .iter()
        .zip(&mol.atoms)
        .any(|(&live, atom)| live && atom.in_ring)
    {
        return Molecule::empty();
    }
    let keep: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    mol.subgraph(&keep)
        .expect("subgraph of a valid molecule is valid")
}

/// Deterministic hash key, invariant under atom reindexing.
///
/// Atom seeds are (element, formal charge, aromatic flag, degree); hydrogen
/// counts are deliberately excluded so a scaffold compares equal to the same
/// ring system parsed directly. Seeds are refined for max(n, 2) rounds by
/// hashing each atom's key with the sorted multiset of (bond order, neighbor
/// key) pairs, then combined order-independently. Collisions are accepted at
/// 64-bit hash odds.
pub fn graph_key(mol: &Molecule) -> String {
    if mol.num_atoms() == 0 {
        return EMPTY_GRAPH_KEY.to_string();
    }
    let n = mol.num_atoms();
    let mut keys: Vec<u64> = (0..n)
        .map(|i| {
            let atom = &mol.atoms[i];
            let mut h = StableHasher::new(tag::GRAPH_KEY_ATOM);
            h.write_str(&atom.element);
            h.write_i64(atom.formal_charge as i64);
            h.write_bool(atom.aromatic);
            h.write_u64(mol.degree(i) as u64);
            h.finish()
        })
        .collect();

    let rounds = n.max(2);
    let mut next = vec![0u64; n];
    for _ in 0..rounds {
        for i in 0..n {
            let mut env: Vec<(u8, u64)> = mol
                .neighbors(i)
                .iter()
                .map(|&(j, bi)| (mol.bonds[bi].order.code(), keys[j]))
                .collect();
            env.sort_unstable();
            let mut h = StableHasher::new(tag::GRAPH_KEY_REFINE);
            h.write_u64(keys[i]);
            for (code, k) in env {
                h.write_byte(code);
                h.write_u64(k);
            }
            next[i] = h.finish();
        }
        std::mem::swap(&mut keys, &mut next);
    }

    keys.sort_unstable();
    let mut h = StableHasher::new(tag::GRAPH_KEY_FINAL);
    h.write_u64(n as u64);
    h.write_u64(mol.num_bonds() as u64);
    for k in keys {
        h.write_u64(k);
    }
    format!("{:016x}", h.finish())
}
