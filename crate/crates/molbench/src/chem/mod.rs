//! Molecular graphs: SMILES parsing, ring perception, Bemis–Murcko
//! scaffolds and a permutation-invariant graph key.
//!
//! The SMILES subset covers the organic subset, bracket atoms with charges
//! and explicit hydrogens, ring closures (including `%nn`), branches and
//! dot-disconnection. Stereo markers (`/`, `\`, `@`) are accepted and
//! discarded; the featurizers downstream are stereo-blind. Aromaticity is
//! trusted from lowercase input — uppercase Kekulé rings are not
//! re-aromatized (a documented deviation from RDKit).

mod rings;
mod scaffold;
mod smiles;

pub use scaffold::{graph_key, murcko_scaffold, EMPTY_GRAPH_KEY};
pub use smiles::parse_smiles;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ChemError {
    #[error("empty SMILES input")]
    EmptyInput,
    #[error("unknown atom symbol '{0}'")]
    UnknownAtomSymbol(String),
    #[error("unmatched ring-closure bond {0}")]
    UnmatchedRingBond(u16),
    #[error("unbalanced parenthesis")]
    UnbalancedParenthesis,
    #[error("bond symbol with no atom to bind")]
    DanglingBond,
    #[error("invalid ring closure (self-bond or duplicate bond)")]
    InvalidRingClosure,
    #[error("malformed bracket atom: {0}")]
    MalformedBracket(String),
    #[error("aromatic atom {0} lies outside any perceived ring")]
    AromaticAtomOutsideRing(usize),
}

/// Bond order. Aromatic bonds contribute 1.5 to valence bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Stable small integer used in hashing and one-hot encodings.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    pub fn valence_contribution(self) -> f64 {
        match self {
            BondOrder::Single => 1.0,
            BondOrder::Double => 2.0,
            BondOrder::Triple => 3.0,
            BondOrder::Aromatic => 1.5,
        }
    }
}

/// A heavy atom in the molecular graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    /// Canonical element symbol ("C", "Cl", ...).
    pub element: String,
    pub formal_charge: i8,
    pub aromatic: bool,
    /// Hydrogens written explicitly inside a bracket atom.
    pub explicit_h: u8,
    /// Hydrogens implied by standard valence; 0 for bracket atoms.
    pub implicit_h: u8,
    /// Set by ring perception.
    pub in_ring: bool,
    /// Parsed from a bracket atom, stored but otherwise unused.
    pub isotope: Option<u16>,
    /// True when the atom came from a bracket expression; bracket atoms
    /// never receive implicit hydrogens beyond what they specify.
    pub bracket: bool,
}

impl Atom {
    pub fn new(element: &str, aromatic: bool) -> Self {
        Atom {
            element: element.to_string(),
            formal_charge: 0,
            aromatic,
            explicit_h: 0,
            implicit_h: 0,
            in_ring: false,
            isotope: None,
            bracket: false,
        }
    }

    /// Total hydrogen count (implicit + explicit).
    pub fn total_h(&self) -> u8 {
        self.implicit_h + self.explicit_h
    }
}

/// An edge between two heavy atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub in_ring: bool,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if atom == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Immutable molecular graph. Constructed by [`parse_smiles`] or by
/// [`murcko_scaffold`]; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    /// Per-atom list of (neighbor atom index, bond index), sorted by neighbor.
    adjacency: Vec<Vec<(usize, usize)>>,
    /// Cycle basis from spanning-tree back-edges; each entry is an atom cycle.
    pub rings: Vec<Vec<usize>>,
    /// True when the input contained dot-separated fragments (or the graph
    /// is otherwise disconnected).
    pub multi_fragment: bool,
    pub source_smiles: String,
}

impl Molecule {
    /// Build a molecule from parts: derives adjacency, rings, ring flags and
    /// implicit hydrogens. `source` is kept verbatim for provenance.
    pub(crate) fn from_parts(
        atoms: Vec<Atom>,
        bonds: Vec<Bond>,
        source: String,
    ) -> Result<Self, ChemError> {
        let n = atoms.len();
        let mut adjacency = vec![Vec::new(); n];
        for (bi, bond) in bonds.iter().enumerate() {
            adjacency[bond.a].push((bond.b, bi));
            adjacency[bond.b].push((bond.a, bi));
        }
        for nbrs in adjacency.iter_mut() {
            nbrs.sort_unstable();
        }
        let mut mol = Molecule {
            atoms,
            bonds,
            adjacency,
            rings: Vec::new(),
            multi_fragment: false,
            source_smiles: source,
        };
        mol.rings = rings::cycle_basis(&mol);
        mol.mark_ring_membership();
        mol.multi_fragment = mol.count_fragments() > 1;
        mol.assign_implicit_hydrogens();
        Ok(mol)
    }

    pub fn empty() -> Self {
        Molecule {
            atoms: Vec::new(),
            bonds: Vec::new(),
            adjacency: Vec::new(),
            rings: Vec::new(),
            multi_fragment: false,
            source_smiles: String::new(),
        }
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn num_bonds(&self) -> usize {
        self.bonds.len()
    }

    /// Heavy-atom degree.
    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    /// (neighbor index, bond index) pairs, sorted by neighbor index.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adjacency[a]
            .iter()
            .find(|(nbr, _)| *nbr == b)
            .map(|&(_, bi)| &self.bonds[bi])
    }

    /// BFS graph distances from `start`; `None` marks unreachable atoms.
    pub fn graph_distances_from(&self, start: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.num_atoms()];
        let mut queue = std::collections::VecDeque::new();
        dist[start] = Some(0);
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &(v, _) in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// True when both atoms appear together in at least one perceived ring.
    pub fn same_ring(&self, a: usize, b: usize) -> bool {
        self.rings
            .iter()
            .any(|cycle| cycle.contains(&a) && cycle.contains(&b))
    }

    fn mark_ring_membership(&mut self) {
        for cycle in &self.rings {
            for i in 0..cycle.len() {
                let a = cycle[i];
                let b = cycle[(i + 1) % cycle.len()];
                self.atoms[a].in_ring = true;
                if let Some(&(_, bi)) = self.adjacency[a].iter().find(|(nbr, _)| *nbr == b) {
                    self.bonds[bi].in_ring = true;
                }
            }
        }
    }

    fn count_fragments(&self) -> usize {
        let n = self.num_atoms();
        if n == 0 {
            return 0;
        }
        let mut seen = vec![false; n];
        let mut fragments = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            fragments += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        fragments
    }

    /// Standard valences: B 3, C 4, N 3, O 2, P 3/5, S 2/4/6, halogens 1.
    fn default_valences(element: &str) -> &'static [f64] {
        match element {
            "B" => &[3.0],
            "C" => &[4.0],
            "N" => &[3.0],
            "O" => &[2.0],
            "P" => &[3.0, 5.0],
            "S" => &[2.0, 4.0, 6.0],
            "F" | "Cl" | "Br" | "I" => &[1.0],
            "H" => &[1.0],
            _ => &[],
        }
    }

    /// Implicit hydrogens for organic-subset atoms: the smallest standard
    /// valence that covers the bond-order sum (aromatic bonds count 1.5, the
    /// sum is rounded up) minus that sum. Bracket atoms keep implicit_h = 0.
    fn assign_implicit_hydrogens(&mut self) {
        let mut sums = vec![0.0f64; self.num_atoms()];
        for bond in &self.bonds {
            let c = bond.order.valence_contribution();
            sums[bond.a] += c;
            sums[bond.b] += c;
        }
        for (i, atom) in self.atoms.iter_mut().enumerate() {
            if atom.bracket {
                atom.implicit_h = 0;
                continue;
            }
            let used = sums[i].ceil();
            let mut h = 0u8;
            for &v in Self::default_valences(&atom.element) {
                if v >= used {
                    h = (v - used) as u8;
                    break;
                }
            }
            atom.implicit_h = h;
        }
    }

    /// Reindex atoms by `perm` (old index i moves to position perm[i]).
    /// The result is the same graph with a different atom order; all
    /// derived data is rebuilt.
    pub fn permute(&self, perm: &[usize]) -> Molecule {
        assert_eq!(perm.len(), self.num_atoms());
        let mut atoms = vec![Atom::new("C", false); self.num_atoms()];
        for (old, atom) in self.atoms.iter().enumerate() {
            let mut a = atom.clone();
            a.in_ring = false;
            atoms[perm[old]] = a;
        }
        let bonds = self
            .bonds
            .iter()
            .map(|b| {
                let (x, y) = (perm[b.a], perm[b.b]);
                Bond {
                    a: x.min(y),
                    b: x.max(y),
                    order: b.order,
                    in_ring: false,
                }
            })
            .collect();
        Molecule::from_parts(atoms, bonds, self.source_smiles.clone())
            .expect("permutation preserves validity")
    }

    /// Induced subgraph on `keep` (atom indices, ascending). Atom fields are
    /// carried over; adjacency, rings and implicit hydrogens are recomputed.
    pub(crate) fn subgraph(&self, keep: &[usize]) -> Result<Molecule, ChemError> {
        let mut remap = vec![usize::MAX; self.num_atoms()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let atoms: Vec<Atom> = keep
            .iter()
            .map(|&i| {
                let mut a = self.atoms[i].clone();
                a.in_ring = false;
                a
            })
            .collect();
        let mut bonds = Vec::new();
        for bond in &self.bonds {
            let (na, nb) = (remap[bond.a], remap[bond.b]);
            if na != usize::MAX && nb != usize::MAX {
                bonds.push(Bond {
                    a: na.min(nb),
                    b: na.max(nb),
                    order: bond.order,
                    in_ring: false,
                });
            }
        }
        Molecule::from_parts(atoms, bonds, self.source_smiles.clone())
    }
}

/// Minimal cycle basis of the molecular graph (see [`rings`] for the
/// construction). Pure accessor form of the perception pass that runs at
/// construction time; acyclic molecules return an empty list.
pub fn perceive_rings(mol: &Molecule) -> Vec<Vec<usize>> {
    rings::cycle_basis(mol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn graph_key_constant_under_100_random_permutations() {
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        for smi in crate::data::SMOKE_SMILES {
            let mol = parse_smiles(smi).unwrap();
            let key = graph_key(&mol);
            let n = mol.num_atoms();
            for _ in 0..100 {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                let permuted = mol.permute(&perm);
                assert_eq!(graph_key(&permuted), key, "{smi}");
            }
        }
    }

    #[test]
    fn permute_preserves_structure() {
        let mol = parse_smiles("CC(=O)Oc1ccccc1C(=O)O").unwrap();
        let n = mol.num_atoms();
        let perm: Vec<usize> = (0..n).map(|i| (i + 3) % n).collect();
        let p = mol.permute(&perm);
        assert_eq!(p.num_atoms(), n);
        assert_eq!(p.num_bonds(), mol.num_bonds());
        assert_eq!(p.rings.len(), mol.rings.len());
        for (old, atom) in mol.atoms.iter().enumerate() {
            assert_eq!(p.atoms[perm[old]].element, atom.element);
            assert_eq!(p.atoms[perm[old]].implicit_h, atom.implicit_h);
            assert_eq!(p.atoms[perm[old]].in_ring, atom.in_ring);
        }
    }
}
