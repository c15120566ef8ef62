//! Graph-convolution atom features and weave pair features.

use crate::chem::{BondOrder, Molecule};

/// Elements with a dedicated one-hot slot; anything else lands in the
/// trailing "other" slot.
pub const ELEMENT_LIST: [&str; 11] = [
    "C", "N", "O", "S", "F", "P", "Cl", "Br", "I", "B", "H",
];

/// Atom feature width: element one-hot (11 + other), degree one-hot 0–5,
/// implicit-H one-hot 0–4, formal charge, aromatic flag, ring flag.
pub const ATOM_FEATURE_WIDTH: usize = ELEMENT_LIST.len() + 1 + 6 + 5 + 1 + 1 + 1;

pub const DEFAULT_MAX_GRAPH_DIST: usize = 7;

/// Per-atom feature vectors plus the neighbor lists graph models consume.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomGraphFeatures {
    /// One row per heavy atom, width [`ATOM_FEATURE_WIDTH`].
    pub features: Vec<Vec<f64>>,
    pub neighbors: Vec<Vec<usize>>,
    pub degrees: Vec<usize>,
}

impl AtomGraphFeatures {
    pub fn num_atoms(&self) -> usize {
        self.features.len()
    }
}

/// Pair features for all unordered atom pairs (i < j): bond-order one-hot
/// (zeros when not directly bonded), same-ring flag, graph-distance one-hot
/// clipped at `max_graph_dist` (the last bucket also holds disconnected
/// pairs).
#[derive(Debug, Clone, PartialEq)]
pub struct PairFeatureMatrix {
    n_atoms: usize,
    width: usize,
    data: Vec<f64>,
}

impl PairFeatureMatrix {
    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Feature vector for the unordered pair {i, j}; symmetric in argument
    /// order. Panics when i == j — self-pairs are excluded by construction.
    pub fn pair(&self, i: usize, j: usize) -> &[f64] {
        assert_ne!(i, j, "pair features exclude (i, i)");
        let (lo, hi) = (i.min(j), i.max(j));
        let idx = lo * self.n_atoms - lo * (lo + 1) / 2 + (hi - lo - 1);
        &self.data[idx * self.width..(idx + 1) * self.width]
    }
}

/// Initial per-atom feature vectors and neighbor lists.
pub fn graph_features(mol: &Molecule) -> AtomGraphFeatures {
    let n = mol.num_atoms();
    let mut features = Vec::with_capacity(n);
    let mut neighbors = Vec::with_capacity(n);
    let mut degrees = Vec::with_capacity(n);
    for i in 0..n {
        let atom = &mol.atoms[i];
        let mut v = vec![0.0; ATOM_FEATURE_WIDTH];
        let elem_slot = ELEMENT_LIST
            .iter()
            .position(|e| *e == atom.element)
            .unwrap_or(ELEMENT_LIST.len());
        v[elem_slot] = 1.0;
        let mut offset = ELEMENT_LIST.len() + 1;
        let degree = mol.degree(i).min(5);
        v[offset + degree] = 1.0;
        offset += 6;
        let hs = (atom.implicit_h as usize).min(4);
        v[offset + hs] = 1.0;
        offset += 5;
        v[offset] = atom.formal_charge as f64;
        v[offset + 1] = if atom.aromatic { 1.0 } else { 0.0 };
        v[offset + 2] = if atom.in_ring { 1.0 } else { 0.0 };
        features.push(v);
        neighbors.push(mol.neighbors(i).iter().map(|&(j, _)| j).collect());
        degrees.push(mol.degree(i));
    }
    AtomGraphFeatures {
        features,
        neighbors,
        degrees,
    }
}

/// Weave featurization: atom part identical to [`graph_features`], plus a
/// pair feature vector for every atom pair. Graph distances come from BFS.
pub fn weave_features(
    mol: &Molecule,
    max_graph_dist: usize,
) -> (AtomGraphFeatures, PairFeatureMatrix) {
    let atoms = graph_features(mol);
    let n = mol.num_atoms();
    let width = 4 + 1 + max_graph_dist;
    let n_pairs = n * n.saturating_sub(1) / 2;
    let mut data = vec![0.0; n_pairs * width];

    let mut idx = 0;
    for i in 0..n {
        let dist = mol.graph_distances_from(i);
        for j in (i + 1)..n {
            let v = &mut data[idx * width..(idx + 1) * width];
            if let Some(bond) = mol.bond_between(i, j) {
                let slot = match bond.order {
                    BondOrder::Single => 0,
                    BondOrder::Double => 1,
                    BondOrder::Triple => 2,
                    BondOrder::Aromatic => 3,
                };
                v[slot] = 1.0;
            }
            v[4] = if mol.same_ring(i, j) { 1.0 } else { 0.0 };
            // Distance buckets 1..=max; unreachable pairs clip to the last.
            let d = dist[j].map(|d| d as usize).unwrap_or(max_graph_dist);
            let bucket = d.clamp(1, max_graph_dist) - 1;
            v[5 + bucket] = 1.0;
            idx += 1;
        }
    }
    (
        atoms,
        PairFeatureMatrix {
            n_atoms: n,
            width,
            data,
        },
    )
}
