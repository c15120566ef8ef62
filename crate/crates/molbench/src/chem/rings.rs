//! Ring perception via a cycle basis built from spanning-tree back-edges.
//!
//! For each back edge we take the shortest cycle through it (BFS between its
//! endpoints with the edge removed), then keep a linearly independent set
//! over GF(2) until the cyclomatic number is reached, falling back to the
//! fundamental cycles when a candidate is dependent. This yields the familiar
//! small rings (two 6-cycles for naphthalene, not a 6- and a 10-cycle) while
//! staying far simpler than full SSSR — only ring membership and shared-ring
//! queries are consumed downstream.

use super::Molecule;
use std::collections::VecDeque;

/// Compute the cycle basis. Deterministic for a fixed atom ordering.
pub fn cycle_basis(mol: &Molecule) -> Vec<Vec<usize>> {
    let n = mol.num_atoms();
    if n == 0 || mol.num_bonds() == 0 {
        return Vec::new();
    }

    // Spanning forest by BFS in index order; record back edges.
    let mut parent_edge: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut tree_edge = vec![false; mol.num_bonds()];
    let mut back_edges: Vec<usize> = Vec::new();
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(v, bi) in mol.neighbors(u) {
                if !visited[v] {
                    visited[v] = true;
                    parent_edge[v] = Some(bi);
                    tree_edge[bi] = true;
                    queue.push_back(v);
                } else if !tree_edge[bi] && !back_edges.contains(&bi) {
                    back_edges.push(bi);
                }
            }
        }
    }
    if back_edges.is_empty() {
        return Vec::new();
    }
    let rank_target = back_edges.len();

    // Candidate cycles: shortest through each back edge, then fundamental
    // cycles as a completion fallback.
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for &bi in &back_edges {
        if let Some(cycle) = shortest_cycle_through(mol, bi) {
            candidates.push(cycle);
        }
    }
    for &bi in &back_edges {
        if let Some(cycle) = fundamental_cycle(mol, &parent_edge, bi) {
            candidates.push(cycle);
        }
    }
    candidates.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    candidates.dedup();

    // Greedy GF(2) independence over edge space.
    let words = mol.num_bonds().div_ceil(64);
    let mut pivots: Vec<Vec<u64>> = Vec::new();
    let mut basis = Vec::new();
    for cycle in candidates {
        if basis.len() == rank_target {
            break;
        }
        let mut vec = edge_vector(mol, &cycle, words);
        for p in &pivots {
            if let Some(hi) = highest_bit(&vec) {
                if highest_bit(p) == Some(hi) {
                    xor_into(&mut vec, p);
                }
            }
        }
        if highest_bit(&vec).is_some() {
            // Keep pivot rows sorted by leading bit so reduction terminates.
            pivots.push(vec);
            pivots.sort_by_key(|v| std::cmp::Reverse(highest_bit(v)));
            basis.push(cycle);
        }
    }
    basis
}

fn edge_vector(mol: &Molecule, cycle: &[usize], words: usize) -> Vec<u64> {
    let mut v = vec![0u64; words];
    for i in 0..cycle.len() {
        let a = cycle[i];
        let b = cycle[(i + 1) % cycle.len()];
        if let Some(&(_, bi)) = mol.neighbors(a).iter().find(|(nbr, _)| *nbr == b) {
            v[bi / 64] ^= 1u64 << (bi % 64);
        }
    }
    v
}

fn highest_bit(v: &[u64]) -> Option<usize> {
    for (w, &word) in v.iter().enumerate().rev() {
        if word != 0 {
            return Some(w * 64 + (63 - word.leading_zeros() as usize));
        }
    }
    None
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Shortest cycle containing bond `bi`: BFS from one endpoint to the other
/// with the bond itself removed.
fn shortest_cycle_through(mol: &Molecule, bi: usize) -> Option<Vec<usize>> {
    let bond = &mol.bonds[bi];
    let (src, dst) = (bond.a, bond.b);
    let n = mol.num_atoms();
    let mut prev: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[src] = true;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        if u == dst {
            break;
        }
        for &(v, ei) in mol.neighbors(u) {
            if ei == bi || seen[v] {
                continue;
            }
            seen[v] = true;
            prev[v] = Some(u);
            queue.push_back(v);
        }
    }
    if !seen[dst] {
        return None;
    }
    let mut path = vec![dst];
    let mut cur = dst;
    while let Some(p) = prev[cur] {
        path.push(p);
        cur = p;
    }
    path.reverse(); // src .. dst; closing edge dst-src is the back edge
    Some(canonical_cycle(path))
}

/// Fundamental cycle of a back edge against the BFS forest.
fn fundamental_cycle(
    mol: &Molecule,
    parent_edge: &[Option<usize>],
    bi: usize,
) -> Option<Vec<usize>> {
    let bond = &mol.bonds[bi];
    let path_to_root = |mut v: usize| {
        let mut path = vec![v];
        while let Some(pe) = parent_edge[v] {
            v = mol.bonds[pe].other(v);
            path.push(v);
        }
        path
    };
    let pa = path_to_root(bond.a);
    let pb = path_to_root(bond.b);
    // Find lowest common ancestor by set membership.
    let in_pa: std::collections::HashSet<usize> = pa.iter().copied().collect();
    let lca = *pb.iter().find(|v| in_pa.contains(v))?;
    let mut cycle: Vec<usize> = pa.iter().take_while(|&&v| v != lca).copied().collect();
    cycle.push(lca);
    let tail: Vec<usize> = pb.iter().take_while(|&&v| v != lca).copied().collect();
    cycle.extend(tail.into_iter().rev());
    Some(canonical_cycle(cycle))
}

/// Rotate/reflect a cycle into canonical form: smallest atom first, then the
/// lexicographically smaller direction. Makes the basis order-independent.
fn canonical_cycle(cycle: Vec<usize>) -> Vec<usize> {
    let k = cycle.len();
    let min_pos = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, &v)| v)
        .map(|(i, _)| i)
        .unwrap_or(0);
    let forward: Vec<usize> = (0..k).map(|i| cycle[(min_pos + i) % k]).collect();
    let backward: Vec<usize> = (0..k).map(|i| cycle[(min_pos + k - i) % k]).collect();
    if forward <= backward {
        forward
    } else {
        backward
    }
}
