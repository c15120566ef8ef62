//! Coulomb matrices and the randomized binary-expansion transform.

use super::FeaturizeError;
use crate::linalg::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

/// Nuclear charges plus Cartesian coordinates. Coordinates are taken in the
/// units of the input file (Å by default) with no conversion; models learn
/// the scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub charges: Vec<u32>,
    pub coords: Vec<[f64; 3]>,
    pub elements: Vec<String>,
}

impl Geometry {
    pub fn new(
        charges: Vec<u32>,
        coords: Vec<[f64; 3]>,
        elements: Vec<String>,
    ) -> Result<Self, FeaturizeError> {
        if charges.len() != coords.len() || charges.len() != elements.len() {
            return Err(FeaturizeError::GeometryShape);
        }
        if charges.contains(&0)
            || coords.iter().flatten().any(|c| !c.is_finite())
        {
            return Err(FeaturizeError::GeometryShape);
        }
        Ok(Geometry {
            charges,
            coords,
            elements,
        })
    }

    pub fn natoms(&self) -> usize {
        self.charges.len()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.coords[i], self.coords[j]);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }
}

/// Symmetric matrix padded with zeros to `max_atoms × max_atoms`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoulombMatrix {
    pub values: Mat,
    pub natoms: usize,
}

/// M_II = 0.5·Z_I^2.4 on the diagonal, M_IJ = Z_I·Z_J / |R_I − R_J| off it.
pub fn coulomb_matrix(geom: &Geometry, max_atoms: usize) -> Result<CoulombMatrix, FeaturizeError> {
    let n = geom.natoms();
    if n > max_atoms {
        return Err(FeaturizeError::TooManyAtoms {
            natoms: n,
            max_atoms,
        });
    }
    let mut m = Mat::zeros(max_atoms, max_atoms);
    for i in 0..n {
        m.set(i, i, 0.5 * (geom.charges[i] as f64).powf(2.4));
        for j in (i + 1)..n {
            let d = geom.distance(i, j);
            if d < 1e-8 {
                return Err(FeaturizeError::CoincidentAtoms(i, j));
            }
            let v = geom.charges[i] as f64 * geom.charges[j] as f64 / d;
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    Ok(CoulombMatrix { values: m, natoms: n })
}

/// Randomized row sort plus binary expansion, after Montavon et al.
///
/// Real-atom rows are ordered by descending row norm after adding seeded
/// zero-mean Gaussian noise of scale `noise_scale` to each norm (padding rows
/// stay at the bottom); the same permutation is applied to rows and columns.
/// Every entry of the upper triangle plus diagonal is then expanded into
/// `tanh((x − θ) / expansion_step)` over the inclusive threshold grid
/// `expansion_range.0, +step, ..., ≤ expansion_range.1`.
///
/// Output length: `max_atoms·(max_atoms+1)/2 × n_thresholds`. With
/// `noise_scale = 0` the sort is deterministic by row norm (ties broken by
/// index) and the result is permutation-invariant for distinct norms.
pub fn cm_randomize_expand(
    cm: &CoulombMatrix,
    seed: u64,
    noise_scale: f64,
    expansion_step: f64,
    expansion_range: (f64, f64),
) -> Vec<f64> {
    let m = cm.values.rows();
    let n = cm.natoms;

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut keyed: Vec<(usize, f64)> = (0..n)
        .map(|i| {
            let norm = cm.values.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            let noise = if noise_scale > 0.0 {
                noise_scale * normal.sample(&mut rng)
            } else {
                0.0
            };
            (i, norm + noise)
        })
        .collect();
    keyed.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    let mut order: Vec<usize> = keyed.into_iter().map(|(i, _)| i).collect();
    order.extend(n..m); // padding rows keep their slots

    let mut thresholds = Vec::new();
    let mut theta = expansion_range.0;
    while theta <= expansion_range.1 + 1e-12 {
        thresholds.push(theta);
        theta += expansion_step;
    }

    let mut out = Vec::with_capacity(m * (m + 1) / 2 * thresholds.len());
    for i in 0..m {
        for j in i..m {
            let x = cm.values.get(order[i], order[j]);
            for &t in &thresholds {
                out.push(((x - t) / expansion_step).tanh());
            }
        }
    }
    out
}
