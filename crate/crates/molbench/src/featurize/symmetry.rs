//! Atom-centered radial and angular symmetry functions, element-resolved.

use super::{FeaturizeError, Geometry};

/// Grids and cutoffs for the symmetry-function featurizer. The defaults are
/// configuration, not constants: 16 radial shells on [0.5, 4.6] Å with
/// η = 4.0, 8 angular centers on (0, π) with ζ = 8.0, cutoff 4.6 Å.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryParams {
    /// Known element symbols; features are resolved per element / element
    /// pair in this order.
    pub elements: Vec<String>,
    pub radial_shells: Vec<f64>,
    pub radial_eta: f64,
    pub angular_centers: Vec<f64>,
    pub angular_zeta: f64,
    pub angular_eta: f64,
    /// Single radial shell for the angular terms (mean-distance Gaussian).
    pub angular_shell: f64,
    pub cutoff: f64,
}

impl Default for SymmetryParams {
    fn default() -> Self {
        let radial_shells: Vec<f64> = (0..16)
            .map(|k| 0.5 + k as f64 * (4.6 - 0.5) / 15.0)
            .collect();
        let angular_centers: Vec<f64> = (0..8)
            .map(|k| (k as f64 + 0.5) * std::f64::consts::PI / 8.0)
            .collect();
        SymmetryParams {
            elements: vec!["H".into(), "C".into(), "N".into(), "O".into()],
            radial_shells,
            radial_eta: 4.0,
            angular_centers,
            angular_zeta: 8.0,
            angular_eta: 4.0,
            angular_shell: 2.0,
            cutoff: 4.6,
        }
    }
}

impl SymmetryParams {
    /// Per-atom feature length: one radial block per element plus one
    /// angular block per unordered element pair.
    pub fn feature_len(&self) -> usize {
        let e = self.elements.len();
        e * self.radial_shells.len() + e * (e + 1) / 2 * self.angular_centers.len()
    }

    fn element_index(&self, symbol: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == symbol)
    }

    /// Index of the unordered pair (a, b) among pairs listed row-major with
    /// a ≤ b.
    fn pair_index(&self, a: usize, b: usize) -> usize {
        let (lo, hi) = (a.min(b), a.max(b));
        let e = self.elements.len();
        lo * e - lo * lo.saturating_sub(1) / 2 + (hi - lo)
    }
}

/// Smooth cutoff: 0.5·cos(πR/R_c) + 0.5 for R < R_c, else 0.
fn cutoff_fn(r: f64, rc: f64) -> f64 {
    if r < rc {
        0.5 * (std::f64::consts::PI * r / rc).cos() + 0.5
    } else {
        0.0
    }
}

/// Per-atom symmetry-function vectors.
///
/// Radial term for center i, neighbor element E and shell R_s:
/// Σ_{j: elem(j)=E} exp(−η(R_ij − R_s)²)·f_c(R_ij).
/// Angular term for element pair (E1, E2) and center θ_s, summed over
/// unordered neighbor triplets (i; j, k):
/// 2^{1−ζ}·(1 + cos(θ_ijk − θ_s))^ζ · exp(−η((R_ij+R_ik)/2 − R_s)²) ·
/// f_c(R_ij)·f_c(R_ik).
pub fn symmetry_functions(
    geom: &Geometry,
    params: &SymmetryParams,
) -> Result<Vec<Vec<f64>>, FeaturizeError> {
    let n = geom.natoms();
    let elem_idx: Vec<usize> = geom
        .elements
        .iter()
        .map(|e| {
            params
                .element_index(e)
                .ok_or_else(|| FeaturizeError::UnknownElement(e.clone()))
        })
        .collect::<Result<_, _>>()?;

    let nr = params.radial_shells.len();
    let na = params.angular_centers.len();
    let angular_offset = params.elements.len() * nr;
    let prefactor = (2f64).powf(1.0 - params.angular_zeta);

    let mut features = vec![vec![0.0; params.feature_len()]; n];
    for i in 0..n {
        // Radial terms.
        for j in 0..n {
            if j == i {
                continue;
            }
            let r = geom.distance(i, j);
            let fc = cutoff_fn(r, params.cutoff);
            if fc == 0.0 {
                continue;
            }
            let base = elem_idx[j] * nr;
            for (s, &rs) in params.radial_shells.iter().enumerate() {
                let d = r - rs;
                features[i][base + s] += (-params.radial_eta * d * d).exp() * fc;
            }
        }
        // Angular terms over unordered neighbor pairs.
        for j in 0..n {
            if j == i {
                continue;
            }
            let rij = geom.distance(i, j);
            let fij = cutoff_fn(rij, params.cutoff);
            if fij == 0.0 {
                continue;
            }
            for k in (j + 1)..n {
                if k == i {
                    continue;
                }
                let rik = geom.distance(i, k);
                let fik = cutoff_fn(rik, params.cutoff);
                if fik == 0.0 {
                    continue;
                }
                let vj = sub(geom.coords[j], geom.coords[i]);
                let vk = sub(geom.coords[k], geom.coords[i]);
                let cos_t = (dot3(vj, vk) / (rij * rik)).clamp(-1.0, 1.0);
                let theta = cos_t.acos();
                let rmean = 0.5 * (rij + rik);
                let gauss = (-params.angular_eta
                    * (rmean - params.angular_shell)
                    * (rmean - params.angular_shell))
                    .exp();
                let base = angular_offset
                    + params.pair_index(elem_idx[j], elem_idx[k]) * na;
                for (s, &ts) in params.angular_centers.iter().enumerate() {
                    let ang = (1.0 + (theta - ts).cos()).powf(params.angular_zeta);
                    features[i][base + s] += prefactor * ang * gauss * fij * fik;
                }
            }
        }
    }
    Ok(features)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
