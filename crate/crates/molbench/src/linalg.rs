//! Minimal dense linear algebra: a row-major `f64` matrix and the handful of
//! kernels the models need (dot products, Cholesky solve, column statistics).
//! Kept dependency-free so training stays single-threaded and bit-reproducible.

use serde::{Deserialize, Serialize};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "shape mismatch");
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_assign_at(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] += v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Select a subset of rows (used to slice train/valid/test subsets).
    pub fn select_rows(&self, idx: &[usize]) -> Mat {
        let mut out = Mat::zeros(idx.len(), self.cols);
        for (k, &i) in idx.iter().enumerate() {
            out.row_mut(k).copy_from_slice(self.row(i));
        }
        out
    }

    /// Per-column mean and standard deviation (population, divisor n).
    /// Columns with zero variance get std 1.0 so standardization is a no-op.
    pub fn column_mean_std(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.rows.max(1) as f64;
        let mut mean = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (c, m) in mean.iter_mut().enumerate() {
                *m += self.get(r, c);
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut var = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (c, v) in var.iter_mut().enumerate() {
                let d = self.get(r, c) - mean[c];
                *v += d * d;
            }
        }
        let std = var
            .iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 1e-12 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        (mean, std)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// y += alpha * x
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for i in 0..x.len() {
        y[i] += alpha * x[i];
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    s
}

/// In-place Cholesky solve of the symmetric positive-definite system
/// `a x = b`. `a` is overwritten with its lower factor, `b` with the
/// solution. Fails when a pivot drops below a tiny positive floor, which is
/// how singular (or indefinite) kernels surface.
pub fn cholesky_solve_in_place(a: &mut Mat, b: &mut [f64]) -> Result<(), NotSpd> {
    let n = a.rows();
    assert_eq!(a.cols(), n, "matrix must be square");
    assert_eq!(b.len(), n);
    // Factor: A = L L^T, lower triangle stored in place.
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            let l = a.get(j, k);
            d -= l * l;
        }
        if d <= 1e-12 {
            return Err(NotSpd { pivot: j, value: d });
        }
        let d = d.sqrt();
        a.set(j, j, d);
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= a.get(i, k) * a.get(j, k);
            }
            a.set(i, j, s / d);
        }
    }
    // Forward solve L y = b.
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a.get(i, k) * b[k];
        }
        b[i] = s / a.get(i, i);
    }
    // Back solve L^T x = y.
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= a.get(k, i) * b[k];
        }
        b[i] = s / a.get(i, i);
    }
    Ok(())
}

/// Returned when a Cholesky pivot is not positive.
#[derive(Debug, Clone, Copy)]
pub struct NotSpd {
    pub pivot: usize,
    pub value: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_small_system() {
        // A = [[4,2],[2,3]], b = [8, 7] -> x = [1.25, 1.5]
        let mut a = Mat::from_vec(2, 2, vec![4.0, 2.0, 2.0, 3.0]);
        let mut b = vec![8.0, 7.0];
        cholesky_solve_in_place(&mut a, &mut b).unwrap();
        assert!((b[0] - 1.25).abs() < 1e-12);
        assert!((b[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_singular() {
        let mut a = Mat::from_vec(2, 2, vec![1.0, 1.0, 1.0, 1.0]);
        let mut b = vec![1.0, 1.0];
        assert!(cholesky_solve_in_place(&mut a, &mut b).is_err());
    }

    #[test]
    fn column_stats() {
        let m = Mat::from_rows(&[vec![1.0, 5.0], vec![3.0, 5.0]]);
        let (mean, std) = m.column_mean_std();
        assert_eq!(mean, vec![2.0, 5.0]);
        assert!((std[0] - 1.0).abs() < 1e-12);
        assert_eq!(std[1], 1.0); // zero-variance column maps to 1.0
    }
}
