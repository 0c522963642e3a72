//! Symmetric positive definite band matrices with an LDLᵀ factorization.

use crate::error::{Error, Result};

/// Lower band of a symmetric matrix: `lower[i][k]` is entry `(i, i−k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpd {
    width: usize,
    lower: Vec<Vec<f64>>,
}

impl BandSpd {
    pub fn zeros(n: usize, width: usize) -> Self {
        Self {
            width,
            lower: vec![vec![0.0; width + 1]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Entry (i, j); zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        if k > self.width {
            0.0
        } else {
            self.lower[i][k]
        }
    }

    /// Sets entries (i, j) and (j, i).
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        assert!(k <= self.width, "entry ({i}, {j}) outside band {}", self.width);
        self.lower[i][k] = v;
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            for k in 0..=self.width.min(i) {
                let a = self.lower[i][k];
                y[i] += a * x[i - k];
                if k > 0 {
                    y[i - k] += a * x[i];
                }
            }
        }
        y
    }

    /// Principal submatrix on the sorted index set `idx`.
    pub fn restrict(&self, idx: &[usize]) -> BandSpd {
        let mut m = BandSpd::zeros(idx.len(), self.width);
        for (a, &i) in idx.iter().enumerate() {
            for b in a.saturating_sub(self.width)..=a {
                let j = idx[b];
                if i - j <= self.width {
                    m.lower[a][a - b] = self.get(i, j);
                }
            }
        }
        m
    }

    /// Solves `A x = b` by LDLᵀ without pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let w = self.width;
        // l[i][k] = L(i, i−k), d[i] = D(i)
        let mut l = vec![vec![0.0; w + 1]; n];
        let mut d = vec![0.0; n];
        for i in 0..n {
            for k in (1..=w.min(i)).rev() {
                let j = i - k;
                let mut s = self.lower[i][k];
                for m in 1..=w {
                    if k + m > w || m > j {
                        break;
                    }
                    // L(i, j−m) L(j, j−m) D(j−m)
                    s -= l[i][k + m] * l[j][m] * d[j - m];
                }
                l[i][k] = s / d[j];
            }
            let mut s = self.lower[i][0];
            for k in 1..=w.min(i) {
                s -= l[i][k] * l[i][k] * d[i - k];
            }
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Instability(format!(
                    "band matrix is not positive definite at row {i} (pivot {s:e})"
                )));
            }
            d[i] = s;
        }
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 1..=w.min(i) {
                y[i] -= l[i][k] * y[i - k];
            }
        }
        for (yi, di) in y.iter_mut().zip(&d) {
            *yi /= di;
        }
        for i in (0..n).rev() {
            for k in 1..=w.min(n - 1 - i) {
                y[i] -= l[i + k][k] * y[i + k];
            }
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn sample(n: usize) -> BandSpd {
        let mut m = BandSpd::zeros(n, 2);
        for i in 0..n {
            m.set(i, i, 7.0 + i as f64 * 0.1);
            if i >= 1 {
                m.set(i, i - 1, -2.0 + 0.05 * i as f64);
            }
            if i >= 2 {
                m.set(i, i - 2, 0.7);
            }
        }
        m
    }

    #[test]
    fn solve_matches_dense() {
        let n = 12;
        let m = sample(n);
        let dense = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = m.solve(&b).unwrap();
        let xd = dense.cholesky().unwrap().solve(&DVector::from_vec(b.clone()));
        for i in 0..n {
            assert!((x[i] - xd[i]).abs() < 1e-13);
        }
        let r = m.mul(&x);
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn restriction_keeps_entries() {
        let m = sample(10);
        let idx = [0usize, 1, 3, 4, 5, 8, 9];
        let r = m.restrict(&idx);
        for a in 0..idx.len() {
            for b in 0..idx.len() {
                assert_eq!(r.get(a, b), if a.abs_diff(b) <= 2 { m.get(idx[a], idx[b]) } else { 0.0 });
            }
        }
        let b = vec![1.0; idx.len()];
        let x = r.solve(&b).unwrap();
        let back = r.mul(&x);
        assert!(back.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut m = BandSpd::zeros(3, 1);
        m.set(0, 0, 1.0);
        m.set(1, 0, 2.0);
        m.set(1, 1, 1.0);
        m.set(2, 2, 1.0);
        assert!(m.solve(&[1.0, 1.0, 1.0]).is_err());
    }
}
