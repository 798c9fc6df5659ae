//! Symmetric positive definite banded matrices and their Cholesky factor.

use crate::error::{Error, Result};

/// Lower band storage: `lower[i][k]` holds `A[i][i-k]` for `k = 0..=bw`.
#[derive(Clone, Debug)]
pub struct SymBanded {
    n: usize,
    bw: usize,
    lower: Vec<Vec<f64>>,
}

impl SymBanded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            lower: vec![vec![0.0; bw + 1]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Adds `v` to `A[i][j]` (and `A[j][i]`); requires `|i-j| <= bw`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(hi - lo <= self.bw);
        self.lower[hi][hi - lo] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        if hi - lo > self.bw {
            0.0
        } else {
            self.lower[hi][hi - lo]
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            for k in 0..=self.bw.min(i) {
                let a = self.lower[i][k];
                y[i] += a * x[i - k];
                if k > 0 {
                    y[i - k] += a * x[i];
                }
            }
        }
        y
    }

    /// `A - s I`.
    pub fn shifted(&self, s: f64) -> Self {
        let mut out = self.clone();
        for row in &mut out.lower {
            row[0] -= s;
        }
        out
    }

    /// Cholesky factor `A = L L^T`; fails if `A` is not positive definite.
    pub fn cholesky(&self) -> Result<BandedCholesky> {
        let n = self.n;
        let bw = self.bw;
        let mut l = vec![vec![0.0; bw + 1]; n];
        for i in 0..n {
            for k in (0..=bw.min(i)).rev() {
                let j = i - k;
                // L[i][j] = (A[i][j] - sum_m L[i][m] L[j][m]) / L[j][j]
                let mut s = self.lower[i][k];
                let m_lo = i.saturating_sub(bw);
                for m in m_lo..j {
                    s -= l[i][i - m] * l[j][j - m];
                }
                if k == 0 {
                    if s <= 0.0 {
                        return Err(Error::Eigen(format!(
                            "matrix not positive definite at row {i}"
                        )));
                    }
                    l[i][0] = s.sqrt();
                } else {
                    l[i][k] = s / l[j][0];
                }
            }
        }
        Ok(BandedCholesky { n, bw, l })
    }
}

#[derive(Clone, Debug)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<Vec<f64>>,
}

impl BandedCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 1..=self.bw.min(i) {
                s -= self.l[i][k] * y[i - k];
            }
            y[i] = s / self.l[i][0];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in 1..=self.bw.min(n - 1 - i) {
                s -= self.l[i + k][k] * y[i + k];
            }
            y[i] = s / self.l[i][0];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laplacian_like(n: usize) -> SymBanded {
        let mut a = SymBanded::zeros(n, 2);
        for i in 0..n {
            a.add(i, i, 6.0);
            if i >= 1 {
                a.add(i, i - 1, -4.0 / 3.0);
            }
            if i >= 2 {
                a.add(i, i - 2, 1.0 / 12.0);
            }
        }
        a
    }

    proptest! {
        #[test]
        fn cholesky_solves_spd_systems(b in proptest::collection::vec(-1.0f64..1.0, 40)) {
            let a = laplacian_like(40);
            let x = a.cholesky().unwrap().solve(&b);
            let r = a.matvec(&x);
            for (ri, bi) in r.iter().zip(&b) {
                prop_assert!((ri - bi).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn detects_indefinite_matrix() {
        let a = laplacian_like(10).shifted(10.0);
        assert!(a.cholesky().is_err());
    }

    #[test]
    fn storage_is_symmetric() {
        let a = laplacian_like(5);
        assert_eq!(a.get(1, 3), a.get(3, 1));
        assert_eq!(a.get(0, 4), 0.0);
    }
}
