//! Banded LU factorization with partial pivoting.
//!
//! Collocation matrices for spline degrees 2 and 3 have bandwidth at most
//! two on either side of the diagonal, so a compact band solver is all the
//! linear algebra this crate needs. Row storage is widened by `m1` extra
//! columns to absorb the fill-in caused by pivoting.

use crate::error::{Error, Result};

/// Square banded matrix with `m1` sub- and `m2` super-diagonals.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    m1: usize,
    m2: usize,
    width: usize,
    // row i, slot k holds entry (i, i - m1 + k)
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn new(n: usize, m1: usize, m2: usize) -> Self {
        assert!(n > 0);
        let width = 2 * m1 + m2 + 1;
        BandedMatrix { n, m1, m2, width, data: vec![0.0; n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Store entry `(i, j)`; the position must lie inside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.n && j < self.n, "index out of range");
        assert!(
            j + self.m1 >= i && j <= i + self.m2,
            "entry ({i}, {j}) is outside the band (m1={}, m2={})",
            self.m1,
            self.m2
        );
        let slot = j + self.m1 - i;
        self.data[i * self.width + slot] = v;
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + (j + self.m1 - i)]
    }

    fn set_raw(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.width + (j + self.m1 - i)] = v;
    }

    /// LU factorization with partial pivoting.
    pub fn decompose(mut self) -> Result<BandedLu> {
        let (n, m1, m2) = (self.n, self.m1, self.m2);
        let mut perm = vec![0usize; n];
        let mut low = vec![0.0; n * m1.max(1)];
        let mut piv_min = f64::MAX;
        let mut piv_max = 0.0f64;

        for k in 0..n {
            let last_row = (k + m1).min(n - 1);
            let mut p = k;
            let mut best = self.at(k, k).abs();
            for i in (k + 1)..=last_row {
                let v = self.at(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            perm[k] = p;
            let last_col = (k + m1 + m2).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.at(p, j);
                    let b = self.at(k, j);
                    self.set_raw(p, j, b);
                    self.set_raw(k, j, a);
                }
            }
            let pivot = self.at(k, k);
            if pivot == 0.0 {
                return Err(Error::IllConditioned { estimate: f64::INFINITY });
            }
            piv_min = piv_min.min(pivot.abs());
            piv_max = piv_max.max(pivot.abs());
            for i in (k + 1)..=last_row {
                let mult = self.at(i, k) / pivot;
                low[k * m1 + (i - k - 1)] = mult;
                self.set_raw(i, k, 0.0);
                for j in (k + 1)..=last_col {
                    let v = self.at(i, j) - mult * self.at(k, j);
                    self.set_raw(i, j, v);
                }
            }
        }

        Ok(BandedLu { upper: self, perm, low, condition_estimate: piv_max / piv_min })
    }
}

/// Factorized banded system ready for repeated right-hand sides.
#[derive(Debug, Clone)]
pub struct BandedLu {
    upper: BandedMatrix,
    perm: Vec<usize>,
    low: Vec<f64>,
    condition_estimate: f64,
}

impl BandedLu {
    /// Ratio of the largest to the smallest pivot magnitude; a cheap proxy
    /// for the condition number that is exact for diagonal matrices.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.upper.n;
        let m1 = self.upper.m1;
        let m2 = self.upper.m2;
        assert_eq!(b.len(), n, "right-hand side length mismatch");

        for k in 0..n {
            let p = self.perm[k];
            if p != k {
                b.swap(k, p);
            }
            let last_row = (k + m1).min(n - 1);
            for i in (k + 1)..=last_row {
                b[i] -= self.low[k * m1 + (i - k - 1)] * b[k];
            }
        }
        for i in (0..n).rev() {
            let last_col = (i + m1 + m2).min(n - 1);
            let mut acc = b[i];
            for j in (i + 1)..=last_col {
                acc -= self.upper.at(i, j) * b[j];
            }
            b[i] = acc / self.upper.at(i, i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // independent dense solver used as oracle
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in (k + 1)..n {
                let m = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= m * a[k][j];
                }
                b[i] -= m * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in (i + 1)..n {
                acc -= a[i][j] * x[j];
            }
            x[i] = acc / a[i][i];
        }
        x
    }

    #[test]
    fn tridiagonal_solve() {
        let mut m = BandedMatrix::new(3, 1, 1);
        for i in 0..3 {
            m.set(i, i, 2.0);
        }
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 2, 1.0);
        m.set(2, 1, 1.0);
        let lu = m.decompose().unwrap();
        let mut b = vec![4.0, 7.0, 6.0];
        lu.solve(&mut b);
        assert_abs_diff_eq!(b[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let mut m = BandedMatrix::new(2, 1, 1);
        m.set(0, 0, 1.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 1.0);
        assert!(m.decompose().is_err());
    }

    #[test]
    fn matches_dense_oracle_on_random_bands() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..50 {
            let n = rng.random_range(3..40);
            let m1 = rng.random_range(1..=2usize);
            let m2 = rng.random_range(1..=2usize);
            let mut band = BandedMatrix::new(n, m1, m2);
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i.saturating_sub(m1)..=(i + m2).min(n - 1) {
                    // keep rows comfortably nonsingular but not symmetric
                    let v: f64 = if i == j {
                        rng.random_range(2.0..4.0)
                    } else {
                        rng.random_range(-1.0..1.0)
                    };
                    band.set(i, j, v);
                    dense[i][j] = v;
                }
            }
            let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let expected = dense_solve(dense, rhs.clone());
            let lu = band.decompose().unwrap();
            let mut got = rhs;
            lu.solve(&mut got);
            for (g, e) in got.iter().zip(&expected) {
                assert_abs_diff_eq!(g, e, epsilon = 1e-9);
            }
            assert!(lu.condition_estimate().is_finite(), "trial {trial}");
        }
    }
}
