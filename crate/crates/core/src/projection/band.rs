//! Symmetric positive definite band matrices and their Cholesky factorization.

#[derive(Clone, Debug)]
pub(crate) struct BandMatrix {
    n: usize,
    bw: usize,
    // row i holds A[i][i - d] at offset i * (bw + 1) + d
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    /// Adds `v` to A[row][col]; only the lower band (`row >= col`) is stored.
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        debug_assert!(row >= col && row - col <= self.bw);
        self.data[row * (self.bw + 1) + row - col] += v;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (r, c) = if row >= col { (row, col) } else { (col, row) };
        if r - c > self.bw {
            return 0.0;
        }
        self.data[r * (self.bw + 1) + r - c]
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).fold(0.0, f64::max)
    }

    pub fn add_to_diagonal(&mut self, shift: f64) {
        for i in 0..self.n {
            self.data[i * (self.bw + 1)] += shift;
        }
    }

    #[cfg(test)]
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let a = self.data[i * (self.bw + 1) + i - j];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// Lower Cholesky factor, or `None` when a pivot is not positive.
    pub fn cholesky(&self) -> Option<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let mut l = self.data.clone();
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut diag = l[j * w];
            for k in lo..j {
                let v = l[j * w + j - k];
                diag -= v * v;
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return None;
            }
            let pivot = diag.sqrt();
            l[j * w] = pivot;
            for i in (j + 1)..n.min(j + bw + 1) {
                let lo_i = i.saturating_sub(bw);
                let mut s = l[i * w + i - j];
                for k in lo_i.max(lo)..j {
                    s -= l[i * w + i - k] * l[j * w + j - k];
                }
                l[i * w + i - j] = s / pivot;
            }
        }
        Some(BandCholesky { n, bw, l })
    }
}

pub(crate) struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = y[i];
            for k in lo..i {
                s -= self.l[i * w + i - k] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n.min(i + bw + 1) {
                s -= self.l[k * w + k - i] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_random_band_systems_like_dense_cholesky() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, bw) in [(1, 0), (5, 1), (12, 3), (40, 7), (9, 20)] {
            let mut band = BandMatrix::zeros(n, bw);
            // B = C C^T + n I with C banded keeps the band structure of width bw
            let mut dense = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in i.saturating_sub(bw)..=i {
                    let v: f64 = if i == j {
                        n as f64 + 1.0
                    } else {
                        rng.gen_range(-1.0..1.0)
                    };
                    band.add(i, j, v);
                    dense[(i, j)] = v;
                    dense[(j, i)] = v;
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = band.cholesky().expect("diagonally dominant").solve(&b);
            let want = dense
                .cholesky()
                .unwrap()
                .solve(&DVector::from_vec(b.clone()));
            for i in 0..n {
                assert!((x[i] - want[i]).abs() < 1e-12);
            }
            let back = band.mul_vec(&x);
            for i in 0..n {
                assert!((back[i] - b[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut band = BandMatrix::zeros(2, 1);
        band.add(0, 0, 1.0);
        band.add(1, 0, 2.0);
        band.add(1, 1, 1.0);
        assert!(band.cholesky().is_none());
    }
}
