//! Band-storage matrices and LU factorization with partial pivoting.
//!
//! Row-major band storage: entry `(r, c)` lives at `band[r * w + (c - r + kl)]`
//! with `w = kl + ku + 1`. The factorization widens each row to
//! `2 kl + ku + 1` columns so that row interchanges have room for fill.

use thiserror::Error;

/// Relative pivot threshold, scaled by `max |A|`.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("bandwidths kl = {kl}, ku = {ku} must be below the dimension {n}")]
    InvalidBandwidth { n: usize, kl: usize, ku: usize },
    #[error("entry ({row}, {col}) lies outside the band (kl = {kl}, ku = {ku})")]
    OutOfBand {
        row: usize,
        col: usize,
        kl: usize,
        ku: usize,
    },
    #[error("singular matrix: pivot {pivot:e} in column {column} is below {threshold:e}")]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    band: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Result<Self, LinalgError> {
        if n == 0 || kl >= n || ku >= n {
            return Err(LinalgError::InvalidBandwidth { n, kl, ku });
        }
        Ok(Self {
            n,
            kl,
            ku,
            band: vec![0.0; n * (kl + ku + 1)],
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, 0, 0).expect("n > 0");
        for r in 0..n {
            a.band[r] = 1.0;
        }
        a
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kl(&self) -> usize {
        self.kl
    }

    pub fn ku(&self) -> usize {
        self.ku
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    fn slot(&self, row: usize, col: usize) -> Option<usize> {
        if row >= self.n || col >= self.n || col + self.kl < row || col > row + self.ku {
            return None;
        }
        Some(row * self.width() + col + self.kl - row)
    }

    /// Entry `(row, col)`; zero outside the band.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.slot(row, col).map_or(0.0, |s| self.band[s])
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) -> Result<(), LinalgError> {
        let s = self.slot(row, col).ok_or(LinalgError::OutOfBand {
            row,
            col,
            kl: self.kl,
            ku: self.ku,
        })?;
        self.band[s] = value;
        Ok(())
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) -> Result<(), LinalgError> {
        let s = self.slot(row, col).ok_or(LinalgError::OutOfBand {
            row,
            col,
            kl: self.kl,
            ku: self.ku,
        })?;
        self.band[s] += value;
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.band.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let y = (0..self.n)
            .map(|r| {
                let lo = r.saturating_sub(self.kl);
                let hi = (r + self.ku).min(self.n - 1);
                (lo..=hi).map(|c| self.get(r, c) * x[c]).sum()
            })
            .collect();
        Ok(y)
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.get(r, c)).collect())
            .collect()
    }
}

/// LU factors of a [`BandedMatrix`] in LAPACK `gbtrf` layout (row-major).
///
/// The unit lower factor is stored as the multipliers of each elimination
/// step; later interchanges are not applied to earlier multiplier columns,
/// so `solve` replays the pivots step by step.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    factors: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    fn width(kl: usize, ku: usize) -> usize {
        2 * kl + ku + 1
    }

    #[inline]
    fn idx(&self, row: usize, col: usize) -> usize {
        debug_assert!(col + self.kl >= row && col <= row + self.kl + self.ku);
        row * Self::width(self.kl, self.ku) + col + self.kl - row
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if b.len() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                got: b.len(),
            });
        }
        let n = self.n;
        let mut x = b.to_vec();
        // L y = P b
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..(k + self.kl + 1).min(n) {
                    x[i] -= self.factors[self.idx(i, k)] * xk;
                }
            }
        }
        // U x = y
        let reach = self.kl + self.ku;
        for k in (0..n).rev() {
            let mut s = x[k];
            for c in k + 1..(k + reach + 1).min(n) {
                s -= self.factors[self.idx(k, c)] * x[c];
            }
            x[k] = s / self.factors[self.idx(k, k)];
        }
        Ok(x)
    }
}

pub fn lu_factor(a: &BandedMatrix) -> Result<BandedLu, LinalgError> {
    factor_with_fill(a, 0.0)
}

/// Factorization where storage slots that map to no matrix entry are
/// initialised with `fill`. A NaN fill acts as a canary in tests.
pub(crate) fn factor_with_fill(a: &BandedMatrix, fill: f64) -> Result<BandedLu, LinalgError> {
    let (n, kl, ku) = (a.n, a.kl, a.ku);
    let w = BandedLu::width(kl, ku);
    let mut lu = BandedLu {
        n,
        kl,
        ku,
        factors: vec![fill; n * w],
        pivots: vec![0; n],
    };
    for r in 0..n {
        let lo = r.saturating_sub(kl);
        let hi = (r + kl + ku).min(n - 1);
        for c in lo..=hi {
            let i = lu.idx(r, c);
            lu.factors[i] = a.get(r, c);
        }
    }

    let threshold = SINGULAR_PIVOT_TOL * a.max_abs();
    for k in 0..n {
        let last_row = (k + kl).min(n - 1);
        let last_col = (k + kl + ku).min(n - 1);

        let mut p = k;
        let mut best = lu.factors[lu.idx(k, k)].abs();
        for r in k + 1..=last_row {
            let v = lu.factors[lu.idx(r, k)].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if !(best > threshold) {
            return Err(LinalgError::Singular {
                column: k,
                pivot: best,
                threshold,
            });
        }
        lu.pivots[k] = p;
        if p != k {
            for c in k..=last_col {
                let (ik, ip) = (lu.idx(k, c), lu.idx(p, c));
                lu.factors.swap(ik, ip);
            }
        }

        let pivot = lu.factors[lu.idx(k, k)];
        for r in k + 1..=last_row {
            let ir = lu.idx(r, k);
            let l = lu.factors[ir] / pivot;
            lu.factors[ir] = l;
            if l == 0.0 {
                continue;
            }
            for c in k + 1..=last_col {
                let (irc, ikc) = (lu.idx(r, c), lu.idx(k, c));
                lu.factors[irc] -= l * lu.factors[ikc];
            }
        }
    }
    Ok(lu)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
                .unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for r in k + 1..n {
                let l = a[r][k] / a[k][k];
                for c in k..n {
                    a[r][c] -= l * a[k][c];
                }
                b[r] -= l * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|c| a[k][c] * x[c]).sum();
            x[k] = (b[k] - s) / a[k][k];
        }
        x
    }

    #[test]
    fn identity_solves_to_rhs() {
        let lu = lu_factor(&BandedMatrix::identity(3)).unwrap();
        assert_eq!(lu.solve(&[3.0, -1.0, 4.0]).unwrap(), vec![3.0, -1.0, 4.0]);
        assert_eq!(lu.solve(&[0.0; 3]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let n = 6;
        let mut a = BandedMatrix::zeros(n, 1, 1).unwrap();
        for r in 0..n {
            a.set(r, r, 2.0).unwrap();
            if r > 0 {
                a.set(r, r - 1, -1.0).unwrap();
            }
            if r + 1 < n {
                a.set(r, r + 1, -1.0).unwrap();
            }
        }
        let b = vec![1.0; n];
        let x = lu_factor(&a).unwrap().solve(&b).unwrap();
        let oracle = dense_solve(a.to_dense(), b);
        // 1-D Poisson with unit load: x_k = (k+1)(n-k)/2
        for k in 0..n {
            assert!((x[k] - oracle[k]).abs() <= 1e-12);
            assert!((x[k] - ((k + 1) * (n - k)) as f64 / 2.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_matrix_is_singular() {
        let a = BandedMatrix::zeros(5, 2, 1).unwrap();
        assert!(matches!(lu_factor(&a), Err(LinalgError::Singular { column: 0, .. })));
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]] needs an interchange
        let mut a = BandedMatrix::zeros(2, 1, 1).unwrap();
        a.set(0, 1, 1.0).unwrap();
        a.set(1, 0, 1.0).unwrap();
        let lu = lu_factor(&a).unwrap();
        assert_eq!(lu.pivots(), &[1, 1]);
        assert_eq!(lu.solve(&[2.0, 5.0]).unwrap(), vec![5.0, 2.0]);
    }

    #[test]
    fn out_of_band_access() {
        let mut a = BandedMatrix::zeros(6, 1, 2).unwrap();
        assert!(matches!(a.set(3, 0, 1.0), Err(LinalgError::OutOfBand { .. })));
        assert!(matches!(a.set(0, 3, 1.0), Err(LinalgError::OutOfBand { .. })));
        assert!(a.set(0, 2, 1.0).is_ok());
        assert_eq!(a.get(5, 0), 0.0);
        assert_eq!(a.get(0, 2), 1.0);
        assert!(BandedMatrix::zeros(3, 3, 0).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let lu = lu_factor(&BandedMatrix::identity(3)).unwrap();
        assert_eq!(
            lu.solve(&[1.0]),
            Err(LinalgError::DimensionMismatch {
                expected: 3,
                got: 1
            })
        );
    }

    fn random_banded(n: usize, kl: usize, ku: usize, seed: u64, dominant: bool) -> BandedMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut a = BandedMatrix::zeros(n, kl, ku).unwrap();
        for r in 0..n {
            let lo = r.saturating_sub(kl);
            let hi = (r + ku).min(n - 1);
            let mut off = 0.0;
            for c in lo..=hi {
                if c != r {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    off += v.abs();
                    a.set(r, c, v).unwrap();
                }
            }
            let d: f64 = rng.gen_range(-1.0..1.0);
            let diag = if dominant {
                off + 1.0 + d.abs()
            } else {
                d.signum() * (0.5 + d.abs())
            };
            a.set(r, r, diag).unwrap();
        }
        a
    }

    #[test]
    fn canary_fill_is_never_touched() {
        for (seed, (kl, ku)) in [(1, 3), (3, 3), (2, 0), (0, 2), (3, 1)].into_iter().enumerate() {
            // not diagonally dominant, so interchanges happen
            let a = random_banded(40, kl, ku, seed as u64, false);
            let x_true: Vec<f64> = (0..40).map(|k| (k as f64 * 0.37).sin()).collect();
            let b = a.mul_vec(&x_true).unwrap();
            let lu = factor_with_fill(&a, f64::NAN).unwrap();
            let x = lu.solve(&b).unwrap();
            let oracle = dense_solve(a.to_dense(), b.clone());
            for k in 0..40 {
                assert!(x[k].is_finite(), "canary leaked for kl={kl} ku={ku}");
                assert!(
                    (x[k] - oracle[k]).abs() <= 1e-9 * (1.0 + oracle[k].abs()),
                    "kl={kl} ku={ku} k={k}: {} vs {}",
                    x[k],
                    oracle[k]
                );
            }
        }
    }

    #[test]
    fn residual_bound() {
        let a = random_banded(150, 3, 3, 42, false);
        let b: Vec<f64> = (0..150).map(|k| (k as f64).cos()).collect();
        let x = lu_factor(&a).unwrap().solve(&b).unwrap();
        let ax = a.mul_vec(&x).unwrap();
        let bmax = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let res = ax.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        assert!(res <= 1e-10 * (1.0 + bmax), "residual {res}");
    }
}
