//! Symmetric banded storage and banded Cholesky.
//!
//! Only the lower triangle is stored, one diagonal per row of the band array:
//! `band[d][j] = A[j + d][j]` for `d = 0..=w`. A factorization is a value of
//! its own ([`BandCholesky`]) and can be shared across threads for solves.

use nalgebra::DMatrix;

use crate::basis::DesignMatrix;
use crate::error::{Error, Result};
use crate::penalty::PenaltyMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    size: usize,
    bandwidth: usize,
    bands: Vec<Vec<f64>>,
}

impl BandedMatrix {
    pub fn zeros(size: usize, bandwidth: usize) -> Self {
        let bandwidth = bandwidth.min(size.saturating_sub(1));
        Self {
            size,
            bandwidth,
            bands: (0..=bandwidth).map(|d| vec![0.0; size - d.min(size)]).collect(),
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, 0);
        m.bands[0].fill(1.0);
        m
    }

    /// Takes the band `|i - j| <= bandwidth` of the lower triangle of `dense`.
    pub fn from_dense(dense: &DMatrix<f64>, bandwidth: usize) -> Self {
        assert_eq!(dense.nrows(), dense.ncols());
        let mut m = Self::zeros(dense.nrows(), bandwidth);
        for d in 0..=m.bandwidth {
            for j in 0..m.size - d {
                m.bands[d][j] = dense[(j + d, j)];
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bandwidth {
            0.0
        } else {
            self.bands[d][lo]
        }
    }

    /// Adds `value` to both `(i, j)` and `(j, i)` (once on the diagonal).
    pub fn add_at(&mut self, i: usize, j: usize, value: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(d <= self.bandwidth, "entry ({i}, {j}) outside band {}", self.bandwidth);
        self.bands[d][lo] += value;
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.bands[0]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.size, self.size, |i, j| self.get(i, j))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.size);
        let mut out: Vec<f64> = self.bands[0].iter().zip(x).map(|(a, b)| a * b).collect();
        for d in 1..=self.bandwidth {
            for (j, a) in self.bands[d].iter().enumerate() {
                out[j + d] += a * x[j];
                out[j] += a * x[j + d];
            }
        }
        out
    }

    /// `self + scale * other`, with bandwidth the larger of the two.
    pub fn add_scaled(&self, other: &BandedMatrix, scale: f64) -> Result<BandedMatrix> {
        if self.size != other.size {
            return Err(Error::SizeMismatch {
                expected: self.size,
                found: other.size,
            });
        }
        let mut out = Self::zeros(self.size, self.bandwidth.max(other.bandwidth));
        for (d, band) in self.bands.iter().enumerate() {
            out.bands[d].copy_from_slice(band);
        }
        if scale != 0.0 {
            for (d, band) in other.bands.iter().enumerate() {
                for (o, v) in out.bands[d].iter_mut().zip(band) {
                    *o += scale * v;
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, scale: f64) -> BandedMatrix {
        let mut out = self.clone();
        for band in &mut out.bands {
            band.iter_mut().for_each(|v| *v *= scale);
        }
        out
    }

    /// Banded Cholesky `A = L L'`; `O(q w²)`.
    pub fn cholesky(&self) -> Result<BandCholesky> {
        let n = self.size;
        let w = self.bandwidth;
        let mut l = self.bands.clone();
        for j in 0..n {
            let mut pivot = l[0][j];
            for k in j.saturating_sub(w)..j {
                let v = l[j - k][k];
                pivot -= v * v;
            }
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: pivot });
            }
            let root = pivot.sqrt();
            l[0][j] = root;
            for i in (j + 1)..(j + w + 1).min(n) {
                let mut s = l[i - j][j];
                for k in i.saturating_sub(w)..j {
                    s -= l[i - k][k] * l[j - k][k];
                }
                l[i - j][j] = s / root;
            }
        }
        Ok(BandCholesky {
            size: n,
            bandwidth: w,
            factor: l,
        })
    }
}

/// Lower-triangular banded Cholesky factor.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    size: usize,
    bandwidth: usize,
    factor: Vec<Vec<f64>>,
}

impl BandCholesky {
    pub fn size(&self) -> usize {
        self.size
    }

    /// Solves `A x = rhs`; `O(q w)`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.size);
        let (n, w, l) = (self.size, self.bandwidth, &self.factor);
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(w)..i {
                s -= l[i - k][k] * x[k];
            }
            x[i] = s / l[0][i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..(i + w + 1).min(n) {
                s -= l[k - i][i] * x[k];
            }
            x[i] = s / l[0][i];
        }
    }

    pub fn solve_many(&self, rhs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rhs.iter().map(|r| self.solve(r)).collect()
    }

    /// `log det A`.
    pub fn log_det(&self) -> f64 {
        2.0 * self.factor[0].iter().map(|v| v.ln()).sum::<f64>()
    }
}

/// Solves `A x = b` for every right-hand side.
pub fn band_cholesky_solve(a: &BandedMatrix, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let chol = a.cholesky()?;
    for r in rhs {
        if r.len() != a.size() {
            return Err(Error::SizeMismatch {
                expected: a.size(),
                found: r.len(),
            });
        }
    }
    Ok(chol.solve_many(rhs))
}

/// `X' X` with bandwidth `p`.
pub fn gram_banded(x: &DesignMatrix) -> BandedMatrix {
    weighted_gram_banded(x, None)
}

/// `X' diag(w) X` with bandwidth `p`.
pub fn weighted_gram_banded(x: &DesignMatrix, weights: Option<&[f64]>) -> BandedMatrix {
    let width = x.row_width();
    let mut g = BandedMatrix::zeros(x.cols(), width - 1);
    x.for_each_row(|first, vals, i| {
        let wi = weights.map_or(1.0, |w| w[i]);
        for s in 0..width {
            let a = vals[s] * wi;
            for t in 0..=s {
                g.bands[s - t][first + t] += a * vals[t];
            }
        }
    });
    g
}

/// `Λ = G + λ Q`.
pub fn penalized_gram(gram: &BandedMatrix, lambda: f64, penalty: &PenaltyMatrix) -> Result<BandedMatrix> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "smoothing parameter must be non-negative, got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(gram.clone());
    }
    gram.add_scaled(penalty.banded(), lambda)
}

/// Smallest eigenvalue of a symmetric matrix (dense symmetric eigensolver).
pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(a).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let sym = 0.5 * (a + a.transpose());
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
