//! Equidistant knots, Cox–de Boor evaluation and design matrices.
//!
//! Basis functions are indexed the way they appear in the model: for degree
//! `p` and `K` intervals the indices run over `-p+1..=K`, and basis function
//! `k` is supported on `(κ_{k-1}, κ_{k+p}]` with `κ_k = k/K`. Design-matrix
//! column `c` holds basis index `c - p + 1`.
//!
//! Base intervals are half-open on the left, so `x = 0` lies outside every
//! support and all covariates must be in `(0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineConfig {
    degree: usize,
    num_intervals: usize,
    /// `κ_{-p}, …, κ_{K+p}`.
    knots: Vec<f64>,
}

/// Builds `κ_k = k/K` for `k = -p, …, K+p`.
pub fn make_knots(degree: usize, num_intervals: usize) -> Result<SplineConfig> {
    if num_intervals == 0 {
        return Err(Error::InvalidConfig(
            "number of knot intervals must be at least 1".into(),
        ));
    }
    let p = degree as i64;
    let k_n = num_intervals as i64;
    let knots = (-p..=k_n + p)
        .map(|k| k as f64 / num_intervals as f64)
        .collect();
    Ok(SplineConfig {
        degree,
        num_intervals,
        knots,
    })
}

impl SplineConfig {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_intervals(&self) -> usize {
        self.num_intervals
    }

    /// Number of basis functions, `K + p`.
    pub fn num_basis(&self) -> usize {
        self.num_intervals + self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn min_index(&self) -> i64 {
        1 - self.degree as i64
    }

    pub fn max_index(&self) -> i64 {
        self.num_intervals as i64
    }

    /// `κ_k` for `k` in `-p..=K+p`.
    pub fn knot(&self, k: i64) -> f64 {
        self.knots[(k + self.degree as i64) as usize]
    }

    /// Design-matrix column of basis index `k`.
    pub fn column_of(&self, k: i64) -> usize {
        (k + self.degree as i64 - 1) as usize
    }

    pub fn index_of_column(&self, col: usize) -> i64 {
        col as i64 - self.degree as i64 + 1
    }

    fn check_index(&self, index: i64) -> Result<()> {
        if index < self.min_index() || index > self.max_index() {
            return Err(Error::IndexOutOfRange {
                index,
                min: self.min_index(),
                max: self.max_index(),
            });
        }
        Ok(())
    }

    /// The interval `j` in `1..=K` with `κ_{j-1} < x ≤ κ_j`.
    pub fn interval_of(&self, x: f64) -> Result<usize> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::PointOutOfDomain { value: x });
        }
        let k_n = self.num_intervals as i64;
        let mut j = ((x * self.num_intervals as f64).ceil() as i64).clamp(1, k_n);
        while j < k_n && self.knot(j) < x {
            j += 1;
        }
        while j > 1 && self.knot(j - 1) >= x {
            j -= 1;
        }
        Ok(j as usize)
    }

    /// Writes the `p+1` basis values that can be nonzero at `x` into `out`
    /// and returns the design-matrix column of `out[0]`.
    pub fn eval_local(&self, x: f64, out: &mut [f64]) -> Result<usize> {
        let p = self.degree;
        debug_assert_eq!(out.len(), p + 1);
        let j = self.interval_of(x)? as i64;
        let first = j - p as i64;
        out.fill(0.0);
        out[p] = 1.0;
        for d in 1..=p {
            // out[t] holds B_{first+t}^{[d-1]}; overwrite with degree d in place.
            for t in (p - d)..=p {
                let k = first + t as i64;
                let left = if out[t] != 0.0 {
                    ratio(x - self.knot(k - 1), self.knot(k + d as i64 - 1) - self.knot(k - 1)) * out[t]
                } else {
                    0.0
                };
                let next = if t < p { out[t + 1] } else { 0.0 };
                let right = if next != 0.0 {
                    ratio(self.knot(k + d as i64) - x, self.knot(k + d as i64) - self.knot(k)) * next
                } else {
                    0.0
                };
                out[t] = left + right;
            }
        }
        Ok(self.column_of(first))
    }

    /// Full basis vector `B(x) = (B_{-p+1}(x), …, B_K(x))`.
    pub fn basis_vector(&self, x: f64) -> Result<Vec<f64>> {
        let mut local = vec![0.0; self.degree + 1];
        let first = self.eval_local(x, &mut local)?;
        let mut full = vec![0.0; self.num_basis()];
        full[first..first + local.len()].copy_from_slice(&local);
        Ok(full)
    }
}

/// `num / den` with the convention `0/0 := 0`.
fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn cox_de_boor(cfg: &SplineConfig, k: i64, degree: usize, x: f64) -> f64 {
    if degree == 0 {
        return if cfg.knot(k - 1) < x && x <= cfg.knot(k) {
            1.0
        } else {
            0.0
        };
    }
    let d = degree as i64;
    let left = ratio(x - cfg.knot(k - 1), cfg.knot(k + d - 1) - cfg.knot(k - 1));
    let right = ratio(cfg.knot(k + d) - x, cfg.knot(k + d) - cfg.knot(k));
    left * cox_de_boor(cfg, k, degree - 1, x) + right * cox_de_boor(cfg, k + 1, degree - 1, x)
}

/// `B_k^{[p]}(x)` by direct recursion on the degree.
pub fn bspline_eval(cfg: &SplineConfig, index: i64, x: f64) -> Result<f64> {
    cfg.check_index(index)?;
    Ok(cox_de_boor(cfg, index, cfg.degree, x))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * z * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `∫_0^1 B_k(x) dx`, per-interval Gauss–Legendre with `⌈(p+1)/2⌉ + 1` nodes.
pub fn basis_integral(cfg: &SplineConfig, index: i64) -> Result<f64> {
    cfg.check_index(index)?;
    let (nodes, weights) = gauss_legendre((cfg.degree + 1).div_ceil(2) + 1);
    let lo = index.max(1);
    let hi = (index + cfg.degree as i64).min(cfg.max_index());
    let mut total = 0.0;
    for j in lo..=hi {
        let (a, b) = (cfg.knot(j - 1), cfg.knot(j));
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (z, w) in nodes.iter().zip(&weights) {
            total += w * half * cox_de_boor(cfg, index, cfg.degree, mid + half * z);
        }
    }
    Ok(total)
}

/// Row-sparse `n × (K+p)` matrix of basis evaluations. Each row stores its
/// `p+1` possibly-nonzero entries, which are contiguous in column index.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    config: SplineConfig,
    rows: usize,
    cols: usize,
    width: usize,
    first_col: Vec<usize>,
    values: Vec<f64>,
    covariate: Vec<f64>,
}

pub fn design_matrix(cfg: &SplineConfig, points: &[f64]) -> Result<DesignMatrix> {
    let width = cfg.degree + 1;
    let mut first_col = Vec::with_capacity(points.len());
    let mut values = vec![0.0; points.len() * width];
    for (i, &x) in points.iter().enumerate() {
        let first = cfg.eval_local(x, &mut values[i * width..(i + 1) * width])?;
        first_col.push(first);
    }
    Ok(DesignMatrix {
        config: cfg.clone(),
        rows: points.len(),
        cols: cfg.num_basis(),
        width,
        first_col,
        values,
        covariate: points.to_vec(),
    })
}

impl DesignMatrix {
    pub fn config(&self) -> &SplineConfig {
        &self.config
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of stored entries per row (`p+1`).
    pub fn row_width(&self) -> usize {
        self.width
    }

    pub fn covariate(&self) -> &[f64] {
        &self.covariate
    }

    /// First column and stored values of row `i`.
    pub fn row(&self, i: usize) -> (usize, &[f64]) {
        (
            self.first_col[i],
            &self.values[i * self.width..(i + 1) * self.width],
        )
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (first, vals) = self.row(i);
        if j >= first && j < first + self.width {
            vals[j - first]
        } else {
            0.0
        }
    }

    /// `X b`.
    pub fn mul_vec(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let (first, vals) = self.row(i);
                vals.iter().zip(&b[first..]).map(|(v, c)| v * c).sum()
            })
            .collect()
    }

    /// `X' y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            let (first, vals) = self.row(i);
            for (t, v) in vals.iter().enumerate() {
                out[first + t] += v * yi;
            }
        }
        out
    }

    /// Visits each row as `(first column, stored values, row index)`.
    pub(crate) fn for_each_row<F: FnMut(usize, &[f64], usize)>(&self, mut f: F) {
        for i in 0..self.rows {
            let (first, vals) = self.row(i);
            f(first, vals, i);
        }
    }

    /// `X' Z` for a second design on the same rows (dense `cols × other.cols`).
    pub fn cross_gram(&self, other: &DesignMatrix) -> nalgebra::DMatrix<f64> {
        assert_eq!(self.rows, other.rows);
        let mut out = nalgebra::DMatrix::zeros(self.cols, other.cols);
        for i in 0..self.rows {
            let (fa, va) = self.row(i);
            let (fb, vb) = other.row(i);
            for (s, a) in va.iter().enumerate() {
                if *a == 0.0 {
                    continue;
                }
                for (t, b) in vb.iter().enumerate() {
                    out[(fa + s, fb + t)] += a * b;
                }
            }
        }
        out
    }

    /// Dense `n × (K+p)` copy, for tests and small diagnostics.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    /// Column sums `X' 1`.
    pub fn column_sums(&self) -> Vec<f64> {
        self.tr_mul_vec(&vec![1.0; self.rows])
    }
}
