use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square evaluation grid `[lo, hi]²` with `size` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub size: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lo: -4.0,
            hi: 4.0,
            size: 81,
        }
    }
}

impl GridSpec {
    pub fn nodes(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.size - 1) as f64;
        (0..self.size).map(|i| self.lo + i as f64 * step).collect()
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.size - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `values[i][j]` is the density at `(xs[i], ys[j])`.
    pub values: Vec<Vec<f64>>,
    pub bandwidth: [f64; 2],
}

impl DensityGrid {
    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let hx = self.xs[1] - self.xs[0];
        let hy = self.ys[1] - self.ys[0];
        let nx = self.xs.len();
        let ny = self.ys.len();
        let mut total = 0.0;
        for (i, row) in self.values.iter().enumerate() {
            let wi = if i == 0 || i + 1 == nx { 0.5 } else { 1.0 };
            for (j, v) in row.iter().enumerate() {
                let wj = if j == 0 || j + 1 == ny { 0.5 } else { 1.0 };
                total += wi * wj * v;
            }
        }
        total * hx * hy
    }

    /// The `N2(0, I)` density on the same nodes.
    pub fn standard_normal(spec: &GridSpec) -> Self {
        let xs = spec.nodes();
        let values = xs
            .iter()
            .map(|x| {
                xs.iter()
                    .map(|y| (-(x * x + y * y) / 2.0).exp() / (2.0 * std::f64::consts::PI))
                    .collect()
            })
            .collect();
        Self {
            ys: xs.clone(),
            xs,
            values,
            bandwidth: [0.0, 0.0],
        }
    }
}

/// `h_j = M^{-1/6} σ̂_j`, the normal-reference rule in two dimensions.
pub fn normal_reference_bandwidth(sample: &[[f64; 2]]) -> Result<[f64; 2]> {
    if sample.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let m = sample.len() as f64;
    let mut h = [0.0; 2];
    for (j, hj) in h.iter_mut().enumerate() {
        let mean = sample.iter().map(|v| v[j]).sum::<f64>() / m;
        let var = sample.iter().map(|v| (v[j] - mean).powi(2)).sum::<f64>() / (m - 1.0);
        if !(var > 0.0) {
            return Err(Error::DegenerateSample { coordinate: j });
        }
        *hj = m.powf(-1.0 / 6.0) * var.sqrt();
    }
    Ok(h)
}

/// Product-Gaussian kernel density estimate; `bandwidth` overrides the
/// normal-reference rule.
pub fn kde2d(sample: &[[f64; 2]], grid: &GridSpec, bandwidth: Option<[f64; 2]>) -> Result<DensityGrid> {
    if grid.size < 2 || !(grid.hi > grid.lo) {
        return Err(Error::InvalidConfig("density grid needs two or more nodes on a non-empty range".into()));
    }
    let h = match bandwidth {
        Some(h) if h[0] > 0.0 && h[1] > 0.0 => {
            if sample.is_empty() {
                return Err(Error::EmptyInput);
            }
            h
        }
        Some(_) => return Err(Error::InvalidConfig("bandwidths must be positive".into())),
        None => normal_reference_bandwidth(sample)?,
    };
    let xs = grid.nodes();
    let norm = 1.0 / (2.0 * std::f64::consts::PI * h[0] * h[1] * sample.len() as f64);
    let kernel = |d: f64, h: f64| (-0.5 * (d / h).powi(2)).exp();
    let mut values = vec![vec![0.0; xs.len()]; xs.len()];
    for s in sample {
        let kx: Vec<f64> = xs.iter().map(|x| kernel(x - s[0], h[0])).collect();
        let ky: Vec<f64> = xs.iter().map(|y| kernel(y - s[1], h[1])).collect();
        for (row, a) in values.iter_mut().zip(&kx) {
            for (v, b) in row.iter_mut().zip(&ky) {
                *v += a * b;
            }
        }
    }
    values.iter_mut().flatten().for_each(|v| *v *= norm);
    Ok(DensityGrid {
        ys: xs.clone(),
        xs,
        values,
        bandwidth: h,
    })
}
