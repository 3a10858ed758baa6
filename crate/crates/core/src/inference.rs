//! Smoother weights, exact and plug-in variances, asymptotic bias and
//! pointwise confidence intervals.

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf_inv;

use crate::backfit::{constrained_matrix, dense_cholesky, AdditiveDesign, BackfitResult, Backfitter, Component};
use crate::bandmat::{gram_banded, symmetric_eigenvalues, BandCholesky, BandedMatrix};
use crate::basis::{gauss_legendre, design_matrix, DesignMatrix, SplineConfig};
use crate::error::{Error, Result};
use crate::penalty::PenaltyMatrix;

/// Which linear estimator the weights describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightMode {
    /// The backfitting limit from `b2 = 0`.
    Limit,
    /// `ℓ` sweeps from `b2 = 0`.
    Stage(usize),
}

/// `f̂1(x1) = w1·y`, `f̂2(x2) = w2·y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmootherWeights {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

impl SmootherWeights {
    pub fn apply(&self, y: &[f64]) -> (f64, f64) {
        let dot = |w: &[f64]| w.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        (dot(&self.w1), dot(&self.w2))
    }

    pub fn len(&self) -> usize {
        self.w1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w1.is_empty()
    }
}

/// Reusable weight extraction for one design and one estimator.
pub struct WeightExtractor<'a> {
    design: &'a AdditiveDesign,
    fitter: Backfitter,
    mode: WeightMode,
    limit: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
}

impl<'a> WeightExtractor<'a> {
    pub fn new(design: &'a AdditiveDesign, mode: WeightMode) -> Result<Self> {
        let fitter = Backfitter::new(design)?;
        let limit = match mode {
            WeightMode::Limit => {
                let (m, _, _) = constrained_matrix(&fitter, design);
                Some(dense_cholesky(&m).ok_or(Error::SingularSystem)?)
            }
            WeightMode::Stage(_) => None,
        };
        Ok(Self {
            design,
            fitter,
            mode,
            limit,
        })
    }

    /// Weights of the linear functional `g'b_j`.
    pub fn functional(&self, j: Component, g: &[f64]) -> Vec<f64> {
        let q = self.fitter.num_basis();
        let zero = vec![0.0; q];
        let (g1, g2) = match j {
            Component::First => (g, zero.as_slice()),
            Component::Second => (zero.as_slice(), g),
        };
        let (s1, s2) = match self.mode {
            WeightMode::Stage(l) => self.fitter.stage_functional(g1, g2, l),
            WeightMode::Limit => {
                let rhs = nalgebra::DVector::from_iterator(2 * q, g1.iter().chain(g2).copied());
                let s = self.limit.as_ref().expect("limit factor").solve(&rhs);
                (s.rows(0, q).iter().copied().collect(), s.rows(q, q).iter().copied().collect())
            }
        };
        let a = self.design.x1().mul_vec(&s1);
        let b = self.design.x2().mul_vec(&s2);
        a.iter().zip(&b).map(|(u, v)| u + v).collect()
    }

    pub fn at(&self, x1: f64, x2: f64) -> Result<SmootherWeights> {
        let cfg = self.design.config();
        Ok(SmootherWeights {
            w1: self.functional(Component::First, &cfg.basis_vector(x1)?),
            w2: self.functional(Component::Second, &cfg.basis_vector(x2)?),
        })
    }

    /// Weights of the centered components `f̂_j(x) − n⁻¹Σ_i f̂_j(x_ij)`.
    pub fn centered_at(&self, x1: f64, x2: f64) -> Result<SmootherWeights> {
        let cfg = self.design.config();
        let n = self.design.n() as f64;
        let centered = |d: &DesignMatrix, x: f64| -> Result<Vec<f64>> {
            let mut g = cfg.basis_vector(x)?;
            g.iter_mut().zip(d.column_sums()).for_each(|(v, s)| *v -= s / n);
            Ok(g)
        };
        Ok(SmootherWeights {
            w1: self.functional(Component::First, &centered(self.design.x1(), x1)?),
            w2: self.functional(Component::Second, &centered(self.design.x2(), x2)?),
        })
    }
}

pub fn smoother_weights(design: &AdditiveDesign, x1: f64, x2: f64, mode: WeightMode) -> Result<SmootherWeights> {
    WeightExtractor::new(design, mode)?.at(x1, x2)
}

/// Weights of the univariate penalized estimator `B(x)'Λ⁻¹X'y`.
pub fn univariate_weights(x: &DesignMatrix, lambda: f64, penalty: &PenaltyMatrix, at: f64) -> Result<Vec<f64>> {
    let lam = crate::bandmat::penalized_gram(&gram_banded(x), lambda, penalty)?;
    let s = lam.cholesky()?.solve(&x.config().basis_vector(at)?);
    Ok(x.mul_vec(&s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Noise {
    Homoskedastic(f64),
    /// `σ²(x_i1, x_i2)` per observation.
    Heteroskedastic(Vec<f64>),
}

impl Noise {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Noise::Homoskedastic(s) if !(*s >= 0.0) => Err(Error::NegativeNoise),
            Noise::Heteroskedastic(v) if v.len() != n => Err(Error::SizeMismatch {
                expected: n,
                found: v.len(),
            }),
            Noise::Heteroskedastic(v) if v.iter().any(|s| !(*s >= 0.0)) => Err(Error::NegativeNoise),
            _ => Ok(()),
        }
    }

    fn at(&self, i: usize) -> f64 {
        match self {
            Noise::Homoskedastic(s) => *s,
            Noise::Heteroskedastic(v) => v[i],
        }
    }
}

/// `W diag(σ²) W'` for the 2 × n weight matrix `W`.
pub fn exact_covariance(w: &SmootherWeights, noise: &Noise) -> Result<Matrix2<f64>> {
    if w.w1.len() != w.w2.len() {
        return Err(Error::SizeMismatch {
            expected: w.w1.len(),
            found: w.w2.len(),
        });
    }
    noise.validate(w.len())?;
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for (i, (u, v)) in w.w1.iter().zip(&w.w2).enumerate() {
        let s = noise.at(i);
        a += s * u * u;
        b += s * u * v;
        c += s * v * v;
    }
    Ok(Matrix2::new(a, b, b, c))
}

/// Mean squared residual of the fit.
pub fn sigma2_hat(design: &AdditiveDesign, result: &BackfitResult) -> f64 {
    residual_variance(design, &result.b1, &result.b2)
}

pub fn residual_variance(design: &AdditiveDesign, b1: &[f64], b2: &[f64]) -> f64 {
    let f1 = design.x1().mul_vec(b1);
    let f2 = design.x2().mul_vec(b2);
    let ss: f64 = design
        .y()
        .iter()
        .zip(f1.iter().zip(&f2))
        .map(|(y, (a, b))| (y - a - b).powi(2))
        .sum();
    ss / design.n() as f64
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidLevel(p));
    }
    Ok(std::f64::consts::SQRT_2 * erf_inv(2.0 * p - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub estimate: f64,
    pub variance: f64,
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `estimate ± z_{α/2} √variance` with `α = 1 − level`.
pub fn confidence_interval(estimate: f64, variance: f64, level: f64) -> Result<IntervalEstimate> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    if !(variance >= 0.0) {
        return Err(Error::InvalidConfig(format!("variance must be non-negative, got {variance}")));
    }
    let half = normal_quantile(0.5 + level / 2.0)? * variance.sqrt();
    Ok(IntervalEstimate {
        estimate,
        variance,
        level,
        lower: estimate - half,
        upper: estimate + half,
    })
}

fn gram_factor(x: &DesignMatrix) -> Result<BandCholesky> {
    gram_banded(x).cholesky().map_err(|_| Error::SingularGram)
}

/// Plug-in `n⁻¹ B(x)'G⁻¹ΣG⁻¹B(x)` with the empirical `G_jn` and `Σ_jn`.
pub fn asymptotic_variance(
    design: &AdditiveDesign,
    cfg: &SplineConfig,
    j: Component,
    x: f64,
    noise: &Noise,
) -> Result<f64> {
    let xj = design.design(j);
    noise.validate(xj.rows())?;
    // n⁻¹B'(X'X/n)⁻¹(X'ΣX/n)(X'X/n)⁻¹B = |Σ^{1/2} X (X'X)⁻¹ B|²
    let v = gram_factor(xj)?.solve(&cfg.basis_vector(x)?);
    let u = xj.mul_vec(&v);
    Ok(u.iter().enumerate().map(|(i, ui)| noise.at(i) * ui * ui).sum())
}

/// Least-squares projection of `f` onto the spline space on a midpoint grid.
pub fn spline_projection(cfg: &SplineConfig, f: impl Fn(f64) -> f64, grid: usize) -> Result<Vec<f64>> {
    let pts: Vec<f64> = (0..grid).map(|g| (g as f64 + 0.5) / grid as f64).collect();
    let x = design_matrix(cfg, &pts)?;
    let vals: Vec<f64> = pts.iter().map(|p| f(*p)).collect();
    Ok(gram_factor(&x)?.solve(&x.tr_mul_vec(&vals)))
}

pub const PROJECTION_GRID: usize = 2000;

/// `−(λ/n) B(x)'G_jn⁻¹ Q b*` with `b*` the projection of `true_fn`.
pub fn asymptotic_bias(
    design: &AdditiveDesign,
    cfg: &SplineConfig,
    j: Component,
    x: f64,
    lambda: f64,
    true_fn: impl Fn(f64) -> f64,
) -> Result<f64> {
    let bstar = spline_projection(cfg, true_fn, PROJECTION_GRID)?;
    let qb = design.penalty().mul_vec(&bstar);
    let v = gram_factor(design.design(j))?.solve(&qb);
    let b = cfg.basis_vector(x)?;
    // (λ/n)(X'X/n)⁻¹ = λ (X'X)⁻¹
    Ok(-lambda * b.iter().zip(&v).map(|(a, c)| a * c).sum::<f64>())
}

type Density1 = Box<dyn Fn(f64) -> f64 + Send + Sync>;
type Density2 = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Covariate law and noise variance of the data-generating process.
pub struct PopulationSpec {
    pub density_x1: Density1,
    pub density_x2: Density1,
    pub joint_density: Density2,
    pub noise_variance: Density2,
}

impl PopulationSpec {
    /// Independent uniform covariates with constant noise variance.
    pub fn uniform(sigma2: f64) -> Self {
        Self {
            density_x1: Box::new(|_| 1.0),
            density_x2: Box::new(|_| 1.0),
            joint_density: Box::new(|_, _| 1.0),
            noise_variance: Box::new(move |_, _| sigma2),
        }
    }

    /// Checks that the marginals integrate to one.
    pub fn validate(&self) -> Result<()> {
        let (nodes, weights) = gauss_legendre(8);
        for (name, f) in [("x1", &self.density_x1), ("x2", &self.density_x2)] {
            let mut total = 0.0;
            for cell in 0..64 {
                for (t, w) in nodes.iter().zip(&weights) {
                    let x = (cell as f64 + 0.5 + 0.5 * t) / 64.0;
                    let d = f(x);
                    if !(d >= 0.0) {
                        return Err(Error::InvalidConfig(format!("density of {name} is negative at {x}")));
                    }
                    total += w * 0.5 / 64.0 * d;
                }
            }
            if (total - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidConfig(format!("density of {name} integrates to {total}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopulationMatrix {
    /// `G_k = ∫ B B' q_k`.
    Gram(Component),
    /// `Σ_k = ∫∫ B(x_k)B(x_k)' σ²(x1, x2) q(x1, x2)`.
    Sigma(Component),
}

const POPULATION_NODES: usize = 8;

/// Quadrature nodes and weights on every knot interval of `(0, 1)`.
fn interval_rule(cfg: &SplineConfig) -> Vec<(f64, f64)> {
    let (nodes, weights) = gauss_legendre(POPULATION_NODES);
    let k = cfg.num_intervals();
    let h = 1.0 / k as f64;
    (0..k)
        .flat_map(|cell| {
            let a = cell as f64 * h;
            nodes
                .iter()
                .zip(&weights)
                .map(move |(t, w)| (a + 0.5 * h * (t + 1.0), 0.5 * h * w))
        })
        .collect()
}

pub fn population_gram(cfg: &SplineConfig, spec: &PopulationSpec, which: PopulationMatrix) -> Result<BandedMatrix> {
    let rule = interval_rule(cfg);
    let p = cfg.degree();
    let mut g = BandedMatrix::zeros(cfg.num_basis(), p);
    let mut local = vec![0.0; p + 1];
    let weight_at = |x: f64| -> f64 {
        match which {
            PopulationMatrix::Gram(Component::First) => (spec.density_x1)(x),
            PopulationMatrix::Gram(Component::Second) => (spec.density_x2)(x),
            PopulationMatrix::Sigma(j) => rule
                .iter()
                .map(|(o, w)| {
                    let v = match j {
                        Component::First => (spec.noise_variance)(x, *o) * (spec.joint_density)(x, *o),
                        Component::Second => (spec.noise_variance)(*o, x) * (spec.joint_density)(*o, x),
                    };
                    w * v
                })
                .sum(),
        }
    };
    for (x, w) in &rule {
        let first = cfg.eval_local(*x, &mut local)?;
        let d = w * weight_at(*x);
        for a in 0..=p {
            for b in 0..=a {
                g.add_at(first + a, first + b, d * local[a] * local[b]);
            }
        }
    }
    Ok(g)
}

/// `max |eig(K (X'X/n − G))|` for one design against the population Gram.
pub fn gram_deviation(x: &DesignMatrix, population: &BandedMatrix) -> f64 {
    let n = x.rows() as f64;
    let k = x.config().num_intervals() as f64;
    let emp = gram_banded(x).to_dense() / n;
    let diff: DMatrix<f64> = (emp - population.to_dense()) * k;
    symmetric_eigenvalues(&diff)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `V^{-1/2}` by symmetric eigendecomposition; `None` when an eigenvalue
/// falls below `floor`.
pub fn inverse_sqrt(v: &Matrix2<f64>, floor: f64) -> Option<Matrix2<f64>> {
    let eig = v.symmetric_eigen();
    if eig.eigenvalues.iter().any(|e| !(*e > floor)) {
        return None;
    }
    let d = Matrix2::from_diagonal(&eig.eigenvalues.map(|e| 1.0 / e.sqrt()));
    Some(eig.eigenvectors * d * eig.eigenvectors.transpose())
}

pub fn sqrt_psd(v: &Matrix2<f64>) -> Matrix2<f64> {
    let eig = v.symmetric_eigen();
    let d = Matrix2::from_diagonal(&eig.eigenvalues.map(|e| e.max(0.0).sqrt()));
    eig.eigenvectors * d * eig.eigenvectors.transpose()
}
