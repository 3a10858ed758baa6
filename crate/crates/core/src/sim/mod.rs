//! Simulation studies: curve recovery, one-stage dominance, normality of
//! the standardized pair and interval coverage.

mod kde;
mod scenario;

pub use kde::{kde2d, normal_reference_bandwidth, DensityGrid, GridSpec};
pub use scenario::{find_scenario, scenario_names, scenario_registry, Scenario, ScenarioOutput};

use std::time::Instant;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::backfit::{
    default_lambda, default_num_intervals, evaluate, univariate_fit, AdditiveDesign, Backfitter, Component,
};
use crate::basis::{design_matrix, make_knots, SplineConfig};
use crate::error::{Error, Result};
use crate::inference::{
    confidence_interval, exact_covariance, inverse_sqrt, Noise, WeightExtractor, WeightMode,
};
use crate::penalty::penalty_matrix;

pub fn default_f1(x: f64) -> f64 {
    (2.0 * std::f64::consts::PI * x).sin()
}

pub fn default_f2(x: f64) -> f64 {
    0.5 * (std::f64::consts::PI * x).cos()
}

/// Variance of `U(−0.5, 0.5)`.
pub const UNIFORM_NOISE_VARIANCE: f64 = 1.0 / 12.0;

/// Eigenvalue floor for `V^{-1/2}`.
pub const COVARIANCE_FLOOR: f64 = 1e-14;

pub const GRID_POINTS: usize = 201;

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub n: usize,
    pub seed: u64,
    pub f1: fn(f64) -> f64,
    pub f2: fn(f64) -> f64,
    /// Multiplies the `U(−0.5, 0.5)` errors; 0 switches the noise off.
    pub error_scale: f64,
    /// σ² used for exact covariances and intervals.
    pub noise_variance: f64,
    pub degree: usize,
    pub diff_order: usize,
    /// `None` selects `round(2 n^{2/5})`.
    pub num_intervals: Option<usize>,
    /// `None` selects `2 n^{2/5} K^{-1/2}`.
    pub lambda: Option<f64>,
    pub stages: usize,
    pub weight_mode: WeightMode,
    pub eval_point: (f64, f64),
    pub replications: usize,
    pub level: f64,
    pub grid: usize,
    /// Fit `f2` as well; when false the model is `y = f1(x1) + ε`.
    pub additive: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            seed: 42,
            f1: default_f1,
            f2: default_f2,
            error_scale: 1.0,
            noise_variance: UNIFORM_NOISE_VARIANCE,
            degree: 3,
            diff_order: 2,
            num_intervals: None,
            lambda: None,
            stages: 10,
            weight_mode: WeightMode::Stage(10),
            eval_point: (0.5, 0.5),
            replications: 1000,
            level: 0.95,
            grid: GRID_POINTS,
            additive: true,
        }
    }
}

impl ScenarioConfig {
    pub fn with_n(n: usize) -> Self {
        Self {
            n,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::TooFewRows { n: self.n });
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("at least one replication is required".into()));
        }
        let (a, b) = self.eval_point;
        if !(a > 0.0 && a <= 1.0 && b > 0.0 && b <= 1.0) {
            return Err(Error::PointOutOfDomain {
                value: if a > 0.0 && a <= 1.0 { b } else { a },
            });
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidLevel(self.level));
        }
        if !(self.noise_variance >= 0.0) || !(self.error_scale >= 0.0) {
            return Err(Error::NegativeNoise);
        }
        if self.grid < 2 {
            return Err(Error::InvalidConfig("grid needs at least two points".into()));
        }
        Ok(())
    }

    pub fn num_intervals(&self) -> usize {
        self.num_intervals.unwrap_or_else(|| default_num_intervals(self.n))
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or_else(|| default_lambda(self.n, self.num_intervals()))
    }

    pub fn spline(&self) -> Result<SplineConfig> {
        make_knots(self.degree, self.num_intervals())
    }

    /// Midpoint grid `(g + 0.5)/G`.
    pub fn grid_points(&self) -> Vec<f64> {
        midpoint_grid(self.grid)
    }
}

pub fn midpoint_grid(size: usize) -> Vec<f64> {
    (0..size).map(|g| (g as f64 + 0.5) / size as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimData {
    pub y: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

/// Per-replication stream: the seed picks the key, the replication the stream.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// Covariates on `(0, 1]` and `U(−0.5, 0.5)` errors.
pub fn generate_dataset(cfg: &ScenarioConfig, replication: usize) -> SimData {
    let mut rng = replication_rng(cfg.seed, replication as u64);
    let n = cfg.n;
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let a = 1.0 - rng.random::<f64>();
        let b = 1.0 - rng.random::<f64>();
        let e = rng.random::<f64>() - 0.5;
        let signal = (cfg.f1)(a) + if cfg.additive { (cfg.f2)(b) } else { 0.0 };
        x1.push(a);
        x2.push(b);
        y.push(signal + cfg.error_scale * e);
    }
    SimData { y, x1, x2 }
}

pub fn build_design(cfg: &ScenarioConfig, data: &SimData) -> Result<AdditiveDesign> {
    let lam = cfg.lambda();
    AdditiveDesign::from_points(&cfg.spline()?, data.y.clone(), &data.x1, &data.x2, lam, lam, cfg.diff_order)
}

/// Coefficients of the stage-ℓ fit, or of the marginal fit on `x1` when the
/// model has a single component.
fn staged_fit(cfg: &ScenarioConfig, design: &AdditiveDesign) -> Result<(Vec<f64>, Vec<f64>)> {
    if !cfg.additive {
        let b1 = univariate_fit(design.x1(), design.y(), design.lambda1(), design.penalty())?;
        return Ok((b1, vec![0.0; design.num_basis()]));
    }
    Ok(Backfitter::new(design)?.run_stages(&vec![0.0; design.num_basis()], cfg.stages))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub x: f64,
    pub truth1: f64,
    pub estimate1: f64,
    pub truth2: f64,
    pub estimate2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sim1Output {
    pub rows: Vec<CurveRow>,
    pub rmse: [f64; 2],
    pub num_intervals: usize,
    pub lambda: f64,
}

/// One dataset, one stage-ℓ fit, both curves against the truth on the grid.
pub fn run_sim1(cfg: &ScenarioConfig) -> Result<Sim1Output> {
    cfg.validate()?;
    let data = generate_dataset(cfg, 0);
    let design = build_design(cfg, &data)?;
    let (b1, b2) = staged_fit(cfg, &design)?;
    let spline = design.config().clone();
    let mut rows = Vec::with_capacity(cfg.grid);
    let mut sq = [0.0; 2];
    for x in cfg.grid_points() {
        let row = CurveRow {
            x,
            truth1: (cfg.f1)(x),
            estimate1: evaluate(&spline, &b1, x)?,
            truth2: (cfg.f2)(x),
            estimate2: evaluate(&spline, &b2, x)?,
        };
        sq[0] += (row.estimate1 - row.truth1).powi(2);
        sq[1] += (row.estimate2 - row.truth2).powi(2);
        rows.push(row);
    }
    let g = rows.len() as f64;
    Ok(Sim1Output {
        rows,
        rmse: [(sq[0] / g).sqrt(), (sq[1] / g).sqrt()],
        num_intervals: cfg.num_intervals(),
        lambda: cfg.lambda(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub x: f64,
    pub backfit1: f64,
    pub marginal1: f64,
    pub backfit2: f64,
    pub marginal2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sim2Output {
    pub rows: Vec<ComparisonRow>,
    pub sup_difference: [f64; 2],
    pub num_intervals: usize,
    pub lambda: f64,
}

/// Backfit components against the marginal penalized estimators.
pub fn run_sim2(cfg: &ScenarioConfig) -> Result<Sim2Output> {
    cfg.validate()?;
    let data = generate_dataset(cfg, 0);
    let design = build_design(cfg, &data)?;
    let (b1, b2) = staged_fit(cfg, &design)?;
    let m1 = univariate_fit(design.x1(), design.y(), design.lambda1(), design.penalty())?;
    let m2 = univariate_fit(design.x2(), design.y(), design.lambda2(), design.penalty())?;
    let spline = design.config().clone();
    let mut rows = Vec::with_capacity(cfg.grid);
    let mut sup = [0.0f64; 2];
    for x in cfg.grid_points() {
        let row = ComparisonRow {
            x,
            backfit1: evaluate(&spline, &b1, x)?,
            marginal1: evaluate(&spline, &m1, x)?,
            backfit2: evaluate(&spline, &b2, x)?,
            marginal2: evaluate(&spline, &m2, x)?,
        };
        sup[0] = sup[0].max((row.backfit1 - row.marginal1).abs());
        sup[1] = sup[1].max((row.backfit2 - row.marginal2).abs());
        rows.push(row);
    }
    if !cfg.additive {
        sup[1] = 0.0;
    }
    Ok(Sim2Output {
        rows,
        sup_difference: sup,
        num_intervals: cfg.num_intervals(),
        lambda: cfg.lambda(),
    })
}

/// Estimator pair at the evaluation point and its exact covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub replication: usize,
    pub estimate: [f64; 2],
    pub truth: [f64; 2],
    pub covariance: [[f64; 2]; 2],
}

impl PointEstimate {
    pub fn deviation(&self) -> [f64; 2] {
        [self.estimate[0] - self.truth[0], self.estimate[1] - self.truth[1]]
    }

    pub fn covariance_matrix(&self) -> Matrix2<f64> {
        let c = self.covariance;
        Matrix2::new(c[0][0], c[0][1], c[1][0], c[1][1])
    }

    /// `V^{-1/2}(f̂ − f)`; `None` when `V` is numerically singular.
    pub fn standardized(&self) -> Option<[f64; 2]> {
        let r = inverse_sqrt(&self.covariance_matrix(), COVARIANCE_FLOOR)?;
        let d = self.deviation();
        let z = r * nalgebra::Vector2::new(d[0], d[1]);
        Some([z[0], z[1]])
    }
}

/// Fresh dataset, weights of the configured estimator at the evaluation
/// point, estimate `w·y` and `V = W diag(σ²) W'`.
pub fn point_estimate(cfg: &ScenarioConfig, replication: usize) -> Result<PointEstimate> {
    let data = generate_dataset(cfg, replication);
    let design = build_design(cfg, &data)?;
    let (x1, x2) = cfg.eval_point;
    let w = WeightExtractor::new(&design, cfg.weight_mode)?.at(x1, x2)?;
    let (a, b) = w.apply(design.y());
    let v = exact_covariance(&w, &Noise::Homoskedastic(cfg.noise_variance))?;
    Ok(PointEstimate {
        replication,
        estimate: [a, b],
        truth: [(cfg.f1)(x1), (cfg.f2)(x2)],
        covariance: [[v[(0, 0)], v[(0, 1)]], [v[(1, 0)], v[(1, 1)]]],
    })
}

fn point_estimates(cfg: &ScenarioConfig) -> Result<Vec<PointEstimate>> {
    (0..cfg.replications)
        .into_par_iter()
        .map(|r| point_estimate(cfg, r))
        .collect()
}

/// `sup_t |F_M(t) − Φ(t)|`.
pub fn ks_statistic(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |acc, (i, x)| {
        let phi = 0.5 * erfc(-x / std::f64::consts::SQRT_2);
        acc.max(phi - i as f64 / m).max((i + 1) as f64 / m - phi)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedSample {
    /// Row `r` is `V^{-1/2}(f̂ − f)` at the evaluation point.
    pub values: Vec<[f64; 2]>,
    /// Replication index of each row.
    pub replications: Vec<usize>,
    pub rejected: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub replications: usize,
    pub mean: [f64; 2],
    pub covariance: [[f64; 2]; 2],
    pub ks_stat: [f64; 2],
    pub coverage: [f64; 2],
    pub level: f64,
    pub rejected: usize,
    pub runtime: f64,
}

fn sample_moments(values: &[[f64; 2]]) -> ([f64; 2], [[f64; 2]; 2]) {
    let m = values.len() as f64;
    let mut mean = [0.0; 2];
    for v in values {
        mean[0] += v[0] / m;
        mean[1] += v[1] / m;
    }
    let mut cov = [[0.0; 2]; 2];
    let denom = (m - 1.0).max(1.0);
    for v in values {
        let d = [v[0] - mean[0], v[1] - mean[1]];
        for a in 0..2 {
            for b in 0..2 {
                cov[a][b] += d[a] * d[b] / denom;
            }
        }
    }
    (mean, cov)
}

fn coverage_of(estimates: &[PointEstimate], level: f64, variance_factor: f64) -> Result<[f64; 2]> {
    let mut hits = [0usize; 2];
    for e in estimates {
        for j in 0..2 {
            let ci = confidence_interval(e.estimate[j], variance_factor * e.covariance[j][j], level)?;
            if ci.lower <= e.truth[j] && e.truth[j] <= ci.upper {
                hits[j] += 1;
            }
        }
    }
    let m = estimates.len().max(1) as f64;
    Ok([hits[0] as f64 / m, hits[1] as f64 / m])
}

fn summarize(estimates: &[PointEstimate], level: f64, started: Instant) -> Result<(StandardizedSample, MonteCarloSummary)> {
    let mut sample = StandardizedSample {
        values: Vec::with_capacity(estimates.len()),
        replications: Vec::with_capacity(estimates.len()),
        rejected: Vec::new(),
    };
    for e in estimates {
        match e.standardized() {
            Some(z) => {
                sample.values.push(z);
                sample.replications.push(e.replication);
            }
            None => sample.rejected.push(e.replication),
        }
    }
    let (mean, covariance) = sample_moments(&sample.values);
    let col = |j: usize| sample.values.iter().map(|v| v[j]).collect::<Vec<_>>();
    let summary = MonteCarloSummary {
        replications: estimates.len(),
        mean,
        covariance,
        ks_stat: [ks_statistic(&col(0)), ks_statistic(&col(1))],
        coverage: coverage_of(estimates, level, 1.0)?,
        level,
        rejected: sample.rejected.len(),
        runtime: started.elapsed().as_secs_f64(),
    };
    Ok((sample, summary))
}

/// Replicated fits at the evaluation point, standardized by the exact
/// covariance of the estimator.
pub fn run_sim3(cfg: &ScenarioConfig) -> Result<(StandardizedSample, MonteCarloSummary)> {
    cfg.validate()?;
    let started = Instant::now();
    let estimates = point_estimates(cfg)?;
    summarize(&estimates, cfg.level, started)
}

/// Pointwise interval coverage at `level`, with `σ²` taken from the config.
pub fn coverage_experiment(cfg: &ScenarioConfig, level: f64) -> Result<MonteCarloSummary> {
    let cfg = ScenarioConfig {
        level,
        ..cfg.clone()
    };
    cfg.validate()?;
    let started = Instant::now();
    let estimates = point_estimates(&cfg)?;
    Ok(summarize(&estimates, level, started)?.1)
}

/// Coverage at several levels on one set of replications.
pub fn coverage_curve(cfg: &ScenarioConfig, levels: &[f64]) -> Result<Vec<[f64; 2]>> {
    cfg.validate()?;
    let estimates = point_estimates(cfg)?;
    levels.iter().map(|l| coverage_of(&estimates, *l, 1.0)).collect()
}

/// Correlation of `(f̂1(x1), f̂2(x2))` implied by the exact covariance on
/// replication 0.
pub fn exact_correlation(cfg: &ScenarioConfig) -> Result<f64> {
    let e = point_estimate(cfg, 0)?;
    let c = e.covariance;
    Ok(c[0][1] / (c[0][0] * c[1][1]).sqrt())
}

/// Marginal penalized fit on `x_j` alone (design and penalty from the config).
pub fn marginal_fit(cfg: &ScenarioConfig, data: &SimData, j: Component) -> Result<Vec<f64>> {
    let spline = cfg.spline()?;
    let x = match j {
        Component::First => &data.x1,
        Component::Second => &data.x2,
    };
    let pen = penalty_matrix(cfg.diff_order, spline.num_basis())?;
    univariate_fit(&design_matrix(&spline, x)?, &data.y, cfg.lambda(), &pen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn datasets_are_reproducible() {
        let cfg = ScenarioConfig::with_n(50);
        assert_eq!(generate_dataset(&cfg, 3), generate_dataset(&cfg, 3));
        assert_ne!(generate_dataset(&cfg, 3), generate_dataset(&cfg, 4));
        let other = ScenarioConfig { seed: 43, ..cfg.clone() };
        assert_ne!(generate_dataset(&cfg, 3), generate_dataset(&other, 3));
        let d = generate_dataset(&cfg, 0);
        assert!(d.x1.iter().chain(&d.x2).all(|x| *x > 0.0 && *x <= 1.0));
    }

    #[test]
    fn truth_enters_exactly() {
        assert_eq!(default_f1(0.25), 1.0);
        assert_abs_diff_eq!(default_f2(0.5), 0.0, epsilon = 1e-16);
        let cfg = ScenarioConfig {
            error_scale: 0.0,
            ..ScenarioConfig::with_n(20)
        };
        let d = generate_dataset(&cfg, 0);
        for i in 0..20 {
            assert_eq!(d.y[i], default_f1(d.x1[i]) + default_f2(d.x2[i]));
        }
    }

    #[test]
    fn error_moments() {
        let clean = ScenarioConfig {
            error_scale: 0.0,
            ..ScenarioConfig::with_n(100_000)
        };
        let noisy = ScenarioConfig::with_n(100_000);
        let a = generate_dataset(&clean, 0);
        let b = generate_dataset(&noisy, 0);
        let e: Vec<f64> = a.y.iter().zip(&b.y).map(|(s, y)| y - s).collect();
        let n = e.len() as f64;
        let mean = e.iter().sum::<f64>() / n;
        let var = e.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.005, "{mean}");
        assert!((var - 1.0 / 12.0).abs() < 0.003, "{var}");
    }

    #[test]
    fn config_validation() {
        assert!(ScenarioConfig::with_n(9).validate().is_err());
        assert!(ScenarioConfig { replications: 0, ..Default::default() }.validate().is_err());
        assert!(ScenarioConfig { eval_point: (0.0, 0.5), ..Default::default() }.validate().is_err());
        assert!(ScenarioConfig { level: 1.0, ..Default::default() }.validate().is_err());
        assert!(ScenarioConfig::default().validate().is_ok());
    }

    #[test]
    fn sim1_grid_and_noiseless_recovery() {
        let cfg = ScenarioConfig {
            error_scale: 0.0,
            lambda: Some(1e-3),
            stages: 100,
            ..ScenarioConfig::with_n(5000)
        };
        let out = run_sim1(&cfg).unwrap();
        assert_eq!(out.rows.len(), 201);
        assert!(out.rmse[0] <= 0.02 && out.rmse[1] <= 0.02, "{:?}", out.rmse);
    }

    #[test]
    fn sim1_default_accuracy() {
        let out = run_sim1(&ScenarioConfig::default()).unwrap();
        assert!(out.rmse[0] <= 0.1 && out.rmse[1] <= 0.1, "{:?}", out.rmse);
    }

    #[test]
    fn sim2_single_component_is_marginal() {
        let cfg = ScenarioConfig {
            additive: false,
            ..ScenarioConfig::with_n(300)
        };
        let out = run_sim2(&cfg).unwrap();
        assert_eq!(out.sup_difference, [0.0, 0.0]);
    }

    fn flat(_: f64) -> f64 {
        0.0
    }

    #[test]
    fn sim2_difference_without_second_signal() {
        // With f2 = 0 and no noise nothing is left for the marginal fit to
        // absorb, so the two estimators of f1 coincide up to the sweep error.
        let run = |n| {
            run_sim2(&ScenarioConfig {
                error_scale: 0.0,
                f2: flat,
                ..ScenarioConfig::with_n(n)
            })
            .unwrap()
        };
        let big = run(1000);
        let small = run(100);
        assert!(big.sup_difference[0] <= 3.0 / big.num_intervals as f64);
        assert!(big.sup_difference[0] < small.sup_difference[0]);
    }

    #[test]
    fn noiseless_sim3_is_standardized_bias() {
        let cfg = ScenarioConfig {
            error_scale: 0.0,
            replications: 20,
            ..ScenarioConfig::with_n(300)
        };
        let (sample, _) = run_sim3(&cfg).unwrap();
        assert_eq!(sample.values.len(), 20);
        for (row, r) in sample.values.iter().zip(&sample.replications) {
            // bias from the weights applied to the signal alone
            let data = generate_dataset(&cfg, *r);
            let design = build_design(&cfg, &data).unwrap();
            let w = crate::inference::smoother_weights(&design, 0.5, 0.5, cfg.weight_mode).unwrap();
            let signal: Vec<f64> = data.x1.iter().zip(&data.x2).map(|(a, b)| default_f1(*a) + default_f2(*b)).collect();
            let (a, b) = w.apply(&signal);
            let v = exact_covariance(&w, &Noise::Homoskedastic(UNIFORM_NOISE_VARIANCE)).unwrap();
            let z = inverse_sqrt(&v, COVARIANCE_FLOOR).unwrap() * nalgebra::Vector2::new(a - default_f1(0.5), b - default_f2(0.5));
            assert_abs_diff_eq!(row[0], z[0], epsilon = 1e-9);
            assert_abs_diff_eq!(row[1], z[1], epsilon = 1e-9);
        }
    }

    #[test]
    fn replications_are_order_independent() {
        let cfg = ScenarioConfig {
            replications: 16,
            ..ScenarioConfig::with_n(200)
        };
        let par = point_estimates(&cfg).unwrap();
        let mut rev: Vec<PointEstimate> = (0..16).rev().map(|r| point_estimate(&cfg, r).unwrap()).collect();
        rev.sort_by_key(|e| e.replication);
        assert_eq!(par, rev);
        let (sample, _) = run_sim3(&cfg).unwrap();
        for (row, r) in sample.values.iter().zip(&sample.replications) {
            assert_eq!(*row, point_estimate(&cfg, *r).unwrap().standardized().unwrap());
        }
    }

    #[test]
    fn standardization_inverts() {
        let cfg = ScenarioConfig::with_n(200);
        let e = point_estimate(&cfg, 5).unwrap();
        let z = e.standardized().unwrap();
        let back = crate::inference::sqrt_psd(&e.covariance_matrix()) * nalgebra::Vector2::new(z[0], z[1]);
        let d = e.deviation();
        assert_abs_diff_eq!(back[0], d[0], epsilon = 1e-10);
        assert_abs_diff_eq!(back[1], d[1], epsilon = 1e-10);
    }

    #[test]
    fn ks_statistic_values() {
        assert_abs_diff_eq!(ks_statistic(&[0.0]), 0.5, epsilon = 1e-15);
        let far = ks_statistic(&[10.0, 11.0, 12.0]);
        assert!(far > 0.999);
        // quantile sample is close to the cdf
        let m = 999;
        let pts: Vec<f64> = (1..=m)
            .map(|i| crate::inference::normal_quantile(i as f64 / (m + 1) as f64).unwrap())
            .collect();
        assert!(ks_statistic(&pts) <= 1.0 / m as f64 + 1e-9);
    }

    #[test]
    fn coverage_levels_nest() {
        let cfg = ScenarioConfig {
            replications: 200,
            ..ScenarioConfig::with_n(200)
        };
        let cov = coverage_curve(&cfg, &[0.95, 0.999]).unwrap();
        assert!(cov[1][0] >= cov[0][0] && cov[1][1] >= cov[0][1]);
        let inflated = ScenarioConfig {
            noise_variance: 4.0 * UNIFORM_NOISE_VARIANCE,
            ..cfg
        };
        let wide = coverage_experiment(&inflated, 0.95).unwrap();
        assert!(wide.coverage[0] >= 0.99 && wide.coverage[1] >= 0.99, "{:?}", wide.coverage);
    }
}
