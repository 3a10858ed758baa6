use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{Dataset, Preprocessing};
use crate::backfit::{
    default_lambda, default_num_intervals, evaluate, joint_solve_unconstrained, AdditiveDesign, BackfitOptions,
    Component,
};
use crate::basis::make_knots;
use crate::error::{Error, Result};
use crate::estimator::{find_estimator, DEFAULT_ESTIMATOR};
use crate::inference::{confidence_interval, residual_variance};
use crate::sim::midpoint_grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub degree: usize,
    pub diff_order: usize,
    /// `None` selects `round(2 n^{2/5})`.
    pub num_intervals: Option<usize>,
    /// `None` selects `2 n^{2/5} K^{-1/2}`.
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub tol: f64,
    pub max_stages: usize,
    pub level: f64,
    pub grid: usize,
    pub estimator: String,
    /// Sweeps for the fixed-stage estimator.
    pub stages: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            degree: 3,
            diff_order: 2,
            num_intervals: None,
            lambda1: None,
            lambda2: None,
            tol: 1e-10,
            max_stages: 100,
            level: 0.95,
            grid: 201,
            estimator: DEFAULT_ESTIMATOR.to_string(),
            stages: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedTuning {
    pub n: usize,
    pub num_intervals: usize,
    pub num_basis: usize,
    pub lambda1: f64,
    pub lambda2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridEstimate {
    /// Grid point on the scaled covariate.
    pub x: f64,
    /// The same point on the original scale.
    pub x_original: f64,
    pub estimate: f64,
    pub variance: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentGrid {
    pub covariate: String,
    pub rows: Vec<GridEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub stages: usize,
    pub converged: bool,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub fit_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: FitConfig,
    pub tuning: ResolvedTuning,
    pub response: String,
    pub preprocessing: Option<Preprocessing>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub convergence: Convergence,
    pub sigma2_hat: f64,
    /// The unpenalized-direction check: the stacked normal equations have
    /// no unique solution.
    pub joint_system_singular: bool,
    pub warnings: Vec<String>,
    /// Centered components with pointwise intervals.
    pub components: Vec<ComponentGrid>,
    pub timings: Timings,
}

impl RunReport {
    /// Rows `(x, x_original, estimate, lower, upper)` for one component.
    pub fn table(&self, j: Component) -> Vec<Vec<f64>> {
        self.components[j.index()]
            .rows
            .iter()
            .map(|r| vec![r.x, r.x_original, r.estimate, r.lower, r.upper])
            .collect()
    }
}

pub const TABLE_HEADER: [&str; 5] = ["x", "x_original", "estimate", "lower", "upper"];

/// Basis, penalty, fit, `σ̂²` and centered-component intervals on the grid.
pub fn fit_dataset(data: &Dataset, cfg: &FitConfig) -> Result<RunReport> {
    let started = Instant::now();
    let n = data.n();
    if n < super::MIN_ROWS {
        return Err(Error::TooFewRows { n });
    }
    if cfg.grid < 2 {
        return Err(Error::InvalidConfig("grid needs at least two points".into()));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::InvalidLevel(cfg.level));
    }
    let k = cfg.num_intervals.unwrap_or_else(|| default_num_intervals(n));
    let spline = make_knots(cfg.degree, k)?;
    let lambda1 = cfg.lambda1.unwrap_or_else(|| default_lambda(n, k));
    let lambda2 = cfg.lambda2.unwrap_or_else(|| default_lambda(n, k));
    let design = AdditiveDesign::from_points(&spline, data.y.clone(), &data.x1, &data.x2, lambda1, lambda2, cfg.diff_order)?;
    let estimator = find_estimator(&cfg.estimator, cfg.stages)?;

    let mut warnings = data.warnings.clone();
    let joint_system_singular = matches!(joint_solve_unconstrained(&design), Err(Error::SingularSystem));
    if lambda1 == 0.0 && lambda2 == 0.0 {
        let msg = "with zero penalties the joint normal equations are singular; \
                   the reported fit is the backfitting solution with zero-mean second component"
            .to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let fit_started = Instant::now();
    let opts = BackfitOptions {
        tol: cfg.tol,
        max_stages: cfg.max_stages,
        keep_history: false,
    };
    let fit = estimator.fit(&design, &opts)?;
    let fit_seconds = fit_started.elapsed().as_secs_f64();
    if !fit.converged {
        let msg = format!(
            "backfitting stopped after {} stages without reaching tolerance {:e} (residual {:e})",
            fit.stages, cfg.tol, fit.residual_norm
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let sigma2 = residual_variance(&design, &fit.b1, &fit.b2);

    let weights = estimator.weights(&design)?;
    let grid = midpoint_grid(cfg.grid);
    let scale = data.preprocessing.as_ref().map(|p| [p.x1_max, p.x2_max]).unwrap_or([1.0, 1.0]);
    let mut components = Vec::with_capacity(2);
    for (j, coef, name) in [
        (Component::First, &fit.b1, &data.x1_col),
        (Component::Second, &fit.b2, &data.x2_col),
    ] {
        let xj = design.design(j);
        let mean_basis: Vec<f64> = xj.column_sums().iter().map(|s| s / n as f64).collect();
        let fitted = xj.mul_vec(coef);
        let mean_fit = fitted.iter().sum::<f64>() / n as f64;
        let mut rows = Vec::with_capacity(grid.len());
        for &x in &grid {
            let mut g = spline.basis_vector(x)?;
            g.iter_mut().zip(&mean_basis).for_each(|(v, m)| *v -= m);
            let w = weights.functional(j, &g);
            let variance = sigma2 * w.iter().map(|v| v * v).sum::<f64>();
            let estimate = evaluate(&spline, coef, x)? - mean_fit;
            let ci = confidence_interval(estimate, variance, cfg.level)?;
            rows.push(GridEstimate {
                x,
                x_original: x * scale[j.index()],
                estimate,
                variance,
                lower: ci.lower,
                upper: ci.upper,
            });
        }
        components.push(ComponentGrid {
            covariate: name.clone(),
            rows,
        });
    }

    Ok(RunReport {
        config: cfg.clone(),
        tuning: ResolvedTuning {
            n,
            num_intervals: k,
            num_basis: spline.num_basis(),
            lambda1,
            lambda2,
        },
        response: data.y_col.clone(),
        preprocessing: data.preprocessing.clone(),
        b1: fit.b1,
        b2: fit.b2,
        convergence: Convergence {
            stages: fit.stages,
            converged: fit.converged,
            residual_norm: fit.residual_norm,
        },
        sigma2_hat: sigma2,
        joint_system_singular,
        warnings,
        components,
        timings: Timings {
            fit_seconds,
            total_seconds: started.elapsed().as_secs_f64(),
        },
    })
}
