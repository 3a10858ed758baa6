//! Component estimators selectable by name.

use serde::{Deserialize, Serialize};

use crate::backfit::{one_stage_coefficients, univariate_fit, AdditiveDesign, BackfitOptions, Backfitter, Component};
use crate::bandmat::{gram_banded, penalized_gram, BandCholesky};
use crate::error::{Error, Result};
use crate::inference::{WeightExtractor, WeightMode};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorFit {
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub stages: usize,
    pub converged: bool,
    pub residual_norm: f64,
}

/// Maps a coefficient functional `g'b_j` to its weights on `y`.
pub trait FunctionalWeights {
    fn functional(&self, j: Component, g: &[f64]) -> Vec<f64>;
}

impl FunctionalWeights for WeightExtractor<'_> {
    fn functional(&self, j: Component, g: &[f64]) -> Vec<f64> {
        WeightExtractor::functional(self, j, g)
    }
}

pub trait ComponentEstimator: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn fit(&self, design: &AdditiveDesign, opts: &BackfitOptions) -> Result<EstimatorFit>;
    fn weights<'a>(&self, design: &'a AdditiveDesign) -> Result<Box<dyn FunctionalWeights + 'a>>;
}

pub struct BackfitLimit;

impl ComponentEstimator for BackfitLimit {
    fn name(&self) -> &'static str {
        "backfit-limit"
    }

    fn description(&self) -> &'static str {
        "backfitting run to convergence from b2 = 0"
    }

    fn fit(&self, design: &AdditiveDesign, opts: &BackfitOptions) -> Result<EstimatorFit> {
        let r = Backfitter::new(design)?.run(&vec![0.0; design.num_basis()], opts)?;
        Ok(EstimatorFit {
            b1: r.b1,
            b2: r.b2,
            stages: r.stages,
            converged: r.converged,
            residual_norm: r.residual_norm,
        })
    }

    fn weights<'a>(&self, design: &'a AdditiveDesign) -> Result<Box<dyn FunctionalWeights + 'a>> {
        Ok(Box::new(WeightExtractor::new(design, WeightMode::Limit)?))
    }
}

pub struct BackfitStage {
    pub stages: usize,
}

impl ComponentEstimator for BackfitStage {
    fn name(&self) -> &'static str {
        "backfit-stage"
    }

    fn description(&self) -> &'static str {
        "a fixed number of backfitting sweeps from b2 = 0"
    }

    fn fit(&self, design: &AdditiveDesign, _opts: &BackfitOptions) -> Result<EstimatorFit> {
        let fitter = Backfitter::new(design)?;
        let (b1, b2) = fitter.run_stages(&vec![0.0; design.num_basis()], self.stages);
        let residual_norm = fitter.residual_norm(&b1, &b2);
        Ok(EstimatorFit {
            b1,
            b2,
            stages: self.stages,
            converged: true,
            residual_norm,
        })
    }

    fn weights<'a>(&self, design: &'a AdditiveDesign) -> Result<Box<dyn FunctionalWeights + 'a>> {
        Ok(Box::new(WeightExtractor::new(design, WeightMode::Stage(self.stages))?))
    }
}

pub struct OneStage;

impl ComponentEstimator for OneStage {
    fn name(&self) -> &'static str {
        "one-stage"
    }

    fn description(&self) -> &'static str {
        "marginal fit on x1, then marginal fit of its residual on x2"
    }

    fn fit(&self, design: &AdditiveDesign, _opts: &BackfitOptions) -> Result<EstimatorFit> {
        let (b1, b2) = one_stage_coefficients(design)?;
        let residual_norm = Backfitter::new(design)?.residual_norm(&b1, &b2);
        Ok(EstimatorFit {
            b1,
            b2,
            stages: 1,
            converged: true,
            residual_norm,
        })
    }

    fn weights<'a>(&self, design: &'a AdditiveDesign) -> Result<Box<dyn FunctionalWeights + 'a>> {
        // one sweep from b2 = 0 is the one-stage pair
        Ok(Box::new(WeightExtractor::new(design, WeightMode::Stage(1))?))
    }
}

pub struct Marginal;

struct MarginalWeights<'a> {
    design: &'a AdditiveDesign,
    factors: [BandCholesky; 2],
}

impl FunctionalWeights for MarginalWeights<'_> {
    fn functional(&self, j: Component, g: &[f64]) -> Vec<f64> {
        let s = self.factors[j.index()].solve(g);
        self.design.design(j).mul_vec(&s)
    }
}

impl ComponentEstimator for Marginal {
    fn name(&self) -> &'static str {
        "marginal"
    }

    fn description(&self) -> &'static str {
        "separate univariate penalized fits of y on each covariate"
    }

    fn fit(&self, design: &AdditiveDesign, _opts: &BackfitOptions) -> Result<EstimatorFit> {
        let b1 = univariate_fit(design.x1(), design.y(), design.lambda1(), design.penalty())?;
        let b2 = univariate_fit(design.x2(), design.y(), design.lambda2(), design.penalty())?;
        let residual_norm = Backfitter::new(design)?.residual_norm(&b1, &b2);
        Ok(EstimatorFit {
            b1,
            b2,
            stages: 0,
            converged: true,
            residual_norm,
        })
    }

    fn weights<'a>(&self, design: &'a AdditiveDesign) -> Result<Box<dyn FunctionalWeights + 'a>> {
        let factor = |j: Component| {
            penalized_gram(&gram_banded(design.design(j)), design.lambda(j), design.penalty())?.cholesky()
        };
        Ok(Box::new(MarginalWeights {
            design,
            factors: [factor(Component::First)?, factor(Component::Second)?],
        }))
    }
}

pub const DEFAULT_ESTIMATOR: &str = "backfit-limit";

/// All estimators; `stages` configures `backfit-stage`.
pub fn estimator_registry(stages: usize) -> Vec<Box<dyn ComponentEstimator>> {
    vec![
        Box::new(BackfitLimit),
        Box::new(BackfitStage { stages }),
        Box::new(OneStage),
        Box::new(Marginal),
    ]
}

pub fn find_estimator(name: &str, stages: usize) -> Result<Box<dyn ComponentEstimator>> {
    estimator_registry(stages)
        .into_iter()
        .find(|e| e.name() == name)
        .ok_or_else(|| Error::UnknownEstimator(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backfit::{evaluate, one_stage_pair};
    use crate::basis::make_knots;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn design() -> AdditiveDesign {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x1: Vec<f64> = (0..120).map(|_| 1.0 - rng.random::<f64>()).collect();
        let x2: Vec<f64> = (0..120).map(|_| 1.0 - rng.random::<f64>()).collect();
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a * a - b + rng.random_range(-0.3..0.3)).collect();
        AdditiveDesign::from_points(&make_knots(3, 8).unwrap(), y, &x1, &x2, 1.0, 2.0, 2).unwrap()
    }

    #[test]
    fn lookup() {
        let names: Vec<_> = estimator_registry(10).iter().map(|e| e.name()).collect();
        assert_eq!(names, ["backfit-limit", "backfit-stage", "one-stage", "marginal"]);
        assert!(matches!(find_estimator("nope", 1), Err(Error::UnknownEstimator(_))));
    }

    #[test]
    fn weights_reproduce_every_estimator() {
        let d = design();
        let cfg = d.config().clone();
        let opts = BackfitOptions { tol: 1e-12, max_stages: 2000, keep_history: false };
        for est in estimator_registry(4) {
            let fit = est.fit(&d, &opts).unwrap();
            let w = est.weights(&d).unwrap();
            for x in [0.1, 0.55, 0.9] {
                let g = cfg.basis_vector(x).unwrap();
                for (j, b) in [(Component::First, &fit.b1), (Component::Second, &fit.b2)] {
                    let wy: f64 = w.functional(j, &g).iter().zip(d.y()).map(|(a, c)| a * c).sum();
                    assert_abs_diff_eq!(wy, evaluate(&cfg, b, x).unwrap(), epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn one_stage_matches_pair() {
        let d = design();
        let fit = OneStage.fit(&d, &BackfitOptions::default()).unwrap();
        let (a, b) = one_stage_pair(&d, 0.3, 0.8).unwrap();
        assert_abs_diff_eq!(evaluate(d.config(), &fit.b1, 0.3).unwrap(), a, epsilon = 1e-14);
        assert_abs_diff_eq!(evaluate(d.config(), &fit.b2, 0.8).unwrap(), b, epsilon = 1e-14);
    }
}
