use std::path::{Path, PathBuf};

use serde_json::json;

use super::{kde2d, run_sim1, run_sim2, run_sim3, coverage_experiment, DensityGrid, GridSpec, ScenarioConfig};
use crate::error::{Error, Result};
use crate::io::{write_json, write_table};

#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    /// One line for the terminal.
    pub summary: String,
    pub files: Vec<PathBuf>,
    pub report: serde_json::Value,
}

pub trait Scenario: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, cfg: &ScenarioConfig, out_dir: &Path) -> Result<ScenarioOutput>;
}

fn stem(name: &str, cfg: &ScenarioConfig) -> String {
    format!("{name}_n{}_seed{}", cfg.n, cfg.seed)
}

fn echo(cfg: &ScenarioConfig) -> serde_json::Value {
    json!({
        "n": cfg.n,
        "seed": cfg.seed,
        "degree": cfg.degree,
        "diff_order": cfg.diff_order,
        "num_intervals": cfg.num_intervals(),
        "lambda": cfg.lambda(),
        "stages": cfg.stages,
        "eval_point": [cfg.eval_point.0, cfg.eval_point.1],
        "replications": cfg.replications,
        "level": cfg.level,
        "noise_variance": cfg.noise_variance,
    })
}

struct CurveRecovery;

impl Scenario for CurveRecovery {
    fn name(&self) -> &'static str {
        "sim1"
    }

    fn description(&self) -> &'static str {
        "stage-ℓ backfit curves against the true components"
    }

    fn run(&self, cfg: &ScenarioConfig, out_dir: &Path) -> Result<ScenarioOutput> {
        let out = run_sim1(cfg)?;
        let base = stem(self.name(), cfg);
        let csv = out_dir.join(format!("{base}.csv"));
        let rows: Vec<Vec<f64>> = out
            .rows
            .iter()
            .map(|r| vec![r.x, r.truth1, r.estimate1, r.truth2, r.estimate2])
            .collect();
        write_table(&csv, &["x", "truth1", "estimate1", "truth2", "estimate2"], &rows)?;
        let report = json!({ "config": echo(cfg), "rmse": out.rmse });
        let js = out_dir.join(format!("{base}.json"));
        write_json(&js, &report)?;
        Ok(ScenarioOutput {
            summary: format!("sim1 n={} K={} rmse1={:.4} rmse2={:.4}", cfg.n, out.num_intervals, out.rmse[0], out.rmse[1]),
            files: vec![csv, js],
            report,
        })
    }
}

struct OneStageDominance;

impl Scenario for OneStageDominance {
    fn name(&self) -> &'static str {
        "sim2"
    }

    fn description(&self) -> &'static str {
        "backfit components against the marginal penalized estimators"
    }

    fn run(&self, cfg: &ScenarioConfig, out_dir: &Path) -> Result<ScenarioOutput> {
        let out = run_sim2(cfg)?;
        let base = stem(self.name(), cfg);
        let csv = out_dir.join(format!("{base}.csv"));
        let rows: Vec<Vec<f64>> = out
            .rows
            .iter()
            .map(|r| vec![r.x, r.backfit1, r.marginal1, r.backfit2, r.marginal2])
            .collect();
        write_table(&csv, &["x", "backfit1", "marginal1", "backfit2", "marginal2"], &rows)?;
        let report = json!({
            "config": echo(cfg),
            "sup_difference": out.sup_difference,
            "bound": 3.0 / out.num_intervals as f64,
        });
        let js = out_dir.join(format!("{base}.json"));
        write_json(&js, &report)?;
        Ok(ScenarioOutput {
            summary: format!(
                "sim2 n={} K={} sup_diff1={:.4} sup_diff2={:.4}",
                cfg.n, out.num_intervals, out.sup_difference[0], out.sup_difference[1]
            ),
            files: vec![csv, js],
            report,
        })
    }
}

fn density_rows(est: &DensityGrid, reference: &DensityGrid) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(est.xs.len() * est.ys.len());
    for (i, x) in est.xs.iter().enumerate() {
        for (j, y) in est.ys.iter().enumerate() {
            rows.push(vec![*x, *y, est.values[i][j], reference.values[i][j]]);
        }
    }
    rows
}

struct Normality;

impl Scenario for Normality {
    fn name(&self) -> &'static str {
        "sim3"
    }

    fn description(&self) -> &'static str {
        "standardized estimator pair at the evaluation point"
    }

    fn run(&self, cfg: &ScenarioConfig, out_dir: &Path) -> Result<ScenarioOutput> {
        let (sample, summary) = run_sim3(cfg)?;
        let base = stem(self.name(), cfg);
        let csv = out_dir.join(format!("{base}.csv"));
        let rows: Vec<Vec<f64>> = sample
            .values
            .iter()
            .zip(&sample.replications)
            .map(|(v, r)| vec![*r as f64, v[0], v[1]])
            .collect();
        write_table(&csv, &["replication", "z1", "z2"], &rows)?;
        let mut files = vec![csv];
        if sample.values.len() >= 2 {
            let grid = GridSpec::default();
            if let Ok(est) = kde2d(&sample.values, &grid, None) {
                let path = out_dir.join(format!("{base}_density.csv"));
                write_table(&path, &["z1", "z2", "kde", "normal"], &density_rows(&est, &DensityGrid::standard_normal(&grid)))?;
                files.push(path);
            }
        }
        let report = json!({ "config": echo(cfg), "summary": summary, "rejected_replications": sample.rejected });
        let js = out_dir.join(format!("{base}.json"));
        write_json(&js, &report)?;
        files.push(js);
        Ok(ScenarioOutput {
            summary: format!(
                "sim3 n={} M={} mean=({:.3}, {:.3}) var=({:.3}, {:.3}) cov={:.3} ks=({:.3}, {:.3}) rejected={}",
                cfg.n,
                summary.replications,
                summary.mean[0],
                summary.mean[1],
                summary.covariance[0][0],
                summary.covariance[1][1],
                summary.covariance[0][1],
                summary.ks_stat[0],
                summary.ks_stat[1],
                summary.rejected
            ),
            files,
            report,
        })
    }
}

struct Coverage;

impl Scenario for Coverage {
    fn name(&self) -> &'static str {
        "coverage"
    }

    fn description(&self) -> &'static str {
        "pointwise interval coverage with known noise variance"
    }

    fn run(&self, cfg: &ScenarioConfig, out_dir: &Path) -> Result<ScenarioOutput> {
        let summary = coverage_experiment(cfg, cfg.level)?;
        let report = json!({ "config": echo(cfg), "coverage": summary.coverage, "summary": summary });
        let js = out_dir.join(format!("{}.json", stem(self.name(), cfg)));
        write_json(&js, &report)?;
        Ok(ScenarioOutput {
            summary: format!(
                "coverage n={} M={} level={} coverage=({:.3}, {:.3})",
                cfg.n, summary.replications, cfg.level, summary.coverage[0], summary.coverage[1]
            ),
            files: vec![js],
            report,
        })
    }
}

pub fn scenario_registry() -> Vec<Box<dyn Scenario>> {
    vec![
        Box::new(CurveRecovery),
        Box::new(OneStageDominance),
        Box::new(Normality),
        Box::new(Coverage),
    ]
}

pub fn scenario_names() -> Vec<&'static str> {
    scenario_registry().iter().map(|s| s.name()).collect()
}

pub fn find_scenario(name: &str) -> Result<Box<dyn Scenario>> {
    scenario_registry()
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}
