use std::path::Path;

use addspline::backfit::Component;
use addspline::estimator::estimator_registry;
use addspline::io::svg::write_contours;
use addspline::io::{fit_dataset, load_csv, read_table, write_json, write_table, FitConfig, RunReport, TABLE_HEADER};
use addspline::sim::{kde2d, run_sim3, DensityGrid, GridSpec, ScenarioConfig};

fn ozone() -> addspline::io::Dataset {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/ozone.csv");
    load_csv(&path, "ozone", "temperature", "wind", true).unwrap()
}

#[test]
fn every_registered_estimator_through_the_tables() {
    let data = ozone();
    let dir = tempfile::tempdir().unwrap();
    for est in estimator_registry(10) {
        let cfg = FitConfig {
            estimator: est.name().to_string(),
            ..FitConfig::default()
        };
        let r = fit_dataset(&data, &cfg).unwrap();
        for j in [Component::First, Component::Second] {
            let path = dir.path().join(format!("{}_{}.csv", est.name(), j.index()));
            let rows = r.table(j);
            write_table(&path, &TABLE_HEADER, &rows).unwrap();
            let (_, back) = read_table(&path).unwrap();
            assert_eq!(back, rows, "{}", est.name());
        }
    }
}

#[test]
fn report_json_round_trip_on_disk() {
    let r = fit_dataset(&ozone(), &FitConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    write_json(&path, &r).unwrap();
    let back: RunReport = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn centered_components_average_to_zero_over_the_data() {
    // the report centers each component by its mean over the observed covariates
    let data = ozone();
    let r = fit_dataset(&data, &FitConfig::default()).unwrap();
    let spline = addspline::basis::make_knots(3, r.tuning.num_intervals).unwrap();
    for (coef, x) in [(&r.b1, &data.x1), (&r.b2, &data.x2)] {
        let fitted = addspline::basis::design_matrix(&spline, x).unwrap().mul_vec(coef);
        let mean = fitted.iter().sum::<f64>() / fitted.len() as f64;
        let at = addspline::backfit::evaluate(&spline, coef, 0.5).unwrap() - mean;
        let grid_row = if std::ptr::eq(coef, &r.b1) { &r.components[0] } else { &r.components[1] };
        let g = grid_row.rows.iter().find(|g| (g.x - 0.5).abs() < 1e-12).unwrap();
        assert!((g.estimate - at).abs() <= 1e-10);
    }
}

#[test]
fn sim3_density_contours() {
    let cfg = ScenarioConfig {
        replications: 200,
        ..ScenarioConfig::with_n(300)
    };
    let (sample, _) = run_sim3(&cfg).unwrap();
    let grid = GridSpec::default();
    let est = kde2d(&sample.values, &grid, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim3.svg");
    let levels = [0.02, 0.04, 0.06, 0.08, 0.1];
    write_contours(&path, "sim3", &est, &levels, Some(&DensityGrid::standard_normal(&grid))).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    // at least the five reference circles
    assert!(text.matches("<path").count() >= 5);
}
