use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use addspline::backfit::Component;
use addspline::estimator::estimator_registry;
use addspline::io::svg::{write_curves, Curve};
use addspline::io::{fit_dataset, load_csv, parse_config, write_json, write_table, FitConfig, RunReport, TABLE_HEADER};
use addspline::sim::{find_scenario, scenario_registry, ScenarioConfig};
use addspline::{Error, Result};

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;

#[derive(Parser)]
#[command(name = "addspline", version, about = "Penalized B-spline backfitting for y = f1(x1) + f2(x2) + e")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit both components of a CSV dataset and write intervals on a grid.
    Fit(FitArgs),
    /// Run one of the simulation scenarios.
    Simulate(SimArgs),
    /// List registered scenarios and estimators.
    List,
}

#[derive(Args, Default)]
struct FitArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    /// Response column.
    #[arg(long)]
    y: Option<String>,
    #[arg(long)]
    x1: Option<String>,
    #[arg(long)]
    x2: Option<String>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    diff_order: Option<usize>,
    /// Number of knot intervals; default round(2 n^0.4).
    #[arg(long)]
    kn: Option<usize>,
    /// Default 2 n^0.4 / sqrt(K).
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_stages: Option<usize>,
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    /// backfit-limit, backfit-stage, one-stage or marginal.
    #[arg(long)]
    estimator: Option<String>,
    /// Sweeps for backfit-stage.
    #[arg(long)]
    stages: Option<usize>,
    /// Skip centering y and scaling the covariates.
    #[arg(long)]
    raw: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also draw the components with their bands.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// key = value file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    scenario: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long)]
    kn: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 10)]
    stages: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::InvalidConfig(format!("config key {key}: cannot parse '{raw}'")))
}

fn fill<T: FromStr>(slot: &mut Option<T>, key: &str, raw: &str) -> Result<()> {
    if slot.is_none() {
        *slot = Some(parse_value(key, raw)?);
    }
    Ok(())
}

/// Config-file values only fill what the command line left unset.
fn merge_config(args: &mut FitArgs, text: &str) -> Result<()> {
    for (key, raw) in parse_config(text)? {
        let k = key.replace('-', "_");
        match k.as_str() {
            "data" => fill(&mut args.data, &k, &raw)?,
            "y" => fill(&mut args.y, &k, &raw)?,
            "x1" => fill(&mut args.x1, &k, &raw)?,
            "x2" => fill(&mut args.x2, &k, &raw)?,
            "degree" => fill(&mut args.degree, &k, &raw)?,
            "diff_order" => fill(&mut args.diff_order, &k, &raw)?,
            "kn" => fill(&mut args.kn, &k, &raw)?,
            "lambda1" => fill(&mut args.lambda1, &k, &raw)?,
            "lambda2" => fill(&mut args.lambda2, &k, &raw)?,
            "tol" => fill(&mut args.tol, &k, &raw)?,
            "max_stages" => fill(&mut args.max_stages, &k, &raw)?,
            "level" => fill(&mut args.level, &k, &raw)?,
            "grid" => fill(&mut args.grid, &k, &raw)?,
            "estimator" => fill(&mut args.estimator, &k, &raw)?,
            "stages" => fill(&mut args.stages, &k, &raw)?,
            "out" => fill(&mut args.out, &k, &raw)?,
            "svg" => fill(&mut args.svg, &k, &raw)?,
            "raw" => args.raw |= parse_value::<bool>(&k, &raw)?,
            _ => return Err(Error::InvalidConfig(format!("unknown config key '{key}'"))),
        }
    }
    Ok(())
}

fn required(v: Option<String>, flag: &str) -> Result<String> {
    v.ok_or_else(|| Error::InvalidConfig(format!("--{flag} is required")))
}

fn fit_config(args: &FitArgs) -> FitConfig {
    let d = FitConfig::default();
    FitConfig {
        degree: args.degree.unwrap_or(d.degree),
        diff_order: args.diff_order.unwrap_or(d.diff_order),
        num_intervals: args.kn,
        lambda1: args.lambda1,
        lambda2: args.lambda2,
        tol: args.tol.unwrap_or(d.tol),
        max_stages: args.max_stages.unwrap_or(d.max_stages),
        level: args.level.unwrap_or(d.level),
        grid: args.grid.unwrap_or(d.grid),
        estimator: args.estimator.clone().unwrap_or(d.estimator),
        stages: args.stages.unwrap_or(d.stages),
    }
}

fn band_curves(report: &RunReport) -> Vec<Curve> {
    let mut curves = Vec::new();
    for (j, c) in report.components.iter().enumerate() {
        let fit = c.rows.iter().map(|r| (r.x, r.estimate)).collect();
        curves.push(Curve::new(format!("f{} ({})", j + 1, c.covariate), fit));
        let lower = c.rows.iter().map(|r| (r.x, r.lower)).collect();
        let upper = c.rows.iter().map(|r| (r.x, r.upper)).collect();
        for (side, pts) in [("lower", lower), ("upper", upper)] {
            let mut band = Curve::new(format!("f{} {side}", j + 1), pts);
            band.dashed = true;
            curves.push(band);
        }
    }
    curves
}

fn cmd_fit(mut args: FitArgs) -> Result<bool> {
    if let Some(path) = args.config.clone() {
        merge_config(&mut args, &std::fs::read_to_string(path)?)?;
    }
    let data_path = args
        .data
        .clone()
        .ok_or_else(|| Error::InvalidConfig("--data is required".into()))?;
    let y = required(args.y.clone(), "y")?;
    let x1 = required(args.x1.clone(), "x1")?;
    let x2 = required(args.x2.clone(), "x2")?;
    let data = load_csv(&data_path, &y, &x1, &x2, !args.raw)?;
    let cfg = fit_config(&args);
    let report = fit_dataset(&data, &cfg)?;

    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;
    let json = out.join("report.json");
    write_json(&json, &report)?;
    let mut files = vec![json];
    for (j, name) in [(Component::First, &x1), (Component::Second, &x2)] {
        let path = out.join(format!("component{}_{name}.csv", j.index() + 1));
        write_table(&path, &TABLE_HEADER, &report.table(j))?;
        files.push(path);
    }
    if let Some(svg) = &args.svg {
        write_curves(svg, &format!("{y} ~ f1({x1}) + f2({x2})"), &band_curves(&report))?;
        files.push(svg.clone());
    }

    println!(
        "fit n={} K={} lambda=({}, {}) stages={} converged={} sigma2={:.6e}",
        report.tuning.n,
        report.tuning.num_intervals,
        report.tuning.lambda1,
        report.tuning.lambda2,
        report.convergence.stages,
        report.convergence.converged,
        report.sigma2_hat
    );
    for f in &files {
        println!("  {}", f.display());
    }
    Ok(report.convergence.converged)
}

fn cmd_simulate(args: SimArgs) -> Result<()> {
    let scenario = find_scenario(&args.scenario)?;
    let cfg = ScenarioConfig {
        seed: args.seed,
        replications: args.reps,
        level: args.level,
        num_intervals: args.kn,
        lambda: args.lambda,
        stages: args.stages,
        weight_mode: addspline::inference::WeightMode::Stage(args.stages),
        ..ScenarioConfig::with_n(args.n)
    };
    std::fs::create_dir_all(&args.out)?;
    let out = scenario.run(&cfg, &args.out)?;
    println!("{}", out.summary);
    for f in &out.files {
        println!("  {}", f.display());
    }
    Ok(())
}

fn list() {
    println!("scenarios:");
    for s in scenario_registry() {
        println!("  {:<10} {}", s.name(), s.description());
    }
    println!("estimators:");
    for e in estimator_registry(10) {
        println!("  {:<14} {}", e.name(), e.description());
    }
}

fn report_error(e: &Error, context: &Path) {
    eprintln!("error ({}): {e}", context.display());
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap would exit with 2 on usage errors, which is taken by non-convergence
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Fit(args) => {
            let data = args.data.clone().unwrap_or_default();
            match cmd_fit(args) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(EXIT_NOT_CONVERGED),
                Err(e) => {
                    report_error(&e, &data);
                    ExitCode::from(EXIT_INPUT)
                }
            }
        }
        Command::Simulate(args) => {
            let out = args.out.clone();
            match cmd_simulate(args) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    report_error(&e, &out);
                    ExitCode::from(EXIT_INPUT)
                }
            }
        }
        Command::List => {
            list();
            ExitCode::SUCCESS
        }
    }
}
