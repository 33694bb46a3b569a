//! One function per subcommand. Each writes its outputs under
//! `ctx.out_dir` and returns the paths it wrote.

use std::path::{Path, PathBuf};

use litlvm::metrics::{brier_curve, default_brier_grid, integrated_brier, EvalReport};
use litlvm::predictors::{breslow_baseline, scores, sigmoid};
use litlvm::simgen::{self, GroundTruth};
use litlvm::trainer::FitReport;
use litlvm::tuner::{self, fit_method, grid_search as run_grid_search, Metric, SearchResult};
use litlvm::{rng, Dataset, Standardizer, Target, TaskKind};
use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Generator, RunConfig, SimulationSpec, TargetColumns};
use crate::csvio::{self, fmt_f64};
use crate::error::{CliError, Result};
use crate::model::{Provenance, SavedModel, FORMAT_VERSION};

/// Number of time points in a survival model's prediction grid.
pub const SURVIVAL_GRID_POINTS: usize = 30;

#[derive(Debug, Clone)]
pub struct Context {
    pub out_dir: PathBuf,
}

impl Context {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self { out_dir: out_dir.into() }
    }

    fn path(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| CliError::io(&self.out_dir, e))?;
        Ok(self.out_dir.join(name))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn target_columns(cfg: &RunConfig) -> TargetColumns {
    cfg.data.as_ref().map(|d| d.columns.clone()).unwrap_or_default()
}

// ---------------------------------------------------------------- simulate

pub fn simulate_dataset(spec: &SimulationSpec) -> Result<(Dataset<f64>, GroundTruth<f64>)> {
    Ok(match spec.generator {
        Generator::Linear => simgen::gen_linear(&spec.sim)?,
        Generator::Logistic => simgen::gen_logistic(&spec.sim)?,
        Generator::Survival => simgen::gen_survival(&spec.sim)?,
    })
}

/// Train/test split of a simulated dataset, seeded by the simulation seed.
pub fn simulate_split(spec: &SimulationSpec) -> Result<(Dataset<f64>, Dataset<f64>, GroundTruth<f64>)> {
    let (data, truth) = simulate_dataset(spec)?;
    let (train, test) = tuner::split(&data, spec.train_fraction, spec.sim.seed)?;
    Ok((train, test, truth))
}

/// Writes `data.csv`, `train.csv`, `test.csv` and `truth.json`.
pub fn simulate(cfg: &RunConfig, ctx: &Context) -> Result<Vec<PathBuf>> {
    let spec = cfg.simulation()?;
    cfg.task()?;
    let cols = target_columns(cfg);
    let (data, truth) = simulate_dataset(spec)?;
    let (train, test) = tuner::split(&data, spec.train_fraction, spec.sim.seed)?;
    let mut written = Vec::new();
    for (name, d) in [("data.csv", &data), ("train.csv", &train), ("test.csv", &test)] {
        let path = ctx.path(name)?;
        csvio::write_dataset(&path, d, &cols)?;
        written.push(path);
    }
    let path = ctx.path("truth.json")?;
    write_json(&path, &truth)?;
    written.push(path);
    Ok(written)
}

// --------------------------------------------------------------------- fit

/// Fits the configured method on `train`, producing a self-contained model.
pub fn fit_model(cfg: &RunConfig, train: &Dataset<f64>) -> Result<(SavedModel, FitReport<f64>)> {
    let task = cfg.task()?;
    if train.task() != task {
        return Err(CliError::config(format!("config task is {task} but the data target is {}", train.task())));
    }
    let scheme = cfg.mask.resolve(train.feature_names())?;
    let standardizer = cfg.standardize.then(|| Standardizer::fit(train.x()));
    let data = match &standardizer {
        Some(s) => s.transform_dataset(train)?,
        None => train.clone(),
    };
    let fit_cfg = cfg.method.configure(&cfg.fit_config()?);
    let (mut params, report, scheme) = fit_method(&data, &scheme, &fit_cfg, cfg.method)?;
    let mode = SavedModel::mode_for(cfg.method, &fit_cfg);
    SavedModel::strip_unused_latent(&mut params, mode);
    let (baseline_hazard, survival_grid) = match data.target() {
        Target::Survival { time, event } => {
            let s = scores(&params, data.x(), &scheme)?;
            let h = breslow_baseline(s.view(), time.view(), event)?;
            (Some(h), Some(default_brier_grid(time.view(), event, SURVIVAL_GRID_POINTS)?))
        }
        _ => (None, None),
    };
    let model = SavedModel {
        format_version: FORMAT_VERSION.into(),
        task,
        method: cfg.method,
        mode,
        feature_names: train.feature_names().to_vec(),
        target_columns: target_columns(cfg),
        scheme,
        params,
        standardizer,
        baseline_hazard,
        survival_grid,
        fit_config: fit_cfg,
        provenance: Provenance {
            seed: fit_cfg.optimizer.seed,
            config_sha256: cfg.hash(),
            rng: rng::RNG_VERSION.into(),
            crate_version: env!("CARGO_PKG_VERSION").into(),
        },
    };
    Ok((model, report))
}

fn load_training_data(cfg: &RunConfig, data_path: Option<&Path>) -> Result<Dataset<f64>> {
    let spec = cfg.data()?;
    let path = data_path.unwrap_or(&spec.path);
    csvio::load_dataset(path, cfg.task()?, &spec.columns, None)
}

/// Writes `model.json` and `fit_report.json`.
pub fn fit(cfg: &RunConfig, data_path: Option<&Path>, ctx: &Context) -> Result<Vec<PathBuf>> {
    let train = load_training_data(cfg, data_path)?;
    let (model, report) = fit_model(cfg, &train)?;
    let model_path = ctx.path("model.json")?;
    model.save(&model_path)?;
    let report_path = ctx.path("fit_report.json")?;
    write_json(&report_path, &report)?;
    Ok(vec![model_path, report_path])
}

// ----------------------------------------------------------------- predict

/// Features of `path` in the model's column order (matched by name).
pub fn model_features(model: &SavedModel, table: &csvio::Table) -> Result<Array2<f64>> {
    let cols = model.feature_names.iter().map(|n| table.column(n)).collect::<Result<Vec<_>>>()?;
    Ok(Array2::from_shape_fn((table.rows(), cols.len()), |(i, j)| cols[j][i]))
}

/// Per-row score and task-specific prediction.
pub fn predict_rows(model: &SavedModel, x: &Array2<f64>) -> Result<(Array1<f64>, Array1<f64>)> {
    let x = match &model.standardizer {
        Some(s) => s.transform(x)?,
        None => x.clone(),
    };
    let s = scores(&model.params, &x, &model.scheme)?;
    let value = match model.task {
        TaskKind::Classification => s.mapv(sigmoid),
        _ => s.clone(),
    };
    Ok((s, value))
}

/// Writes `predictions.csv`: `row, score`, then `prediction`
/// (regression), `probability` (classification) or one `S(t)` column per
/// grid time (survival).
pub fn predict(model_path: &Path, data_path: &Path, ctx: &Context) -> Result<Vec<PathBuf>> {
    let model = SavedModel::load(model_path)?;
    let table = csvio::read_table(data_path)?;
    let x = model_features(&model, &table)?;
    let (score, value) = predict_rows(&model, &x)?;
    let mut header = vec!["row".to_string(), "score".to_string()];
    let surv = match model.task {
        TaskKind::Regression => {
            header.push("prediction".into());
            None
        }
        TaskKind::Classification => {
            header.push("probability".into());
            None
        }
        TaskKind::Survival => {
            let grid = model.survival_grid.clone().unwrap_or_default();
            header.extend(grid.iter().map(|t| format!("S({})", fmt_f64(*t))));
            Some(model.survival(&score)?)
        }
    };
    let rows = (0..x.nrows()).map(|i| {
        let mut row = vec![i.to_string(), fmt_f64(score[i])];
        match &surv {
            Some(s) => row.extend(s.row(i).iter().map(|&v| fmt_f64(v))),
            None => row.push(fmt_f64(value[i])),
        }
        row
    });
    let path = ctx.path("predictions.csv")?;
    csvio::write_rows(&path, &header, rows)?;
    Ok(vec![path])
}

// ---------------------------------------------------------------- evaluate

/// Metrics accepted by `evaluate`.
pub const METRIC_NAMES: [&str; 5] = ["rmse", "auc", "cox_loglik", "c_index", "ibs"];

/// One metric of `model` on `data` (raw features; the stored
/// standardization is applied here).
pub fn evaluate_metric(model: &SavedModel, data: &Dataset<f64>, name: &str) -> Result<f64> {
    let prepared = model.prepare(data)?;
    if name == "ibs" {
        let Target::Survival { time, event } = prepared.target() else {
            return Err(CliError::config("ibs needs a survival model and data"));
        };
        let s = scores(&model.params, prepared.x(), &model.scheme)?;
        let grid = model.survival_grid.as_deref().ok_or_else(|| CliError::data("model has no survival grid"))?;
        let curves = model.survival(&s)?;
        let curve = brier_curve(curves.view(), time.view(), event, grid)?;
        return Ok(integrated_brier(curve.as_slice().expect("contiguous"), grid)?);
    }
    let metric = Metric::from_name(name).map_err(|_| {
        CliError::config(format!("unknown metric '{name}' (expected one of {})", METRIC_NAMES.join(", ")))
    })?;
    Ok(tuner::evaluate(&model.params, &prepared, &model.scheme, metric)?)
}

/// Writes `evaluation.json`, one report per metric. An empty list means the
/// task's held-out metric.
pub fn evaluate(model_path: &Path, data_path: &Path, metrics: &[String], ctx: &Context) -> Result<Vec<PathBuf>> {
    let model = SavedModel::load(model_path)?;
    let data = csvio::load_dataset(data_path, model.task, &model.target_columns, Some(&model.feature_names))?;
    let names: Vec<String> =
        if metrics.is_empty() { vec![Metric::test_metric(model.task).name().to_string()] } else { metrics.to_vec() };
    let reports = names
        .iter()
        .map(|m| Ok(EvalReport::new(m.clone(), vec![evaluate_metric(&model, &data, m)?])?))
        .collect::<Result<Vec<_>>>()?;
    let path = ctx.path("evaluation.json")?;
    write_json(&path, &reports)?;
    Ok(vec![path])
}

// ------------------------------------------------------------- grid search

/// Cross-validated search followed by a refit of the best cell on all of
/// `train`.
pub fn search_and_refit(cfg: &RunConfig, train: &Dataset<f64>) -> Result<(SearchResult<f64>, SavedModel, FitReport<f64>)> {
    let scheme = cfg.mask.resolve(train.feature_names())?;
    let data = if cfg.standardize { Standardizer::fit(train.x()).transform_dataset(train)? } else { train.clone() };
    let result = run_grid_search(&data, &scheme, &cfg.grid, &cfg.fit_config()?, cfg.method)?;
    let mut best = cfg.clone();
    best.penalty = result.best.penalty;
    best.optimizer = result.best.optimizer;
    best.latent_dim = result.best.latent_dim;
    best.lvm_kind = result.best.lvm_kind;
    let (model, report) = fit_model(&best, train)?;
    Ok((result, model, report))
}

/// Writes `cv_table.csv`, `search.json`, and the refitted `model.json` and
/// `fit_report.json`.
pub fn grid_search(cfg: &RunConfig, data_path: Option<&Path>, ctx: &Context) -> Result<Vec<PathBuf>> {
    let train = load_training_data(cfg, data_path)?;
    let (result, model, report) = search_and_refit(cfg, &train)?;
    let table_path = ctx.path("cv_table.csv")?;
    let header: Vec<String> = SearchResult::<f64>::CSV_HEADER.iter().map(|s| s.to_string()).collect();
    csvio::write_rows(&table_path, &header, result.csv_rows())?;
    let search_path = ctx.path("search.json")?;
    write_json(
        &search_path,
        &serde_json::json!({
            "metric": result.metric,
            "best_index": result.best_index,
            "best": result.table[result.best_index],
        }),
    )?;
    let model_path = ctx.path("model.json")?;
    model.save(&model_path)?;
    let report_path = ctx.path("fit_report.json")?;
    write_json(&report_path, &report)?;
    Ok(vec![table_path, search_path, model_path, report_path])
}

// ----------------------------------------------------------- export latent

/// Latent coordinates and the pairwise table implied by the latent model:
/// `‖z_j − z_k‖` for latent distance, `z_jᵀz_k` for low rank.
pub fn latent_tables(model: &SavedModel) -> Result<(Array2<f64>, Array2<f64>)> {
    let z = model
        .params
        .z
        .as_ref()
        .ok_or_else(|| litlvm::Error::State("model has no latent block (lvm_kind = none)".into()))?;
    let p = z.nrows();
    let pair = Array2::from_shape_fn((p, p), |(j, k)| match model.params.lvm_kind {
        litlvm::LvmKind::LatentDistance => {
            z.row(j).iter().zip(z.row(k).iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        }
        _ => z.row(j).dot(&z.row(k)),
    });
    Ok((z.clone(), pair))
}

/// Writes `latent.csv` (`feature, z_1..z_d`) and `latent_pairs.csv` (a
/// `p × p` table with feature names on both axes).
pub fn export_latent(model_path: &Path, ctx: &Context) -> Result<Vec<PathBuf>> {
    let model = SavedModel::load(model_path)?;
    let (z, pair) = latent_tables(&model)?;
    let names = &model.feature_names;
    let coord_path = ctx.path("latent.csv")?;
    let mut header = vec!["feature".to_string()];
    header.extend((1..=z.ncols()).map(|c| format!("z_{c}")));
    let rows = names.iter().enumerate().map(|(j, n)| {
        let mut r = vec![n.clone()];
        r.extend(z.row(j).iter().map(|&v| fmt_f64(v)));
        r
    });
    csvio::write_rows(&coord_path, &header, rows)?;
    let pair_path = ctx.path("latent_pairs.csv")?;
    let mut header = vec!["feature".to_string()];
    header.extend(names.iter().cloned());
    let rows = names.iter().enumerate().map(|(j, n)| {
        let mut r = vec![n.clone()];
        r.extend(pair.row(j).iter().map(|&v| fmt_f64(v)));
        r
    });
    csvio::write_rows(&pair_path, &header, rows)?;
    Ok(vec![coord_path, pair_path])
}

// -------------------------------------------------------------- experiment

/// One finished (or failed) run of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub method: String,
    pub p: usize,
    pub seed: u64,
    pub metric: String,
    pub value: Option<f64>,
    pub error: Option<String>,
    #[serde(skip)]
    pub exit_code: i32,
}

/// The configuration a single experiment run uses: the base config with
/// `p`, the seed and the method substituted.
pub fn run_config(cfg: &RunConfig, method: litlvm::tuner::Method, p: usize, seed: u64) -> Result<RunConfig> {
    let mut c = cfg.clone();
    c.method = method;
    let sim = c.simulation.get_or_insert_with(SimulationSpec::default);
    sim.sim.p = p;
    c.seed = Some(seed);
    c.experiment = None;
    c.apply_overrides(Default::default());
    Ok(c)
}

/// Simulates, fits (or tunes then refits) and scores one run on its
/// held-out split.
pub fn run_once(cfg: &RunConfig) -> Result<f64> {
    let (train, test, _) = simulate_split(cfg.simulation()?)?;
    let model = match cfg.experiment.as_ref().is_some_and(|e| e.tune) {
        true => search_and_refit(cfg, &train)?.1,
        false => fit_model(cfg, &train)?.0,
    };
    evaluate_metric(&model, &test, Metric::test_metric(model.task).name())
}

pub fn experiment_outcomes(cfg: &RunConfig) -> Result<Vec<RunOutcome>> {
    let spec = cfg.experiment.clone().ok_or_else(|| CliError::config("config has no experiment section"))?;
    if spec.methods.is_empty() || spec.p_values.is_empty() || spec.seeds.is_empty() {
        return Err(CliError::config("experiment needs at least one method, p and seed"));
    }
    let metric = Metric::test_metric(cfg.task()?).name().to_string();
    let mut runs = Vec::new();
    for &method in &spec.methods {
        for &p in &spec.p_values {
            for &seed in &spec.seeds {
                let mut c = run_config(cfg, method, p, seed)?;
                c.experiment = Some(spec.clone());
                runs.push((method, p, seed, c));
            }
        }
    }
    Ok(runs
        .par_iter()
        .map(|(method, p, seed, c)| {
            let base = RunOutcome {
                method: method.name().into(),
                p: *p,
                seed: *seed,
                metric: metric.clone(),
                value: None,
                error: None,
                exit_code: 0,
            };
            match run_once(c) {
                Ok(v) => RunOutcome { value: Some(v), ..base },
                Err(e) => RunOutcome { error: Some(e.to_string()), exit_code: e.exit_code(), ..base },
            }
        })
        .collect())
}

/// Writes `results.csv` (one row per method × p × seed, failed runs with an
/// empty value) and `failures.json`. Fails only when every run failed.
pub fn experiment(cfg: &RunConfig, ctx: &Context) -> Result<Vec<PathBuf>> {
    let outcomes = experiment_outcomes(cfg)?;
    let header: Vec<String> = ["method", "p", "seed", "metric", "value"].iter().map(|s| s.to_string()).collect();
    let rows = outcomes.iter().map(|o| {
        vec![
            o.method.clone(),
            o.p.to_string(),
            o.seed.to_string(),
            o.metric.clone(),
            o.value.map(fmt_f64).unwrap_or_default(),
        ]
    });
    let results_path = ctx.path("results.csv")?;
    csvio::write_rows(&results_path, &header, rows)?;
    let failures: Vec<&RunOutcome> = outcomes.iter().filter(|o| o.error.is_some()).collect();
    let failures_path = ctx.path("failures.json")?;
    write_json(&failures_path, &failures)?;
    if failures.len() == outcomes.len() {
        let first = failures[0];
        return Err(CliError::AllFailed {
            code: first.exit_code,
            count: failures.len(),
            message: first.error.clone().unwrap_or_default(),
        });
    }
    Ok(vec![results_path, failures_path])
}
