//! End-to-end runs of the `litlvm` binary on the committed fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use litlvm::interactions::InteractionScheme;
use litlvm::params::reconstruct_theta;
use litlvm::tuner::{grid_search, Method};
use litlvm::{LvmKind, Target, TaskKind};
use litlvm_cli::commands;
use litlvm_cli::config::{RunConfig, TargetColumns};
use litlvm_cli::csvio::{self, read_table};
use litlvm_cli::model::{Mode, SavedModel};

fn fixture(task: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(task)
}

fn litlvm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_litlvm")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = litlvm(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A fixture config with `edit` applied, written next to the fixture data.
fn edited_config(task: &str, dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let text = std::fs::read_to_string(fixture(task).join("config.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["data"]["path"] = serde_json::Value::String(s(&fixture(task).join("train.csv")).into());
    edit(&mut v);
    let path = dir.join(format!("{task}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path
}

fn fit_fixture(task: &str, dir: &Path) -> PathBuf {
    let cfg = fixture(task).join("config.json");
    ok(&["fit", "--config", s(&cfg), "--out-dir", s(dir)]);
    dir.join("model.json")
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    read_table(path).unwrap().column(name).unwrap().to_vec()
}

#[test]
fn simulate_reproduces_committed_fixtures() {
    for task in ["regression", "classification", "survival"] {
        let dir = tempfile::tempdir().unwrap();
        ok(&["simulate", "--config", s(&fixture(task).join("config.json")), "--out-dir", s(dir.path())]);
        for f in ["data.csv", "train.csv", "test.csv", "truth.json"] {
            let a = std::fs::read(dir.path().join(f)).unwrap();
            let b = std::fs::read(fixture(task).join(f)).unwrap();
            assert!(a == b, "{task}/{f} differs from the committed fixture");
        }
    }
}

#[test]
fn simulated_files_match_config_and_memory() {
    let cfg = RunConfig::load(&fixture("survival").join("config.json")).unwrap();
    let t = read_table(&fixture("survival").join("data.csv")).unwrap();
    assert_eq!(t.rows(), 160);
    assert_eq!(t.headers, ["x1", "x2", "x3", "x4", "x5", "time", "event"]);
    let mut c = cfg.clone();
    c.apply_overrides(Default::default());
    let (train, test, _) = commands::simulate_split(c.simulation().unwrap()).unwrap();
    let cols = TargetColumns::default();
    let loaded = csvio::load_dataset(&fixture("survival").join("train.csv"), TaskKind::Survival, &cols, None).unwrap();
    assert_eq!(loaded, train);
    assert_eq!(train.n() + test.n(), 160);
}

#[test]
fn fit_then_predict_matches_in_process_model() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = fit_fixture("classification", dir.path());
    let model = SavedModel::load(&model_path).unwrap();
    assert_eq!(model.mode, Mode::LitLvm);
    let train = fixture("classification").join("train.csv");
    ok(&["predict", "--model", s(&model_path), "--data", s(&train), "--out-dir", s(dir.path())]);
    let prob = column(&dir.path().join("predictions.csv"), "probability");

    let mut cfg = RunConfig::load(&fixture("classification").join("config.json")).unwrap();
    cfg.apply_overrides(Default::default());
    let data = csvio::load_dataset(&train, TaskKind::Classification, &TargetColumns::default(), None).unwrap();
    let (fresh, _) = commands::fit_model(&cfg, &data).unwrap();
    assert_eq!(fresh.params, model.params);
    let direct = fresh.predict(&data).unwrap();
    assert_eq!(prob, direct.value.to_vec());
}

#[test]
fn saved_model_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let path = fit_fixture("survival", dir.path());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(SavedModel::from_json(&text).unwrap().to_json(), text);
}

#[test]
fn zero_lambda_l_is_tagged_elastic_net() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = edited_config("regression", dir.path(), |v| v["penalty"]["lambda_l"] = 0.0.into());
    ok(&["fit", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    let m = SavedModel::load(&dir.path().join("model.json")).unwrap();
    assert_eq!(m.mode, Mode::ElasticNet);
    assert!(m.params.z.is_none());
    let text = std::fs::read_to_string(dir.path().join("model.json")).unwrap();
    assert!(text.contains("\"mode\": \"elastic_net\""));
}

#[test]
fn ridge_fit_reproduces_normal_equations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = edited_config("regression", dir.path(), |v| {
        v["mask"] = "none".into();
        v["penalty"] = serde_json::json!({ "lambda1": 0.0, "lambda2": 0.1, "lambda_l": 0.0 });
        v["optimizer"] = serde_json::json!({ "learning_rate": 0.01, "max_epochs": 20000, "tol": 1e-12 });
    });
    ok(&["fit", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    let m = SavedModel::load(&dir.path().join("model.json")).unwrap();

    let data = csvio::load_dataset(&fixture("regression").join("train.csv"), TaskKind::Regression, &TargetColumns::default(), None)
        .unwrap();
    let Target::Regression(y) = data.target() else { unreachable!() };
    let (n, p) = (data.n(), data.p());
    let xbar = data.x().mean_axis(ndarray::Axis(0)).unwrap();
    let ybar = y.mean().unwrap();
    let xc = nalgebra::DMatrix::from_fn(n, p, |i, j| data.x()[[i, j]] - xbar[j]);
    let yc = nalgebra::DVector::from_fn(n, |i, _| y[i] - ybar);
    let lhs = xc.transpose() * &xc + nalgebra::DMatrix::identity(p, p) * (0.1 * n as f64);
    let beta = lhs.lu().solve(&(xc.transpose() * yc)).unwrap();
    let beta0 = ybar - (0..p).map(|j| xbar[j] * beta[j]).sum::<f64>();
    for j in 0..p {
        assert!((m.params.beta[j] - beta[j]).abs() < 1e-3, "β[{j}]: {} vs {}", m.params.beta[j], beta[j]);
    }
    assert!((m.params.beta0.unwrap() - beta0).abs() < 1e-3);
}

#[test]
fn predict_matches_columns_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let model = fit_fixture("regression", dir.path());
    let table = read_table(&fixture("regression").join("test.csv")).unwrap();
    let order = [4usize, 2, 5, 0, 3, 1];
    let header: Vec<String> = order.iter().map(|&c| table.headers[c].clone()).collect();
    let rows = (0..table.rows()).map(|i| order.iter().map(|&c| csvio::fmt_f64(table.columns[c][i])).collect());
    let permuted = dir.path().join("permuted.csv");
    csvio::write_rows(&permuted, &header, rows).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["predict", "--model", s(&model), "--data", s(&fixture("regression").join("test.csv")), "--out-dir", s(&a)]);
    ok(&["predict", "--model", s(&model), "--data", s(&permuted), "--out-dir", s(&b)]);
    assert_eq!(std::fs::read(a.join("predictions.csv")).unwrap(), std::fs::read(b.join("predictions.csv")).unwrap());

    let without_x3 = dir.path().join("short.csv");
    csvio::write_rows(&without_x3, &["x1".to_string()], (0..2).map(|_| vec!["1".to_string()])).unwrap();
    let out = litlvm(&["predict", "--model", s(&model), "--data", s(&without_x3), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing column 'x2'"));
}

#[test]
fn zero_parameter_classifier_predicts_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let path = fit_fixture("classification", dir.path());
    let mut m = SavedModel::load(&path).unwrap();
    m.params.beta0 = Some(0.0);
    m.params.beta.fill(0.0);
    m.params.theta.fill(0.0);
    m.save(&path).unwrap();
    ok(&["predict", "--model", s(&path), "--data", s(&fixture("classification").join("test.csv")), "--out-dir", s(dir.path())]);
    assert!(column(&dir.path().join("predictions.csv"), "probability").iter().all(|&p| p == 0.5));
}

#[test]
fn survival_predictions_are_curves_on_the_stored_grid() {
    let dir = tempfile::tempdir().unwrap();
    let model = fit_fixture("survival", dir.path());
    let m = SavedModel::load(&model).unwrap();
    assert_eq!(m.scheme.len(), 6);
    ok(&["predict", "--model", s(&model), "--data", s(&fixture("survival").join("test.csv")), "--out-dir", s(dir.path())]);
    let t = read_table(&dir.path().join("predictions.csv")).unwrap();
    assert_eq!(t.headers.len(), 2 + commands::SURVIVAL_GRID_POINTS);
    for i in 0..t.rows() {
        let curve: Vec<f64> = (2..t.headers.len()).map(|c| t.columns[c][i]).collect();
        assert!(curve.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(curve.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn evaluate_reports_match_direct_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let model = fit_fixture("survival", dir.path());
    let test = fixture("survival").join("test.csv");
    ok(&["evaluate", "--model", s(&model), "--data", s(&test), "--metrics", "c_index,cox_loglik,ibs", "--out-dir", s(dir.path())]);
    let reports: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("evaluation.json")).unwrap()).unwrap();
    let m = SavedModel::load(&model).unwrap();
    let data = csvio::load_dataset(&test, TaskKind::Survival, &TargetColumns::default(), None).unwrap();
    let s_test = litlvm::predictors::scores(&m.params, data.x(), &m.scheme).unwrap();
    let Target::Survival { time, event } = data.target() else { unreachable!() };
    let c = litlvm::metrics::c_index(s_test.view(), time.view(), event).unwrap();
    assert_eq!(reports[0]["metric"], "c_index");
    assert_eq!(reports[0]["mean"].as_f64().unwrap(), c);
    let ibs = reports[2]["mean"].as_f64().unwrap();
    assert!(ibs > 0.0 && ibs < 0.25, "ibs {ibs}");
}

#[test]
fn evaluate_perfect_fit_and_single_class_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = fit_fixture("regression", dir.path());
    let m = SavedModel::load(&model).unwrap();
    let test = fixture("regression").join("test.csv");
    let data = csvio::load_dataset(&test, TaskKind::Regression, &TargetColumns::default(), None).unwrap();
    let yhat = m.predict(&data).unwrap().value;
    let mut header: Vec<String> = data.feature_names().to_vec();
    header.push("y".into());
    let rows = (0..data.n()).map(|i| {
        let mut r: Vec<String> = data.x().row(i).iter().map(|&v| csvio::fmt_f64(v)).collect();
        r.push(csvio::fmt_f64(yhat[i]));
        r
    });
    let perfect = dir.path().join("perfect.csv");
    csvio::write_rows(&perfect, &header, rows).unwrap();
    ok(&["evaluate", "--model", s(&model), "--data", s(&perfect), "--out-dir", s(dir.path())]);
    let text = std::fs::read_to_string(dir.path().join("evaluation.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v[0]["metric"], "rmse");
    assert_eq!(v[0]["mean"].as_f64(), Some(0.0));

    let cmodel = fit_fixture("classification", &dir.path().join("c"));
    let table = read_table(&fixture("classification").join("test.csv")).unwrap();
    let rows = (0..table.rows()).map(|i| {
        let mut r: Vec<String> = (0..6).map(|c| csvio::fmt_f64(table.columns[c][i])).collect();
        r.push("1".into());
        r
    });
    let ones = dir.path().join("ones.csv");
    csvio::write_rows(&ones, &table.headers, rows).unwrap();
    let out = litlvm(&["evaluate", "--model", s(&cmodel), "--data", s(&ones), "--metrics", "auc", "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("data error"));
}

#[test]
fn single_cell_grid_search_equals_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = edited_config("regression", dir.path(), |v| {
        v["grid"] = serde_json::json!({
            "lambda1_grid": [0.001], "lambda2_grid": [0.001], "lambda_l_grid": [0.1],
            "lr_grid": [0.05], "d_grid": [2], "folds": 3
        });
    });
    let g = dir.path().join("g");
    ok(&["grid-search", "--config", s(&cfg), "--out-dir", s(&g)]);
    ok(&["fit", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    let a = SavedModel::load(&g.join("model.json")).unwrap();
    let b = SavedModel::load(&dir.path().join("model.json")).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(read_table_rows(&g.join("cv_table.csv")), 1);
}

#[test]
fn grid_search_table_and_argbest_match_library_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = fixture("regression").join("config.json");
    let one = dir.path().join("one");
    let two = dir.path().join("two");
    ok(&["grid-search", "--config", s(&cfg_path), "--jobs", "1", "--out-dir", s(&one)]);
    ok(&["grid-search", "--config", s(&cfg_path), "--jobs", "2", "--out-dir", s(&two)]);
    let table = std::fs::read(one.join("cv_table.csv")).unwrap();
    assert_eq!(table, std::fs::read(two.join("cv_table.csv")).unwrap());
    let t = read_table(&one.join("cv_table.csv"));
    // The fold_values column is ';'-joined text, so read the means by hand.
    assert!(t.is_err());
    let mut rdr = csv::Reader::from_path(one.join("cv_table.csv")).unwrap();
    let means: Vec<f64> = rdr.records().map(|r| r.unwrap()[6].parse().unwrap()).collect();
    assert_eq!(means.len(), 2 * 2);

    let mut cfg = RunConfig::load(&cfg_path).unwrap();
    cfg.apply_overrides(Default::default());
    let data = csvio::load_dataset(&fixture("regression").join("train.csv"), TaskKind::Regression, &TargetColumns::default(), None)
        .unwrap();
    let res = grid_search(&data, &InteractionScheme::full(5), &cfg.grid, &cfg.fit_config().unwrap(), Method::LitLvm).unwrap();
    let lib_means: Vec<f64> = res.table.iter().map(|r| r.mean.unwrap()).collect();
    assert_eq!(means, lib_means);
    let search: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(one.join("search.json")).unwrap()).unwrap();
    assert_eq!(search["best_index"].as_u64(), Some(res.best_index as u64));
}

#[test]
fn export_latent_tables() {
    let dir = tempfile::tempdir().unwrap();
    let model = fit_fixture("regression", dir.path());
    ok(&["export-latent", "--model", s(&model), "--out-dir", s(dir.path())]);
    let coords = read_table_with_names(&dir.path().join("latent.csv"));
    assert_eq!(coords.len(), 5);
    assert!(coords.iter().all(|(_, r)| r.len() == 2));
    let dots = read_table_with_names(&dir.path().join("latent_pairs.csv"));
    let m = SavedModel::load(&model).unwrap();
    let z = m.params.z.as_ref().unwrap();
    let recon = reconstruct_theta(z.view(), 0.0, LvmKind::LowRank, &InteractionScheme::full(5)).unwrap();
    let sym = InteractionScheme::full(5).symmetric(recon.view()).unwrap();
    for j in 0..5 {
        for k in 0..5 {
            if j != k {
                assert!((dots[j].1[k] - sym[[j, k]]).abs() < 1e-12);
            }
        }
    }

    let dir2 = tempfile::tempdir().unwrap();
    let model = fit_fixture("survival", dir2.path());
    ok(&["export-latent", "--model", s(&model), "--out-dir", s(dir2.path())]);
    let dist = read_table_with_names(&dir2.path().join("latent_pairs.csv"));
    for j in 0..5 {
        assert_eq!(dist[j].1[j], 0.0);
        for k in 0..5 {
            assert_eq!(dist[j].1[k], dist[k].1[j]);
        }
    }

    let cfg = edited_config("regression", dir2.path(), |v| v["method"] = "elastic_net_interactions".into());
    let en = dir2.path().join("en");
    ok(&["fit", "--config", s(&cfg), "--out-dir", s(&en)]);
    let out = litlvm(&["export-latent", "--model", s(&en.join("model.json")), "--out-dir", s(&en)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no latent block"));
}

fn read_table_with_names(path: &Path) -> Vec<(String, Vec<f64>)> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r.iter().skip(1).map(|v| v.parse().unwrap()).collect())
        })
        .collect()
}

fn experiment_config(dir: &Path, methods: &[&str], ps: &[usize], seeds: &[u64]) -> PathBuf {
    edited_config("regression", dir, |v| {
        v["experiment"] = serde_json::json!({ "methods": methods, "p_values": ps, "seeds": seeds });
        v["simulation"]["sim"]["n"] = 80.into();
    })
}

#[test]
fn experiment_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = experiment_config(dir.path(), &["lit_lvm"], &[4], &[1]);
    ok(&["experiment", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    assert_eq!(read_table_rows(&dir.path().join("results.csv")), 1);
    let cfg = experiment_config(dir.path(), &["elastic_net", "lit_lvm", "fm"], &[4, 5], &[1, 2]);
    ok(&["experiment", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    assert_eq!(read_table_rows(&dir.path().join("results.csv")), 12);
    assert_eq!(std::fs::read_to_string(dir.path().join("failures.json")).unwrap().trim(), "[]");
}

fn read_table_rows(path: &Path) -> usize {
    csv::Reader::from_path(path).unwrap().records().count()
}

#[test]
fn experiment_rows_match_standalone_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = experiment_config(dir.path(), &["elastic_net_interactions"], &[4], &[7]);
    ok(&["experiment", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    let mut rdr = csv::Reader::from_path(dir.path().join("results.csv")).unwrap();
    let row = rdr.records().next().unwrap().unwrap();
    let value: f64 = row[4].parse().unwrap();

    let alone = dir.path().join("alone");
    let cfg = edited_config("regression", dir.path(), |v| {
        v["method"] = "elastic_net_interactions".into();
        v["simulation"]["sim"]["n"] = 80.into();
        v["simulation"]["sim"]["p"] = 4.into();
    });
    ok(&["simulate", "--config", s(&cfg), "--seed", "7", "--out-dir", s(&alone)]);
    ok(&["fit", "--config", s(&cfg), "--seed", "7", "--data", s(&alone.join("train.csv")), "--out-dir", s(&alone)]);
    ok(&["evaluate", "--model", s(&alone.join("model.json")), "--data", s(&alone.join("test.csv")), "--out-dir", s(&alone)]);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(alone.join("evaluation.json")).unwrap()).unwrap();
    assert_eq!(v[0]["mean"].as_f64(), Some(value));
}

#[test]
fn experiment_continues_past_failures() {
    let dir = tempfile::tempdir().unwrap();
    // d = 2 is not below p = 2, so the latent model cannot be fitted there.
    let cfg = experiment_config(dir.path(), &["lit_lvm"], &[2, 4], &[1]);
    ok(&["experiment", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    let failures: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("failures.json")).unwrap()).unwrap();
    assert_eq!(failures.as_array().unwrap().len(), 1);
    assert_eq!(failures[0]["p"], 2);
    let mut rdr = csv::Reader::from_path(dir.path().join("results.csv")).unwrap();
    let values: Vec<String> = rdr.records().map(|r| r.unwrap()[4].to_string()).collect();
    assert!(values[0].is_empty() && !values[1].is_empty());

    let cfg = experiment_config(dir.path(), &["lit_lvm"], &[2], &[1]);
    assert_eq!(litlvm(&["experiment", "--config", s(&cfg), "--out-dir", s(dir.path())]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"task": "regression", "learning_rate": 0.1}"#).unwrap();
    let out = litlvm(&["fit", "--config", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));

    let csv_path = dir.path().join("holes.csv");
    std::fs::write(&csv_path, "x1,x2,y\n1,2,3\n4,,6\n").unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, format!(r#"{{"task": "regression", "data": {{"path": "{}"}}}}"#, s(&csv_path))).unwrap();
    let out = litlvm(&["fit", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing value in column 'x2'"));

    let diverge = edited_config("regression", dir.path(), |v| v["optimizer"]["learning_rate"] = 1e200.into());
    let out = litlvm(&["fit", "--config", s(&diverge), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverged"));

    assert_eq!(litlvm(&["fit", "--standardize", "maybe"]).status.code(), Some(2));
}

#[test]
fn standardized_model_predicts_from_raw_features() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("regression").join("config.json");
    ok(&["fit", "--config", s(&cfg), "--standardize", "on", "--out-dir", s(dir.path())]);
    let m = SavedModel::load(&dir.path().join("model.json")).unwrap();
    let st = m.standardizer.clone().unwrap();
    let train = csvio::load_dataset(&fixture("regression").join("train.csv"), TaskKind::Regression, &TargetColumns::default(), None)
        .unwrap();
    let z = st.transform(train.x()).unwrap();
    for c in z.columns() {
        assert!(c.mean().unwrap().abs() < 1e-12);
    }
    ok(&["predict", "--model", s(&dir.path().join("model.json")), "--data", s(&fixture("regression").join("train.csv")), "--out-dir", s(dir.path())]);
    let pred = column(&dir.path().join("predictions.csv"), "prediction");
    let direct = litlvm::predictors::scores(&m.params, &z, &m.scheme).unwrap();
    assert_eq!(pred, direct.to_vec());
}
