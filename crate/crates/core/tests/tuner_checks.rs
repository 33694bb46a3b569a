//! Splitting, cross-validation and grid search behaviour.

use litlvm::data::{Dataset, Target};
use litlvm::interactions::InteractionScheme;
use litlvm::params::LvmKind;
use litlvm::simgen::{gen_linear, gen_survival, SimConfig};
use litlvm::trainer::FitConfig;
use litlvm::tuner::{
    evaluate, fit_method, grid_search, kfold, lambda_l_sweep, split, split_indices, GridSpec, Method, Metric,
};

fn survival(n: usize) -> Dataset<f64> {
    gen_survival::<f64>(&SimConfig { n, p: 4, seed: 1, ..Default::default() }).unwrap().0
}

fn regression(n: usize, p: usize) -> Dataset<f64> {
    gen_linear::<f64>(&SimConfig { n, p, seed: 2, ..Default::default() }).unwrap().0
}

fn event_rate(d: &Dataset<f64>) -> f64 {
    d.event_count().unwrap() as f64 / d.n() as f64
}

fn small_spec() -> GridSpec<f64> {
    GridSpec {
        lambda1_grid: vec![0.0],
        lambda2_grid: vec![0.0],
        lambda_l_grid: vec![1.0],
        lr_grid: vec![0.05],
        d_grid: vec![2],
        folds: 3,
        split_fraction: 0.5,
        metric: None,
    }
}

fn quick(mut cfg: FitConfig<f64>) -> FitConfig<f64> {
    cfg.optimizer.max_epochs = 150;
    cfg
}

#[test]
fn stratified_split_keeps_event_rate() {
    let d = survival(1000);
    for seed in 0..5 {
        let (tr, te) = split(&d, 0.5, seed).unwrap();
        assert_eq!(tr.n() + te.n(), 1000);
        assert!((event_rate(&tr) - event_rate(&te)).abs() < 0.05);
    }
}

#[test]
fn split_is_a_partition() {
    let d = regression(101, 3);
    let (tr, te) = split_indices(&d, 0.3, 9).unwrap();
    assert_eq!(tr.len(), 30);
    let mut all: Vec<usize> = tr.iter().chain(te.iter()).copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..101).collect::<Vec<_>>());
    assert!(split_indices(&d, 1.0, 0).is_err());
    assert!(split_indices(&d, 0.001, 0).is_err());
}

#[test]
fn kfold_validates_each_row_once() {
    let d = survival(103);
    let folds = kfold(&d, 5, 4).unwrap();
    let mut seen = vec![0; 103];
    for (fit, val) in &folds {
        assert_eq!(fit.len() + val.len(), 103);
        assert!((20..=21).contains(&val.len()));
        val.iter().for_each(|&i| seen[i] += 1);
        let events = val.iter().filter(|&&i| matches!(d.target(), Target::Survival { event, .. } if event[i])).count();
        assert!(events > 0);
    }
    assert!(seen.iter().all(|&c| c == 1));
    assert_eq!(kfold(&d, 5, 4).unwrap(), folds);
    assert!(kfold(&d, 1, 0).is_err());
}

#[test]
fn single_cell_grid_returns_that_cell() {
    let d = regression(60, 4);
    let template = quick(FitConfig::regression(LvmKind::LowRank, 2));
    let res = grid_search(&d, &InteractionScheme::full(4), &small_spec(), &template, Method::LitLvm).unwrap();
    assert_eq!(res.best_index, 0);
    assert_eq!(res.table.len(), 1);
    assert_eq!(res.best.penalty.lambda_l, 1.0);
    assert_eq!(res.metric, Metric::Rmse);
}

#[test]
fn diverging_cell_loses_to_the_survivor() {
    let d = regression(60, 4);
    let mut spec = small_spec();
    spec.lr_grid = vec![1e200, 0.05];
    let template = quick(FitConfig::regression(LvmKind::LowRank, 2));
    let res = grid_search(&d, &InteractionScheme::full(4), &spec, &template, Method::ElasticNetInteractions).unwrap();
    assert!(res.table[0].mean.is_none() && res.table[0].error.is_some());
    assert_eq!(res.best_index, 1);
    spec.lr_grid = vec![1e200];
    assert!(grid_search(&d, &InteractionScheme::full(4), &spec, &template, Method::ElasticNetInteractions).is_err());
}

#[test]
fn search_picks_the_rerun_argbest() {
    let d = regression(80, 4);
    let scheme = InteractionScheme::full(4);
    let mut spec = small_spec();
    spec.lambda2_grid = vec![0.0, 1.0];
    spec.lambda_l_grid = vec![0.01, 10.0];
    let template = quick(FitConfig::regression(LvmKind::LowRank, 2));
    let res = grid_search(&d, &scheme, &spec, &template, Method::LitLvm).unwrap();
    assert_eq!(res.table.len(), 4);

    let folds = kfold(&d, 3, template.optimizer.seed).unwrap();
    let means: Vec<f64> = spec
        .cells(Method::LitLvm)
        .iter()
        .map(|cell| {
            let cfg = cell.apply(&template);
            folds
                .iter()
                .map(|(f, v)| {
                    let (p, _, s) = fit_method(&d.select(f), &scheme, &cfg, Method::LitLvm).unwrap();
                    evaluate(&p, &d.select(v), &s, Metric::Rmse).unwrap()
                })
                .sum::<f64>()
                / 3.0
        })
        .collect();
    for (row, m) in res.table.iter().zip(&means) {
        assert_eq!(row.mean, Some(*m));
    }
    let oracle = (0..4).min_by(|&a, &b| means[a].partial_cmp(&means[b]).unwrap()).unwrap();
    assert_eq!(res.best_index, oracle);
}

#[test]
fn table_size_is_the_grid_product_and_method_collapses_grids() {
    let spec = GridSpec::<f64>::default();
    assert_eq!(spec.cells(Method::LitLvm).len(), 6 * 6 * 5 * 4);
    assert_eq!(spec.cells(Method::ElasticNet).len(), 6 * 6 * 4);
    assert_eq!(GridSpec::<f64>::default_for(Method::Fm).cells(Method::Fm).len(), 6 * 6 * 4 * 4);
    assert!(spec.cells(Method::Fm).iter().all(|c| c.lambda_l == 0.0));
}

#[test]
fn ties_prefer_stronger_regularization() {
    // A constant response makes every cell score the same RMSE once the
    // intercept is fitted exactly; the largest λ₁ must then win.
    let base = regression(60, 3);
    let y = ndarray::Array1::from_elem(60, 2.0);
    let d = Dataset::with_default_names(base.x().clone(), Target::Regression(y)).unwrap();
    let mut spec = small_spec();
    spec.lambda1_grid = vec![0.0, 1e6];
    spec.lr_grid = vec![0.1];
    let mut template = FitConfig::regression(LvmKind::None, 0);
    template.optimizer.max_epochs = 400;
    let res = grid_search(&d, &InteractionScheme::none(3), &spec, &template, Method::ElasticNet).unwrap();
    let (a, b) = (res.table[0].mean.unwrap(), res.table[1].mean.unwrap());
    if a == b {
        assert_eq!(res.best_index, 1);
    } else {
        assert_eq!(res.best_index, if b < a { 1 } else { 0 });
    }
}

#[test]
fn sweep_at_zero_matches_interaction_elastic_net() {
    let d = regression(120, 5);
    let (tr, te) = split(&d, 0.5, 0).unwrap();
    let scheme = InteractionScheme::full(5);
    let fixed = quick(FitConfig::regression(LvmKind::LowRank, 2));
    let pts = lambda_l_sweep(&tr, &te, &scheme, &[0.0, 1.0], &fixed).unwrap();
    let (p, _, s) = fit_method(&tr, &scheme, &fixed, Method::ElasticNetInteractions).unwrap();
    assert_eq!(pts[0].metric, Some(evaluate(&p, &te, &s, Metric::Rmse).unwrap()));
    assert_eq!(lambda_l_sweep(&tr, &te, &scheme, &[0.0, 1.0], &fixed).unwrap(), pts);
    let mut none = fixed;
    none.lvm_kind = LvmKind::None;
    assert!(lambda_l_sweep(&tr, &te, &scheme, &[0.0], &none).is_err());
}

#[test]
fn method_and_metric_names_round_trip() {
    for m in Method::ALL {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
    }
    assert!("lasso".parse::<Method>().is_err());
    for m in [Metric::Rmse, Metric::Auc, Metric::CoxLogLik, Metric::CIndex] {
        assert_eq!(Metric::from_name(m.name()).unwrap(), m);
    }
}
