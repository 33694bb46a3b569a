//! Data splitting, cross-validation and hyperparameter grid search.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Target, TaskKind};
use crate::error::{Error, Result};
use crate::interactions::InteractionScheme;
use crate::metrics;
use crate::params::{LvmKind, ModelParams};
use crate::predictors::{cox_mean_partial_log_likelihood, scores};
use crate::rng;
use crate::scalar::Scalar;
use crate::trainer::{fit, fit_fm, FitConfig, FitReport};

/// Model family being fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Main effects only.
    ElasticNet,
    /// Main effects plus free pairwise interactions, no latent penalty.
    ElasticNetInteractions,
    /// Free interactions pulled toward a latent model.
    LitLvm,
    /// Interactions fixed to `ZZᵀ`.
    Fm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::ElasticNet, Method::ElasticNetInteractions, Method::LitLvm, Method::Fm];

    pub fn name(self) -> &'static str {
        match self {
            Method::ElasticNet => "elastic_net",
            Method::ElasticNetInteractions => "elastic_net_interactions",
            Method::LitLvm => "lit_lvm",
            Method::Fm => "fm",
        }
    }

    /// The scheme actually fitted: main-effects-only methods drop every pair.
    pub fn scheme(self, scheme: &InteractionScheme) -> InteractionScheme {
        match self {
            Method::ElasticNet => InteractionScheme::none(scheme.p()),
            _ => scheme.clone(),
        }
    }

    /// Adjusts a configuration to the method: no latent block for the
    /// elastic nets, and a low-rank block for the factorization machine.
    pub fn configure<F: Scalar>(self, cfg: &FitConfig<F>) -> FitConfig<F> {
        let mut c = *cfg;
        match self {
            Method::ElasticNet | Method::ElasticNetInteractions => {
                c.lvm_kind = LvmKind::None;
                c.penalty.lambda_l = F::zero();
            }
            Method::LitLvm => {
                if !c.lvm_kind.is_active() {
                    c.lvm_kind = LvmKind::LowRank;
                }
            }
            Method::Fm => {
                c.lvm_kind = LvmKind::LowRank;
                c.penalty.lambda_l = F::zero();
            }
        }
        c
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown method '{s}'")))
    }
}

/// Fits `method` on `data`; `cfg` is adjusted with [`Method::configure`].
pub fn fit_method<F: Scalar>(
    data: &Dataset<F>,
    scheme: &InteractionScheme,
    cfg: &FitConfig<F>,
    method: Method,
) -> Result<(ModelParams<F>, FitReport<F>, InteractionScheme)> {
    let scheme = method.scheme(scheme);
    let cfg = method.configure(cfg);
    let (params, report) = match method {
        Method::Fm => fit_fm(data, &scheme, &cfg, None)?,
        _ => fit(data, &scheme, &cfg, None)?,
    };
    Ok((params, report, scheme))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Rmse,
    Auc,
    /// Mean Cox partial log-likelihood per event.
    CoxLogLik,
    CIndex,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Rmse => "rmse",
            Metric::Auc => "auc",
            Metric::CoxLogLik => "cox_loglik",
            Metric::CIndex => "c_index",
        }
    }

    pub fn higher_is_better(self) -> bool {
        !matches!(self, Metric::Rmse)
    }

    /// Selection metric used for a task.
    pub fn for_task(task: TaskKind) -> Self {
        match task {
            TaskKind::Regression => Metric::Rmse,
            TaskKind::Classification => Metric::Auc,
            TaskKind::Survival => Metric::CoxLogLik,
        }
    }

    /// Held-out metric reported for a task.
    pub fn test_metric(task: TaskKind) -> Self {
        match task {
            TaskKind::Survival => Metric::CIndex,
            t => Self::for_task(t),
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        [Metric::Rmse, Metric::Auc, Metric::CoxLogLik, Metric::CIndex]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown metric '{s}'")))
    }
}

/// Scores `params` on `data` with `metric`.
pub fn evaluate<F: Scalar>(
    params: &ModelParams<F>,
    data: &Dataset<F>,
    scheme: &InteractionScheme,
    metric: Metric,
) -> Result<f64> {
    let s = scores(params, data.x(), scheme)?;
    match (metric, data.target()) {
        (Metric::Rmse, Target::Regression(y)) => Ok(metrics::rmse(y.view(), s.view())?.to_f64_lossy()),
        (Metric::Auc, Target::Classification(y)) => metrics::auc(s.view(), y.view()),
        (Metric::CoxLogLik, Target::Survival { time, event }) => {
            Ok(cox_mean_partial_log_likelihood(s.view(), time.view(), event)?.to_f64_lossy())
        }
        (Metric::CIndex, Target::Survival { time, event }) => metrics::c_index(s.view(), time.view(), event),
        (m, t) => Err(Error::arg(format!("metric {} does not apply to a {} target", m.name(), t.task()))),
    }
}

/// Grids and protocol for [`grid_search`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec<F> {
    pub lambda1_grid: Vec<F>,
    pub lambda2_grid: Vec<F>,
    pub lambda_l_grid: Vec<F>,
    pub lr_grid: Vec<F>,
    pub d_grid: Vec<usize>,
    pub folds: usize,
    pub split_fraction: F,
    /// Defaults to the task's selection metric.
    pub metric: Option<Metric>,
}

impl<F: Scalar> Default for GridSpec<F> {
    fn default() -> Self {
        let v = |xs: &[f64]| xs.iter().map(|&x| F::lit(x)).collect::<Vec<F>>();
        Self {
            lambda1_grid: v(&[0.0, 0.01, 0.1, 1.0, 10.0, 100.0]),
            lambda2_grid: v(&[0.0, 0.01, 0.1, 1.0, 10.0, 100.0]),
            lambda_l_grid: v(&[0.01, 0.1, 1.0, 10.0, 100.0]),
            lr_grid: v(&[0.005, 0.01, 0.05, 0.1]),
            d_grid: vec![2],
            folds: 5,
            split_fraction: F::lit(0.5),
            metric: None,
        }
    }
}

impl<F: Scalar> GridSpec<F> {
    /// Defaults, with the wider latent-dimension grid for the factorization
    /// machine.
    pub fn default_for(method: Method) -> Self {
        let mut g = Self::default();
        if method == Method::Fm {
            g.d_grid = vec![2, 10, 25, 50];
        }
        g
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("lambda1_grid", &self.lambda1_grid),
            ("lambda2_grid", &self.lambda2_grid),
            ("lambda_l_grid", &self.lambda_l_grid),
            ("lr_grid", &self.lr_grid),
        ];
        for (name, g) in named {
            if g.is_empty() {
                return Err(Error::arg(format!("{name} is empty")));
            }
        }
        if self.d_grid.is_empty() {
            return Err(Error::arg("d_grid is empty"));
        }
        if self.folds < 2 {
            return Err(Error::arg(format!("folds = {} must be at least 2", self.folds)));
        }
        if !(self.split_fraction > F::zero() && self.split_fraction < F::one()) {
            return Err(Error::arg(format!("split_fraction {} must lie in (0, 1)", self.split_fraction)));
        }
        Ok(())
    }

    /// Cells in sweep order for `method`. Grids that do not apply to the
    /// method collapse to a single value (`λ_l = 0`, `d = 0`).
    pub fn cells(&self, method: Method) -> Vec<GridCell<F>> {
        let lambda_l: Vec<F> = if method == Method::LitLvm { self.lambda_l_grid.clone() } else { vec![F::zero()] };
        let ds: Vec<usize> = if matches!(method, Method::LitLvm | Method::Fm) { self.d_grid.clone() } else { vec![0] };
        let mut out = Vec::new();
        for &lambda1 in &self.lambda1_grid {
            for &lambda2 in &self.lambda2_grid {
                for &ll in &lambda_l {
                    for &lr in &self.lr_grid {
                        for &d in &ds {
                            out.push(GridCell { lambda1, lambda2, lambda_l: ll, learning_rate: lr, d });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell<F> {
    pub lambda1: F,
    pub lambda2: F,
    pub lambda_l: F,
    pub learning_rate: F,
    pub d: usize,
}

impl<F: Scalar> GridCell<F> {
    pub fn apply(&self, template: &FitConfig<F>) -> FitConfig<F> {
        let mut c = *template;
        c.penalty.lambda1 = self.lambda1;
        c.penalty.lambda2 = self.lambda2;
        c.penalty.lambda_l = self.lambda_l;
        c.optimizer.learning_rate = self.learning_rate;
        c.latent_dim = self.d;
        c
    }
}

/// One row of the cross-validation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow<F> {
    pub index: usize,
    pub cell: GridCell<F>,
    pub fold_values: Vec<f64>,
    /// Mean over folds; `None` when any fold failed.
    pub mean: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<F> {
    pub metric: Metric,
    pub best_index: usize,
    pub best: FitConfig<F>,
    pub table: Vec<CvRow<F>>,
}

impl<F: Scalar> SearchResult<F> {
    pub const CSV_HEADER: [&'static str; 9] =
        ["index", "lambda1", "lambda2", "lambda_l", "learning_rate", "d", "mean", "fold_values", "error"];

    /// Table rows matching [`Self::CSV_HEADER`]; fold values are `;`-joined.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.table
            .iter()
            .map(|r| {
                vec![
                    r.index.to_string(),
                    r.cell.lambda1.to_string(),
                    r.cell.lambda2.to_string(),
                    r.cell.lambda_l.to_string(),
                    r.cell.learning_rate.to_string(),
                    r.cell.d.to_string(),
                    r.mean.map(|m| m.to_string()).unwrap_or_default(),
                    r.fold_values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"),
                    r.error.clone().unwrap_or_default(),
                ]
            })
            .collect()
    }
}

fn shuffled(idx: &mut [usize], rng: &mut rng::StreamRng) {
    idx.shuffle(rng);
}

/// Row groups that splits and folds keep balanced: event/censored for
/// survival, the two classes for classification (folds only).
fn strata<F: Scalar>(data: &Dataset<F>, by_class: bool) -> Vec<Vec<usize>> {
    match data.target() {
        Target::Survival { event, .. } => {
            let (ev, ce): (Vec<usize>, Vec<usize>) = (0..data.n()).partition(|&i| event[i]);
            vec![ev, ce]
        }
        Target::Classification(y) if by_class => {
            let (pos, neg): (Vec<usize>, Vec<usize>) = (0..data.n()).partition(|&i| y[i] == F::one());
            vec![pos, neg]
        }
        _ => vec![(0..data.n()).collect()],
    }
}

/// Row indices `(train, test)`, a seeded partition with
/// `round(fraction·n)` training rows. Survival data are split within the
/// event and censored groups so both sides keep the event rate.
pub fn split_indices<F: Scalar>(data: &Dataset<F>, fraction: F, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > F::zero() && fraction < F::one()) {
        return Err(Error::arg(format!("split fraction {fraction} must lie in (0, 1)")));
    }
    let n = data.n();
    let f = fraction.to_f64_lossy();
    let n_train = (f * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Degenerate(format!("fraction {f} of {n} rows leaves one side empty")));
    }
    let mut r = rng::stream(seed, rng::streams::SPLIT);
    let groups = strata(data, false);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    let mut remaining = n_train;
    let last = groups.len() - 1;
    for (g, mut rows) in groups.into_iter().enumerate() {
        shuffled(&mut rows, &mut r);
        let take = if g == last { remaining } else { ((f * rows.len() as f64).round() as usize).min(remaining) };
        let take = take.min(rows.len());
        remaining -= take;
        train.extend_from_slice(&rows[..take]);
        test.extend_from_slice(&rows[take..]);
    }
    if let Target::Survival { event, .. } = data.target() {
        for (name, side) in [("training", &train), ("test", &test)] {
            if !side.iter().any(|&i| event[i]) {
                return Err(Error::Degenerate(format!("{name} side of the split has no events")));
            }
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split<F: Scalar>(data: &Dataset<F>, fraction: F, seed: u64) -> Result<(Dataset<F>, Dataset<F>)> {
    let (tr, te) = split_indices(data, fraction, seed)?;
    Ok((data.select(&tr), data.select(&te)))
}

/// `k` seeded `(fit, validate)` row-index pairs. Every row is validated
/// exactly once and fold sizes differ by at most one. Survival events and
/// classification labels are dealt round-robin per group so each fold gets
/// its share.
pub fn kfold<F: Scalar>(data: &Dataset<F>, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let n = data.n();
    if k < 2 {
        return Err(Error::arg(format!("k = {k} must be at least 2")));
    }
    if k > n {
        return Err(Error::arg(format!("k = {k} exceeds the {n} rows")));
    }
    let mut r = rng::stream(seed, rng::streams::FOLDS);
    let mut fold_of = vec![0usize; n];
    let mut next = 0usize;
    for mut rows in strata(data, true) {
        shuffled(&mut rows, &mut r);
        for i in rows {
            fold_of[i] = next % k;
            next += 1;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (val, fit): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| fold_of[i] == f);
            (fit, val)
        })
        .collect())
}

/// Better-first ordering of two evaluated cells: metric, then larger
/// `(λ₁, λ₂, λ_l)`, smaller learning rate, smaller `d`, lower index.
fn rank<F: Scalar>(metric: Metric, a: (&CvRow<F>, f64), b: (&CvRow<F>, f64)) -> Ordering {
    let by_metric = if metric.higher_is_better() { b.1.partial_cmp(&a.1) } else { a.1.partial_cmp(&b.1) };
    let (ca, cb) = (&a.0.cell, &b.0.cell);
    let desc = |x: F, y: F| y.partial_cmp(&x).unwrap_or(Ordering::Equal);
    by_metric
        .unwrap_or(Ordering::Equal)
        .then(desc(ca.lambda1, cb.lambda1))
        .then(desc(ca.lambda2, cb.lambda2))
        .then(desc(ca.lambda_l, cb.lambda_l))
        .then(ca.learning_rate.partial_cmp(&cb.learning_rate).unwrap_or(Ordering::Equal))
        .then(ca.d.cmp(&cb.d))
        .then(a.0.index.cmp(&b.0.index))
}

/// Exhaustive k-fold cross-validated search. Cells run in parallel on the
/// current rayon pool; results are reduced in cell order, so the outcome
/// does not depend on the thread count. The fold seed is the template's
/// optimizer seed.
pub fn grid_search<F: Scalar>(
    train: &Dataset<F>,
    scheme: &InteractionScheme,
    spec: &GridSpec<F>,
    template: &FitConfig<F>,
    method: Method,
) -> Result<SearchResult<F>> {
    spec.validate()?;
    if train.task() != template.task {
        return Err(Error::arg(format!("template task {} but data target is {}", template.task, train.task())));
    }
    let metric = spec.metric.unwrap_or_else(|| Metric::for_task(template.task));
    let folds = kfold(train, spec.folds, template.optimizer.seed)?;
    let fold_data: Vec<(Dataset<F>, Dataset<F>)> =
        folds.iter().map(|(f, v)| (train.select(f), train.select(v))).collect();
    let cells = spec.cells(method);

    let table: Vec<CvRow<F>> = cells
        .par_iter()
        .enumerate()
        .map(|(index, cell)| {
            let cfg = cell.apply(template);
            let mut fold_values = Vec::with_capacity(fold_data.len());
            for (fold, (fit_part, val_part)) in fold_data.iter().enumerate() {
                let outcome = fit_method(fit_part, scheme, &cfg, method)
                    .and_then(|(params, _, s)| evaluate(&params, val_part, &s, metric));
                match outcome {
                    Ok(v) if v.is_finite() => fold_values.push(v),
                    Ok(v) => {
                        return CvRow { index, cell: *cell, fold_values, mean: None, error: Some(format!("fold {fold}: metric {v}")) }
                    }
                    Err(e) => {
                        return CvRow { index, cell: *cell, fold_values, mean: None, error: Some(format!("fold {fold}: {e}")) }
                    }
                }
            }
            let mean = fold_values.iter().sum::<f64>() / fold_values.len() as f64;
            CvRow { index, cell: *cell, fold_values, mean: Some(mean), error: None }
        })
        .collect();

    let best = table
        .iter()
        .filter_map(|r| r.mean.map(|m| (r, m)))
        .min_by(|&a, &b| rank(metric, a, b))
        .map(|(r, _)| r.index);
    match best {
        Some(best_index) => Ok(SearchResult {
            metric,
            best_index,
            best: method.configure(&cells[best_index].apply(template)),
            table,
        }),
        None => Err(Error::SearchFailed(
            table.iter().map(|r| format!("cell {}: {}", r.index, r.error.as_deref().unwrap_or("failed"))).collect(),
        )),
    }
}

/// One point of a λ_l sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda_l: f64,
    pub metric: Option<f64>,
    pub error: Option<String>,
}

/// Fits one model per `λ_l` (same seed and initialization) on `train` and
/// scores each on `test` with the task's held-out metric.
pub fn lambda_l_sweep<F: Scalar>(
    train: &Dataset<F>,
    test: &Dataset<F>,
    scheme: &InteractionScheme,
    lambda_ls: &[F],
    fixed: &FitConfig<F>,
) -> Result<Vec<SweepPoint>> {
    if !fixed.lvm_kind.is_active() {
        return Err(Error::arg("a λ_l sweep needs a latent model"));
    }
    let metric = Metric::test_metric(fixed.task);
    Ok(lambda_ls
        .par_iter()
        .map(|&ll| {
            let mut cfg = *fixed;
            cfg.penalty.lambda_l = ll;
            let res = fit(train, scheme, &cfg, None).and_then(|(p, _)| evaluate(&p, test, scheme, metric));
            let lambda_l = ll.to_f64_lossy();
            match res {
                Ok(v) => SweepPoint { lambda_l, metric: Some(v), error: None },
                Err(e) => SweepPoint { lambda_l, metric: None, error: Some(e.to_string()) },
            }
        })
        .collect())
}
