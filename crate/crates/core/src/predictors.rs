//! Prediction losses (with gradients with respect to the linear scores) and
//! prediction outputs for the three tasks.
//!
//! Normalization: squared error and log loss are averaged over examples, the
//! Cox negative log partial likelihood over observed events.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Target, TaskKind};
use crate::design::Design;
use crate::error::{Error, Result};
use crate::interactions::InteractionScheme;
use crate::params::ModelParams;
use crate::scalar::Scalar;

fn check_lengths(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::dim(format!("{what}: {a} scores vs {b} targets")));
    }
    if a == 0 {
        return Err(Error::arg(format!("{what}: empty input")));
    }
    Ok(())
}

/// `(1/n)Σ(yᵢ − sᵢ)²` and `(2/n)(s − y)`.
pub fn mse_loss_grad<F: Scalar>(scores: ArrayView1<'_, F>, y: ArrayView1<'_, F>) -> Result<(F, Array1<F>)> {
    check_lengths(scores.len(), y.len(), "mse")?;
    let n = F::from_usize(y.len()).unwrap();
    let resid = &scores - &y;
    let value = resid.iter().map(|&r| r * r).sum::<F>() / n;
    let two_over_n = F::lit(2.0) / n;
    Ok((value, resid.mapv(|r| r * two_over_n)))
}

/// `log(1 + eˢ)` without overflow.
#[inline]
pub fn softplus<F: Scalar>(s: F) -> F {
    if s > F::zero() {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

#[inline]
pub fn sigmoid<F: Scalar>(s: F) -> F {
    if s >= F::zero() {
        F::one() / (F::one() + (-s).exp())
    } else {
        let e = s.exp();
        e / (F::one() + e)
    }
}

/// `(1/n)Σ[log(1 + e^{sᵢ}) − yᵢsᵢ]` and `(1/n)(σ(s) − y)`.
pub fn logistic_loss_grad<F: Scalar>(scores: ArrayView1<'_, F>, y: ArrayView1<'_, F>) -> Result<(F, Array1<F>)> {
    check_lengths(scores.len(), y.len(), "log loss")?;
    if let Some(bad) = y.iter().find(|&&v| v != F::zero() && v != F::one()) {
        return Err(Error::arg(format!("class label {bad} is not 0 or 1")));
    }
    let n = F::from_usize(y.len()).unwrap();
    let mut value = F::zero();
    let mut grad = Array1::zeros(y.len());
    for ((g, &s), &yi) in grad.iter_mut().zip(scores.iter()).zip(y.iter()) {
        value += softplus(s) - yi * s;
        *g = (sigmoid(s) - yi) / n;
    }
    Ok((value / n, grad))
}

/// Order of subjects by ascending time, ties kept in input order.
fn ascending_order<F: Scalar>(times: ArrayView1<'_, F>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..times.len()).collect();
    idx.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).expect("finite times"));
    idx
}

/// Groups of equal time over an ascending order: `(start, end)` ranges.
fn tie_groups<F: Scalar>(times: ArrayView1<'_, F>, order: &[usize]) -> Vec<(usize, usize)> {
    let mut groups = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let t = times[order[start]];
        let mut end = start + 1;
        while end < order.len() && times[order[end]] == t {
            end += 1;
        }
        groups.push((start, end));
        start = end;
    }
    groups
}

fn check_survival<F: Scalar>(scores: ArrayView1<'_, F>, times: ArrayView1<'_, F>, events: &[bool]) -> Result<usize> {
    check_lengths(scores.len(), times.len(), "cox")?;
    if events.len() != times.len() {
        return Err(Error::dim(format!("{} times vs {} event flags", times.len(), events.len())));
    }
    if times.iter().any(|&t| !(t.is_finite() && t > F::zero())) {
        return Err(Error::arg("survival times must be finite and strictly positive"));
    }
    let d = events.iter().filter(|&&e| e).count();
    if d == 0 {
        return Err(Error::Degenerate("no observed events".into()));
    }
    Ok(d)
}

/// Breslow negative log partial likelihood averaged over events, with its
/// gradient. Risk set at time t is `{j : t_j ≥ t}`.
pub fn cox_neg_log_partial_likelihood_grad<F: Scalar>(
    scores: ArrayView1<'_, F>,
    times: ArrayView1<'_, F>,
    events: &[bool],
) -> Result<(F, Array1<F>)> {
    let n_events = check_survival(scores, times, events)?;
    let order = ascending_order(times);
    let groups = tie_groups(times, &order);
    let shift = scores.iter().copied().fold(F::neg_infinity(), F::max);
    let w: Array1<F> = scores.mapv(|s| (s - shift).exp());

    // Risk-set sums per tie group, accumulated from the latest time backwards.
    let mut risk_sum = vec![F::zero(); groups.len()];
    let mut acc = F::zero();
    for (g, &(a, b)) in groups.iter().enumerate().rev() {
        for &i in &order[a..b] {
            acc += w[i];
        }
        risk_sum[g] = acc;
    }

    let mut value = F::zero();
    let mut grad = Array1::zeros(scores.len());
    // Σ over event times u ≤ t of d_u / S(u), accumulated forwards.
    let mut hazard = F::zero();
    for (g, &(a, b)) in groups.iter().enumerate() {
        let members = &order[a..b];
        let d = members.iter().filter(|&&i| events[i]).count();
        if d > 0 {
            let log_s = risk_sum[g].ln() + shift;
            for &i in members.iter().filter(|&&i| events[i]) {
                value -= scores[i] - log_s;
                grad[i] -= F::one();
            }
            hazard += F::from_usize(d).unwrap() / risk_sum[g];
        }
        for &i in members {
            grad[i] += w[i] * hazard;
        }
    }
    let m = F::from_usize(n_events).unwrap();
    grad.mapv_inplace(|v| v / m);
    Ok((value / m, grad))
}

/// Mean Cox partial log-likelihood per event (higher is better).
pub fn cox_mean_partial_log_likelihood<F: Scalar>(
    scores: ArrayView1<'_, F>,
    times: ArrayView1<'_, F>,
    events: &[bool],
) -> Result<F> {
    cox_neg_log_partial_likelihood_grad(scores, times, events).map(|(v, _)| -v)
}

/// Task loss and its gradient with respect to the scores.
pub fn prediction_loss_grad<F: Scalar>(scores: ArrayView1<'_, F>, target: &Target<F>) -> Result<(F, Array1<F>)> {
    match target {
        Target::Regression(y) => mse_loss_grad(scores, y.view()),
        Target::Classification(y) => logistic_loss_grad(scores, y.view()),
        Target::Survival { time, event } => cox_neg_log_partial_likelihood_grad(scores, time.view(), event),
    }
}

/// Breslow cumulative baseline hazard, a right-continuous step function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineHazard<F> {
    /// Distinct event times, ascending.
    pub times: Vec<F>,
    /// `H₀` just after each time; non-decreasing.
    pub cumulative: Vec<F>,
}

impl<F: Scalar> BaselineHazard<F> {
    /// `H₀(t)`; zero before the first event time.
    pub fn at(&self, t: F) -> F {
        let k = self.times.partition_point(|&u| u <= t);
        if k == 0 {
            F::zero()
        } else {
            self.cumulative[k - 1]
        }
    }

    /// `S(t | score) = exp(−H₀(t)·e^{score})`.
    pub fn survival(&self, t: F, score: F) -> F {
        (-(self.at(t) * score.exp())).exp()
    }
}

pub fn breslow_baseline<F: Scalar>(
    scores: ArrayView1<'_, F>,
    times: ArrayView1<'_, F>,
    events: &[bool],
) -> Result<BaselineHazard<F>> {
    check_survival(scores, times, events)?;
    let order = ascending_order(times);
    let groups = tie_groups(times, &order);
    let w: Array1<F> = scores.mapv(|s| s.exp());
    let mut at_risk: F = w.sum();
    let mut h = F::zero();
    let mut out = BaselineHazard { times: Vec::new(), cumulative: Vec::new() };
    for &(a, b) in &groups {
        let members = &order[a..b];
        let d = members.iter().filter(|&&i| events[i]).count();
        if d > 0 {
            h += F::from_usize(d).unwrap() / at_risk;
            out.times.push(times[members[0]]);
            out.cumulative.push(h);
        }
        for &i in members {
            at_risk -= w[i];
        }
        if at_risk < F::zero() {
            at_risk = F::zero();
        }
    }
    Ok(out)
}

/// Per-row predictions. `value` is the task-specific output: the score
/// itself (regression, survival risk) or `σ(score)` (classification).
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions<F> {
    pub task: TaskKind,
    pub score: Array1<F>,
    pub value: Array1<F>,
}

pub fn scores<F: Scalar>(params: &ModelParams<F>, x: &Array2<F>, scheme: &InteractionScheme) -> Result<Array1<F>> {
    params.check(scheme)?;
    let design = Design::new(x, scheme)?;
    let s = design.scores(params.beta0.unwrap_or_else(F::zero), params.beta.view(), params.theta.view());
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("linear score".into()));
    }
    Ok(s)
}

pub fn predict<F: Scalar>(
    params: &ModelParams<F>,
    data: &Dataset<F>,
    scheme: &InteractionScheme,
    task: TaskKind,
) -> Result<Predictions<F>> {
    let score = scores(params, data.x(), scheme)?;
    let value = match task {
        TaskKind::Classification => score.mapv(sigmoid),
        TaskKind::Regression | TaskKind::Survival => score.clone(),
    };
    Ok(Predictions { task, score, value })
}

/// `n × T` matrix of `S(t | xᵢ)` over `grid`.
pub fn survival_curves<F: Scalar>(
    risk_scores: ArrayView1<'_, F>,
    baseline: Option<&BaselineHazard<F>>,
    grid: &[F],
) -> Result<Array2<F>> {
    let baseline = baseline.ok_or_else(|| Error::State("survival curves need a fitted baseline hazard".into()))?;
    let h: Vec<F> = grid.iter().map(|&t| baseline.at(t)).collect();
    Ok(Array2::from_shape_fn((risk_scores.len(), grid.len()), |(i, t)| {
        (-(h[t] * risk_scores[i].exp())).exp()
    }))
}
