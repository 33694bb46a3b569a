//! Feature matrices with their task-specific targets.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Regression,
    Classification,
    Survival,
}

impl TaskKind {
    /// Cox models have no identifiable intercept.
    pub fn has_intercept(self) -> bool {
        !matches!(self, TaskKind::Survival)
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TaskKind::Regression => "regression",
            TaskKind::Classification => "classification",
            TaskKind::Survival => "survival",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target<F> {
    Regression(Array1<F>),
    /// Labels stored as 0/1 values of the scalar type.
    Classification(Array1<F>),
    Survival { time: Array1<F>, event: Vec<bool> },
}

impl<F: Scalar> Target<F> {
    pub fn len(&self) -> usize {
        match self {
            Target::Regression(y) | Target::Classification(y) => y.len(),
            Target::Survival { time, .. } => time.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> TaskKind {
        match self {
            Target::Regression(_) => TaskKind::Regression,
            Target::Classification(_) => TaskKind::Classification,
            Target::Survival { .. } => TaskKind::Survival,
        }
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        match self {
            Target::Regression(y) => Target::Regression(y.select(Axis(0), rows)),
            Target::Classification(y) => Target::Classification(y.select(Axis(0), rows)),
            Target::Survival { time, event } => Target::Survival {
                time: time.select(Axis(0), rows),
                event: rows.iter().map(|&i| event[i]).collect(),
            },
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Target::Regression(y) => {
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Numeric("regression target".into()));
                }
            }
            Target::Classification(y) => {
                if let Some(bad) = y.iter().find(|&&v| v != F::zero() && v != F::one()) {
                    return Err(Error::arg(format!("class label {bad} is not 0 or 1")));
                }
            }
            Target::Survival { time, event } => {
                if time.len() != event.len() {
                    return Err(Error::dim(format!(
                        "{} survival times but {} event flags",
                        time.len(),
                        event.len()
                    )));
                }
                if let Some(bad) = time.iter().find(|&&t| !(t.is_finite() && t > F::zero())) {
                    return Err(Error::arg(format!("survival time {bad} is not strictly positive")));
                }
            }
        }
        Ok(())
    }
}

/// An `n × p` feature matrix, its target and the feature names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F> {
    x: Array2<F>,
    target: Target<F>,
    feature_names: Vec<String>,
}

impl<F: Scalar> Dataset<F> {
    pub fn new(x: Array2<F>, target: Target<F>, feature_names: Vec<String>) -> Result<Self> {
        let (n, p) = x.dim();
        if target.len() != n {
            return Err(Error::dim(format!("target has {} rows, X has {n}", target.len())));
        }
        if feature_names.len() != p {
            return Err(Error::dim(format!(
                "{} feature names for {p} columns",
                feature_names.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("feature matrix".into()));
        }
        target.validate()?;
        Ok(Self { x, target, feature_names })
    }

    /// Names features `x1..xp`.
    pub fn with_default_names(x: Array2<F>, target: Target<F>) -> Result<Self> {
        let names = default_feature_names(x.ncols());
        Self::new(x, target, names)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<F> {
        &self.x
    }

    pub fn target(&self) -> &Target<F> {
        &self.target
    }

    pub fn task(&self) -> TaskKind {
        self.target.task()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn event_count(&self) -> Option<usize> {
        match &self.target {
            Target::Survival { event, .. } => Some(event.iter().filter(|&&e| e).count()),
            _ => None,
        }
    }

    /// Row subset in the given order.
    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            x: self.x.select(Axis(0), rows),
            target: self.target.select(rows),
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn map_features(&self, f: impl FnOnce(&Array2<F>) -> Array2<F>) -> Self {
        Self {
            x: f(&self.x),
            target: self.target.clone(),
            feature_names: self.feature_names.clone(),
        }
    }
}

pub fn default_feature_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

/// Per-column affine scaling to zero mean and unit variance, estimated on a
/// training split and reused verbatim on any other split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer<F> {
    pub mean: Vec<F>,
    pub scale: Vec<F>,
}

impl<F: Scalar> Standardizer<F> {
    /// Constant columns keep scale 1 so they map to exactly zero.
    pub fn fit(x: &Array2<F>) -> Self {
        let n = F::from_usize(x.nrows().max(1)).unwrap();
        let mut mean = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for col in x.columns() {
            let m = col.sum() / n;
            let var = col.iter().map(|&v| (v - m) * (v - m)).sum::<F>() / n;
            let sd = var.sqrt();
            mean.push(m);
            scale.push(if sd > F::epsilon() { sd } else { F::one() });
        }
        Self { mean, scale }
    }

    pub fn transform(&self, x: &Array2<F>) -> Result<Array2<F>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::dim(format!(
                "standardizer fitted on {} columns, got {}",
                self.mean.len(),
                x.ncols()
            )));
        }
        let mut out = x.clone();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (m, s) = (self.mean[j], self.scale[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        Ok(out)
    }

    pub fn transform_dataset(&self, data: &Dataset<F>) -> Result<Dataset<F>> {
        let x = self.transform(data.x())?;
        Ok(data.map_features(|_| x))
    }
}
