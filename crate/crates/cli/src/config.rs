//! JSON run configuration. Every section rejects unknown keys; command-line
//! flags are applied on top with [`RunConfig::apply_overrides`].

use std::path::{Path, PathBuf};

use litlvm::interactions::InteractionScheme;
use litlvm::simgen::SimConfig;
use litlvm::trainer::{FitConfig, OptimizerConfig};
use litlvm::tuner::{GridSpec, Method};
use litlvm::{LvmKind, PenaltyConfig, TaskKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Required for commands that read a dataset; implied by the generator
    /// for simulations.
    pub task: Option<TaskKind>,
    pub data: Option<DataSpec>,
    pub method: Method,
    pub lvm_kind: LvmKind,
    pub latent_dim: usize,
    pub penalty: PenaltyConfig<f64>,
    pub optimizer: OptimizerConfig<f64>,
    pub grid: GridSpec<f64>,
    pub mask: MaskSpec,
    pub standardize: bool,
    /// Overrides the optimizer and simulation seeds when set.
    pub seed: Option<u64>,
    pub simulation: Option<SimulationSpec>,
    pub experiment: Option<ExperimentSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            task: None,
            data: None,
            method: Method::LitLvm,
            lvm_kind: LvmKind::LowRank,
            latent_dim: 2,
            penalty: PenaltyConfig::default(),
            optimizer: OptimizerConfig::default(),
            grid: GridSpec::default(),
            mask: MaskSpec::All,
            standardize: false,
            seed: None,
            simulation: None,
            experiment: None,
        }
    }
}

/// Where a dataset lives and which columns hold the response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    /// Relative paths are resolved against the config file's directory.
    pub path: PathBuf,
    #[serde(default)]
    pub columns: TargetColumns,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetColumns {
    /// Response column for regression and classification.
    pub target: String,
    /// Survival time column.
    pub time: String,
    /// Survival event indicator column (1 = event, 0 = censored).
    pub event: String,
}

impl Default for TargetColumns {
    fn default() -> Self {
        Self { target: "y".into(), time: "time".into(), event: "event".into() }
    }
}

impl TargetColumns {
    pub fn for_task(&self, task: TaskKind) -> Vec<&str> {
        match task {
            TaskKind::Survival => vec![&self.time, &self.event],
            _ => vec![&self.target],
        }
    }
}

/// Which feature pairs get an interaction coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskSpec {
    #[default]
    All,
    None,
    /// Explicit pairs by feature name.
    Pairs(Vec<(String, String)>),
    /// Every pair with one feature from each group.
    Bipartite { group_a: Vec<String>, group_b: Vec<String> },
}

impl MaskSpec {
    pub fn resolve(&self, names: &[String]) -> Result<InteractionScheme> {
        let p = names.len();
        let idx = |name: &str| {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| CliError::config(format!("mask names unknown feature '{name}'")))
        };
        let scheme = match self {
            MaskSpec::All => InteractionScheme::full(p),
            MaskSpec::None => InteractionScheme::none(p),
            MaskSpec::Pairs(pairs) => {
                let ix = pairs.iter().map(|(a, b)| Ok((idx(a)?, idx(b)?))).collect::<Result<Vec<_>>>()?;
                InteractionScheme::from_pairs(p, &ix).map_err(|e| CliError::config(e.to_string()))?
            }
            MaskSpec::Bipartite { group_a, group_b } => {
                let a = group_a.iter().map(|n| idx(n)).collect::<Result<Vec<_>>>()?;
                let b = group_b.iter().map(|n| idx(n)).collect::<Result<Vec<_>>>()?;
                InteractionScheme::bipartite(p, &a, &b).map_err(|e| CliError::config(e.to_string()))?
            }
        };
        Ok(scheme)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Linear,
    Logistic,
    Survival,
}

impl Generator {
    pub fn task(self) -> TaskKind {
        match self {
            Generator::Linear => TaskKind::Regression,
            Generator::Logistic => TaskKind::Classification,
            Generator::Survival => TaskKind::Survival,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSpec {
    pub generator: Generator,
    /// Share of rows written to the training file.
    pub train_fraction: f64,
    pub sim: SimConfig,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self { generator: Generator::Linear, train_fraction: 0.5, sim: SimConfig::default() }
    }
}

/// A sweep of simulated runs: every method at every `p` for every seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub methods: Vec<Method>,
    pub p_values: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Tune each run by cross-validated grid search on its training split
    /// instead of using the fixed penalty and optimizer settings.
    pub tune: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self { methods: vec![Method::ElasticNetInteractions, Method::LitLvm], p_values: vec![20], seeds: vec![0], tune: false }
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub standardize: Option<bool>,
}

impl RunConfig {
    /// Reads and parses a config file; relative data paths become relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let (Some(data), Some(dir)) = (cfg.data.as_mut(), path.parent()) {
            if data.path.is_relative() {
                data.path = dir.join(&data.path);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))
    }

    pub fn apply_overrides(&mut self, o: Overrides) {
        if let Some(seed) = o.seed {
            self.seed = Some(seed);
        }
        if let Some(s) = o.standardize {
            self.standardize = s;
        }
        if let Some(seed) = self.seed {
            self.optimizer.seed = seed;
            if let Some(sim) = self.simulation.as_mut() {
                sim.sim.seed = seed;
            }
        }
    }

    /// Task from the explicit field, else from the simulation generator.
    pub fn task(&self) -> Result<TaskKind> {
        match (self.task, &self.simulation) {
            (Some(t), Some(s)) if t != s.generator.task() => Err(CliError::config(format!(
                "task {t} conflicts with the {:?} generator",
                s.generator
            ))),
            (Some(t), _) => Ok(t),
            (None, Some(s)) => Ok(s.generator.task()),
            (None, None) => Err(CliError::config("config needs a task (regression, classification or survival)")),
        }
    }

    pub fn data(&self) -> Result<&DataSpec> {
        self.data.as_ref().ok_or_else(|| CliError::config("config has no data section"))
    }

    pub fn simulation(&self) -> Result<&SimulationSpec> {
        self.simulation.as_ref().ok_or_else(|| CliError::config("config has no simulation section"))
    }

    pub fn fit_config(&self) -> Result<FitConfig<f64>> {
        Ok(FitConfig {
            task: self.task()?,
            penalty: self.penalty,
            lvm_kind: self.lvm_kind,
            latent_dim: self.latent_dim,
            optimizer: self.optimizer,
        })
    }

    /// Hex SHA-256 of the effective configuration's JSON.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn unknown_keys_rejected_at_every_level() {
        assert!(RunConfig::parse(r#"{"bogus": 1}"#).is_err());
        assert!(RunConfig::parse(r#"{"penalty": {"lambda3": 1}}"#).is_err());
        assert!(RunConfig::parse(r#"{"optimizer": {"lr": 1}}"#).is_err());
        assert!(RunConfig::parse(r#"{"grid": {"folds": 3, "x": 1}}"#).is_err());
        assert!(RunConfig::parse(r#"{"data": {"path": "a.csv", "extra": 1}}"#).is_err());
        assert!(RunConfig::parse(r#"{"simulation": {"sim": {"n": 5, "q": 1}}}"#).is_err());
        assert!(RunConfig::parse(r#"{"mask": {"bipartite": {"group_a": [], "group_b": [], "c": []}}}"#).is_err());
    }

    #[test]
    fn partial_sections_take_defaults() {
        let c = RunConfig::parse(r#"{"task": "regression", "penalty": {"lambda_l": 0.5}}"#).unwrap();
        assert_eq!(c.penalty.lambda_l, 0.5);
        assert_eq!(c.optimizer, OptimizerConfig::default());
        assert_eq!(c.fit_config().unwrap().latent_dim, 2);
    }

    #[test]
    fn masks_resolve_by_name() {
        let n = names(4);
        let pairs = RunConfig::parse(r#"{"mask": {"pairs": [["x1", "x3"], ["x4", "x2"]]}}"#).unwrap().mask;
        assert_eq!(pairs.resolve(&n).unwrap().active_pairs(), &[(0, 2), (1, 3)]);
        let bi = RunConfig::parse(r#"{"mask": {"bipartite": {"group_a": ["x1"], "group_b": ["x2", "x3"]}}}"#)
            .unwrap()
            .mask;
        assert_eq!(bi.resolve(&n).unwrap().len(), 2);
        assert_eq!(MaskSpec::None.resolve(&n).unwrap().len(), 0);
        let bad = MaskSpec::Pairs(vec![("x1".into(), "zz".into())]);
        assert!(matches!(bad.resolve(&n), Err(CliError::Config(_))));
    }

    #[test]
    fn overrides_reach_nested_seeds() {
        let mut c = RunConfig::parse(r#"{"simulation": {"generator": "logistic"}}"#).unwrap();
        c.apply_overrides(Overrides { seed: Some(9), standardize: Some(true) });
        assert_eq!(c.optimizer.seed, 9);
        assert_eq!(c.simulation.as_ref().unwrap().sim.seed, 9);
        assert!(c.standardize);
        assert_eq!(c.task().unwrap(), TaskKind::Classification);
        let h = c.hash();
        assert_eq!(h.len(), 64);
        c.apply_overrides(Overrides { seed: Some(10), standardize: None });
        assert_ne!(c.hash(), h);
    }

    #[test]
    fn conflicting_task_is_a_config_error() {
        let c = RunConfig::parse(r#"{"task": "survival", "simulation": {"generator": "linear"}}"#).unwrap();
        assert!(c.task().is_err());
        assert!(RunConfig::default().task().is_err());
    }
}
