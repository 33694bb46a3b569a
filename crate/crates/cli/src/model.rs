//! Persisted models.

use std::path::Path;

use litlvm::interactions::InteractionScheme;
use litlvm::predictors::{predict, survival_curves, Predictions};
use litlvm::trainer::FitConfig;
use litlvm::tuner::Method;
use litlvm::{BaselineHazard, Dataset, LvmKind, ModelParams, Standardizer, TaskKind};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::config::TargetColumns;
use crate::error::{CliError, Result};

/// `major.minor`; a different major version is refused on load.
pub const FORMAT_VERSION: &str = "1.0";

/// What the stored parameters mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// No latent block (main effects, possibly free interactions).
    ElasticNet,
    /// Free interactions fitted with an active latent penalty.
    LitLvm,
    /// Interactions are exactly the low-rank reconstruction.
    Fm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub seed: u64,
    pub config_sha256: String,
    pub rng: String,
    pub crate_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SavedModel {
    pub format_version: String,
    pub task: TaskKind,
    pub method: Method,
    pub mode: Mode,
    pub feature_names: Vec<String>,
    pub target_columns: TargetColumns,
    pub scheme: InteractionScheme,
    pub params: ModelParams<f64>,
    pub standardizer: Option<Standardizer<f64>>,
    pub baseline_hazard: Option<BaselineHazard<f64>>,
    /// Times at which survival predictions are reported.
    pub survival_grid: Option<Vec<f64>>,
    pub fit_config: FitConfig<f64>,
    pub provenance: Provenance,
}

impl SavedModel {
    /// Mode implied by a fit. A latent block fitted with `λ_l = 0` carries no
    /// information and is dropped, so such models are plain elastic nets.
    pub fn mode_for(method: Method, cfg: &FitConfig<f64>) -> Mode {
        match method {
            Method::Fm => Mode::Fm,
            _ if cfg.uses_lvm() => Mode::LitLvm,
            _ => Mode::ElasticNet,
        }
    }

    pub fn strip_unused_latent(params: &mut ModelParams<f64>, mode: Mode) {
        if mode == Mode::ElasticNet {
            params.lvm_kind = LvmKind::None;
            params.z = None;
            params.alpha0 = None;
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format_version: String,
        }
        let header: Header =
            serde_json::from_str(text).map_err(|e| CliError::data(format!("not a saved model: {e}")))?;
        let major = |v: &str| v.split('.').next().and_then(|m| m.parse::<u32>().ok());
        match (major(&header.format_version), major(FORMAT_VERSION)) {
            (Some(a), Some(b)) if a == b => {}
            _ => {
                return Err(CliError::data(format!(
                    "model format {} is incompatible with this build (format {FORMAT_VERSION})",
                    header.format_version
                )))
            }
        }
        let model: SavedModel = serde_json::from_str(text).map_err(|e| CliError::data(format!("corrupt model: {e}")))?;
        model.params.check(&model.scheme).map_err(|e| CliError::data(format!("corrupt model: {e}")))?;
        if model.feature_names.len() != model.scheme.p() {
            return Err(CliError::data("corrupt model: feature names do not match the scheme"));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Applies the stored standardization to raw features.
    pub fn prepare(&self, data: &Dataset<f64>) -> Result<Dataset<f64>> {
        match &self.standardizer {
            Some(s) => Ok(s.transform_dataset(data)?),
            None => Ok(data.clone()),
        }
    }

    pub fn predict(&self, data: &Dataset<f64>) -> Result<Predictions<f64>> {
        Ok(predict(&self.params, &self.prepare(data)?, &self.scheme, self.task)?)
    }

    /// `n × T` survival probabilities at the stored grid.
    pub fn survival(&self, risk: &ndarray::Array1<f64>) -> Result<Array2<f64>> {
        let grid = self.survival_grid.as_deref().unwrap_or(&[]);
        Ok(survival_curves(risk.view(), self.baseline_hazard.as_ref(), grid)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use litlvm::trainer::FitConfig;

    fn model() -> SavedModel {
        let scheme = InteractionScheme::full(3);
        let mut params = ModelParams::zeros(3, 3, true, LvmKind::LowRank, 2);
        params.beta[1] = 0.1 + 0.2;
        params.theta[2] = -1.0 / 3.0;
        SavedModel {
            format_version: FORMAT_VERSION.into(),
            task: TaskKind::Regression,
            method: Method::LitLvm,
            mode: Mode::LitLvm,
            feature_names: vec!["a".into(), "b".into(), "c".into()],
            target_columns: TargetColumns::default(),
            scheme,
            params,
            standardizer: None,
            baseline_hazard: None,
            survival_grid: None,
            fit_config: FitConfig::regression(LvmKind::LowRank, 2),
            provenance: Provenance {
                seed: 1,
                config_sha256: "00".into(),
                rng: litlvm::rng::RNG_VERSION.into(),
                crate_version: "0".into(),
            },
        }
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let m = model();
        let text = m.to_json();
        let back = SavedModel::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn major_version_mismatch_is_refused() {
        let mut m = model();
        m.format_version = "2.0".into();
        let err = SavedModel::from_json(&m.to_json()).unwrap_err();
        assert!(err.to_string().contains("incompatible"));
        m.format_version = "1.7".into();
        assert!(SavedModel::from_json(&m.to_json()).is_ok());
    }

    #[test]
    fn inconsistent_params_are_refused() {
        let mut m = model();
        m.params.theta = ndarray::Array1::zeros(2);
        assert!(SavedModel::from_json(&m.to_json()).is_err());
    }

    #[test]
    fn zero_lambda_l_means_elastic_net() {
        let mut cfg = FitConfig::<f64>::regression(LvmKind::LowRank, 2);
        assert_eq!(SavedModel::mode_for(Method::LitLvm, &cfg), Mode::ElasticNet);
        cfg.penalty.lambda_l = 0.1;
        assert_eq!(SavedModel::mode_for(Method::LitLvm, &cfg), Mode::LitLvm);
        assert_eq!(SavedModel::mode_for(Method::Fm, &cfg), Mode::Fm);
    }
}
