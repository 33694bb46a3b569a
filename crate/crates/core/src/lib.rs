//! Linear, logistic and Cox proportional-hazards predictors with all pairwise
//! interaction terms, regularized by an elastic net plus a structured penalty
//! that pulls the interaction-coefficient matrix toward a low-dimensional
//! latent model (low rank `θ_jk ≈ z_jᵀz_k` or latent distance
//! `θ_jk ≈ α₀ − ‖z_j − z_k‖²`).
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases at the crate root are what the CLI and most callers use.
//!
//! ```
//! use litlvm::{simgen, trainer, InteractionScheme, LvmKind};
//!
//! let cfg = simgen::SimConfig { n: 60, p: 5, d_true: 2, seed: 3, ..Default::default() };
//! let (data, _truth) = simgen::gen_linear::<f64>(&cfg).unwrap();
//! let scheme = InteractionScheme::full(data.p());
//! let mut fit_cfg = trainer::FitConfig::regression(LvmKind::LowRank, 2);
//! fit_cfg.penalty.lambda_l = 1.0;
//! fit_cfg.optimizer.max_epochs = 50;
//! let (params, report) = trainer::fit(&data, &scheme, &fit_cfg, None).unwrap();
//! assert_eq!(params.theta.len(), 10);
//! assert!(report.final_loss() <= report.initial_loss());
//! ```

// NaN-rejecting checks are written as `!(x >= 0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod design;
pub mod error;
pub mod interactions;
pub mod linalg;
pub mod metrics;
pub mod params;
pub mod penalties;
pub mod predictors;
pub mod rng;
pub mod scalar;
pub mod simgen;
pub mod trainer;
pub mod tuner;

pub use data::{Dataset, Standardizer, Target, TaskKind};
pub use error::{Error, Result};
pub use interactions::InteractionScheme;
pub use params::{LvmKind, ModelParams};
pub use penalties::PenaltyConfig;
pub use predictors::BaselineHazard;
pub use scalar::Scalar;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type ModelParams64 = ModelParams<f64>;
pub type ModelParams32 = ModelParams<f32>;
pub type PenaltyConfig64 = PenaltyConfig<f64>;
pub type BaselineHazard64 = BaselineHazard<f64>;
pub type FitConfig64 = trainer::FitConfig<f64>;
pub type FitReport64 = trainer::FitReport<f64>;
