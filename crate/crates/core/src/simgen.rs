//! Synthetic datasets with known interaction structure.
//!
//! Randomness is split over independent ChaCha streams: the ground truth
//! (β, Z, α₀, deviations) comes from one stream, the rows from another, the
//! sparsification draws from a third. Rows are drawn one at a time, each
//! consuming its features then its noise, so the first `n` rows of a dataset
//! do not depend on how many rows are generated in total.

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Target};
use crate::error::{Error, Result};
use crate::interactions::InteractionScheme;
use crate::params::{reconstruct_theta, LvmKind};
use crate::predictors::sigmoid;
use crate::rng::{self, std_normal, StreamRng};
use crate::scalar::Scalar;

/// Where the response noise enters a logistic simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisePlacement {
    /// `y ~ Bernoulli(σ(score + η))`.
    #[default]
    InsideLink,
    /// `y ~ Bernoulli(clamp(σ(score) + η, 0, 1))`.
    OutsideLink,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub p: usize,
    pub d_true: usize,
    /// Variance of the deviations from the low-rank truth (linear data).
    pub sigma_eps2: f64,
    /// Sparsification scale; entries with `|β| ≪ √σ_s²` are mostly zeroed.
    pub sigma_s2: f64,
    /// Variance of the deviations from the latent truth (logistic data).
    pub sigma_theta2: f64,
    /// Response noise variance.
    pub sigma_y2: f64,
    pub lvm_kind: LvmKind,
    pub noise: NoisePlacement,
    /// Rate of the exponential censoring times (survival data only).
    pub censor_rate: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            p: 40,
            d_true: 2,
            sigma_eps2: 0.1,
            sigma_s2: 1e-4,
            sigma_theta2: 0.1,
            sigma_y2: 0.01,
            lvm_kind: LvmKind::LowRank,
            noise: NoisePlacement::InsideLink,
            censor_rate: 0.5,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::arg("n must be at least 1"));
        }
        if self.p < 2 {
            return Err(Error::arg("p must be at least 2"));
        }
        if self.d_true == 0 || self.d_true >= self.p {
            return Err(Error::arg(format!("d_true = {} must satisfy 1 ≤ d_true < p = {}", self.d_true, self.p)));
        }
        for (name, v) in [
            ("sigma_eps2", self.sigma_eps2),
            ("sigma_s2", self.sigma_s2),
            ("sigma_theta2", self.sigma_theta2),
            ("sigma_y2", self.sigma_y2),
            ("censor_rate", self.censor_rate),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::arg(format!("{name} = {v} must be a finite non-negative number")));
            }
        }
        Ok(())
    }
}

/// The coefficients a dataset was generated from. `theta` covers every pair
/// in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth<F> {
    pub beta: Array1<F>,
    pub theta: Array1<F>,
    pub lvm_kind: LvmKind,
    pub z: Array2<F>,
    pub alpha0: Option<F>,
}

impl<F: Scalar> GroundTruth<F> {
    pub fn zeros(p: usize, d: usize, lvm_kind: LvmKind) -> Self {
        Self {
            beta: Array1::zeros(p),
            theta: Array1::zeros(crate::interactions::pair_count(p)),
            lvm_kind,
            z: Array2::zeros((p, d)),
            alpha0: matches!(lvm_kind, LvmKind::LatentDistance).then(F::zero),
        }
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    fn check(&self, cfg: &SimConfig) -> Result<()> {
        if self.p() != cfg.p || self.theta.len() != crate::interactions::pair_count(cfg.p) {
            return Err(Error::dim(format!("ground truth is for p = {}, config has p = {}", self.p(), cfg.p)));
        }
        Ok(())
    }
}

/// Zeroes each entry independently with probability `exp(−v²/σ_s²)`.
/// With `σ_s² = 0` only exact zeros are (trivially) zeroed. One uniform is
/// consumed per entry regardless of outcome.
pub fn sparsify<F: Scalar>(v: &Array1<F>, sigma_s2: f64, rng: &mut StreamRng) -> Result<Array1<F>> {
    if !(sigma_s2.is_finite() && sigma_s2 >= 0.0) {
        return Err(Error::arg(format!("sigma_s2 = {sigma_s2} must be finite and non-negative")));
    }
    Ok(v.mapv(|b| {
        let u: f64 = rng.random();
        let b64 = b.to_f64_lossy();
        let p_zero = if b64 == 0.0 {
            1.0
        } else if sigma_s2 == 0.0 {
            0.0
        } else {
            (-(b64 * b64) / sigma_s2).exp()
        };
        if u < p_zero {
            F::zero()
        } else {
            b
        }
    }))
}

/// β, Z, α₀ and the deviated θ, with deviations of the given variance.
fn draw_truth_with<F: Scalar>(cfg: &SimConfig, deviation_var: f64) -> Result<GroundTruth<F>> {
    cfg.validate()?;
    let (p, d) = (cfg.p, cfg.d_true);
    let mut r = rng::stream(cfg.seed, rng::streams::TRUTH);
    let beta = Array1::from_shape_simple_fn(p, || std_normal(&mut r));
    let z = Array2::from_shape_simple_fn((p, d), || std_normal(&mut r));
    let alpha0 = match cfg.lvm_kind {
        LvmKind::LatentDistance => Some(std_normal(&mut r)),
        LvmKind::LowRank => None,
        LvmKind::None => return Err(Error::arg("simulation needs a latent model (low_rank or latent_distance)")),
    };
    let scheme = InteractionScheme::full(p);
    let recon = reconstruct_theta(z.view(), alpha0.unwrap_or(0.0), cfg.lvm_kind, &scheme)?;
    let sd = deviation_var.sqrt();
    let theta = recon.mapv(|t| t + sd * std_normal(&mut r));
    let cast1 = |a: Array1<f64>| a.mapv(F::lit);
    Ok(GroundTruth {
        beta: cast1(beta),
        theta: cast1(theta),
        lvm_kind: cfg.lvm_kind,
        z: z.mapv(F::lit),
        alpha0: alpha0.map(F::lit),
    })
}

/// Ground truth of [`gen_linear`]: dense β, `θ = upper(ZZᵀ) + ε`.
pub fn draw_linear_truth<F: Scalar>(cfg: &SimConfig) -> Result<GroundTruth<F>> {
    if cfg.lvm_kind != LvmKind::LowRank {
        return Err(Error::arg("linear simulation uses the low_rank latent model"));
    }
    draw_truth_with(cfg, cfg.sigma_eps2)
}

/// Ground truth of [`gen_logistic`]: latent truth plus `N(0, σ_θ²)`
/// deviations, then sparsified as one augmented vector (β then θ).
pub fn draw_logistic_truth<F: Scalar>(cfg: &SimConfig) -> Result<GroundTruth<F>> {
    let mut truth = draw_truth_with::<F>(cfg, cfg.sigma_theta2)?;
    let mut r = rng::stream(cfg.seed, rng::streams::SPARSIFY);
    truth.beta = sparsify(&truth.beta, cfg.sigma_s2, &mut r)?;
    truth.theta = sparsify(&truth.theta, cfg.sigma_s2, &mut r)?;
    Ok(truth)
}

fn signal(truth: &GroundTruth<f64>, x: &[f64]) -> f64 {
    let p = x.len();
    let mut s: f64 = truth.beta.iter().zip(x).map(|(b, v)| b * v).sum();
    let mut idx = 0;
    for j in 0..p {
        for k in j + 1..p {
            s += truth.theta[idx] * x[j] * x[k];
            idx += 1;
        }
    }
    s
}

fn as_f64<F: Scalar>(truth: &GroundTruth<F>) -> GroundTruth<f64> {
    GroundTruth {
        beta: truth.beta.mapv(F::to_f64_lossy),
        theta: truth.theta.mapv(F::to_f64_lossy),
        lvm_kind: truth.lvm_kind,
        z: truth.z.mapv(F::to_f64_lossy),
        alpha0: truth.alpha0.map(F::to_f64_lossy),
    }
}

/// `y = Xβ + X_int θ + η`, `η ~ N(0, σ_y²)`, for a given truth.
pub fn gen_linear_from_truth<F: Scalar>(cfg: &SimConfig, truth: &GroundTruth<F>) -> Result<Dataset<F>> {
    cfg.validate()?;
    truth.check(cfg)?;
    let t64 = as_f64(truth);
    let mut r = rng::stream(cfg.seed, rng::streams::ROWS);
    let sd_y = cfg.sigma_y2.sqrt();
    let mut x = Array2::zeros((cfg.n, cfg.p));
    let mut y = Array1::zeros(cfg.n);
    let mut row = vec![0.0; cfg.p];
    for i in 0..cfg.n {
        row.iter_mut().for_each(|v| *v = std_normal(&mut r));
        let eta = sd_y * std_normal(&mut r);
        y[i] = F::lit(signal(&t64, &row) + eta);
        x.row_mut(i).iter_mut().zip(&row).for_each(|(d, &s)| *d = F::lit(s));
    }
    Dataset::with_default_names(x, Target::Regression(y))
}

/// Bernoulli responses through the logistic link, for a given truth.
pub fn gen_logistic_from_truth<F: Scalar>(cfg: &SimConfig, truth: &GroundTruth<F>) -> Result<Dataset<F>> {
    cfg.validate()?;
    truth.check(cfg)?;
    let t64 = as_f64(truth);
    let mut r = rng::stream(cfg.seed, rng::streams::ROWS);
    let sd_y = cfg.sigma_y2.sqrt();
    let mut x = Array2::zeros((cfg.n, cfg.p));
    let mut y = Array1::zeros(cfg.n);
    let mut row = vec![0.0; cfg.p];
    for i in 0..cfg.n {
        row.iter_mut().for_each(|v| *v = std_normal(&mut r));
        let eta = sd_y * std_normal(&mut r);
        let u: f64 = r.random();
        let s = signal(&t64, &row);
        let prob = match cfg.noise {
            NoisePlacement::InsideLink => sigmoid(s + eta),
            NoisePlacement::OutsideLink => (sigmoid(s) + eta).clamp(0.0, 1.0),
        };
        y[i] = if u < prob { F::one() } else { F::zero() };
        x.row_mut(i).iter_mut().zip(&row).for_each(|(d, &s)| *d = F::lit(s));
    }
    Dataset::with_default_names(x, Target::Classification(y))
}

/// Cox data with unit baseline hazard: `T = −ln U / exp(score)`, censored by
/// an independent `Exp(censor_rate)` time (no censoring when the rate is 0).
/// Uses the same sparse logistic-style truth rescaled so the score has unit
/// variance under `x ~ N(0, I)`.
pub fn gen_survival_from_truth<F: Scalar>(cfg: &SimConfig, truth: &GroundTruth<F>) -> Result<Dataset<F>> {
    cfg.validate()?;
    truth.check(cfg)?;
    let t64 = as_f64(truth);
    let mut r = rng::stream(cfg.seed, rng::streams::ROWS);
    let mut x = Array2::zeros((cfg.n, cfg.p));
    let mut time = Array1::zeros(cfg.n);
    let mut event = vec![false; cfg.n];
    let mut row = vec![0.0; cfg.p];
    for i in 0..cfg.n {
        row.iter_mut().for_each(|v| *v = std_normal(&mut r));
        let u_event: f64 = r.random();
        let u_censor: f64 = r.random();
        let t_event = -(1.0 - u_event).ln() / signal(&t64, &row).exp();
        let t_censor =
            if cfg.censor_rate > 0.0 { -(1.0 - u_censor).ln() / cfg.censor_rate } else { f64::INFINITY };
        event[i] = t_event <= t_censor;
        time[i] = F::lit(t_event.min(t_censor).max(f64::MIN_POSITIVE));
        x.row_mut(i).iter_mut().zip(&row).for_each(|(d, &s)| *d = F::lit(s));
    }
    Dataset::with_default_names(x, Target::Survival { time, event })
}

/// Low-rank truth, Gaussian features, continuous response.
pub fn gen_linear<F: Scalar>(cfg: &SimConfig) -> Result<(Dataset<F>, GroundTruth<F>)> {
    let truth = draw_linear_truth(cfg)?;
    Ok((gen_linear_from_truth(cfg, &truth)?, truth))
}

/// Sparsified latent truth, Gaussian features, binary response.
pub fn gen_logistic<F: Scalar>(cfg: &SimConfig) -> Result<(Dataset<F>, GroundTruth<F>)> {
    let truth = draw_logistic_truth(cfg)?;
    Ok((gen_logistic_from_truth(cfg, &truth)?, truth))
}

/// Right-censored survival data; see [`gen_survival_from_truth`].
pub fn gen_survival<F: Scalar>(cfg: &SimConfig) -> Result<(Dataset<F>, GroundTruth<F>)> {
    let mut truth = draw_logistic_truth::<F>(cfg)?;
    let var: F = truth.beta.iter().chain(truth.theta.iter()).map(|&b| b * b).sum();
    if var > F::zero() {
        let s = F::one() / var.sqrt();
        truth.beta.mapv_inplace(|b| b * s);
        truth.theta.mapv_inplace(|t| t * s);
    }
    Ok((gen_survival_from_truth(cfg, &truth)?, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let cfg = SimConfig { n: 4, p: 3, d_true: 2, seed: 7, ..Default::default() };
        let (data, truth) = gen_linear::<f64>(&cfg).unwrap();
        assert_eq!(data.x().dim(), (4, 3));
        assert_eq!(data.n(), 4);
        assert_eq!(truth.theta.len(), 3);
        assert_eq!(truth.z.dim(), (3, 2));
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            SimConfig { d_true: 5, p: 5, ..Default::default() },
            SimConfig { sigma_y2: -1.0, ..Default::default() },
            SimConfig { n: 0, ..Default::default() },
            SimConfig { lvm_kind: LvmKind::None, ..Default::default() },
        ];
        for cfg in bad {
            assert!(gen_logistic::<f64>(&cfg).is_err());
        }
        let ld = SimConfig { lvm_kind: LvmKind::LatentDistance, ..Default::default() };
        assert!(matches!(gen_linear::<f64>(&ld), Err(Error::Argument(_))));
    }

    #[test]
    fn sparsify_limits() {
        let mut r = rng::stream(1, rng::streams::SPARSIFY);
        let v = ndarray::array![0.0, 10.0, -10.0];
        let out = sparsify(&v, 1e-4, &mut r).unwrap();
        assert_eq!(out, ndarray::array![0.0, 10.0, -10.0]);
        let out = sparsify(&ndarray::array![0.0, 1e-30], 0.0, &mut r).unwrap();
        assert_eq!(out, ndarray::array![0.0, 1e-30]);
        assert!(sparsify(&v, -1.0, &mut r).is_err());
    }

    #[test]
    fn survival_has_events_and_censoring() {
        let cfg = SimConfig { n: 300, p: 6, lvm_kind: LvmKind::LatentDistance, sigma_s2: 0.0, ..Default::default() };
        let (data, _) = gen_survival::<f64>(&cfg).unwrap();
        let events = data.event_count().unwrap();
        assert!(events > 30 && events < 290, "events = {events}");
    }
}
