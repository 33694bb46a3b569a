//! Joint estimation of the coefficients, latent positions and α₀.
//!
//! Each epoch takes a full-batch gradient of the smooth part of the total
//! loss (prediction loss + ℓ₂ + latent penalty), applies one Adam update to
//! every parameter, then soft-thresholds β and θ_flat with threshold
//! `learning_rate · λ₁`. β₀, α₀ and Z are never thresholded.

mod adam;

use std::ops::Range;
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

pub use adam::Adam;

use crate::data::{Dataset, Target, TaskKind};
use crate::design::Design;
use crate::error::{Error, Result};
use crate::interactions::InteractionScheme;
use crate::params::{low_rank_pullback, reconstruct_theta, LvmKind, ModelParams};
use crate::penalties::{lvm_grads_from_residual, soft_threshold_inplace, PenaltyConfig};
use crate::predictors::prediction_loss_grad;
use crate::rng::{self, std_normal};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig<F> {
    pub learning_rate: F,
    pub adam_beta1: F,
    pub adam_beta2: F,
    pub adam_eps: F,
    pub max_epochs: usize,
    /// Relative change in total loss regarded as "no progress".
    pub tol: F,
    /// Consecutive no-progress epochs before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl<F: Scalar> Default for OptimizerConfig<F> {
    fn default() -> Self {
        Self {
            learning_rate: F::lit(0.01),
            adam_beta1: F::lit(0.9),
            adam_beta2: F::lit(0.999),
            adam_eps: F::lit(1e-8),
            max_epochs: 2000,
            tol: F::lit(1e-6),
            patience: 10,
            seed: 0,
        }
    }
}

impl<F: Scalar> OptimizerConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > F::zero()) {
            return Err(Error::arg(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if self.max_epochs == 0 {
            return Err(Error::arg("max_epochs must be at least 1"));
        }
        if !(self.tol >= F::zero()) {
            return Err(Error::arg(format!("tol {} must be non-negative", self.tol)));
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(b >= F::zero() && b < F::one()) {
                return Err(Error::arg(format!("{name} = {b} must lie in [0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "F: Scalar + serde::de::DeserializeOwned"))]
pub struct FitConfig<F> {
    pub task: TaskKind,
    pub penalty: PenaltyConfig<F>,
    pub lvm_kind: LvmKind,
    pub latent_dim: usize,
    pub optimizer: OptimizerConfig<F>,
}

impl<F: Scalar> FitConfig<F> {
    pub fn new(task: TaskKind, lvm_kind: LvmKind, latent_dim: usize) -> Self {
        Self { task, penalty: PenaltyConfig::default(), lvm_kind, latent_dim, optimizer: OptimizerConfig::default() }
    }

    pub fn regression(lvm_kind: LvmKind, latent_dim: usize) -> Self {
        Self::new(TaskKind::Regression, lvm_kind, latent_dim)
    }

    pub fn classification(lvm_kind: LvmKind, latent_dim: usize) -> Self {
        Self::new(TaskKind::Classification, lvm_kind, latent_dim)
    }

    pub fn survival(lvm_kind: LvmKind, latent_dim: usize) -> Self {
        Self::new(TaskKind::Survival, lvm_kind, latent_dim)
    }

    /// The latent penalty only does something with an active model and
    /// positive weight; otherwise this is a plain elastic-net fit.
    pub fn uses_lvm(&self) -> bool {
        self.lvm_kind.is_active() && self.penalty.lambda_l > F::zero()
    }

    fn validate(&self, p: usize) -> Result<()> {
        self.penalty.validate()?;
        self.optimizer.validate()?;
        if self.lvm_kind.is_active() {
            check_latent_dim(p, self.latent_dim)?;
        }
        Ok(())
    }
}

fn check_latent_dim(p: usize, d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::arg("latent dimension must be at least 1"));
    }
    if d >= p {
        return Err(Error::arg(format!("latent dimension {d} must be smaller than p = {p}")));
    }
    Ok(())
}

/// Weighted loss terms; `total = pred + reg + lvm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossComponents<F> {
    pub total: F,
    pub pred: F,
    /// `λ₂‖β̃‖² + λ₁‖β̃‖₁`
    pub reg: F,
    /// `λ_l · ‖ε‖²`
    pub lvm: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport<F> {
    /// Loss at the start of each epoch, plus the final parameters.
    pub trajectory: Vec<LossComponents<F>>,
    /// Number of parameter updates applied.
    pub epochs: usize,
    pub converged: bool,
    /// Index into `trajectory` of the returned parameters.
    pub best_index: usize,
    #[serde(with = "duration_secs")]
    pub wall_time: Duration,
}

impl<F: Scalar> FitReport<F> {
    pub fn initial_loss(&self) -> F {
        self.trajectory[0].total
    }

    /// Total loss of the returned (best) parameters.
    pub fn final_loss(&self) -> F {
        self.trajectory[self.best_index].total
    }

    pub fn seconds_per_epoch(&self) -> f64 {
        self.wall_time.as_secs_f64() / self.epochs.max(1) as f64
    }
}

mod duration_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Ok(Duration::from_secs_f64(secs.max(0.0)))
    }
}

/// Standard-normal initialization from the seed's init stream.
///
/// Draw order is β₀ (if any), β, θ_flat, then Z row-major, so fits that
/// differ only in their latent block start from identical coefficients.
/// α₀ starts at 0.
pub fn init_params<F: Scalar>(
    p: usize,
    d: usize,
    kind: LvmKind,
    scheme: &InteractionScheme,
    seed: u64,
    intercept: bool,
) -> Result<ModelParams<F>> {
    if scheme.p() != p {
        return Err(Error::dim(format!("scheme is for p = {}, got p = {p}", scheme.p())));
    }
    if kind.is_active() {
        check_latent_dim(p, d)?;
    }
    let mut r = rng::stream(seed, rng::streams::INIT);
    let mut draw = || F::lit(std_normal(&mut r));
    let beta0 = intercept.then(&mut draw);
    let beta = Array1::from_shape_simple_fn(p, &mut draw);
    let theta = Array1::from_shape_simple_fn(scheme.len(), &mut draw);
    let z = kind.is_active().then(|| Array2::from_shape_simple_fn((p, d), &mut draw));
    Ok(ModelParams {
        beta0,
        beta,
        theta,
        lvm_kind: kind,
        z,
        alpha0: matches!(kind, LvmKind::LatentDistance).then(F::zero),
    })
}

/// Offsets of each block inside the flat optimizer vector.
#[derive(Debug, Clone)]
struct Layout {
    intercept: bool,
    p: usize,
    /// Free θ entries; zero for the factorized model.
    m: usize,
    d: usize,
    kind: LvmKind,
}

impl Layout {
    fn b0(&self) -> Range<usize> {
        0..usize::from(self.intercept)
    }
    fn beta(&self) -> Range<usize> {
        let s = self.b0().end;
        s..s + self.p
    }
    fn theta(&self) -> Range<usize> {
        let s = self.beta().end;
        s..s + self.m
    }
    fn z(&self) -> Range<usize> {
        let s = self.theta().end;
        let len = if self.kind.is_active() { self.p * self.d } else { 0 };
        s..s + len
    }
    fn alpha0(&self) -> Range<usize> {
        let s = self.z().end;
        s..s + usize::from(matches!(self.kind, LvmKind::LatentDistance))
    }
    fn len(&self) -> usize {
        self.alpha0().end
    }
}

/// Whether θ is a free parameter or fixed to the low-rank reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Free,
    Factorized,
}

struct Objective<'a, F> {
    design: Design<F>,
    target: &'a Target<F>,
    scheme: &'a InteractionScheme,
    penalty: PenaltyConfig<F>,
    layout: Layout,
    mode: Mode,
    lvm_on: bool,
}

impl<'a, F: Scalar> Objective<'a, F> {
    fn pack(&self, params: &ModelParams<F>) -> Vec<F> {
        let l = &self.layout;
        let mut v = vec![F::zero(); l.len()];
        if let Some(b0) = params.beta0 {
            v[l.b0()].fill(b0);
        }
        v[l.beta()].copy_from_slice(params.beta.as_slice().expect("contiguous"));
        if self.mode == Mode::Free {
            v[l.theta()].copy_from_slice(params.theta.as_slice().expect("contiguous"));
        }
        if let Some(z) = &params.z {
            for (dst, &src) in v[l.z()].iter_mut().zip(z.iter()) {
                *dst = src;
            }
        }
        if let Some(a) = params.alpha0 {
            v[l.alpha0()].fill(a);
        }
        v
    }

    fn z_view<'v>(&self, v: &'v [F]) -> Option<ArrayView2<'v, F>> {
        let l = &self.layout;
        l.kind.is_active().then(|| ArrayView2::from_shape((l.p, l.d), &v[l.z()]).expect("layout"))
    }

    fn alpha0(&self, v: &[F]) -> F {
        v[self.layout.alpha0()].first().copied().unwrap_or_else(F::zero)
    }

    fn theta_of(&self, v: &[F]) -> Result<Array1<F>> {
        match self.mode {
            Mode::Free => Ok(ArrayView1::from(&v[self.layout.theta()]).to_owned()),
            Mode::Factorized => {
                reconstruct_theta(self.z_view(v).expect("factorized model has Z"), F::zero(), LvmKind::LowRank, self.scheme)
            }
        }
    }

    fn unpack(&self, v: &[F]) -> Result<ModelParams<F>> {
        let l = &self.layout;
        Ok(ModelParams {
            beta0: l.intercept.then(|| v[0]),
            beta: ArrayView1::from(&v[l.beta()]).to_owned(),
            theta: self.theta_of(v)?,
            lvm_kind: l.kind,
            z: self.z_view(v).map(|z| z.to_owned()),
            alpha0: matches!(l.kind, LvmKind::LatentDistance).then(|| self.alpha0(v)),
        })
    }

    /// Loss components and (optionally) the gradient of the smooth part.
    fn evaluate(&self, v: &[F], want_grad: bool) -> Result<(LossComponents<F>, Option<Vec<F>>)> {
        let l = &self.layout;
        let two = F::lit(2.0);
        let pen = &self.penalty;
        let b0 = v[l.b0()].first().copied().unwrap_or_else(F::zero);
        let beta = ArrayView1::from(&v[l.beta()]);
        let theta = self.theta_of(v)?;
        let scores = self.design.scores(b0, beta, theta.view());
        let (pred, g_scores) = prediction_loss_grad(scores.view(), self.target)?;

        // ℓ₁/ℓ₂ act on β and θ_flat (free mode) or β and Z (factorized mode).
        let (mut reg_l1, mut reg_l2) = (F::zero(), F::zero());
        for &b in beta.iter() {
            reg_l1 += b.abs();
            reg_l2 += b * b;
        }
        let shrunk_l2: &[F] = match self.mode {
            Mode::Free => &v[l.theta()],
            Mode::Factorized => &v[l.z()],
        };
        for &t in shrunk_l2 {
            reg_l2 += t * t;
        }
        if self.mode == Mode::Free {
            reg_l1 += v[l.theta()].iter().map(|t| t.abs()).sum::<F>();
        }
        let reg = pen.lambda2 * reg_l2 + pen.lambda1 * reg_l1;

        let residual = if self.lvm_on {
            let z = self.z_view(v).expect("latent model has Z");
            let recon = reconstruct_theta(z, self.alpha0(v), l.kind, self.scheme)?;
            Some(&theta - &recon)
        } else {
            None
        };
        let lvm = residual.as_ref().map_or(F::zero(), |e| pen.lambda_l * e.iter().map(|&x| x * x).sum::<F>());

        let comps = LossComponents { total: pred + reg + lvm, pred, reg, lvm };
        if !want_grad {
            return Ok((comps, None));
        }

        let mut grad = vec![F::zero(); l.len()];
        let (g0, gb, gt) = self.design.backprop(g_scores.view());
        if l.intercept {
            grad[0] = g0;
        }
        for ((g, &d), &b) in grad[l.beta()].iter_mut().zip(gb.iter()).zip(beta.iter()) {
            *g = d + two * pen.lambda2 * b;
        }
        match self.mode {
            Mode::Free => {
                let range = l.theta();
                for ((g, &d), &t) in grad[range.clone()].iter_mut().zip(gt.iter()).zip(&v[range]) {
                    *g = d + two * pen.lambda2 * t;
                }
                if let Some(eps) = &residual {
                    let z = self.z_view(v).expect("latent model has Z");
                    let lg = lvm_grads_from_residual(eps.view(), z, l.kind, self.scheme, pen.lambda_l);
                    for (g, &d) in grad[l.theta()].iter_mut().zip(lg.theta.iter()) {
                        *g += d;
                    }
                    for (g, &d) in grad[l.z()].iter_mut().zip(lg.z.iter()) {
                        *g += d;
                    }
                    if let Some(g) = grad[l.alpha0()].first_mut() {
                        *g += lg.alpha0;
                    }
                }
            }
            Mode::Factorized => {
                let z = self.z_view(v).expect("factorized model has Z");
                let gz = low_rank_pullback(z, gt.view(), self.scheme)?;
                for ((g, &d), &zv) in grad[l.z()].iter_mut().zip(gz.iter()).zip(&v[l.z()]) {
                    *g = d + two * pen.lambda2 * zv;
                }
            }
        }
        Ok((comps, Some(grad)))
    }
}

fn check_task<F: Scalar>(data: &Dataset<F>, scheme: &InteractionScheme, task: TaskKind) -> Result<()> {
    if data.task() != task {
        return Err(Error::arg(format!("config task {task} but dataset target is {}", data.task())));
    }
    if scheme.p() != data.p() {
        return Err(Error::dim(format!("scheme is for p = {}, dataset has p = {}", scheme.p(), data.p())));
    }
    Ok(())
}

/// `L_pred + λ₂‖β̃‖² + λ₁‖β̃‖₁ + λ_l‖ε‖²` for a parameter set.
pub fn total_loss<F: Scalar>(
    params: &ModelParams<F>,
    data: &Dataset<F>,
    scheme: &InteractionScheme,
    penalty: &PenaltyConfig<F>,
    task: TaskKind,
) -> Result<LossComponents<F>> {
    check_task(data, scheme, task)?;
    params.check(scheme)?;
    let layout = Layout {
        intercept: params.beta0.is_some(),
        p: params.p(),
        m: scheme.len(),
        d: params.latent_dim(),
        kind: params.lvm_kind,
    };
    let obj = Objective {
        design: Design::new(data.x(), scheme)?,
        target: data.target(),
        scheme,
        penalty: *penalty,
        lvm_on: params.lvm_kind.is_active() && penalty.lambda_l > F::zero(),
        layout,
        mode: Mode::Free,
    };
    let v = obj.pack(params);
    Ok(obj.evaluate(&v, false)?.0)
}

/// Fits β₀, β, θ_flat (and Z, α₀ when a latent model is configured) by
/// proximal Adam. `init` warm-starts from given parameters instead of the
/// seeded normal draw. Returns the lowest-loss parameters seen.
pub fn fit<F: Scalar>(
    data: &Dataset<F>,
    scheme: &InteractionScheme,
    cfg: &FitConfig<F>,
    init: Option<&ModelParams<F>>,
) -> Result<(ModelParams<F>, FitReport<F>)> {
    check_task(data, scheme, cfg.task)?;
    cfg.validate(data.p())?;
    let intercept = cfg.task.has_intercept();
    let start = match init {
        Some(p) => {
            p.check(scheme)?;
            if p.lvm_kind != cfg.lvm_kind || (p.lvm_kind.is_active() && p.latent_dim() != cfg.latent_dim) {
                return Err(Error::arg("warm-start parameters do not match the configured latent model"));
            }
            if p.beta0.is_some() != intercept {
                return Err(Error::arg("warm-start intercept does not match the task"));
            }
            p.clone()
        }
        None => init_params(data.p(), cfg.latent_dim, cfg.lvm_kind, scheme, cfg.optimizer.seed, intercept)?,
    };
    let layout = Layout { intercept, p: data.p(), m: scheme.len(), d: cfg.latent_dim, kind: cfg.lvm_kind };
    let obj = Objective {
        design: Design::new(data.x(), scheme)?,
        target: data.target(),
        scheme,
        penalty: cfg.penalty,
        lvm_on: cfg.uses_lvm(),
        layout,
        mode: Mode::Free,
    };
    run(&obj, &start, &cfg.optimizer)
}

/// Factorization-machine baseline: θ is not free but fixed to `ZZᵀ`
/// (upper-triangular, unmasked pairs). λ₂ shrinks β and Z, λ₁ acts on β
/// only. Uses the same seeded initialization as [`fit`] for β₀, β and Z.
pub fn fit_fm<F: Scalar>(
    data: &Dataset<F>,
    scheme: &InteractionScheme,
    cfg: &FitConfig<F>,
    init: Option<&ModelParams<F>>,
) -> Result<(ModelParams<F>, FitReport<F>)> {
    check_task(data, scheme, cfg.task)?;
    cfg.penalty.validate()?;
    cfg.optimizer.validate()?;
    if cfg.latent_dim == 0 {
        return Err(Error::arg("latent dimension must be at least 1"));
    }
    let intercept = cfg.task.has_intercept();
    let start = match init {
        Some(p) => {
            p.check(scheme)?;
            if p.lvm_kind != LvmKind::LowRank || p.latent_dim() != cfg.latent_dim {
                return Err(Error::arg("warm-start parameters must carry a low-rank Z of the configured size"));
            }
            p.clone()
        }
        None => {
            // d may reach p for the factorized model, so draw directly.
            let mut base = init_params(data.p(), 0, LvmKind::None, scheme, cfg.optimizer.seed, intercept)?;
            let mut r = rng::stream(cfg.optimizer.seed, rng::streams::INIT);
            let skip = usize::from(intercept) + data.p() + scheme.len();
            for _ in 0..skip {
                std_normal(&mut r);
            }
            base.z = Some(Array2::from_shape_simple_fn((data.p(), cfg.latent_dim), || F::lit(std_normal(&mut r))));
            base.lvm_kind = LvmKind::LowRank;
            base
        }
    };
    let layout = Layout { intercept, p: data.p(), m: 0, d: cfg.latent_dim, kind: LvmKind::LowRank };
    let obj = Objective {
        design: Design::new(data.x(), scheme)?,
        target: data.target(),
        scheme,
        penalty: cfg.penalty,
        lvm_on: false,
        layout,
        mode: Mode::Factorized,
    };
    run(&obj, &start, &cfg.optimizer)
}

fn run<F: Scalar>(
    obj: &Objective<'_, F>,
    start: &ModelParams<F>,
    opt: &OptimizerConfig<F>,
) -> Result<(ModelParams<F>, FitReport<F>)> {
    let clock = Instant::now();
    let l = &obj.layout;
    let mut v = obj.pack(start);
    let mut adam = Adam::new(v.len(), opt.learning_rate, opt.adam_beta1, opt.adam_beta2, opt.adam_eps);
    let threshold = opt.learning_rate * obj.penalty.lambda1;
    let shrink_theta = obj.mode == Mode::Free;

    let mut trajectory = Vec::with_capacity(opt.max_epochs.min(10_000) + 1);
    let mut best = (F::infinity(), 0usize, v.clone());
    let mut stalled = 0usize;
    let mut converged = false;
    let mut epochs = 0usize;

    loop {
        let want_grad = epochs < opt.max_epochs;
        let (comps, grad) = obj.evaluate(&v, want_grad)?;
        if !comps.total.is_finite() {
            return Err(Error::Divergence { epoch: epochs, loss: comps.total.to_f64_lossy() });
        }
        if let Some(prev) = trajectory.last().map(|c: &LossComponents<F>| c.total) {
            let denom = prev.abs().max(F::min_positive_value());
            if (comps.total - prev).abs() / denom < opt.tol {
                stalled += 1;
            } else {
                stalled = 0;
            }
        }
        if comps.total < best.0 {
            best = (comps.total, trajectory.len(), v.clone());
        }
        trajectory.push(comps);
        if stalled >= opt.patience.max(1) {
            converged = true;
            break;
        }
        let Some(grad) = grad else { break };
        adam.step(&mut v, &grad);
        if threshold > F::zero() {
            soft_threshold_inplace(&mut v[l.beta()], threshold);
            if shrink_theta {
                soft_threshold_inplace(&mut v[l.theta()], threshold);
            }
        }
        epochs += 1;
    }

    let params = obj.unpack(&best.2)?;
    let report = FitReport { trajectory, epochs, converged, best_index: best.1, wall_time: clock.elapsed() };
    Ok((params, report))
}
