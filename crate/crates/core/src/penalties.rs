//! Elastic-net penalty with its proximal operator, and the latent-structure
//! penalty on the interaction coefficients.
//!
//! The structured penalty is `λ_l Σ (θ_jk − r_jk)²` over unmasked pairs
//! `j < k`, where `r_jk` is the latent reconstruction (see
//! [`reconstruct_theta`](crate::params::reconstruct_theta)). The diagonal and
//! lower triangle of `ZZᵀ` never enter.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interactions::InteractionScheme;
use crate::params::{reconstruct_theta, LvmKind};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyConfig<F> {
    /// ℓ₁ weight
    pub lambda1: F,
    /// ℓ₂ (squared) weight
    pub lambda2: F,
    /// latent-structure weight
    pub lambda_l: F,
    /// Leave the intercept unpenalized.
    pub exclude_intercepts: bool,
}

impl<F: Scalar> Default for PenaltyConfig<F> {
    fn default() -> Self {
        Self { lambda1: F::zero(), lambda2: F::zero(), lambda_l: F::zero(), exclude_intercepts: true }
    }
}

impl<F: Scalar> PenaltyConfig<F> {
    pub fn new(lambda1: F, lambda2: F, lambda_l: F) -> Self {
        Self { lambda1, lambda2, lambda_l, exclude_intercepts: true }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2), ("lambda_l", self.lambda_l)] {
            if !(v.is_finite() && v >= F::zero()) {
                return Err(Error::arg(format!("{name} = {v} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

/// Value `λ₂‖β̃‖² + λ₁‖β̃‖₁` and the gradient of the smooth part `2λ₂β̃`.
///
/// `beta_aug` is `[β₀, β, θ_flat]` when `has_intercept`, else `[β, θ_flat]`;
/// with `exclude_intercepts` the leading β₀ contributes nothing.
pub fn elastic_net_value_grad<F: Scalar>(
    beta_aug: ArrayView1<'_, F>,
    has_intercept: bool,
    cfg: &PenaltyConfig<F>,
) -> (F, Array1<F>) {
    let skip = usize::from(has_intercept && cfg.exclude_intercepts).min(beta_aug.len());
    let two = F::lit(2.0);
    let mut grad = Array1::zeros(beta_aug.len());
    let mut l1 = F::zero();
    let mut l2 = F::zero();
    for (i, &b) in beta_aug.iter().enumerate().skip(skip) {
        l1 += b.abs();
        l2 += b * b;
        grad[i] = two * cfg.lambda2 * b;
    }
    (cfg.lambda2 * l2 + cfg.lambda1 * l1, grad)
}

/// `sign(v)·max(|v| − t, 0)`.
#[inline]
pub fn soft_threshold_scalar<F: Scalar>(v: F, t: F) -> F {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        F::zero()
    }
}

/// Proximal operator of `t‖·‖₁`.
pub fn soft_threshold<F: Scalar>(v: ArrayView1<'_, F>, t: F) -> Result<Array1<F>> {
    if !(t >= F::zero()) {
        return Err(Error::arg(format!("threshold {t} must be non-negative")));
    }
    Ok(v.mapv(|x| soft_threshold_scalar(x, t)))
}

/// In-place variant used by the trainer.
pub fn soft_threshold_inplace<F: Scalar>(v: &mut [F], t: F) {
    for x in v {
        *x = soft_threshold_scalar(*x, t);
    }
}

/// Residuals `θ_jk − r_jk` over unmasked pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct LvmResidual<F>(pub Array1<F>);

impl<F: Scalar> LvmResidual<F> {
    pub fn compute(
        theta: ArrayView1<'_, F>,
        z: ArrayView2<'_, F>,
        alpha0: F,
        kind: LvmKind,
        scheme: &InteractionScheme,
    ) -> Result<Self> {
        if theta.len() != scheme.len() {
            return Err(Error::dim(format!("θ_flat has {} entries, scheme has {} pairs", theta.len(), scheme.len())));
        }
        let recon = reconstruct_theta(z, alpha0, kind, scheme)?;
        Ok(Self(&theta - &recon))
    }

    pub fn squared_norm(&self) -> F {
        self.0.iter().map(|&e| e * e).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == F::zero())
    }
}

pub fn lvm_value<F: Scalar>(
    theta: ArrayView1<'_, F>,
    z: ArrayView2<'_, F>,
    alpha0: F,
    kind: LvmKind,
    scheme: &InteractionScheme,
    lambda_l: F,
) -> Result<F> {
    Ok(lambda_l * LvmResidual::compute(theta, z, alpha0, kind, scheme)?.squared_norm())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LvmGrads<F> {
    pub theta: Array1<F>,
    pub z: Array2<F>,
    /// Zero for the low-rank model.
    pub alpha0: F,
}

/// Analytic gradients of [`lvm_value`] with respect to θ_flat, Z and α₀.
pub fn lvm_grads<F: Scalar>(
    theta: ArrayView1<'_, F>,
    z: ArrayView2<'_, F>,
    alpha0: F,
    kind: LvmKind,
    scheme: &InteractionScheme,
    lambda_l: F,
) -> Result<LvmGrads<F>> {
    let eps = LvmResidual::compute(theta, z, alpha0, kind, scheme)?.0;
    Ok(lvm_grads_from_residual(eps.view(), z, kind, scheme, lambda_l))
}

pub(crate) fn lvm_grads_from_residual<F: Scalar>(
    eps: ArrayView1<'_, F>,
    z: ArrayView2<'_, F>,
    kind: LvmKind,
    scheme: &InteractionScheme,
    lambda_l: F,
) -> LvmGrads<F> {
    let two_l = F::lit(2.0) * lambda_l;
    let grad_theta = eps.mapv(|e| two_l * e);
    let mut grad_z = Array2::zeros(z.dim());
    let mut grad_alpha0 = F::zero();
    match kind {
        LvmKind::LowRank => {
            // ∂/∂z_j = −2λ Σ_k ε_jk z_k
            for (&(j, k), &e) in scheme.active_pairs().iter().zip(eps.iter()) {
                let w = -two_l * e;
                for c in 0..z.ncols() {
                    grad_z[[j, c]] += w * z[[k, c]];
                    grad_z[[k, c]] += w * z[[j, c]];
                }
            }
        }
        LvmKind::LatentDistance => {
            // ∂/∂z_j = 4λ Σ_k ε_jk (z_j − z_k), ∂/∂α₀ = −2λ Σ ε_jk
            let four_l = two_l + two_l;
            for (&(j, k), &e) in scheme.active_pairs().iter().zip(eps.iter()) {
                let w = four_l * e;
                for c in 0..z.ncols() {
                    let diff = z[[j, c]] - z[[k, c]];
                    grad_z[[j, c]] += w * diff;
                    grad_z[[k, c]] -= w * diff;
                }
                grad_alpha0 -= two_l * e;
            }
        }
        LvmKind::None => {}
    }
    LvmGrads { theta: grad_theta, z: grad_z, alpha0: grad_alpha0 }
}
