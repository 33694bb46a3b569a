//! Model parameters and the shared linear score.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interactions::InteractionScheme;
use crate::scalar::Scalar;

/// Latent structure imposed on the interaction matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LvmKind {
    #[default]
    None,
    /// `θ_jk ≈ z_jᵀ z_k`
    LowRank,
    /// `θ_jk ≈ α₀ − ‖z_j − z_k‖²`
    LatentDistance,
}

impl LvmKind {
    pub fn is_active(self) -> bool {
        !matches!(self, LvmKind::None)
    }
}

impl std::fmt::Display for LvmKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LvmKind::None => "none",
            LvmKind::LowRank => "low_rank",
            LvmKind::LatentDistance => "latent_distance",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<F> {
    /// `None` for survival models.
    pub beta0: Option<F>,
    pub beta: Array1<F>,
    /// One coefficient per unmasked pair, in the scheme's flat order.
    pub theta: Array1<F>,
    pub lvm_kind: LvmKind,
    /// `p × d` latent matrix, present iff `lvm_kind` is active.
    pub z: Option<Array2<F>>,
    /// Baseline interaction level, latent-distance only.
    pub alpha0: Option<F>,
}

impl<F: Scalar> ModelParams<F> {
    /// All-zero parameters (latent block zeroed too).
    pub fn zeros(p: usize, n_pairs: usize, intercept: bool, lvm_kind: LvmKind, d: usize) -> Self {
        Self {
            beta0: intercept.then(F::zero),
            beta: Array1::zeros(p),
            theta: Array1::zeros(n_pairs),
            lvm_kind,
            z: lvm_kind.is_active().then(|| Array2::zeros((p, d))),
            alpha0: matches!(lvm_kind, LvmKind::LatentDistance).then(F::zero),
        }
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn latent_dim(&self) -> usize {
        self.z.as_ref().map_or(0, |z| z.ncols())
    }

    pub fn check(&self, scheme: &InteractionScheme) -> Result<()> {
        if self.beta.len() != scheme.p() {
            return Err(Error::dim(format!("β has {} entries, scheme has p = {}", self.beta.len(), scheme.p())));
        }
        if self.theta.len() != scheme.len() {
            return Err(Error::dim(format!("θ_flat has {} entries, scheme has {} pairs", self.theta.len(), scheme.len())));
        }
        match (&self.z, self.lvm_kind.is_active()) {
            (Some(z), true) if z.nrows() != scheme.p() => {
                Err(Error::dim(format!("Z has {} rows, expected {}", z.nrows(), scheme.p())))
            }
            (None, true) => Err(Error::dim("latent model active but Z missing")),
            (Some(_), false) => Err(Error::dim("Z present without a latent model")),
            _ => Ok(()),
        }
    }

    /// Multiplies every coefficient that enters the score (β₀, β, θ).
    pub fn scale_score_coefficients(&self, a: F) -> Self {
        let mut out = self.clone();
        out.beta0 = out.beta0.map(|b| b * a);
        out.beta.mapv_inplace(|v| v * a);
        out.theta.mapv_inplace(|v| v * a);
        out
    }
}

/// `β₀ + βᵀx + θ_flatᵀ x_int`; the intercept is skipped when absent.
pub fn linear_score<F: Scalar>(
    params: &ModelParams<F>,
    x: ArrayView1<'_, F>,
    scheme: &InteractionScheme,
) -> Result<F> {
    params.check(scheme)?;
    if x.len() != scheme.p() {
        return Err(Error::dim(format!("x has {} entries, expected {}", x.len(), scheme.p())));
    }
    let mut s = params.beta0.unwrap_or_else(F::zero) + params.beta.dot(&x);
    for (&(j, k), &t) in scheme.active_pairs().iter().zip(params.theta.iter()) {
        s += t * x[j] * x[k];
    }
    if s.is_finite() {
        Ok(s)
    } else {
        Err(Error::Numeric("linear score".into()))
    }
}

/// Latent-model reconstruction of every unmasked pair, in flat order.
/// `alpha0` is ignored for the low-rank model.
pub fn reconstruct_theta<F: Scalar>(
    z: ArrayView2<'_, F>,
    alpha0: F,
    kind: LvmKind,
    scheme: &InteractionScheme,
) -> Result<Array1<F>> {
    if z.nrows() != scheme.p() {
        return Err(Error::dim(format!("Z has {} rows, scheme has p = {}", z.nrows(), scheme.p())));
    }
    if z.ncols() == 0 {
        return Err(Error::arg("latent dimension must be at least 1"));
    }
    let pairs = scheme.active_pairs();
    Ok(match kind {
        LvmKind::LowRank => pairs.iter().map(|&(j, k)| z.row(j).dot(&z.row(k))).collect(),
        LvmKind::LatentDistance => pairs
            .iter()
            .map(|&(j, k)| {
                let d2: F = z.row(j).iter().zip(z.row(k).iter()).map(|(&a, &b)| (a - b) * (a - b)).sum();
                alpha0 - d2
            })
            .collect(),
        LvmKind::None => return Err(Error::arg("no latent model to reconstruct from")),
    })
}

/// Gradient with respect to `Z` of `⟨g, θ(Z)⟩` for the low-rank map
/// `θ_jk = z_jᵀz_k`: row `j` collects `Σ_k g_jk z_k` over its pairs.
pub fn low_rank_pullback<F: Scalar>(
    z: ArrayView2<'_, F>,
    g_theta: ArrayView1<'_, F>,
    scheme: &InteractionScheme,
) -> Result<Array2<F>> {
    if z.nrows() != scheme.p() || g_theta.len() != scheme.len() {
        return Err(Error::dim(format!(
            "Z is {:?} and g has {} entries for a scheme with p = {} and {} pairs",
            z.dim(),
            g_theta.len(),
            scheme.p(),
            scheme.len()
        )));
    }
    let mut gz = Array2::zeros(z.dim());
    for (&(j, k), &g) in scheme.active_pairs().iter().zip(g_theta.iter()) {
        if g == F::zero() {
            continue;
        }
        for c in 0..z.ncols() {
            gz[[j, c]] += g * z[[k, c]];
            gz[[k, c]] += g * z[[j, c]];
        }
    }
    Ok(gz)
}
