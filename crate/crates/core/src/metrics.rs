//! Evaluation metrics and the PCA embedding baseline.

use std::cmp::Ordering;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interactions::InteractionScheme;
use crate::linalg::symmetric_eigen;
use crate::scalar::Scalar;

fn same_len(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::dim(format!("{what}: lengths {a} and {b} differ")));
    }
    if a == 0 {
        return Err(Error::arg(format!("{what}: empty input")));
    }
    Ok(())
}

fn cmp<F: Scalar>(a: &F, b: &F) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

pub fn rmse<F: Scalar>(y: ArrayView1<'_, F>, yhat: ArrayView1<'_, F>) -> Result<F> {
    same_len(y.len(), yhat.len(), "rmse")?;
    let n = F::from_usize(y.len()).unwrap();
    let ss: F = y.iter().zip(yhat.iter()).map(|(&a, &b)| (a - b) * (a - b)).sum();
    Ok((ss / n).sqrt())
}

/// 1-based ranks with ties sharing their average rank.
fn average_ranks<F: Scalar>(x: ArrayView1<'_, F>) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| cmp(&x[a], &x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for &o in &order[i..j] {
            ranks[o] = avg;
        }
        i = j;
    }
    ranks
}

/// Area under the ROC curve via the Mann–Whitney statistic; tied scores
/// count ½. `labels` are 0/1.
pub fn auc<F: Scalar>(scores: ArrayView1<'_, F>, labels: ArrayView1<'_, F>) -> Result<f64> {
    same_len(scores.len(), labels.len(), "auc")?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Numeric("NaN score".into()));
    }
    let mut n_pos = 0usize;
    for &l in labels.iter() {
        if l == F::one() {
            n_pos += 1;
        } else if l != F::zero() {
            return Err(Error::arg(format!("label {l} is not 0/1")));
        }
    }
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Degenerate("AUC needs both classes present".into()));
    }
    let ranks = average_ranks(scores);
    let pos_rank_sum: f64 = ranks.iter().zip(labels.iter()).filter(|(_, &l)| l == F::one()).map(|(r, _)| r).sum();
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Fenwick tree of counts.
struct Counts(Vec<u64>);

impl Counts {
    fn add(&mut self, mut i: usize) {
        i += 1;
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of positions `< i`.
    fn below(&self, mut i: usize) -> u64 {
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Harrell's concordance index. A pair is comparable when the subject with
/// the strictly earlier time had an event; it is concordant when that
/// subject has the higher risk, and risk ties count ½. `O(n log n)`.
pub fn c_index<F: Scalar>(risk: ArrayView1<'_, F>, times: ArrayView1<'_, F>, events: &[bool]) -> Result<f64> {
    same_len(risk.len(), times.len(), "c_index")?;
    same_len(risk.len(), events.len(), "c_index")?;
    if risk.iter().chain(times.iter()).any(|v| v.is_nan()) {
        return Err(Error::Numeric("NaN risk or time".into()));
    }
    let n = risk.len();
    // Dense rank of each risk value.
    let mut by_risk: Vec<usize> = (0..n).collect();
    by_risk.sort_by(|&a, &b| cmp(&risk[a], &risk[b]));
    let mut rank = vec![0usize; n];
    for w in 1..n {
        let (prev, cur) = (by_risk[w - 1], by_risk[w]);
        rank[cur] = rank[prev] + usize::from(risk[cur] != risk[prev]);
    }
    let mut by_time: Vec<usize> = (0..n).collect();
    by_time.sort_by(|&a, &b| cmp(&times[b], &times[a]));

    let mut tree = Counts(vec![0; n + 2]);
    let mut inserted = 0u64;
    let (mut comparable, mut concordant2) = (0u64, 0u64);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && times[by_time[j]] == times[by_time[i]] {
            j += 1;
        }
        // Everything inserted so far has a strictly later time.
        for &s in &by_time[i..j] {
            if events[s] {
                let lower = tree.below(rank[s]);
                let equal = tree.below(rank[s] + 1) - lower;
                comparable += inserted;
                concordant2 += 2 * lower + equal;
            }
        }
        for &s in &by_time[i..j] {
            tree.add(rank[s]);
            inserted += 1;
        }
        i = j;
    }
    if comparable == 0 {
        return Err(Error::Degenerate("no comparable pairs for the C-index".into()));
    }
    Ok(concordant2 as f64 / (2.0 * comparable as f64))
}

/// Kaplan–Meier estimate of the censoring survival function `G`.
#[derive(Debug, Clone)]
pub struct CensoringKm {
    times: Vec<f64>,
    surv: Vec<f64>,
}

impl CensoringKm {
    pub fn fit<F: Scalar>(times: ArrayView1<'_, F>, events: &[bool]) -> Result<Self> {
        same_len(times.len(), events.len(), "censoring KM")?;
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| cmp(&times[a], &times[b]));
        let n = order.len();
        let (mut out_t, mut out_s) = (Vec::new(), Vec::new());
        let mut g = 1.0;
        let mut i = 0;
        while i < n {
            let t = times[order[i]];
            let mut j = i;
            let mut censored = 0usize;
            while j < n && times[order[j]] == t {
                censored += usize::from(!events[order[j]]);
                j += 1;
            }
            if censored > 0 {
                g *= 1.0 - censored as f64 / (n - i) as f64;
                out_t.push(t.to_f64_lossy());
                out_s.push(g);
            }
            i = j;
        }
        Ok(Self { times: out_t, surv: out_s })
    }

    /// `G(t)`, right-continuous.
    pub fn at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            1.0
        } else {
            self.surv[k - 1]
        }
    }

    /// `G(t⁻)`.
    pub fn before(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s < t);
        if k == 0 {
            1.0
        } else {
            self.surv[k - 1]
        }
    }
}

/// Inverse-probability-of-censoring weighted Brier score at each grid time.
/// `surv[[i, k]]` is the predicted `S(grid[k] | xᵢ)`. Subjects with an event
/// at or before `t` are weighted by `1/G(tᵢ⁻)`, subjects still at risk after
/// `t` by `1/G(t)`, and subjects censored before `t` contribute nothing.
pub fn brier_curve<F: Scalar>(
    surv: ArrayView2<'_, F>,
    times: ArrayView1<'_, F>,
    events: &[bool],
    grid: &[F],
) -> Result<Array1<f64>> {
    let n = times.len();
    same_len(n, events.len(), "brier_curve")?;
    if surv.dim() != (n, grid.len()) {
        return Err(Error::dim(format!("survival matrix is {:?}, expected ({n}, {})", surv.dim(), grid.len())));
    }
    if grid.is_empty() {
        return Err(Error::arg("empty time grid"));
    }
    let g = CensoringKm::fit(times, events)?;
    let mut out = Array1::zeros(grid.len());
    for (k, &tk) in grid.iter().enumerate() {
        let t = tk.to_f64_lossy();
        let g_t = g.at(t);
        let mut sum = 0.0;
        for i in 0..n {
            let ti = times[i].to_f64_lossy();
            let s = surv[[i, k]].to_f64_lossy();
            if ti <= t && events[i] {
                let w = g.before(ti);
                if w <= 0.0 {
                    return Err(Error::Weight { index: k, time: t });
                }
                sum += s * s / w;
            } else if ti > t {
                if g_t <= 0.0 {
                    return Err(Error::Weight { index: k, time: t });
                }
                sum += (1.0 - s) * (1.0 - s) / g_t;
            }
        }
        out[k] = sum / n as f64;
    }
    Ok(out)
}

/// Trapezoidal integral of the Brier curve divided by the grid span.
pub fn integrated_brier<F: Scalar>(curve: &[f64], grid: &[F]) -> Result<f64> {
    same_len(curve.len(), grid.len(), "integrated_brier")?;
    if grid.len() < 2 {
        return Err(Error::arg("integrated Brier score needs at least two grid points"));
    }
    let g: Vec<f64> = grid.iter().map(|t| t.to_f64_lossy()).collect();
    if g.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::arg("grid must be non-decreasing"));
    }
    let span = g[g.len() - 1] - g[0];
    if !(span > 0.0) {
        return Err(Error::arg("grid has zero span"));
    }
    let area: f64 = g.windows(2).zip(curve.windows(2)).map(|(t, b)| (t[1] - t[0]) * (b[0] + b[1]) / 2.0).sum();
    Ok(area / span)
}

/// `count` quantiles of the observed event times at levels `k/(count+1)`,
/// linearly interpolated.
pub fn default_brier_grid<F: Scalar>(times: ArrayView1<'_, F>, events: &[bool], count: usize) -> Result<Vec<F>> {
    same_len(times.len(), events.len(), "brier grid")?;
    let mut ev: Vec<F> = times.iter().zip(events).filter(|(_, &e)| e).map(|(&t, _)| t).collect();
    if ev.is_empty() {
        return Err(Error::Degenerate("no events to place a time grid on".into()));
    }
    if count == 0 {
        return Err(Error::arg("grid needs at least one point"));
    }
    ev.sort_by(cmp);
    let m = ev.len();
    Ok((1..=count)
        .map(|k| {
            let pos = F::from_usize(k).unwrap() / F::from_usize(count + 1).unwrap() * F::from_usize(m - 1).unwrap();
            let lo = pos.floor().to_usize().unwrap_or(0).min(m - 1);
            let hi = (lo + 1).min(m - 1);
            let frac = pos - F::from_usize(lo).unwrap();
            ev[lo] + frac * (ev[hi] - ev[lo])
        })
        .collect())
}

/// One metric over several splits. `std_error` is the sample standard
/// deviation over `√splits` (0 for a single split).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metric: String,
    pub values: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
}

impl EvalReport {
    pub fn new(metric: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::arg("report needs at least one value"));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std_error = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Ok(Self { metric: metric.into(), values, mean, std_error })
    }

    pub const CSV_HEADER: [&'static str; 3] = ["metric", "split", "value"];

    /// `(metric, split, value)` rows: one per split, then `mean` and
    /// `std_error`.
    pub fn csv_rows(&self) -> Vec<[String; 3]> {
        let mut rows: Vec<[String; 3]> =
            self.values.iter().enumerate().map(|(i, v)| [self.metric.clone(), i.to_string(), v.to_string()]).collect();
        rows.push([self.metric.clone(), "mean".into(), self.mean.to_string()]);
        rows.push([self.metric.clone(), "std_error".into(), self.std_error.to_string()]);
        rows
    }
}

/// How the PCA baseline treats entries with no fitted value (the diagonal
/// and masked pairs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaFill {
    /// Fill with zeros and decompose once.
    #[default]
    Zero,
    /// Iteratively replace them with the current rank-d reconstruction
    /// (hard impute), so an exactly low-rank Θ is recovered exactly.
    Impute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaEmbedding<F> {
    /// `p × d`, column `c` is `v_c·√|λ_c|`.
    pub z: Array2<F>,
    /// Sign of each retained eigenvalue.
    pub signs: Array1<F>,
    /// Reconstruction of every unmasked pair, flat order.
    pub theta: Array1<F>,
}

impl<F: Scalar> PcaEmbedding<F> {
    /// `Σ_c sign_c z_jc z_kc` as a full symmetric matrix.
    pub fn matrix(&self) -> Array2<F> {
        let zs = &self.z * &self.signs;
        zs.dot(&self.z.t())
    }
}

fn rank_d<F: Scalar>(m: &Array2<F>, d: usize) -> Result<(Array2<F>, Array1<F>)> {
    let eig = symmetric_eigen(m)?;
    let order = eig.order_by_magnitude();
    let p = m.nrows();
    let mut z = Array2::zeros((p, d));
    let mut signs = Array1::zeros(d);
    for (c, &k) in order.iter().take(d).enumerate() {
        let lam = eig.values[k];
        let s = lam.abs().sqrt();
        signs[c] = if lam < F::zero() { -F::one() } else { F::one() };
        for j in 0..p {
            z[[j, c]] = eig.vectors[[j, k]] * s;
        }
    }
    Ok((z, signs))
}

/// Latent embedding of a fitted interaction vector by truncated
/// eigendecomposition: the upper triangle is mirrored, the top-`d`
/// components by `|λ|` kept, and Θ reconstructed from them.
pub fn pca_embed_baseline<F: Scalar>(
    theta_flat: ArrayView1<'_, F>,
    scheme: &InteractionScheme,
    d: usize,
    fill: PcaFill,
) -> Result<PcaEmbedding<F>> {
    let p = scheme.p();
    if d == 0 || d > p {
        return Err(Error::arg(format!("embedding dimension {d} must lie in 1..={p}")));
    }
    let mut m = scheme.symmetric(theta_flat)?;
    let observed = {
        let mut o = Array2::from_elem((p, p), false);
        for &(j, k) in scheme.active_pairs() {
            o[[j, k]] = true;
            o[[k, j]] = true;
        }
        o
    };
    let (mut z, mut signs) = rank_d(&m, d)?;
    if fill == PcaFill::Impute {
        let tol = F::lit(1e-28) * m.iter().map(|&v| v * v).sum::<F>().max(F::min_positive_value());
        for _ in 0..5000 {
            let recon = (&z * &signs).dot(&z.t());
            let mut change = F::zero();
            for ((j, k), v) in m.indexed_iter_mut() {
                if !observed[[j, k]] {
                    let r = recon[[j, k]];
                    change += (*v - r) * (*v - r);
                    *v = r;
                }
            }
            (z, signs) = rank_d(&m, d)?;
            if change <= tol {
                break;
            }
        }
    }
    let emb = PcaEmbedding { theta: Array1::zeros(0), z, signs };
    let full = emb.matrix();
    let theta = scheme.active_pairs().iter().map(|&(j, k)| full[[j, k]]).collect();
    Ok(PcaEmbedding { theta, ..emb })
}
