//! Design for a dataset under an interaction scheme. Pairwise products are
//! formed on the fly: the active pairs are grouped by their first feature,
//! which keeps each group's θ entries contiguous, so scoring and the
//! backward pass are single `O(n·p²)` sweeps with no `n × m` buffer.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::interactions::InteractionScheme;
use crate::scalar::Scalar;

/// Active partners `k > j` of one feature `j`, stored at
/// `θ[offset..offset + ks.len()]`.
#[derive(Debug, Clone)]
struct Group {
    j: usize,
    offset: usize,
    ks: Vec<usize>,
    /// `ks` is a run `first, first + 1, …`.
    run: bool,
}

#[derive(Debug, Clone)]
pub struct Design<F> {
    x: Array2<F>,
    groups: Vec<Group>,
    m: usize,
}

impl<F: Scalar> Design<F> {
    pub fn new(x: &Array2<F>, scheme: &InteractionScheme) -> Result<Self> {
        if x.ncols() != scheme.p() {
            return Err(Error::dim(format!("X has {} columns, scheme expects {}", x.ncols(), scheme.p())));
        }
        let mut groups: Vec<Group> = Vec::new();
        for (idx, &(j, k)) in scheme.active_pairs().iter().enumerate() {
            match groups.last_mut() {
                Some(g) if g.j == j => g.ks.push(k),
                _ => groups.push(Group { j, offset: idx, ks: vec![k], run: false }),
            }
        }
        for g in &mut groups {
            g.run = g.ks.windows(2).all(|w| w[1] == w[0] + 1);
        }
        Ok(Self { x: x.as_standard_layout().into_owned(), groups, m: scheme.len() })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn x(&self) -> &Array2<F> {
        &self.x
    }

    /// `β₀ + Xβ + X_int θ`.
    pub fn scores(&self, beta0: F, beta: ArrayView1<'_, F>, theta: ArrayView1<'_, F>) -> Array1<F> {
        let theta = theta.as_slice().map(|t| t.to_vec()).unwrap_or_else(|| theta.to_vec());
        let mut s = Array1::from_elem(self.n(), beta0);
        for (out, xr) in s.iter_mut().zip(self.x.rows()) {
            let xs = xr.as_slice().expect("standard layout");
            *out += xr.dot(&beta);
            let mut acc = F::zero();
            for g in &self.groups {
                let t = &theta[g.offset..g.offset + g.ks.len()];
                let inner = if g.run {
                    dot(t, &xs[g.ks[0]..g.ks[0] + g.ks.len()])
                } else {
                    t.iter().zip(&g.ks).fold(F::zero(), |a, (&tv, &k)| a + tv * xs[k])
                };
                acc += xs[g.j] * inner;
            }
            *out += acc;
        }
        s
    }

    /// Pulls a gradient with respect to the scores back onto
    /// `(β₀, β, θ)`: `(Σg, Xᵀg, X_intᵀg)`.
    pub fn backprop(&self, g: ArrayView1<'_, F>) -> (F, Array1<F>, Array1<F>) {
        let mut gb = Array1::zeros(self.x.ncols());
        let mut gt = vec![F::zero(); self.m];
        for (&gi, xr) in g.iter().zip(self.x.rows()) {
            if gi == F::zero() {
                continue;
            }
            gb.scaled_add(gi, &xr);
            let xs = xr.as_slice().expect("standard layout");
            for grp in &self.groups {
                let a = gi * xs[grp.j];
                let out = &mut gt[grp.offset..grp.offset + grp.ks.len()];
                if grp.run {
                    let src = &xs[grp.ks[0]..grp.ks[0] + grp.ks.len()];
                    for (o, &v) in out.iter_mut().zip(src) {
                        *o += a * v;
                    }
                } else {
                    for (o, &k) in out.iter_mut().zip(&grp.ks) {
                        *o += a * xs[k];
                    }
                }
            }
        }
        (g.sum(), gb, Array1::from(gt))
    }
}

fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    // Four accumulators let the compiler vectorize the reduction.
    let mut acc = [F::zero(); 4];
    let (ca, ta) = a.split_at(a.len() / 4 * 4);
    let (cb, tb) = b.split_at(ca.len());
    for (x, y) in ca.chunks_exact(4).zip(cb.chunks_exact(4)) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    let tail = ta.iter().zip(tb).fold(F::zero(), |s, (&x, &y)| s + x * y);
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
