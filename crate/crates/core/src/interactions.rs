//! Canonical ordering of feature pairs, masking, and the flattened
//! interaction vector.
//!
//! Pairs `(j, k)` with `j < k` are enumerated lexicographically:
//! `(0,1), (0,2), …, (0,p-1), (1,2), …, (p-2,p-1)` (zero-based). A mask
//! switches pairs off; masked pairs are never stored in `θ_flat`, so the
//! optimizer cannot move them and their coefficient is implicitly 0.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Version tag of the pair ordering, recorded in persisted models.
pub const PAIR_ORDERING_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "SchemeRepr", try_from = "SchemeRepr")]
pub struct InteractionScheme {
    p: usize,
    mask: Vec<bool>,
    /// Pairs that are switched on, in canonical order; position = flat index.
    active: Vec<(usize, usize)>,
}

/// Persisted form; the active list is rebuilt (and the mask length checked)
/// on load.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeRepr {
    pair_ordering: u32,
    p: usize,
    mask: Vec<bool>,
}

impl From<InteractionScheme> for SchemeRepr {
    fn from(s: InteractionScheme) -> Self {
        Self { pair_ordering: PAIR_ORDERING_VERSION, p: s.p, mask: s.mask }
    }
}

impl TryFrom<SchemeRepr> for InteractionScheme {
    type Error = Error;

    fn try_from(r: SchemeRepr) -> Result<Self> {
        if r.pair_ordering != PAIR_ORDERING_VERSION {
            return Err(Error::arg(format!(
                "pair ordering version {} is not supported (expected {PAIR_ORDERING_VERSION})",
                r.pair_ordering
            )));
        }
        Self::with_mask(r.p, r.mask)
    }
}

/// Number of unordered pairs of `p` features.
pub fn pair_count(p: usize) -> usize {
    p * p.saturating_sub(1) / 2
}

/// Lexicographic position of `(j, k)`, `j < k < p`.
pub fn pair_position(p: usize, j: usize, k: usize) -> usize {
    debug_assert!(j < k && k < p);
    j * (2 * p - j - 1) / 2 + (k - j - 1)
}

pub fn all_pairs(p: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..p).flat_map(move |j| (j + 1..p).map(move |k| (j, k)))
}

impl InteractionScheme {
    /// Every pair switched on.
    pub fn full(p: usize) -> Self {
        Self::with_mask(p, vec![true; pair_count(p)]).expect("full mask has the right length")
    }

    /// No interactions at all (a plain linear predictor).
    pub fn none(p: usize) -> Self {
        Self::with_mask(p, vec![false; pair_count(p)]).expect("empty mask has the right length")
    }

    /// `mask[i]` refers to the i-th pair in canonical order.
    pub fn with_mask(p: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != pair_count(p) {
            return Err(Error::dim(format!(
                "mask has {} entries, expected C({p},2) = {}",
                mask.len(),
                pair_count(p)
            )));
        }
        let active = all_pairs(p).zip(&mask).filter(|(_, &m)| m).map(|(pair, _)| pair).collect();
        Ok(Self { p, mask, active })
    }

    /// Only the listed pairs (in any order, either orientation).
    pub fn from_pairs(p: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut mask = vec![false; pair_count(p)];
        for &(a, b) in pairs {
            if a == b || a >= p || b >= p {
                return Err(Error::arg(format!("invalid pair ({a}, {b}) for p = {p}")));
            }
            let (j, k) = if a < b { (a, b) } else { (b, a) };
            mask[pair_position(p, j, k)] = true;
        }
        Self::with_mask(p, mask)
    }

    /// Targeted interactions between two feature groups: every pair with one
    /// member in `group_a` and the other in `group_b`.
    pub fn bipartite(p: usize, group_a: &[usize], group_b: &[usize]) -> Result<Self> {
        let pairs: Vec<_> = group_a
            .iter()
            .flat_map(|&a| group_b.iter().map(move |&b| (a, b)))
            .filter(|(a, b)| a != b)
            .collect();
        Self::from_pairs(p, &pairs)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of unmasked pairs, i.e. the length of `θ_flat`.
    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    /// Mask over all `C(p,2)` pairs in canonical order.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Unmasked pairs; the position in this slice is the flat index.
    pub fn active_pairs(&self) -> &[(usize, usize)] {
        &self.active
    }

    /// Flat index of `(j, k)` if that pair is unmasked.
    pub fn flat_index(&self, j: usize, k: usize) -> Option<usize> {
        let (j, k) = if j < k { (j, k) } else { (k, j) };
        if j == k || k >= self.p || !self.mask[pair_position(self.p, j, k)] {
            return None;
        }
        self.active.binary_search(&(j, k)).ok()
    }

    /// Features with at least one unmasked pair.
    pub fn involved_features(&self) -> Vec<bool> {
        let mut seen = vec![false; self.p];
        for &(j, k) in &self.active {
            seen[j] = true;
            seen[k] = true;
        }
        seen
    }

    /// `[x_j·x_k]` over unmasked pairs, in flat order.
    pub fn expand<F: Scalar>(&self, x: ArrayView1<'_, F>) -> Result<Array1<F>> {
        if x.len() != self.p {
            return Err(Error::dim(format!("feature vector has {} entries, scheme expects {}", x.len(), self.p)));
        }
        Ok(self.active.iter().map(|&(j, k)| x[j] * x[k]).collect())
    }

    /// Row-wise [`expand`](Self::expand): the `n × len()` interaction design.
    pub fn expand_matrix<F: Scalar>(&self, x: &Array2<F>) -> Result<Array2<F>> {
        if x.ncols() != self.p {
            return Err(Error::dim(format!("X has {} columns, scheme expects {}", x.ncols(), self.p)));
        }
        let mut out = Array2::zeros((x.nrows(), self.len()));
        for (row, mut dst) in x.rows().into_iter().zip(out.rows_mut()) {
            for (slot, &(j, k)) in dst.iter_mut().zip(&self.active) {
                *slot = row[j] * row[k];
            }
        }
        Ok(out)
    }

    /// Reads the unmasked upper-triangular entries of `theta` in flat order.
    /// The lower triangle and diagonal are ignored.
    pub fn flatten<F: Scalar>(&self, theta: &Array2<F>) -> Result<Array1<F>> {
        if theta.dim() != (self.p, self.p) {
            return Err(Error::dim(format!("Θ is {:?}, expected {p}×{p}", theta.dim(), p = self.p)));
        }
        Ok(self.active.iter().map(|&(j, k)| theta[[j, k]]).collect())
    }

    /// Upper-triangular `p × p` matrix; masked entries, diagonal and lower
    /// triangle are 0.
    pub fn unflatten<F: Scalar>(&self, flat: ArrayView1<'_, F>) -> Result<Array2<F>> {
        if flat.len() != self.len() {
            return Err(Error::dim(format!("θ_flat has {} entries, scheme has {} pairs", flat.len(), self.len())));
        }
        let mut theta = Array2::zeros((self.p, self.p));
        for (&(j, k), &v) in self.active.iter().zip(flat.iter()) {
            theta[[j, k]] = v;
        }
        Ok(theta)
    }

    /// Symmetric `p × p` matrix with both triangles filled and zero diagonal.
    pub fn symmetric<F: Scalar>(&self, flat: ArrayView1<'_, F>) -> Result<Array2<F>> {
        let mut m = self.unflatten(flat)?;
        for &(j, k) in &self.active {
            m[[k, j]] = m[[j, k]];
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn expand_full_mask() {
        let s = InteractionScheme::full(3);
        assert_eq!(s.expand(array![1.0, 2.0, 3.0].view()).unwrap(), array![2.0, 3.0, 6.0]);
        assert_eq!(s.expand(array![0.0, 0.0, 0.0].view()).unwrap(), array![0.0, 0.0, 0.0]);
    }

    #[test]
    fn expand_masked_keeps_only_selected_pair() {
        let s = InteractionScheme::from_pairs(3, &[(0, 2)]).unwrap();
        assert_eq!(s.expand(array![1.0, 2.0, 3.0].view()).unwrap(), array![3.0]);
    }

    #[test]
    fn serde_round_trip_revalidates() {
        let s = InteractionScheme::from_pairs(4, &[(0, 3), (1, 2)]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<InteractionScheme>(&json).unwrap(), s);
        let short = r#"{"pair_ordering":1,"p":4,"mask":[true]}"#;
        assert!(serde_json::from_str::<InteractionScheme>(short).is_err());
        let future = r#"{"pair_ordering":2,"p":2,"mask":[true]}"#;
        assert!(serde_json::from_str::<InteractionScheme>(future).is_err());
    }

    #[test]
    fn expand_rejects_wrong_length() {
        let s = InteractionScheme::full(3);
        assert!(matches!(s.expand(array![1.0, 2.0].view()), Err(Error::Dimension(_))));
    }

    #[test]
    fn flatten_order_is_lexicographic() {
        let s = InteractionScheme::full(3);
        let theta = array![[0.0, 1.5, 2.5], [0.0, 0.0, 3.5], [0.0, 0.0, 0.0]];
        assert_eq!(s.flatten(&theta).unwrap(), array![1.5, 2.5, 3.5]);
        assert_eq!(s.active_pairs(), &[(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn unflatten_pins_masked_pair() {
        let s = InteractionScheme::from_pairs(3, &[(0, 2), (1, 2)]).unwrap();
        let theta = s.unflatten(array![2.0, 3.0].view()).unwrap();
        assert_eq!(theta[[0, 1]], 0.0);
        assert_eq!(theta[[0, 2]], 2.0);
        assert_eq!(theta[[1, 2]], 3.0);
        assert!(matches!(s.unflatten(array![1.0].view()), Err(Error::Dimension(_))));
    }

    #[test]
    fn pair_position_matches_enumeration() {
        for p in 2..9 {
            for (i, (j, k)) in all_pairs(p).enumerate() {
                assert_eq!(pair_position(p, j, k), i);
            }
        }
    }

    #[test]
    fn bipartite_scheme() {
        let s = InteractionScheme::bipartite(5, &[0, 1], &[3, 4]).unwrap();
        assert_eq!(s.active_pairs(), &[(0, 3), (0, 4), (1, 3), (1, 4)]);
        assert_eq!(s.flat_index(4, 1), Some(3));
        assert_eq!(s.flat_index(0, 1), None);
    }

    proptest! {
        #[test]
        fn flatten_unflatten_round_trip(p in 2usize..=10, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let s = InteractionScheme::full(p);
            let mut theta = Array2::<f64>::zeros((p, p));
            for (j, k) in all_pairs(p) {
                theta[[j, k]] = rng.random_range(-5.0..5.0);
            }
            let flat = s.flatten(&theta).unwrap();
            prop_assert_eq!(s.unflatten(flat.view()).unwrap(), theta);
        }

        #[test]
        fn expand_matches_double_loop(xs in proptest::collection::vec(-10.0f64..10.0, 2..12)) {
            let p = xs.len();
            let s = InteractionScheme::full(p);
            let got = s.expand(ArrayView1::from(&xs[..])).unwrap();
            let mut want = Vec::new();
            for j in 0..p {
                for k in j + 1..p {
                    want.push(xs[j] * xs[k]);
                }
            }
            prop_assert_eq!(got.to_vec(), want);
        }
    }
}
