//! Small dense linear algebra: the symmetric eigendecomposition used by the
//! PCA embedding baseline.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigenpairs of a symmetric matrix, eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<F> {
    pub values: Array1<F>,
    pub vectors: Array2<F>,
}

impl<F: Scalar> SymmetricEigen<F> {
    /// Column order sorted by decreasing `|λ|`.
    pub fn order_by_magnitude(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| {
            self.values[b].abs().partial_cmp(&self.values[a].abs()).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        idx
    }
}

/// Cyclic Jacobi rotations. Only the upper triangle of `a` is read (the
/// matrix is mirrored first). Quadratically convergent; a handful of sweeps
/// suffice at the sizes used here.
pub fn symmetric_eigen<F: Scalar>(a: &Array2<F>) -> Result<SymmetricEigen<F>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::dim(format!("eigendecomposition needs a square matrix, got {:?}", a.dim())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite matrix entry".into()));
    }
    let mut m = Array2::from_shape_fn((n, n), |(i, j)| if i <= j { a[[i, j]] } else { a[[j, i]] });
    let mut v = Array2::<F>::eye(n);
    let scale: F = m.iter().map(|&x| x * x).sum::<F>().sqrt();
    if scale == F::zero() {
        return Ok(SymmetricEigen { values: Array1::zeros(n), vectors: v });
    }
    let tiny = F::epsilon() * F::epsilon() * scale * scale;
    let two = F::lit(2.0);

    for _sweep in 0..100 {
        let off: F = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| m[[i, j]] * m[[i, j]]).sum();
        if off <= tiny {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq == F::zero() {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    Ok(SymmetricEigen { values: m.diag().to_owned(), vectors: v })
}
