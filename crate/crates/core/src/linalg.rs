//! Singular value decomposition and the matrix norms built on it.
//!
//! The factorization itself is delegated to `faer`; this module fixes
//! the ordering, truncation and sign conventions so results are
//! reproducible.

use std::sync::Once;

use faer::{Mat, Par};

use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Relative cut-off below which singular values count as numerical zeros.
pub const DEFAULT_TRUNC_TOL: f64 = 1e-12;

/// Thin SVD `M = Σ σ_i · left_i ⊗ right_i` with `σ` descending.
#[derive(Clone, Debug, PartialEq)]
pub struct Svd {
    pub sigma: Vec<f64>,
    /// Orthonormal left singular vectors, each of length `rows`.
    pub left: Vec<Vec<f64>>,
    /// Orthonormal right singular vectors, each of length `cols`.
    pub right: Vec<Vec<f64>>,
}

impl Svd {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn reconstruct(&self, rows: usize, cols: usize) -> Vec<f64> {
        let mut out = vec![0.0; rows * cols];
        for ((s, u), v) in self.sigma.iter().zip(&self.left).zip(&self.right) {
            for (r, &ur) in u.iter().enumerate() {
                let row = &mut out[r * cols..][..cols];
                for (o, &vc) in row.iter_mut().zip(v) {
                    *o += s * ur * vc;
                }
            }
        }
        out
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

fn full_svd(m: &Matrix) -> Svd {
    // Parallelism lives at the level of modes and restarts; keeping each
    // factorization sequential also keeps results bit-reproducible.
    static SEQUENTIAL: Once = Once::new();
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
    let (rows, cols) = (m.rows(), m.cols());
    let fm = Mat::<f64>::from_fn(rows, cols, |i, j| m.get(i, j));
    let svd = fm.thin_svd().expect("SVD of a finite matrix converges");
    let (u, v, s) = (svd.U(), svd.V(), svd.S());
    let sv: Vec<f64> = (0..rows.min(cols)).map(|i| s[i]).collect();

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));

    let mut out = Svd {
        sigma: Vec::with_capacity(order.len()),
        left: Vec::with_capacity(order.len()),
        right: Vec::with_capacity(order.len()),
    };
    for idx in order {
        let mut left: Vec<f64> = (0..rows).map(|i| u[(i, idx)]).collect();
        let mut right: Vec<f64> = (0..cols).map(|j| v[(j, idx)]).collect();
        // First entry of the left vector that is not numerically zero is
        // made nonnegative.
        if let Some(&lead) = left.iter().find(|x| x.abs() > 1e-14) {
            if lead < 0.0 {
                left.iter_mut().for_each(|x| *x = -*x);
                right.iter_mut().for_each(|x| *x = -*x);
            }
        }
        out.sigma.push(sv[idx].max(0.0));
        out.left.push(left);
        out.right.push(right);
    }
    out
}

/// SVD with singular values below `trunc_tol · σ_1` dropped. The zero matrix
/// yields an empty decomposition.
pub fn svd(m: &Matrix, trunc_tol: f64) -> Result<Svd> {
    check_tol(trunc_tol)?;
    let mut out = full_svd(m);
    let top = out.sigma.first().copied().unwrap_or(0.0);
    let keep = if top > 0.0 {
        out.sigma
            .iter()
            .take_while(|&&s| s >= trunc_tol * top)
            .count()
    } else {
        0
    };
    out.sigma.truncate(keep);
    out.left.truncate(keep);
    out.right.truncate(keep);
    Ok(out)
}

/// Sum of all singular values.
pub fn nuclear_norm(m: &Matrix) -> f64 {
    full_svd(m).sigma.iter().fold(0.0, |acc, x| acc + x)
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    full_svd(m).sigma.first().copied().unwrap_or(0.0)
}

/// Number of singular values strictly above `tol · σ_1`.
pub fn numerical_rank(m: &Matrix, tol: f64) -> usize {
    let sigma = full_svd(m).sigma;
    let top = sigma.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > tol * top).count()
}
