//! Truncated singular value decomposition of sparse matrices.
//!
//! Block subspace iteration on `MᵀM` with a Rayleigh-Ritz step each round.
//! Iteration stops once every kept triplet satisfies
//! `‖M vᵢ − σᵢ uᵢ‖ ≤ tol · σ₁`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{norm, orthonormalize_columns, symmetric_eigen, CsrMatrix, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdOptions {
    /// Relative residual target.
    pub tol: f64,
    pub max_iter: usize,
    /// Extra block columns beyond `k`; at least this many, more for large `k`.
    pub oversample: usize,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 1000,
            oversample: 10,
            seed: 0,
        }
    }
}

/// `M ≈ U · diag(s) · Vᵀ` with `k` components, singular values descending.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSvd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
    pub iterations: usize,
    pub residual: f64,
}

impl TruncatedSvd {
    pub fn k(&self) -> usize {
        self.s.len()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for r in 0..us.rows() {
            for (x, s) in us.row_mut(r).iter_mut().zip(&self.s) {
                *x *= s;
            }
        }
        us.matmul(&self.v.transpose())
    }
}

pub fn truncated_svd(m: &CsrMatrix, k: usize, opts: &SvdOptions) -> Result<TruncatedSvd> {
    let small = m.rows().min(m.cols());
    if k == 0 || k > small {
        return Err(Error::InvalidArgument(alloc::format!(
            "svd rank {k} must be in 1..={small}"
        )));
    }
    let block = (k + opts.oversample.max(k / 5)).min(small);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let init: Vec<f64> = (0..m.cols() * block)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let mut basis = DenseMatrix::from_vec(m.cols(), block, init);
    orthonormalize_columns(&mut basis);

    let mut residual = f64::INFINITY;
    for iteration in 1..=opts.max_iter.max(1) {
        let mut q = m.mul_dense(&basis);
        orthonormalize_columns(&mut q);
        let w = m.tmul_dense(&q);
        let (lambda, y) = symmetric_eigen(&w.tmatmul(&w));

        let sigma_max = libm::sqrt(lambda[0].max(0.0));
        let sigma: Vec<f64> = lambda
            .iter()
            .map(|&l| {
                let s = libm::sqrt(l.max(0.0));
                if s <= 1e-12 * sigma_max {
                    0.0
                } else {
                    s
                }
            })
            .collect();

        let u = q.matmul(&y);
        let mut v = w.matmul(&y);
        for r in 0..v.rows() {
            for (x, s) in v.row_mut(r).iter_mut().zip(&sigma) {
                *x = if *s > 0.0 { *x / s } else { 0.0 };
            }
        }

        let mv = m.mul_dense(&v);
        residual = 0.0;
        for (c, s) in sigma.iter().enumerate().take(k) {
            let diff: Vec<f64> = (0..mv.rows())
                .map(|r| mv.get(r, c) - s * u.get(r, c))
                .collect();
            residual = f64::max(residual, norm(&diff));
        }
        if sigma_max > 0.0 {
            residual /= sigma_max;
        }

        if residual <= opts.tol {
            return Ok(finish(u, v, &sigma, k, iteration, residual));
        }
        basis = w;
        orthonormalize_columns(&mut basis);
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// Keeps the first `k` triplets and fixes signs so the largest-magnitude
/// entry of every left singular vector is positive.
fn finish(
    u: DenseMatrix,
    v: DenseMatrix,
    sigma: &[f64],
    k: usize,
    iterations: usize,
    residual: f64,
) -> TruncatedSvd {
    let mut uk = DenseMatrix::zeros(u.rows(), k);
    let mut vk = DenseMatrix::zeros(v.rows(), k);
    for c in 0..k {
        let mut ucol = u.column(c);
        let mut vcol = v.column(c);
        let pivot = ucol
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |best, (i, x)| {
                if libm::fabs(*x) > best.1 {
                    (i, libm::fabs(*x))
                } else {
                    best
                }
            })
            .0;
        if ucol.get(pivot).is_some_and(|x| *x < 0.0) {
            ucol.iter_mut().for_each(|x| *x = -*x);
            vcol.iter_mut().for_each(|x| *x = -*x);
        }
        uk.set_column(c, &ucol);
        vk.set_column(c, &vcol);
    }
    TruncatedSvd {
        u: uk,
        s: sigma[..k].to_vec(),
        v: vk,
        iterations,
        residual,
    }
}
