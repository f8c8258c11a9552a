//! Block Lanczos with full reorthogonalization for the largest eigenvalues
//! of an operator that is self-adjoint in an `M` inner product. Used with a
//! shift-invert operator `(A - σM)^{-1} M`, whose largest eigenvalues
//! `θ` correspond to the pencil eigenvalues `σ + 1/θ` closest to σ from above.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dense::{sym_eigen, Mat};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub block: usize,
    /// Converged when ‖op x - θ x‖_M ≤ tol · θ.
    pub tol: f64,
    /// Cap on operator applications.
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            block: 4,
            tol: 1e-10,
            max_iter: 5000,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RitzPairs {
    /// Descending.
    pub theta: Vec<f64>,
    /// M-orthonormal.
    pub vectors: Vec<Vec<f64>>,
    /// ‖op x - θ x‖_M.
    pub residuals: Vec<f64>,
    pub applications: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `k` largest eigenpairs of the M-self-adjoint operator `op` on ℝⁿ.
pub fn lanczos_largest<Op, Ms>(n: usize, k: usize, op: Op, mass: Ms, opts: &LanczosOptions) -> Result<RitzPairs>
where
    Op: Fn(&[f64]) -> Vec<f64> + Sync,
    Ms: Fn(&[f64]) -> Vec<f64> + Sync,
{
    assert!(k <= n && k > 0);
    let b = opts.block.max(1).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut mq: Vec<Vec<f64>> = Vec::new();
    // cols[j][i] = q_i^T M op(q_j) for i up to the end of q_j's block.
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut applications = 0usize;

    let random_block = |rng: &mut ChaCha8Rng, count: usize| -> Vec<Vec<f64>> {
        (0..count)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    };
    let mut pending = random_block(&mut rng, b);

    loop {
        // Orthonormalize the pending block against the basis and itself.
        let mut block_idx = Vec::new();
        for v0 in pending.drain(..) {
            if q.len() >= n {
                break;
            }
            let mut v = v0;
            for _attempt in 0..4 {
                let start = dot(&v, &mass(&v)).max(0.0).sqrt();
                for _ in 0..2 {
                    let coeffs: Vec<f64> = mq.par_iter().map(|m| dot(m, &v)).collect();
                    for (c, qi) in coeffs.iter().zip(&q) {
                        axpy(&mut v, -c, qi);
                    }
                }
                let mv = mass(&v);
                let nrm = dot(&v, &mv).max(0.0).sqrt();
                if nrm > 1e-8 * start && nrm > 0.0 {
                    let inv = 1.0 / nrm;
                    v.iter_mut().for_each(|x| *x *= inv);
                    block_idx.push(q.len());
                    q.push(v);
                    mq.push(mv.into_iter().map(|x| x * inv).collect());
                    break;
                }
                // Breakdown: the Krylov space is invariant; continue with a fresh direction.
                v = random_block(&mut rng, 1).pop().expect("one vector");
            }
        }
        if block_idx.is_empty() && q.len() < n {
            return Err(Error::NoConvergence {
                op: "linalg.lanczos",
                iterations: applications,
                residual: f64::NAN,
            });
        }
        // Apply the operator to the new block.
        let w: Vec<Vec<f64>> = block_idx.par_iter().map(|&i| op(&q[i])).collect();
        applications += w.len();
        let mut residual_block = Vec::with_capacity(w.len());
        for (bi, mut wv) in block_idx.iter().zip(w) {
            let mut c: Vec<f64> = mq.par_iter().map(|m| dot(m, &wv)).collect();
            for (ci, qi) in c.iter().zip(&q) {
                axpy(&mut wv, -ci, qi);
            }
            let c2: Vec<f64> = mq.par_iter().map(|m| dot(m, &wv)).collect();
            for (ci, qi) in c2.iter().zip(&q) {
                axpy(&mut wv, -ci, qi);
            }
            for (a, d) in c.iter_mut().zip(&c2) {
                *a += d;
            }
            debug_assert_eq!(cols.len(), *bi);
            cols.push(c);
            residual_block.push(wv);
        }
        let last_residual = residual_block;
        let last_block = block_idx;

        let m = q.len();
        let full = m >= n;
        if m >= k && (full || m >= k + b) {
            let h = Mat::from_fn(m, m, |i, j| {
                let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
                if lo < cols[hi].len() {
                    cols[hi][lo]
                } else {
                    cols[lo][hi]
                }
            });
            let (vals, vecs) = sym_eigen(&h)?;
            // Gram matrix of the last residual block.
            let mr: Vec<Vec<f64>> = last_residual.iter().map(|r| mass(r)).collect();
            let g = Mat::from_fn(last_residual.len(), last_residual.len(), |i, j| {
                dot(&last_residual[i], &mr[j])
            });
            let mut theta = Vec::with_capacity(k);
            let mut res = Vec::with_capacity(k);
            let mut ys = Vec::with_capacity(k);
            for r in (m - k..m).rev() {
                let y = vecs.row(r);
                let yl: Vec<f64> = last_block.iter().map(|&i| y[i]).collect();
                let gy = g.matvec(&yl);
                let rn = if full { 0.0 } else { dot(&yl, &gy).max(0.0).sqrt() };
                theta.push(vals[r]);
                res.push(rn);
                ys.push(y.to_vec());
            }
            let converged = theta
                .iter()
                .zip(&res)
                .all(|(t, r)| *r <= opts.tol * t.abs().max(f64::MIN_POSITIVE));
            if converged || full {
                let vectors = ys
                    .par_iter()
                    .map(|y| {
                        let mut x = vec![0.0; n];
                        for (c, qi) in y.iter().zip(&q) {
                            axpy(&mut x, *c, qi);
                        }
                        x
                    })
                    .collect();
                return Ok(RitzPairs {
                    theta,
                    vectors,
                    residuals: res,
                    applications,
                });
            }
            if applications >= opts.max_iter {
                let worst = res.iter().cloned().fold(0.0, f64::max);
                return Err(Error::NoConvergence {
                    op: "linalg.lanczos",
                    iterations: applications,
                    residual: worst,
                });
            }
        }
        pending = last_residual;
        if q.len() + pending.len() > n {
            pending.truncate(n - q.len());
        }
    }
}
