use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{SpectrumResult, SymmetricOperator};
use crate::error::{invalid, Error, Result};

/// Largest number of eigenpairs [`lanczos_lowest`] accepts.
pub const MAX_K: usize = 20;

const MAX_RESTARTS: usize = 50;

/// Lanczos settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosConfig {
    /// Residual tolerance relative to the norm estimate.
    pub tol: f64,
    pub seed: u64,
    /// Krylov basis size before an explicit restart.
    pub max_basis: usize,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            seed: super::DEFAULT_SEED,
            max_basis: 200,
        }
    }
}

/// The `k` lowest eigenpairs by Lanczos with full reorthogonalization.
///
/// `tol` is relative to a power-iteration estimate of `‖H‖`.
pub fn lanczos_lowest(op: &dyn SymmetricOperator, k: usize, tol: f64, seed: u64) -> Result<SpectrumResult> {
    lanczos_with(
        op,
        k,
        &LanczosConfig {
            tol,
            seed,
            ..Default::default()
        },
    )
}

pub fn lanczos_with(op: &dyn SymmetricOperator, k: usize, cfg: &LanczosConfig) -> Result<SpectrumResult> {
    let n = op.dim();
    if k == 0 || k > MAX_K {
        return Err(invalid("k", format!("must be in 1..={MAX_K}, got {k}")));
    }
    if k > n {
        return Err(Error::TooFewEigenvalues { needed: k, have: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let norm = estimate_norm(op, &mut rng);
    let tol = cfg.tol * norm;
    let max_basis = cfg.max_basis.max(3 * k + 10).min(n);
    let keep = (2 * k).min(max_basis - 1);

    // Rayleigh quotient P = VᵀAV is accumulated from the reorthogonalization
    // coefficients, so thick restarts need no special bookkeeping.
    let mut basis: Vec<Vec<f64>> = vec![random_unit(n, &mut rng)];
    let mut proj: Vec<Vec<f64>> = Vec::new();
    let mut w = vec![0.0; n];
    for _restart in 0..=MAX_RESTARTS {
        loop {
            let j = basis.len() - 1;
            op.apply(&basis[j], &mut w);
            let mut col = vec![0.0; j + 1];
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    col[i] += c;
                    axpy(-c, v, &mut w);
                }
            }
            for (i, row) in proj.iter_mut().enumerate() {
                row.push(col[i]);
            }
            proj.push(col);
            let b = dot(&w, &w).sqrt();
            let m = basis.len();
            let full = m == n;
            let breakdown = b <= tol * 1e-3;
            if full || breakdown || m >= max_basis || (m >= k && m % 10 == 0) {
                let (theta, s) = ritz(&proj, k.min(m));
                let done = theta.len() == k && s.iter().all(|y| (b * y[m - 1]).abs() <= tol);
                if done || full {
                    return finish(op, &basis, &theta, &s, norm, tol);
                }
                if m >= max_basis {
                    let (theta, s) = ritz(&proj, keep);
                    let mut kept = Vec::with_capacity(keep);
                    for y in &s {
                        let mut x = vec![0.0; n];
                        for (coef, v) in y.iter().zip(&basis) {
                            axpy(*coef, v, &mut x);
                        }
                        kept.push(x);
                    }
                    basis = kept;
                    proj = (0..theta.len())
                        .map(|i| (0..theta.len()).map(|j| if i == j { theta[i] } else { 0.0 }).collect())
                        .collect();
                    // the residual direction w stays orthogonal to the kept Ritz vectors
                    if breakdown {
                        w = orthogonal_fresh(&basis, n, &mut rng);
                    } else {
                        w.iter_mut().for_each(|x| *x /= b);
                    }
                    basis.push(std::mem::replace(&mut w, vec![0.0; n]));
                    break;
                }
            }
            if breakdown {
                // invariant subspace: continue with a fresh direction
                w = orthogonal_fresh(&basis, n, &mut rng);
            } else {
                w.iter_mut().for_each(|x| *x /= b);
            }
            basis.push(std::mem::replace(&mut w, vec![0.0; n]));
        }
    }
    Err(Error::NoConvergence(format!("Lanczos: {MAX_RESTARTS} restarts without convergence")))
}

fn orthogonal_fresh(basis: &[Vec<f64>], n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut fresh = random_unit(n, rng);
    for _ in 0..2 {
        for v in basis {
            let c = dot(&fresh, v);
            axpy(-c, v, &mut fresh);
        }
    }
    normalize(&mut fresh);
    fresh
}

/// Lowest `k` eigenpairs of the small projected matrix.
fn ritz(proj: &[Vec<f64>], k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = proj.len();
    let dense = DMatrix::from_fn(m, m, |i, j| 0.5 * (proj[i][j] + proj[j][i]));
    let eig = SymmetricEigen::new(dense);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order.truncate(k);
    let theta = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let s = order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    (theta, s)
}

fn finish(
    op: &dyn SymmetricOperator,
    basis: &[Vec<f64>],
    theta: &[f64],
    s: &[Vec<f64>],
    norm: f64,
    tol: f64,
) -> Result<SpectrumResult> {
    let n = op.dim();
    let mut vectors = Vec::with_capacity(theta.len());
    let mut residuals = Vec::with_capacity(theta.len());
    let mut hv = vec![0.0; n];
    for (y, &t) in s.iter().zip(theta) {
        let mut x = vec![0.0; n];
        for (coef, v) in y.iter().zip(basis) {
            axpy(*coef, v, &mut x);
        }
        normalize(&mut x);
        op.apply(&x, &mut hv);
        residuals.push(hv.iter().zip(&x).map(|(h, v)| (h - t * v).powi(2)).sum::<f64>().sqrt());
        vectors.push(x);
    }
    let mut result = SpectrumResult::new(theta.to_vec(), 0);
    result.converged = residuals.iter().all(|&r| r <= tol.max(1e-13 * norm));
    result.residual_norms = residuals;
    result.eigenvectors = Some(vectors);
    Ok(result)
}

fn estimate_norm(op: &dyn SymmetricOperator, rng: &mut ChaCha8Rng) -> f64 {
    let n = op.dim();
    let mut v = random_unit(n, rng);
    let mut w = vec![0.0; n];
    let mut est = 0.0;
    for _ in 0..30 {
        op.apply(&v, &mut w);
        est = dot(&w, &w).sqrt();
        if est == 0.0 {
            break;
        }
        w.iter_mut().for_each(|x| *x /= est);
        std::mem::swap(&mut v, &mut w);
    }
    est.max(f64::MIN_POSITIVE)
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalize(&mut v);
    v
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::dense_eigh;
    use crate::model::{build_rabi_hamiltonian, ModelSpec, Parity, ParitySector};

    #[test]
    fn matches_dense_on_parity_blocks() {
        let spec = ModelSpec::from_ratios(0.1, 1.0, 1).unwrap();
        for parity in Parity::BOTH {
            let op = ParitySector::new(&spec, 64, parity).unwrap().to_operator();
            let l = lanczos_lowest(&op, 11, 1e-12, 0x5EED).unwrap();
            let d = dense_eigh(&op, false).unwrap();
            for (a, b) in l.eigenvalues.iter().zip(&d.eigenvalues) {
                assert!((a - b).abs() <= 1e-10 * b.abs(), "{a} vs {b}");
            }
            assert!(l.converged);
        }
    }

    #[test]
    fn decoupled_ground_energy() {
        let h = build_rabi_hamiltonian(&ModelSpec::rabi(1.0, 0.1, 0.0).unwrap(), 30).unwrap();
        let r = lanczos_lowest(&h, 1, 1e-12, 1).unwrap();
        assert!((r.eigenvalues[0] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_restarting() {
        let spec = ModelSpec::from_ratios(0.05, 1.3, 1).unwrap();
        let op = ParitySector::new(&spec, 300, Parity::Even).unwrap().to_operator();
        let cfg = LanczosConfig {
            max_basis: 40,
            ..Default::default()
        };
        let a = lanczos_with(&op, 3, &cfg).unwrap();
        let b = lanczos_with(&op, 3, &cfg).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        let d = dense_eigh(&op, false).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&d.eigenvalues) {
            assert!((x - y).abs() < 1e-9 * y.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_bad_k() {
        let h = build_rabi_hamiltonian(&ModelSpec::rabi(1.0, 0.1, 0.0).unwrap(), 10).unwrap();
        assert!(lanczos_lowest(&h, 0, 1e-10, 1).is_err());
        assert!(lanczos_lowest(&h, 21, 1e-10, 1).is_err());
    }
}
