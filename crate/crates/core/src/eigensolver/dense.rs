use nalgebra::SymmetricEigen;

use super::{residual_norm, tridiag, SpectrumResult, SymmetricOperator};
use crate::error::{Error, Result};
use crate::model::OperatorMatrix;

pub const DEFAULT_DENSE_CAP: usize = 6000;

/// Full eigendecomposition with the default dimension cap.
pub fn dense_eigh(h: &OperatorMatrix, want_vectors: bool) -> Result<SpectrumResult> {
    dense_eigh_capped(h, want_vectors, DEFAULT_DENSE_CAP)
}

/// Full eigendecomposition of `h`.
///
/// Tridiagonal matrices (every parity sector of the single-qubit model) go through
/// bisection and inverse iteration; anything else through nalgebra's implicit QR.
/// `residual_norms` is filled only when vectors are requested.
pub fn dense_eigh_capped(h: &OperatorMatrix, want_vectors: bool, cap: usize) -> Result<SpectrumResult> {
    let n = h.dim();
    if n > cap {
        return Err(Error::DenseCapExceeded { dim: n, cap });
    }
    let n_max = h.tag().n_max();
    let (values, vectors) = if h.bandwidth() <= 1 {
        let d: Vec<f64> = (0..n).map(|i| h.get(i, i)).collect();
        let e: Vec<f64> = (1..n).map(|i| h.get(i, i - 1)).collect();
        let values = tridiag::lowest_eigenvalues(&d, &e, n);
        let vectors = want_vectors.then(|| tridiag::eigenvectors(&d, &e, &values, super::DEFAULT_SEED));
        (values, vectors)
    } else {
        let eig = SymmetricEigen::try_new(h.to_dense(), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::NoConvergence("dense QR iteration cap reached".into()))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = want_vectors.then(|| {
            order
                .iter()
                .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
                .collect()
        });
        (values, vectors)
    };
    let mut result = SpectrumResult::new(values, n_max);
    if let Some(vecs) = vectors {
        let norm = h.norm_bound();
        result.residual_norms = vecs
            .iter()
            .zip(&result.eigenvalues)
            .map(|(v, &e)| residual_norm(h, v, e))
            .collect();
        result.converged = result.residual_norms.iter().all(|&r| r <= 1e-9 * norm.max(1.0));
        result.eigenvectors = Some(vecs);
    }
    Ok(result)
}

impl SymmetricOperator for OperatorMatrix {
    fn dim(&self) -> usize {
        OperatorMatrix::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }

    fn norm_bound(&self) -> f64 {
        OperatorMatrix::norm_bound(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_rabi_hamiltonian, ModelSpec};

    #[test]
    fn decoupled_rabi_levels() {
        let spec = ModelSpec::rabi(1.0, 0.1, 0.0).unwrap();
        let r = dense_eigh(&build_rabi_hamiltonian(&spec, 16).unwrap(), true).unwrap();
        let mut want: Vec<f64> = (0..=16).flat_map(|n| [-0.5 + 0.1 * n as f64, 0.5 + 0.1 * n as f64]).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in r.eigenvalues.iter().zip(&want) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(r.converged);
        assert!(r.orthonormality_error().unwrap() < 1e-10);
    }

    #[test]
    fn displaced_oscillator() {
        let spec = ModelSpec::rabi(0.0, 0.1, 0.2).unwrap();
        let r = dense_eigh(&build_rabi_hamiltonian(&spec, 80).unwrap(), false).unwrap();
        assert!((r.eigenvalues[0] + 0.4).abs() < 1e-10);
        assert!((r.eigenvalues[1] + 0.4).abs() < 1e-10);
        assert!((r.eigenvalues[2] + 0.3).abs() < 1e-10);
    }

    #[test]
    fn cap_is_enforced() {
        let spec = ModelSpec::rabi(1.0, 0.1, 0.1).unwrap();
        let h = build_rabi_hamiltonian(&spec, 40).unwrap();
        assert!(matches!(dense_eigh_capped(&h, false, 50), Err(Error::DenseCapExceeded { dim: 82, cap: 50 })));
    }
}
