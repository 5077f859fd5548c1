//! Independent reference computations for validating rabi-core. The numerical
//! acceptance harness is `tests/acceptance.rs`.

use nalgebra::DMatrix;

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for i in 0..order {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Oscillator eigenfunctions `ψ_0..ψ_n_max` at `x`.
fn hermite_functions(n_max: usize, x: f64) -> Vec<f64> {
    let mut psi = vec![0.0; n_max + 1];
    psi[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    if n_max >= 1 {
        psi[1] = std::f64::consts::SQRT_2 * x * psi[0];
    }
    for n in 1..n_max {
        let k = n as f64;
        psi[n + 1] = (2.0 / (k + 1.0)).sqrt() * x * psi[n] - (k / (k + 1.0)).sqrt() * psi[n - 1];
    }
    psi
}

/// `2 ∫_0^L ψ_m ψ_n dx` by composite Gauss-Legendre on `panels` equal panels.
fn half_line_overlaps(n_max: usize, length: f64, panels: usize) -> DMatrix<f64> {
    let (nodes, weights) = gauss_legendre(24);
    let h = length / panels as f64;
    let mut out = DMatrix::<f64>::zeros(n_max + 1, n_max + 1);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (t, w) in nodes.iter().zip(&weights) {
            let psi = hermite_functions(n_max, mid + 0.5 * h * t);
            let wt = 2.0 * w * 0.5 * h;
            for m in 0..=n_max {
                for n in ((m + 1)..=n_max).step_by(2) {
                    out[(m, n)] += wt * psi[m] * psi[n];
                }
            }
        }
    }
    for m in 0..=n_max {
        for n in (m + 1)..=n_max {
            out[(n, m)] = out[(m, n)];
        }
    }
    out
}

/// `⟨m|sgn(x)|n⟩` by adaptive panel doubling until successive refinements agree to
/// `tol`. The integration range extends well past the classical turning point.
pub fn sign_matrix_by_quadrature(n_max: usize, tol: f64) -> DMatrix<f64> {
    let length = (2.0 * n_max as f64 + 1.0).sqrt() + 12.0;
    let mut panels = 16;
    let mut prev = half_line_overlaps(n_max, length, panels);
    loop {
        panels *= 2;
        let next = half_line_overlaps(n_max, length, panels);
        let change = (&next - &prev).amax();
        prev = next;
        if change < tol || panels > 4096 {
            return prev;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rabi_core::observables::SignOperator;

    #[test]
    fn sign_matrix_matches_quadrature() {
        for n_max in [1, 5, 24, 128] {
            let reference = sign_matrix_by_quadrature(n_max, 1e-14);
            let s = SignOperator::new(n_max).unwrap().matrix();
            let err = (&s - &reference).amax();
            assert!(err < 1e-10, "n_max = {n_max}: {err:e}");
        }
    }

    #[test]
    fn quadrature_reproduces_closed_form() {
        let s = sign_matrix_by_quadrature(1, 1e-14);
        assert!((s[(0, 1)] - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-13);
        assert_eq!(s[(0, 0)], 0.0);
    }
}
