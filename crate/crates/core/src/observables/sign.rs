use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};

/// Below this many Fock levels bilinear forms are summed directly.
const DIRECT_LIMIT: usize = 512;

/// `⟨m|sgn(x̂)|n⟩` in the Fock basis, `x̂ ∝ â + â†`.
///
/// For `m` even and `n` odd the element is `φ_m(0) φ'_n(0) / (n − m)`, with
/// oscillator eigenfunctions evaluated at the origin through the half-line
/// recurrences `φ_m(0) = −√((m−1)/m) φ_{m−2}(0)` and `φ'_n(0) = √(2n) φ_{n−1}(0)`.
/// Elements with `m + n` even vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct SignOperator {
    n_max: usize,
    /// `φ_m(0)`, zero for odd `m`
    phi: Vec<f64>,
    /// `φ'_n(0)`, zero for even `n`
    dphi: Vec<f64>,
}

impl SignOperator {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(invalid("n_max", "sign operator needs n_max >= 1"));
        }
        let len = n_max + 1;
        let mut phi = vec![0.0; len];
        let mut dphi = vec![0.0; len];
        phi[0] = std::f64::consts::PI.powf(-0.25);
        for m in (2..len).step_by(2) {
            phi[m] = -(((m - 1) as f64) / m as f64).sqrt() * phi[m - 2];
        }
        for n in (1..len).step_by(2) {
            dphi[n] = (2.0 * n as f64).sqrt() * phi[n - 1];
        }
        Ok(Self { n_max, phi, dphi })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn element(&self, m: usize, n: usize) -> f64 {
        if (m + n) % 2 == 0 {
            return 0.0;
        }
        let (e, o) = if m % 2 == 0 { (m, n) } else { (n, m) };
        self.phi[e] * self.dphi[o] / (o as f64 - e as f64)
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim(), self.dim(), |m, n| self.element(m, n))
    }

    /// `⟨y|sgn(x̂)|z⟩` for Fock vectors of length at most `n_max + 1`.
    pub fn bilinear(&self, y: &[f64], z: &[f64]) -> f64 {
        assert!(y.len() <= self.dim() && z.len() <= self.dim(), "vector longer than sign operator");
        self.half(y, z) + self.half(z, y)
    }

    pub fn expectation(&self, y: &[f64]) -> f64 {
        2.0 * self.half(y, y)
    }

    /// `Σ_{m even, n odd} u_m S_mn w_n`.
    fn half(&self, u: &[f64], w: &[f64]) -> f64 {
        let lu = support(u, 0);
        let lw = support(w, 1);
        if lu == 0 || lw == 0 {
            return 0.0;
        }
        if lu.max(lw) <= DIRECT_LIMIT {
            let mut acc = 0.0;
            for m in (0..lu).step_by(2) {
                let um = u[m] * self.phi[m];
                if um == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for n in (1..lw).step_by(2) {
                    inner += w[n] * self.dphi[n] / (n as f64 - m as f64);
                }
                acc += um * inner;
            }
            return acc;
        }
        let plan = CorrelationPlan::new(lu.max(lw));
        let a = plan.forward_even(u, &self.phi);
        let b = plan.forward_odd(w, &self.dphi);
        let mut acc = CorrelationAccumulator::new(&plan);
        acc.add(1.0, &a, &b);
        acc.finish(&plan)
    }

    pub(crate) fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub(crate) fn dphi(&self) -> &[f64] {
        &self.dphi
    }
}

/// One past the last nonzero entry at indices of the given parity.
fn support(v: &[f64], parity: usize) -> usize {
    let mut end = v.len();
    while end > 0 && (v[end - 1] == 0.0 || (end - 1) % 2 != parity) {
        end -= 1;
    }
    end
}

/// FFT machinery for sums `Σ_{m even, n odd} U_m W_n / (n − m)` over many vector
/// pairs; spectra of all pairs can be accumulated before a single inverse transform.
pub(crate) struct CorrelationPlan {
    len: usize,
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl CorrelationPlan {
    pub(crate) fn new(len: usize) -> Self {
        let size = smooth_size(2 * len);
        let mut planner = FftPlanner::new();
        Self {
            len,
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    fn transform(&self, v: &[f64], weight: &[f64], parity: usize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for i in (parity..v.len().min(self.len)).step_by(2) {
            buf[i].re = v[i] * weight[i];
        }
        self.forward.process(&mut buf);
        buf
    }

    /// Spectra of two weighted real sequences `(values, weights, parity)` from one
    /// complex transform.
    pub(crate) fn forward_two(&self, a: (&[f64], &[f64], usize), b: (&[f64], &[f64], usize)) -> [Vec<Complex64>; 2] {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for i in (a.2..a.0.len().min(self.len)).step_by(2) {
            buf[i].re = a.0[i] * a.1[i];
        }
        for i in (b.2..b.0.len().min(self.len)).step_by(2) {
            buf[i].im = b.0[i] * b.1[i];
        }
        self.forward.process(&mut buf);
        let n = self.size;
        let mut fa = vec![Complex64::new(0.0, 0.0); n];
        let mut fb = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let z = buf[k];
            let zc = buf[(n - k) % n].conj();
            fa[k] = 0.5 * (z + zc);
            let d = 0.5 * (z - zc);
            fb[k] = Complex64::new(d.im, -d.re);
        }
        [fa, fb]
    }

    pub(crate) fn forward_even(&self, v: &[f64], phi: &[f64]) -> Vec<Complex64> {
        self.transform(v, phi, 0)
    }

    pub(crate) fn forward_odd(&self, v: &[f64], dphi: &[f64]) -> Vec<Complex64> {
        self.transform(v, dphi, 1)
    }

    pub(crate) fn size(&self) -> usize {
        self.size
    }

    /// Sum from an accumulated cross spectrum `Σ conj(A)·B`.
    pub(crate) fn finish_spectrum(&self, mut spectrum: Vec<Complex64>) -> f64 {
        self.inverse.process(&mut spectrum);
        let scale = 1.0 / self.size as f64;
        // corr(d) = Σ_m U_m W_{m+d} sits at index d mod size
        let mut acc = 0.0;
        for d in (1..self.len).step_by(2) {
            acc += (spectrum[d].re - spectrum[self.size - d].re) / d as f64;
        }
        acc * scale
    }
}

/// Smallest `2^a 3^b >= n`.
fn smooth_size(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p3 = 1;
    while p3 < best {
        let mut m = p3;
        while m < n {
            m *= 2;
        }
        best = best.min(m);
        p3 *= 3;
    }
    best
}

pub(crate) struct CorrelationAccumulator {
    spectrum: Vec<Complex64>,
}

impl CorrelationAccumulator {
    pub(crate) fn new(plan: &CorrelationPlan) -> Self {
        Self {
            spectrum: vec![Complex64::new(0.0, 0.0); plan.size],
        }
    }

    /// Adds `weight · Σ U_m W_n / (n − m)` for transformed even part `a`, odd part `b`.
    pub(crate) fn add(&mut self, weight: f64, a: &[Complex64], b: &[Complex64]) {
        for ((s, x), y) in self.spectrum.iter_mut().zip(a).zip(b) {
            *s += weight * x.conj() * y;
        }
    }

    pub(crate) fn finish(self, plan: &CorrelationPlan) -> f64 {
        plan.finish_spectrum(self.spectrum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_elements() {
        let s = SignOperator::new(8).unwrap();
        assert!((s.element(0, 1) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert_eq!(s.element(0, 0), 0.0);
        assert_eq!(s.element(3, 5), 0.0);
        assert_eq!(s.element(2, 1), s.element(1, 2));
    }

    #[test]
    fn fft_path_matches_direct_sum() {
        let n = 1500;
        let s = SignOperator::new(n).unwrap();
        let y: Vec<f64> = (0..=n).map(|i| ((i as f64) * 0.37).sin() / (1.0 + i as f64).sqrt()).collect();
        let z: Vec<f64> = (0..=n).map(|i| ((i as f64) * 0.11).cos() * (-(i as f64) / 400.0).exp()).collect();
        let fast = s.bilinear(&y, &z);
        let mut slow = 0.0;
        for m in 0..=n {
            for k in 0..=n {
                slow += y[m] * s.element(m, k) * z[k];
            }
        }
        assert!((fast - slow).abs() < 1e-11 * slow.abs().max(1.0), "{fast} vs {slow}");
    }

    #[test]
    fn paired_transform_matches_single() {
        let plan = CorrelationPlan::new(40);
        let s = SignOperator::new(40).unwrap();
        let u: Vec<f64> = (0..41).map(|i| (i as f64 * 0.3).sin()).collect();
        let w: Vec<f64> = (0..35).map(|i| (i as f64 * 0.7).cos()).collect();
        let [a, b] = plan.forward_two((&u, s.phi(), 0), (&w, s.dphi(), 1));
        let a1 = plan.forward_even(&u, s.phi());
        let b1 = plan.forward_odd(&w, s.dphi());
        for k in 0..plan.size() {
            assert!((a[k] - a1[k]).norm() < 1e-12);
            assert!((b[k] - b1[k]).norm() < 1e-12);
        }
        assert_eq!(smooth_size(80), 81);
        assert_eq!(smooth_size(12004), 12288);
    }

    #[test]
    fn involution_deficit_shrinks_with_cutoff() {
        // S² restricted to low levels approaches the identity as the cutoff grows
        let mut prev = f64::INFINITY;
        for n_max in [16, 64, 256] {
            let s = SignOperator::new(n_max).unwrap().matrix();
            let sq = &s * &s;
            let mut worst: f64 = 0.0;
            for i in 0..=n_max / 2 {
                for j in 0..=n_max / 2 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((sq[(i, j)] - want).abs());
                }
            }
            assert!(worst < prev);
            prev = worst;
        }
    }
}
