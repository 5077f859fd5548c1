//! Symmetric tridiagonal eigenproblems: Sturm counts, bisection and inverse iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of eigenvalues strictly below `x`.
///
/// `e2` holds the squared off-diagonal.
pub fn sturm_count(d: &[f64], e2: &[f64], x: f64, pivmin: f64) -> usize {
    let mut q = d[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    let mut count = (q < 0.0) as usize;
    for i in 1..d.len() {
        q = d[i] - x - e2[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        count += (q < 0.0) as usize;
    }
    count
}

pub(crate) fn pivmin(e2: &[f64]) -> f64 {
    f64::MIN_POSITIVE * e2.iter().copied().fold(1.0, f64::max)
}

/// Gershgorin interval containing the whole spectrum.
pub fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..d.len() {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + e.get(i).map_or(0.0, |v| v.abs());
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let pad = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE;
    (lo - pad, hi + pad)
}

/// Refines the `k` lowest eigenvalues of a counting function by bisection.
///
/// `count(x)` must return the number of eigenvalues below `x`, and `[lo, hi]` must
/// contain the spectrum. Intervals are split until each holds one eigenvalue and
/// can no longer be halved in floating point.
pub(crate) fn bisect_lowest<F>(mut count: F, k: usize, lo: f64, hi: f64) -> Vec<f64>
where
    F: FnMut(f64) -> usize,
{
    let mut out = vec![f64::NAN; k];
    let c_hi = count(hi);
    // stack of (a, b, count(a), count(b)), restricted to indices below k
    let mut stack = vec![(lo, hi, 0usize, c_hi)];
    while let Some((a, b, ca, cb)) = stack.pop() {
        if ca >= cb || ca >= k {
            continue;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            for slot in out.iter_mut().take(cb.min(k)).skip(ca) {
                *slot = b;
            }
            continue;
        }
        let cm = count(mid).clamp(ca, cb);
        // push the upper half first so lower eigenvalues finish first
        stack.push((mid, b, cm, cb));
        stack.push((a, mid, ca, cm));
    }
    out
}

/// The `k` lowest eigenvalues, ascending.
pub fn lowest_eigenvalues(d: &[f64], e: &[f64], k: usize) -> Vec<f64> {
    let k = k.min(d.len());
    let e2: Vec<f64> = e.iter().map(|v| v * v).collect();
    let piv = pivmin(&e2);
    let (lo, hi) = gershgorin(d, e);
    bisect_lowest(|x| sturm_count(d, &e2, x, piv), k, lo, hi)
}

/// All eigenvalues, ascending, by implicit QL with Wilkinson shifts.
///
/// Absolute accuracy is `O(ε‖T‖)`; use [`lowest_eigenvalues`] when the low end
/// needs bisection accuracy.
pub fn all_eigenvalues(d: &[f64], e: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut d = d.to_vec();
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).collect();
    e.truncate(n);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                // stagnation: fall back to bisection for the remaining spectrum
                let off: Vec<f64> = e[..n - 1].to_vec();
                return lowest_eigenvalues(&d, &off, n);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

/// LU factorization with partial pivoting of `T − λI` (LAPACK `gttrf` layout).
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    fn new(d: &[f64], e: &[f64], lambda: f64) -> Self {
        let n = d.len();
        let mut dl = e.to_vec();
        let mut dd: Vec<f64> = d.iter().map(|v| v - lambda).collect();
        let mut du = e.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        let (lo, hi) = gershgorin(d, e);
        let tiny = f64::EPSILON * lo.abs().max(hi.abs()).max(1e-300);
        for i in 0..n.saturating_sub(1) {
            if dd[i].abs() >= dl[i].abs() {
                if dd[i] == 0.0 {
                    dd[i] = tiny;
                }
                let f = dl[i] / dd[i];
                dl[i] = f;
                dd[i + 1] -= f * du[i];
            } else {
                let f = dd[i] / dl[i];
                dd[i] = dl[i];
                dl[i] = f;
                let t = du[i];
                du[i] = dd[i + 1];
                dd[i + 1] = t - f * du[i];
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
                swap[i] = true;
            }
        }
        if n > 0 && dd[n - 1] == 0.0 {
            dd[n - 1] = tiny;
        }
        Self { dl, d: dd, du, du2, swap }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= self.du[i] * b[i + 1];
            }
            if i + 2 < n {
                v -= self.du2[i] * b[i + 2];
            }
            b[i] = v / self.d[i];
        }
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenvectors for the given (accurate, ascending) eigenvalues by inverse
/// iteration. Vectors whose eigenvalues lie within `1e-7·‖T‖` of each other are
/// re-orthogonalized.
pub fn eigenvectors(d: &[f64], e: &[f64], values: &[f64], seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(values.len());
    for_each_eigenvector(d, e, values, seed, |_, v| out.push(v.to_vec()));
    out
}

/// Streaming form of [`eigenvectors`]: `f(j, v_j)` is called in order and only the
/// current cluster is kept in memory.
pub fn for_each_eigenvector<F>(d: &[f64], e: &[f64], values: &[f64], seed: u64, mut f: F)
where
    F: FnMut(usize, &[f64]),
{
    let n = d.len();
    let (lo, hi) = gershgorin(d, e);
    let scale = lo.abs().max(hi.abs());
    let cluster_tol = 1e-7 * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cluster: Vec<Vec<f64>> = Vec::new();
    for (j, &lambda) in values.iter().enumerate() {
        if j > 0 && lambda - values[j - 1] > cluster_tol {
            cluster.clear();
        }
        // perturb repeated shifts so the factorizations differ within a cluster
        let shift = lambda + cluster.len() as f64 * 10.0 * f64::EPSILON * scale;
        let lu = TridiagLu::new(d, e, shift);
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for _ in 0..3 {
            lu.solve(&mut v);
            for prev in &cluster {
                let c = dot(&v, prev);
                v.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
            }
            normalize(&mut v);
        }
        if v.iter().copied().fold(0.0, |acc: f64, x| if x.abs() > acc.abs() { x } else { acc }) < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        f(j, &v);
        cluster.push(v);
    }
}

/// `y = T x`.
pub fn tridiag_matvec(d: &[f64], e: &[f64], x: &[f64], y: &mut [f64]) {
    let n = d.len();
    for i in 0..n {
        let mut v = d[i] * x[i];
        if i > 0 {
            v += e[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            v += e[i] * x[i + 1];
        }
        y[i] = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dense(d: &[f64], e: &[f64]) -> DMatrix<f64> {
        let n = d.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                d[i]
            } else if i == j + 1 {
                e[j]
            } else if j == i + 1 {
                e[i]
            } else {
                0.0
            }
        })
    }

    #[test]
    fn bisection_matches_dense() {
        let n = 60;
        let d: Vec<f64> = (0..n).map(|i| 0.1 * i as f64 - if i % 2 == 0 { 0.5 } else { -0.5 }).collect();
        let e: Vec<f64> = (0..n - 1).map(|i| 0.2 * ((i + 1) as f64).sqrt()).collect();
        let vals = all_eigenvalues(&d, &e);
        let mut reference: Vec<f64> = dense(&d, &e).symmetric_eigenvalues().iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        for (a, b) in vals.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let vecs = eigenvectors(&d, &e, &vals, 7);
        let mut y = vec![0.0; n];
        for (v, &lam) in vecs.iter().zip(&vals) {
            tridiag_matvec(&d, &e, v, &mut y);
            let res: f64 = y.iter().zip(v).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
            assert!(res < 1e-12);
        }
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&vecs[i], &vecs[j]) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_diagonal_blocks() {
        // direct sum of two identical blocks: every eigenvalue is doubly degenerate
        let d = vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0];
        let e = vec![0.5, 0.5, 0.0, 0.5, 0.5];
        let vals = all_eigenvalues(&d, &e);
        let vecs = eigenvectors(&d, &e, &vals, 1);
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&vecs[i], &vecs[j]) - want).abs() < 1e-10);
            }
        }
        assert!((vals[0] - vals[1]).abs() < 1e-14);
    }

    #[test]
    fn ql_matches_bisection() {
        let n = 300;
        let d: Vec<f64> = (0..n).map(|i| 0.01 * i as f64 - if i % 2 == 0 { 0.5 } else { -0.5 }).collect();
        let e: Vec<f64> = (1..n).map(|i| 0.3 * (i as f64).sqrt()).collect();
        let ql = all_eigenvalues(&d, &e);
        let bis = lowest_eigenvalues(&d, &e, n);
        let scale = gershgorin(&d, &e).1.abs().max(1.0);
        for (a, b) in ql.iter().zip(&bis) {
            assert!((a - b).abs() < 1e-12 * scale, "{a} vs {b}");
        }
        assert_eq!(all_eigenvalues(&[2.0], &[]), vec![2.0]);
    }

    #[test]
    fn two_by_two() {
        let vals = lowest_eigenvalues(&[0.0, 0.0], &[-0.5], 2);
        assert_eq!(vals.len(), 2);
        assert!((vals[0] + 0.5).abs() < 1e-16 && (vals[1] - 0.5).abs() < 1e-16);
        let vals = all_eigenvalues(&[0.0, 0.0], &[-0.5]);
        assert!((vals[0] + 0.5).abs() < 4.0 * f64::EPSILON && (vals[1] - 0.5).abs() < 4.0 * f64::EPSILON);
    }
}
