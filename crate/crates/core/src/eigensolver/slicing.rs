//! Spectrum slicing for block-tridiagonal parity sectors.
//!
//! Eigenvalues come from bisection on inertia counts of `H − xI` (block Schur
//! complements; plain Sturm sequences when every block is 1×1). The ground vector
//! comes from inverse iteration with a shift just below `E0`, where `H − σI` is
//! positive definite and the block factorization is stable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tridiag::{bisect_lowest, pivmin, sturm_count};
use crate::error::{Error, Result};
use crate::model::ParitySector;

/// Block-tridiagonal symmetric matrix with diagonal diagonal-blocks.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    diag: Vec<f64>,
    /// `off[k]`: block coupling level `k` (columns) to `k + 1` (rows), row-major.
    off: Vec<Vec<f64>>,
    max_block: usize,
}

impl BlockTridiagonal {
    pub fn from_sector(sector: &ParitySector) -> Self {
        let levels = sector.n_levels();
        let sizes: Vec<usize> = (0..levels).map(|n| sector.level(n).len()).collect();
        let offsets: Vec<usize> = (0..levels).map(|n| sector.level(n).start).collect();
        let off = (0..levels - 1)
            .map(|n| {
                let (s, p) = sector.coupling_block(n);
                p.iter().map(|v| s * v).collect()
            })
            .collect();
        let max_block = sizes.iter().copied().max().unwrap_or(1);
        Self {
            sizes,
            offsets,
            diag: sector.diagonal().to_vec(),
            off,
            max_block,
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    fn scalar(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        (self.max_block == 1).then(|| (self.diag.clone(), self.off.iter().map(|b| b[0] * b[0]).collect()))
    }

    /// Gershgorin interval.
    pub fn bounds(&self) -> (f64, f64) {
        let mut radius = vec![0.0; self.dim()];
        for (k, b) in self.off.iter().enumerate() {
            let cols = self.sizes[k];
            for (idx, v) in b.iter().enumerate() {
                radius[self.offsets[k + 1] + idx / cols] += v.abs();
                radius[self.offsets[k] + idx % cols] += v.abs();
            }
        }
        let lo = self.diag.iter().zip(&radius).map(|(d, r)| d - r).fold(f64::INFINITY, f64::min);
        let hi = self.diag.iter().zip(&radius).map(|(d, r)| d + r).fold(f64::NEG_INFINITY, f64::max);
        let pad = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE;
        (lo - pad, hi + pad)
    }

    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.bounds();
        lo.abs().max(hi.abs())
    }

    /// Number of eigenvalues below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut ws = Workspace::new(self.max_block);
        self.count_with(x, &mut ws)
    }

    fn count_with(&self, x: f64, ws: &mut Workspace) -> usize {
        let piv = f64::MIN_POSITIVE * self.norm_hint();
        let mut count = 0;
        let mut prev = self.sizes[0];
        ws.load_diag(&self.diag[..prev], x);
        count += ldl_in_place(&mut ws.s, prev, piv);
        for k in 1..self.sizes.len() {
            let s = self.sizes[k];
            let b = &self.off[k - 1];
            // M = S_{k-1}^{-1} Bᵀ, column by column
            for a in 0..s {
                let col = &mut ws.m[a * prev..(a + 1) * prev];
                col.copy_from_slice(&b[a * prev..(a + 1) * prev]);
                ldl_solve(&ws.s, prev, col);
            }
            let start = self.offsets[k];
            let mut next = std::mem::take(&mut ws.next);
            next[..s * s].iter_mut().for_each(|v| *v = 0.0);
            for a in 0..s {
                next[a * s + a] = self.diag[start + a] - x;
                for c in 0..=a {
                    let mut acc = 0.0;
                    for t in 0..prev {
                        acc += b[a * prev + t] * ws.m[c * prev + t];
                    }
                    next[a * s + c] -= acc;
                    if c != a {
                        next[c * s + a] = next[a * s + c];
                    }
                }
            }
            ws.s[..s * s].copy_from_slice(&next[..s * s]);
            ws.next = next;
            count += ldl_in_place(&mut ws.s, s, piv);
            prev = s;
        }
        count
    }

    fn norm_hint(&self) -> f64 {
        self.off
            .iter()
            .flat_map(|b| b.iter())
            .map(|v| v * v)
            .fold(1.0, f64::max)
    }

    /// The `k` lowest eigenvalues, ascending.
    pub fn lowest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let k = k.min(self.dim());
        let (lo, hi) = self.bounds();
        if let Some((d, e2)) = self.scalar() {
            let piv = pivmin(&e2);
            return bisect_lowest(|x| sturm_count(&d, &e2, x, piv), k, lo, hi);
        }
        let mut ws = Workspace::new(self.max_block);
        bisect_lowest(|x| self.count_with(x, &mut ws), k, lo, hi)
    }

    /// Block LDLᵀ of `H − σI`; fails if `H − σI` is not positive definite.
    fn factor_pd(&self, sigma: f64) -> Result<PdFactor> {
        let mut chol = Vec::with_capacity(self.sizes.len());
        let mut prev_s = 0;
        for k in 0..self.sizes.len() {
            let s = self.sizes[k];
            let start = self.offsets[k];
            let mut sk = vec![0.0; s * s];
            for a in 0..s {
                sk[a * s + a] = self.diag[start + a] - sigma;
            }
            if k > 0 {
                let b = &self.off[k - 1];
                let prev: &Vec<f64> = &chol[k - 1];
                let mut m = vec![0.0; s * prev_s];
                for a in 0..s {
                    let col = &mut m[a * prev_s..(a + 1) * prev_s];
                    col.copy_from_slice(&b[a * prev_s..(a + 1) * prev_s]);
                    ldl_solve(prev, prev_s, col);
                }
                for a in 0..s {
                    for c in 0..s {
                        let mut acc = 0.0;
                        for t in 0..prev_s {
                            acc += b[a * prev_s + t] * m[c * prev_s + t];
                        }
                        sk[a * s + c] -= acc;
                    }
                }
            }
            if ldl_in_place(&mut sk, s, 0.0) != 0 || (0..s).any(|a| sk[a * s + a] <= 0.0) {
                return Err(Error::NoConvergence(format!(
                    "shift {sigma} is not below the lowest eigenvalue"
                )));
            }
            chol.push(sk);
            prev_s = s;
        }
        Ok(PdFactor { chol })
    }

    /// Solves `(H − σI) x = b` in place using a factorization from [`Self::factor_pd`].
    fn solve_pd(&self, f: &PdFactor, b: &mut [f64]) {
        let levels = self.sizes.len();
        // forward: y_k = b_k − B_{k-1} S_{k-1}^{-1} y_{k-1}
        let mut tmp = vec![0.0; self.max_block];
        for k in 1..levels {
            let ps = self.sizes[k - 1];
            let s = self.sizes[k];
            let (po, o) = (self.offsets[k - 1], self.offsets[k]);
            tmp[..ps].copy_from_slice(&b[po..po + ps]);
            ldl_solve(&f.chol[k - 1], ps, &mut tmp[..ps]);
            let blk = &self.off[k - 1];
            for a in 0..s {
                let mut acc = 0.0;
                for t in 0..ps {
                    acc += blk[a * ps + t] * tmp[t];
                }
                b[o + a] -= acc;
            }
        }
        // backward: x_k = S_k^{-1}(y_k − B_kᵀ x_{k+1})
        for k in (0..levels).rev() {
            let s = self.sizes[k];
            let o = self.offsets[k];
            if k + 1 < levels {
                let ns = self.sizes[k + 1];
                let no = self.offsets[k + 1];
                let blk = &self.off[k];
                for t in 0..s {
                    let mut acc = 0.0;
                    for a in 0..ns {
                        acc += blk[a * s + t] * b[no + a];
                    }
                    b[o + t] -= acc;
                }
            }
            ldl_solve(&f.chol[k], s, &mut b[o..o + s]);
        }
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = d * xi;
        }
        for (k, blk) in self.off.iter().enumerate() {
            let cols = self.sizes[k];
            let (lo, hi) = (self.offsets[k], self.offsets[k + 1]);
            for a in 0..self.sizes[k + 1] {
                for t in 0..cols {
                    let v = blk[a * cols + t];
                    y[hi + a] += v * x[lo + t];
                    y[lo + t] += v * x[hi + a];
                }
            }
        }
    }

    /// Ground state by shifted inverse iteration.
    ///
    /// `e0` and `e1` are the two lowest eigenvalues of this matrix. Returns the
    /// normalized vector and its residual norm `‖Hv − e0 v‖`.
    pub fn ground_vector(&self, e0: f64, e1: f64, seed: u64) -> Result<(Vec<f64>, f64)> {
        let n = self.dim();
        let norm = self.norm_bound();
        let gap = (e1 - e0).max(0.0);
        let mut offset = (0.01 * gap).max(1e3 * f64::EPSILON * norm);
        let factor = loop {
            match self.factor_pd(e0 - offset) {
                Ok(f) => break f,
                Err(_) if offset < norm => offset *= 4.0,
                Err(e) => return Err(e),
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        normalize(&mut v);
        // two polishing steps after the iterate settles
        let mut settled = 0;
        for _ in 0..60 {
            let mut w = v.clone();
            self.solve_pd(&factor, &mut w);
            normalize(&mut w);
            if dot(&w, &v) < 0.0 {
                w.iter_mut().for_each(|x| *x = -*x);
            }
            let change = w.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            v = w;
            if change < 1e-14 {
                settled += 1;
                if settled > 2 {
                    break;
                }
            }
        }
        let mut hv = vec![0.0; n];
        self.apply(&v, &mut hv);
        let residual = hv.iter().zip(&v).map(|(h, x)| (h - e0 * x).powi(2)).sum::<f64>().sqrt();
        Ok((v, residual))
    }
}

struct PdFactor {
    chol: Vec<Vec<f64>>,
}

struct Workspace {
    s: Vec<f64>,
    next: Vec<f64>,
    m: Vec<f64>,
}

impl Workspace {
    fn new(max_block: usize) -> Self {
        Self {
            s: vec![0.0; max_block * max_block],
            next: vec![0.0; max_block * max_block],
            m: vec![0.0; max_block * max_block],
        }
    }

    fn load_diag(&mut self, d: &[f64], x: f64) {
        let s = d.len();
        self.s[..s * s].iter_mut().for_each(|v| *v = 0.0);
        for (a, v) in d.iter().enumerate() {
            self.s[a * s + a] = v - x;
        }
    }
}

/// Unpivoted LDLᵀ of a small symmetric `s×s` row-major matrix, in place (unit `L`
/// below the diagonal, `D` on it). Returns the number of negative pivots. Pivots
/// smaller than `piv` in magnitude are replaced by `-piv`.
fn ldl_in_place(a: &mut [f64], s: usize, piv: f64) -> usize {
    let mut neg = 0;
    for j in 0..s {
        let mut dj = a[j * s + j];
        for t in 0..j {
            dj -= a[j * s + t] * a[j * s + t] * a[t * s + t];
        }
        if dj.abs() < piv {
            dj = -piv;
        }
        a[j * s + j] = dj;
        neg += (dj < 0.0) as usize;
        for i in j + 1..s {
            let mut v = a[i * s + j];
            for t in 0..j {
                v -= a[i * s + t] * a[j * s + t] * a[t * s + t];
            }
            a[i * s + j] = v / dj;
        }
    }
    neg
}

fn ldl_solve(f: &[f64], s: usize, b: &mut [f64]) {
    for i in 0..s {
        for t in 0..i {
            b[i] -= f[i * s + t] * b[t];
        }
    }
    for i in 0..s {
        b[i] /= f[i * s + i];
    }
    for i in (0..s).rev() {
        for t in i + 1..s {
            b[i] -= f[t * s + i] * b[t];
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelSpec, Parity};

    fn dense_sorted(sector: &ParitySector) -> Vec<f64> {
        let mut v: Vec<f64> = sector.to_operator().to_dense().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn block_counts_match_dense() {
        for n_q in [1, 2, 3, 5] {
            let spec = ModelSpec::from_ratios(0.1, 1.3, n_q).unwrap();
            for parity in Parity::BOTH {
                let sector = ParitySector::new(&spec, 20, parity).unwrap();
                let bt = BlockTridiagonal::from_sector(&sector);
                let reference = dense_sorted(&sector);
                let got = bt.lowest_eigenvalues(11);
                for (a, b) in got.iter().zip(&reference) {
                    assert!((a - b).abs() < 1e-11, "N={n_q} {parity}: {a} vs {b}");
                }
                for x in [-2.0, -0.31, 0.013, 0.71] {
                    let want = reference.iter().filter(|&&e| e < x).count();
                    assert_eq!(bt.count_below(x), want, "N={n_q} {parity} x={x}");
                }
            }
        }
    }

    #[test]
    fn ground_vector_residual() {
        for n_q in [1, 4] {
            let spec = ModelSpec::from_ratios(0.05, 1.2, n_q).unwrap();
            let sector = ParitySector::new(&spec, 40, Parity::Even).unwrap();
            let bt = BlockTridiagonal::from_sector(&sector);
            let e = bt.lowest_eigenvalues(2);
            let (v, res) = bt.ground_vector(e[0], e[1], 1).unwrap();
            assert!(res < 1e-12, "residual {res}");
            assert!((dot(&v, &v) - 1.0).abs() < 1e-14);
        }
    }
}
