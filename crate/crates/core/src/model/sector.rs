//! Parity-resolved Hamiltonians.
//!
//! With ε = 0 the Hamiltonian commutes with `Π = F ⊗ (−1)^{â†â}`, where `F` flips
//! `M → −M`. In the basis of `Ĵx` eigenstates `|r⟩` (`Ĵx|r⟩ = (J − r)|r⟩`) the flip is
//! diagonal with eigenvalue `(−1)^r`, so a sector of parity `p` keeps the states
//! `|r, n⟩` with `(−1)^{r+n} = p`. Written Fock-major, each sector is block
//! tridiagonal: diagonal entries `−Δ(J − r) + ħω0 n` and couplings
//! `(2λ/√N)√(n+1) ⟨r'|Ĵz|r⟩` between adjacent photon numbers. For one qubit every
//! block has size one and the sector is a plain tridiagonal matrix.

use std::fmt;
use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::operator::{build_operator, BasisTag, OperatorKind, OperatorMatrix};
use super::{check_cutoff, jx_element, ModelSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Even, Parity::Odd];

    pub fn sign(self) -> f64 {
        match self {
            Self::Even => 1.0,
            Self::Odd => -1.0,
        }
    }

    pub(crate) fn bit(self) -> usize {
        match self {
            Self::Even => 0,
            Self::Odd => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Self::Even => Self::Odd,
            Self::Odd => Self::Even,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Even => "even",
            Self::Odd => "odd",
        })
    }
}

/// Orthogonal map from `Ĵz` eigenstates (rows, `m = J − M`) to `Ĵx` eigenstates
/// (columns, `r` with `Ĵx` eigenvalue `J − r`).
///
/// Column signs are fixed so that `UᵀĴzU` has positive superdiagonal, i.e. `Ĵz`
/// acts in the rotated basis with the same matrix elements `Ĵx` has in the
/// original one.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinFrame {
    n_qubits: usize,
    u: DMatrix<f64>,
}

impl SpinFrame {
    pub fn new(n_qubits: usize) -> Self {
        let dim = n_qubits + 1;
        if n_qubits == 1 {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            return Self {
                n_qubits,
                u: DMatrix::from_row_slice(2, 2, &[h, h, h, -h]),
            };
        }
        let j = n_qubits as f64 / 2.0;
        let mut jx = DMatrix::zeros(dim, dim);
        let mut jz = DMatrix::zeros(dim, dim);
        for m in 0..dim {
            jz[(m, m)] = j - m as f64;
            if m > 0 {
                jx[(m - 1, m)] = jx_element(n_qubits, m);
                jx[(m, m - 1)] = jx_element(n_qubits, m);
            }
        }
        let eig = SymmetricEigen::new(jx);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut u = DMatrix::zeros(dim, dim);
        for (r, &k) in order.iter().enumerate() {
            u.set_column(r, &eig.eigenvectors.column(k));
        }
        if u[(0, 0)] < 0.0 {
            u.column_mut(0).neg_mut();
        }
        for r in 1..dim {
            let elem = (u.column(r - 1).transpose() * &jz * u.column(r))[(0, 0)];
            if elem < 0.0 {
                u.column_mut(r).neg_mut();
            }
        }
        Self { n_qubits, u }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// `U[(m, r)]`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.u
    }
}

/// One parity sector of the Rabi (N = 1) or Dicke Hamiltonian at ε = 0.
#[derive(Debug, Clone)]
pub struct ParitySector {
    parity: Parity,
    n_qubits: usize,
    n_max: usize,
    level_start: Vec<usize>,
    spin_of: Vec<usize>,
    diag: Vec<f64>,
    coupling: f64,
    /// `patterns[c]`: `⟨r'|Ĵz|r⟩` from the level class `c` (allowed `r ≡ c mod 2`) to
    /// the other class, row-major with rows indexed by `r'`.
    patterns: [Vec<f64>; 2],
}

impl ParitySector {
    pub fn new(spec: &ModelSpec, n_max: usize, parity: Parity) -> Result<Self> {
        spec.validate()?;
        check_cutoff(n_max)?;
        if !spec.has_parity() {
            return Err(Error::SymmetryBroken(format!("bias ε = {} breaks parity", spec.epsilon)));
        }
        let n_q = spec.n_qubits;
        let j = spec.spin_j();
        let mut level_start = Vec::with_capacity(n_max + 2);
        let mut spin_of = Vec::new();
        let mut diag = Vec::new();
        level_start.push(0);
        for n in 0..=n_max {
            let class = (parity.bit() + n) % 2;
            for r in (class..=n_q).step_by(2) {
                spin_of.push(r);
                diag.push(-spec.delta * (j - r as f64) + spec.omega0 * n as f64);
            }
            level_start.push(spin_of.len());
        }
        let patterns = [0usize, 1].map(|class| {
            let cols: Vec<usize> = (class..=n_q).step_by(2).collect();
            let rows: Vec<usize> = ((1 - class)..=n_q).step_by(2).collect();
            let mut p = vec![0.0; rows.len() * cols.len()];
            for (a, &rp) in rows.iter().enumerate() {
                for (b, &r) in cols.iter().enumerate() {
                    if rp.abs_diff(r) == 1 {
                        p[a * cols.len() + b] = jx_element(n_q, rp.max(r));
                    }
                }
            }
            p
        });
        Ok(Self {
            parity,
            n_qubits: n_q,
            n_max,
            level_start,
            spin_of,
            diag,
            coupling: spec.collective_coupling(),
            patterns,
        })
    }

    /// Both sectors, even first.
    pub fn pair(spec: &ModelSpec, n_max: usize) -> Result<[Self; 2]> {
        Ok([
            Self::new(spec, n_max, Parity::Even)?,
            Self::new(spec, n_max, Parity::Odd)?,
        ])
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn n_levels(&self) -> usize {
        self.n_max + 1
    }

    /// Index range of photon-number level `n`.
    pub fn level(&self, n: usize) -> Range<usize> {
        self.level_start[n]..self.level_start[n + 1]
    }

    /// `(r, n)` labels of basis state `i`.
    pub fn state(&self, i: usize) -> (usize, usize) {
        let n = self.level_start.partition_point(|&s| s <= i) - 1;
        (self.spin_of[i], n)
    }

    pub fn spin_index(&self, i: usize) -> usize {
        self.spin_of[i]
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Coupling block between level `n` (columns) and `n + 1` (rows), as
    /// `(scale, pattern)`: the block is `scale * pattern`, row-major.
    pub fn coupling_block(&self, n: usize) -> (f64, &[f64]) {
        let class = (self.parity.bit() + n) % 2;
        (self.coupling * ((n + 1) as f64).sqrt(), &self.patterns[class])
    }

    /// Diagonal and off-diagonal of the sector when every level holds one state.
    pub fn tridiagonal(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.dim() != self.n_levels() {
            return None;
        }
        let off = (0..self.n_max)
            .map(|n| {
                let (s, p) = self.coupling_block(n);
                s * p[0]
            })
            .collect();
        Some((self.diag.clone(), off))
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = d * xi;
        }
        for n in 0..self.n_max {
            let lo = self.level(n);
            let hi = self.level(n + 1);
            let (s, p) = self.coupling_block(n);
            let cols = lo.len();
            for (a, row) in hi.clone().enumerate() {
                let mut acc = 0.0;
                for (b, col) in lo.clone().enumerate() {
                    let v = s * p[a * cols + b];
                    acc += v * x[col];
                    y[col] += v * x[row];
                }
                y[row] += acc;
            }
        }
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        let mut row_sums: Vec<f64> = self.diag.iter().map(|d| d.abs()).collect();
        for n in 0..self.n_max {
            let lo = self.level(n);
            let hi = self.level(n + 1);
            let (s, p) = self.coupling_block(n);
            let cols = lo.len();
            for (a, row) in hi.enumerate() {
                for (b, col) in lo.clone().enumerate() {
                    let v = (s * p[a * cols + b]).abs();
                    row_sums[row] += v;
                    row_sums[col] += v;
                }
            }
        }
        row_sums.into_iter().fold(0.0, f64::max)
    }

    pub fn to_operator(&self) -> OperatorMatrix {
        let mut upper = Vec::new();
        for (i, &d) in self.diag.iter().enumerate() {
            upper.push((i, i, d));
        }
        for n in 0..self.n_max {
            let lo = self.level(n);
            let hi = self.level(n + 1);
            let (s, p) = self.coupling_block(n);
            let cols = lo.len();
            for (a, row) in hi.enumerate() {
                for (b, col) in lo.clone().enumerate() {
                    upper.push((col, row, s * p[a * cols + b]));
                }
            }
        }
        OperatorMatrix::from_upper(self.tag(), upper)
    }

    pub fn tag(&self) -> BasisTag {
        BasisTag::Sector {
            parity: self.parity,
            n_qubits: self.n_qubits,
            n_max: self.n_max,
            dim: self.dim(),
        }
    }

    /// Splits a sector vector into one Fock-space vector per rotated spin state `r`
    /// (zero where `(r, n)` is not in the sector).
    pub fn spin_components(&self, c: &[f64]) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_max + 1]; self.n_qubits + 1];
        for n in 0..=self.n_max {
            for i in self.level(n) {
                out[self.spin_of[i]][n] = c[i];
            }
        }
        out
    }

    /// Full-space vector (spin-major, `Ĵz` basis) for sector coefficients `c`.
    pub fn lift(&self, c: &[f64], frame: &SpinFrame) -> Vec<f64> {
        assert_eq!(frame.n_qubits(), self.n_qubits);
        let fock = self.n_max + 1;
        let u = frame.matrix();
        let mut v = vec![0.0; (self.n_qubits + 1) * fock];
        for n in 0..=self.n_max {
            for i in self.level(n) {
                let r = self.spin_of[i];
                for m in 0..=self.n_qubits {
                    v[m * fock + n] += u[(m, r)] * c[i];
                }
            }
        }
        v
    }

    pub fn block_map(&self, frame: &SpinFrame) -> BlockMap {
        let fock = self.n_max + 1;
        let u = frame.matrix();
        let entries = (0..self.dim())
            .map(|i| {
                let (r, n) = self.state(i);
                (0..=self.n_qubits)
                    .filter(|&m| u[(m, r)] != 0.0)
                    .map(|m| (m * fock + n, u[(m, r)]))
                    .collect()
            })
            .collect();
        BlockMap {
            full_dim: (self.n_qubits + 1) * fock,
            entries,
        }
    }
}

/// Relation between sector coordinates and full-space coordinates: sector basis
/// vector `k` equals `Σ coef |full_index⟩` over `entries[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMap {
    pub full_dim: usize,
    pub entries: Vec<Vec<(usize, f64)>>,
}

impl BlockMap {
    pub fn lift(&self, c: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.full_dim];
        for (ck, e) in c.iter().zip(&self.entries) {
            for &(idx, coef) in e {
                v[idx] += coef * ck;
            }
        }
        v
    }

    /// Orthogonal projection of a full-space vector onto sector coordinates.
    pub fn restrict(&self, v: &[f64]) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| e.iter().map(|&(idx, coef)| coef * v[idx]).sum())
            .collect()
    }
}

/// One parity block of a full single-qubit Hamiltonian.
#[derive(Debug, Clone)]
pub struct ParityBlock {
    pub parity: Parity,
    pub matrix: OperatorMatrix,
    pub map: BlockMap,
}

/// Splits a single-qubit Hamiltonian at ε = 0 into its even and odd parity blocks.
pub fn parity_block_split(h: &OperatorMatrix) -> Result<(ParityBlock, ParityBlock)> {
    let basis = h
        .basis()
        .ok_or_else(|| Error::SymmetryBroken("matrix is already a sector block".into()))?;
    if basis.spin_dim != 2 {
        return Err(Error::InvalidOperator("parity_block_split", basis.n_qubits()));
    }
    let probe = ModelSpec::new(1.0, 0.0, 1.0, 0.0, 1)?;
    let parity_op = build_operator(OperatorKind::Parity, &probe, basis.n_max())?;
    let comm = h.mul(&parity_op)?.sub(&parity_op.mul(h)?)?;
    if comm.nnz() != 0 {
        return Err(Error::SymmetryBroken(
            "Hamiltonian does not commute with parity (ε ≠ 0?)".into(),
        ));
    }
    let frame = SpinFrame::new(1);
    let u = frame.matrix();
    let fock = basis.fock_dim;
    let n_max = basis.n_max();
    let split = |parity: Parity| -> ParityBlock {
        let r_of = |k: usize| (parity.bit() + k) % 2;
        let entries: Vec<Vec<(usize, f64)>> = (0..fock)
            .map(|k| (0..2).map(|m| (m * fock + k, u[(m, r_of(k))])).collect())
            .collect();
        let mut upper = Vec::new();
        for (k, ek) in entries.iter().enumerate() {
            // w = H b_k, accumulated sparsely by Fock index
            let mut w: Vec<(usize, f64)> = Vec::new();
            for &(j, coef) in ek {
                for (i, v) in h.row(j) {
                    w.push((i, v * coef));
                }
            }
            let mut by_level: std::collections::BTreeMap<usize, f64> = Default::default();
            for (i, wi) in w {
                let (m, l) = (i / fock, i % fock);
                if l >= k {
                    *by_level.entry(l).or_insert(0.0) += u[(m, r_of(l))] * wi;
                }
            }
            for (l, v) in by_level {
                upper.push((k, l, v));
            }
        }
        let tag = BasisTag::Sector {
            parity,
            n_qubits: 1,
            n_max,
            dim: fock,
        };
        ParityBlock {
            parity,
            matrix: OperatorMatrix::from_upper(tag, upper),
            map: BlockMap {
                full_dim: 2 * fock,
                entries,
            },
        }
    };
    Ok((split(Parity::Even), split(Parity::Odd)))
}
