use nalgebra::DMatrix;

use super::{check_cutoff, jx_element, ModelSpec, Parity};
use crate::error::{Error, Result};

/// Tensor-product layout of a full-space vector: spin index major, Fock index minor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    pub spin_dim: usize,
    pub fock_dim: usize,
}

impl Basis {
    pub fn new(n_qubits: usize, n_max: usize) -> Self {
        Self {
            spin_dim: n_qubits + 1,
            fock_dim: n_max + 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.spin_dim * self.fock_dim
    }

    #[inline]
    pub fn index(&self, m: usize, n: usize) -> usize {
        m * self.fock_dim + n
    }

    pub fn n_max(&self) -> usize {
        self.fock_dim - 1
    }

    pub fn n_qubits(&self) -> usize {
        self.spin_dim - 1
    }
}

/// Label of the ordering a matrix is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    /// Full space, spin index major and Fock index minor.
    SpinFock(Basis),
    /// One parity sector of the Jx-rotated basis, Fock index major.
    Sector {
        parity: Parity,
        n_qubits: usize,
        n_max: usize,
        dim: usize,
    },
}

impl BasisTag {
    pub fn dim(&self) -> usize {
        match self {
            Self::SpinFock(b) => b.dim(),
            Self::Sector { dim, .. } => *dim,
        }
    }

    pub fn n_max(&self) -> usize {
        match self {
            Self::SpinFock(b) => b.n_max(),
            Self::Sector { n_max, .. } => *n_max,
        }
    }
}

impl From<Basis> for BasisTag {
    fn from(b: Basis) -> Self {
        Self::SpinFock(b)
    }
}

/// Sparse real matrix in compressed-row layout.
///
/// Hamiltonians and Hermitian observables are stored with both triangles present
/// and bit-identical mirrored entries; the ladder operators `â`, `â†` are the only
/// non-symmetric matrices produced by the builders.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    tag: BasisTag,
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl OperatorMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed, zeros dropped.
    pub fn from_triplets(tag: impl Into<BasisTag>, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        let tag = tag.into();
        let dim = tag.dim();
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < dim && j < dim, "triplet ({i},{j}) outside dimension {dim}");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((i, j));
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = Self {
            tag,
            dim,
            row_ptr,
            col_idx,
            values,
        };
        m.drop_zeros();
        m
    }

    /// Builds a symmetric matrix from upper-triangle entries (`row <= col`); the lower
    /// triangle is mirrored so transposed entries are bit-identical.
    pub fn from_upper(tag: impl Into<BasisTag>, upper: Vec<(usize, usize, f64)>) -> Self {
        let mut all = Vec::with_capacity(2 * upper.len());
        for (i, j, v) in upper {
            debug_assert!(i <= j);
            all.push((i, j, v));
            if i != j {
                all.push((j, i, v));
            }
        }
        Self::from_triplets(tag, all)
    }

    fn drop_zeros(&mut self) {
        let dim = self.dim();
        let mut new_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(self.col_idx.len());
        let mut vals = Vec::with_capacity(self.values.len());
        for i in 0..dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.values[k] != 0.0 {
                    cols.push(self.col_idx[k]);
                    vals.push(self.values[k]);
                }
            }
            new_ptr[i + 1] = cols.len();
        }
        self.row_ptr = new_ptr;
        self.col_idx = cols;
        self.values = vals;
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    /// Spin–Fock layout, or `None` for a parity-sector matrix.
    pub fn basis(&self) -> Option<Basis> {
        match self.tag {
            BasisTag::SpinFock(b) => Some(b),
            BasisTag::Sector { .. } => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    /// All stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.dim())
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    /// `⟨x|A|y⟩` for real vectors.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.dim())
            .map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>())
            .sum()
    }

    pub fn expectation(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// True iff every stored `(i, j, v)` has a stored `(j, i, v)` with identical bits.
    pub fn is_symmetric(&self) -> bool {
        (0..self.dim()).all(|i| {
            self.row(i)
                .all(|(j, v)| self.get(j, i).to_bits() == v.to_bits())
        })
    }

    /// Largest |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.dim())
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Sparse product `self * other`.
    pub fn mul(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.tag != other.tag {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let mut trip = Vec::new();
        for i in 0..self.dim() {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    trip.push((i, j, a * b));
                }
            }
        }
        Ok(OperatorMatrix::from_triplets(self.tag, trip))
    }

    /// Entries of `self - other`.
    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.tag != other.tag {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let mut trip = self.triplets();
        trip.extend(other.triplets().into_iter().map(|(i, j, v)| (i, j, -v)));
        Ok(OperatorMatrix::from_triplets(self.tag, trip))
    }

    /// Frobenius norm of the commutator `[self, other]`.
    pub fn commutator_norm(&self, other: &OperatorMatrix) -> Result<f64> {
        let c = self.mul(other)?.sub(&other.mul(self)?)?;
        Ok(c.values.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

/// Operators available from [`build_operator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    Annihilate,
    Create,
    /// `(â + â†)/2`.
    FieldX,
    /// `−(â† − â)²/2`, normalized so that `⟨0|p²|0⟩ = 1/2`.
    PSquared,
    SigmaZ,
    SigmaX,
    Jz,
    Jx,
    /// Spin flip `M → −M` times `(−1)^{â†â}`; reduces to `σx ⊗ (−1)^{â†â}` for one qubit.
    Parity,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Annihilate => "annihilate",
            Self::Create => "create",
            Self::FieldX => "field_x",
            Self::PSquared => "p_squared",
            Self::SigmaZ => "sigma_z",
            Self::SigmaX => "sigma_x",
            Self::Jz => "J_z",
            Self::Jx => "J_x",
            Self::Parity => "parity",
        }
    }
}

/// Fock-space matrix elements of a single-mode operator as `(row, col, value)`.
fn fock_entries(kind: OperatorKind, n_max: usize) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for n in 0..=n_max {
        let nf = n as f64;
        match kind {
            OperatorKind::Annihilate => {
                if n >= 1 {
                    out.push((n - 1, n, nf.sqrt()));
                }
            }
            OperatorKind::Create => {
                if n < n_max {
                    out.push((n + 1, n, (nf + 1.0).sqrt()));
                }
            }
            OperatorKind::FieldX => {
                if n < n_max {
                    let v = 0.5 * (nf + 1.0).sqrt();
                    out.push((n, n + 1, v));
                    out.push((n + 1, n, v));
                }
            }
            OperatorKind::PSquared => {
                // (2n + 1 − â² − â†²)/2
                out.push((n, n, nf + 0.5));
                if n + 2 <= n_max {
                    let v = -0.5 * ((nf + 1.0) * (nf + 2.0)).sqrt();
                    out.push((n, n + 2, v));
                    out.push((n + 2, n, v));
                }
            }
            _ => unreachable!("not a Fock-space operator"),
        }
    }
    out
}

/// Builds `Ĥ = −(Δ/2)σ̂x − (ε/2)σ̂z + ħω0 â†â + λ(â+â†)σ̂z` on `2(n_max+1)` states.
pub fn build_rabi_hamiltonian(spec: &ModelSpec, n_max: usize) -> Result<OperatorMatrix> {
    spec.validate()?;
    check_cutoff(n_max)?;
    if spec.n_qubits != 1 {
        return Err(Error::InvalidOperator("rabi hamiltonian", spec.n_qubits));
    }
    let basis = Basis::new(1, n_max);
    let sz = [1.0, -1.0];
    let mut upper = Vec::new();
    for n in 0..=n_max {
        for (m, s) in sz.iter().enumerate() {
            let i = basis.index(m, n);
            upper.push((i, i, spec.omega0 * n as f64 - 0.5 * spec.epsilon * s));
            if n < n_max {
                let v = spec.lambda * ((n + 1) as f64).sqrt() * s;
                upper.push((i, basis.index(m, n + 1), v));
            }
        }
        upper.push((basis.index(0, n), basis.index(1, n), -0.5 * spec.delta));
    }
    Ok(OperatorMatrix::from_upper(basis, upper))
}

/// Builds `Ĥ = −ΔĴx − εĴz + ħω0 â†â + (2λ/√N)(â+â†)Ĵz` in the symmetric `J = N/2`
/// sector. Identical to [`build_rabi_hamiltonian`] for `N = 1`.
pub fn build_dicke_hamiltonian(spec: &ModelSpec, n_max: usize) -> Result<OperatorMatrix> {
    spec.validate()?;
    check_cutoff(n_max)?;
    let n_q = spec.n_qubits;
    let basis = Basis::new(n_q, n_max);
    let j = spec.spin_j();
    let g = spec.collective_coupling();
    let mut upper = Vec::new();
    for m in 0..=n_q {
        let jz = j - m as f64;
        for n in 0..=n_max {
            let i = basis.index(m, n);
            upper.push((i, i, spec.omega0 * n as f64 - spec.epsilon * jz));
            if n < n_max {
                upper.push((i, basis.index(m, n + 1), g * ((n + 1) as f64).sqrt() * jz));
            }
            if m < n_q {
                upper.push((i, basis.index(m + 1, n), -spec.delta * jx_element(n_q, m + 1)));
            }
        }
    }
    Ok(OperatorMatrix::from_upper(basis, upper))
}

/// Builds a named operator on the full space of `spec` with cutoff `n_max`.
pub fn build_operator(kind: OperatorKind, spec: &ModelSpec, n_max: usize) -> Result<OperatorMatrix> {
    spec.validate()?;
    check_cutoff(n_max)?;
    let n_q = spec.n_qubits;
    let basis = Basis::new(n_q, n_max);
    let j = spec.spin_j();
    let mut trip = Vec::new();
    match kind {
        OperatorKind::Annihilate | OperatorKind::Create | OperatorKind::FieldX | OperatorKind::PSquared => {
            let fock = fock_entries(kind, n_max);
            for m in 0..=n_q {
                for &(a, b, v) in &fock {
                    trip.push((basis.index(m, a), basis.index(m, b), v));
                }
            }
        }
        OperatorKind::SigmaZ | OperatorKind::Jz => {
            if kind == OperatorKind::SigmaZ && n_q != 1 {
                return Err(Error::InvalidOperator(kind.name(), n_q));
            }
            let scale = if kind == OperatorKind::SigmaZ { 2.0 } else { 1.0 };
            for m in 0..=n_q {
                for n in 0..=n_max {
                    let i = basis.index(m, n);
                    trip.push((i, i, scale * (j - m as f64)));
                }
            }
        }
        OperatorKind::SigmaX | OperatorKind::Jx => {
            if kind == OperatorKind::SigmaX && n_q != 1 {
                return Err(Error::InvalidOperator(kind.name(), n_q));
            }
            let scale = if kind == OperatorKind::SigmaX { 2.0 } else { 1.0 };
            for m in 1..=n_q {
                let v = scale * jx_element(n_q, m);
                for n in 0..=n_max {
                    trip.push((basis.index(m - 1, n), basis.index(m, n), v));
                    trip.push((basis.index(m, n), basis.index(m - 1, n), v));
                }
            }
        }
        OperatorKind::Parity => {
            for m in 0..=n_q {
                for n in 0..=n_max {
                    let v = if n % 2 == 0 { 1.0 } else { -1.0 };
                    trip.push((basis.index(n_q - m, n), basis.index(m, n), v));
                }
            }
        }
    }
    Ok(OperatorMatrix::from_triplets(basis, trip))
}
