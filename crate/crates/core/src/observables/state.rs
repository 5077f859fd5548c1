//! Ground-state observables on full-space vectors (spin-major, `Ĵz` basis) and on
//! parity-sector vectors (`Ĵx`-rotated basis).

use nalgebra::{DMatrix, SymmetricEigen};

use super::SignOperator;
use crate::eigensolver::SpectrumResult;
use crate::error::{Error, Result};
use crate::model::{jx_element, Basis, OperatorMatrix, ParitySector};

/// Trace tolerance accepted by [`von_neumann_entropy`].
pub const TRACE_TOL: f64 = 1e-8;

/// `ρ_q = Tr_osc |ψ⟩⟨ψ|` for a full-space state.
pub fn reduced_spin_density(state: &[f64], spin_dim: usize, fock_dim: usize) -> Result<DMatrix<f64>> {
    if state.len() != spin_dim * fock_dim {
        return Err(Error::DimensionMismatch {
            expected: spin_dim * fock_dim,
            got: state.len(),
        });
    }
    let rows: Vec<&[f64]> = state.chunks(fock_dim).collect();
    Ok(gram(&rows))
}

fn gram(rows: &[&[f64]]) -> DMatrix<f64> {
    let d = rows.len();
    let mut rho = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..=a {
            let v: f64 = rows[a].iter().zip(rows[b]).map(|(x, y)| x * y).sum();
            rho[(a, b)] = v;
            rho[(b, a)] = v;
        }
    }
    rho
}

/// `S = −Σ p log2 p` over eigenvalues `p > 1e-15`, in bits.
pub fn von_neumann_entropy(rho: &DMatrix<f64>) -> Result<f64> {
    let trace = rho.trace();
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidTrace(trace - 1.0));
    }
    if rho.nrows() == 2 && rho[(0, 1)] == 0.0 {
        return Ok(entropy_of(&[rho[(0, 0)], rho[(1, 1)]]));
    }
    let eig = SymmetricEigen::new(rho.clone());
    Ok(entropy_of(eig.eigenvalues.as_slice()))
}

pub(crate) fn entropy_of(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 1e-15)
        .map(|&x| -x * x.log2())
        .sum::<f64>()
        .max(0.0)
}

/// `|⟨(Ĵz/J) ⊗ sgn(x̂)⟩|`; for one qubit `Ĵz/J = σ̂z`.
pub fn correlation_c(state: &[f64], basis: &Basis, sign: &SignOperator) -> Result<f64> {
    check_len(state, basis)?;
    let fock = basis.fock_dim;
    let j = basis.n_qubits() as f64 / 2.0;
    let mut c = 0.0;
    for (m, row) in state.chunks(fock).enumerate() {
        let mz = (j - m as f64) / j;
        if mz != 0.0 {
            c += mz * sign.expectation(row);
        }
    }
    Ok(c.abs())
}

/// `s_p+1 = 2⟨p̂²⟩`, which is 1 in the oscillator vacuum.
pub fn squeezing(state: &[f64], p_squared: &OperatorMatrix) -> Result<f64> {
    if state.len() != p_squared.dim() {
        return Err(Error::DimensionMismatch {
            expected: p_squared.dim(),
            got: state.len(),
        });
    }
    Ok(2.0 * p_squared.expectation(state))
}

/// `⟨|x̂|⟩` with `x̂ = (â + â†)/2`: the field amplitude of either branch of a
/// parity-symmetric state.
pub fn conditional_field(state: &[f64], basis: &Basis, sign: &SignOperator) -> Result<f64> {
    check_len(state, basis)?;
    if sign.dim() < basis.fock_dim + 1 {
        return Err(Error::DimensionMismatch {
            expected: basis.fock_dim + 1,
            got: sign.dim(),
        });
    }
    Ok(state.chunks(basis.fock_dim).map(|row| abs_field(row, sign)).sum())
}

/// `|⟨x̂⟩|` in the state projected on `σ̂z = −1` (lowest `Ĵz` for several qubits)
/// and renormalized; 0 when the projection norm is below `1e-12`.
pub fn projected_field(state: &[f64], basis: &Basis) -> Result<f64> {
    check_len(state, basis)?;
    let row = state.chunks(basis.fock_dim).last().expect("non-empty basis");
    let norm: f64 = row.iter().map(|x| x * x).sum();
    if norm < 1e-12 {
        return Ok(0.0);
    }
    Ok((field_expectation(row) / norm).abs())
}

/// `⟨x̂⟩` over the whole state; zero in any parity eigenstate.
pub fn mean_field(state: &[f64], basis: &Basis) -> Result<f64> {
    check_len(state, basis)?;
    Ok(state.chunks(basis.fock_dim).map(field_expectation).sum())
}

/// `E_n − E_0` for `n = 1..=count`.
pub fn energy_gaps(spectrum: &SpectrumResult, count: usize) -> Result<Vec<f64>> {
    let e = &spectrum.eigenvalues;
    if e.len() < count + 1 {
        return Err(Error::TooFewEigenvalues {
            needed: count + 1,
            have: e.len(),
        });
    }
    Ok(e[1..=count].iter().map(|v| (v - e[0]).max(0.0)).collect())
}

fn check_len(state: &[f64], basis: &Basis) -> Result<()> {
    if state.len() == basis.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: state.len(),
        })
    }
}

/// `⟨c|x̂|c⟩` for a Fock vector.
fn field_expectation(c: &[f64]) -> f64 {
    let mut acc = 0.0;
    for n in 0..c.len().saturating_sub(1) {
        acc += c[n] * c[n + 1] * ((n + 1) as f64).sqrt();
    }
    acc
}

/// `x̂ c`, one entry longer than `c`.
fn apply_field(c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; c.len() + 1];
    for (n, &v) in c.iter().enumerate() {
        out[n + 1] += 0.5 * ((n + 1) as f64).sqrt() * v;
        if n > 0 {
            out[n - 1] += 0.5 * (n as f64).sqrt() * v;
        }
    }
    out
}

/// `⟨c| |x̂| |c⟩ = ⟨c| sgn(x̂) x̂ |c⟩`, exact for a finitely supported `c`.
fn abs_field(c: &[f64], sign: &SignOperator) -> f64 {
    let xc = apply_field(c);
    sign.bilinear(&extend(c, xc.len()), &xc)
}

fn extend(c: &[f64], len: usize) -> Vec<f64> {
    let mut v = c.to_vec();
    v.resize(len, 0.0);
    v
}

/// `⟨c|p̂²|c⟩` with `p̂² = (2n̂ + 1 − â² − â†²)/2`, exact for a finitely supported `c`.
fn p_squared_expectation(c: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (n, &v) in c.iter().enumerate() {
        acc += 0.5 * (2 * n + 1) as f64 * v * v;
        if n + 2 < c.len() {
            acc -= v * c[n + 2] * (((n + 1) * (n + 2)) as f64).sqrt();
        }
    }
    acc
}

/// Ground-state observables of one sector vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateObservables {
    pub entropy_s: f64,
    pub corr_c: f64,
    pub squeeze_sp1: f64,
    pub alpha_cond: f64,
}

/// Per-spin-component Fock vectors of a sector state, trimmed to their support.
pub(crate) struct SectorState {
    pub components: Vec<Vec<f64>>,
    pub n_qubits: usize,
}

impl SectorState {
    pub(crate) fn new(sector: &ParitySector, c: &[f64]) -> Self {
        let mut components = sector.spin_components(c);
        for comp in components.iter_mut() {
            let end = comp.iter().rposition(|&x| x != 0.0).map_or(0, |i| i + 1);
            comp.truncate(end);
        }
        Self {
            components,
            n_qubits: sector.n_qubits(),
        }
    }

    /// Reduced spin density in the rotated basis (same spectrum as in the `Ĵz` basis).
    pub(crate) fn spin_density(&self) -> DMatrix<f64> {
        let rows: Vec<&[f64]> = self.components.iter().map(|v| v.as_slice()).collect();
        let d = rows.len();
        let mut rho = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..=a {
                let len = rows[a].len().min(rows[b].len());
                let v: f64 = rows[a][..len].iter().zip(&rows[b][..len]).map(|(x, y)| x * y).sum();
                rho[(a, b)] = v;
                rho[(b, a)] = v;
            }
        }
        rho
    }

    pub(crate) fn entropy(&self) -> Result<f64> {
        let rho = self.spin_density();
        let trace = rho.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(trace - 1.0));
        }
        if self.n_qubits == 1 {
            // the two rotated components live on opposite photon parities
            return Ok(entropy_of(&[rho[(0, 0)], rho[(1, 1)]]));
        }
        von_neumann_entropy(&rho)
    }

    /// Signed `⟨(Ĵz/J) sgn(x̂)⟩`.
    pub(crate) fn correlation(&self, sign: &SignOperator) -> f64 {
        let n_q = self.n_qubits;
        let j = n_q as f64 / 2.0;
        let mut acc = 0.0;
        for r in 1..=n_q {
            let (a, b) = (&self.components[r - 1], &self.components[r]);
            if a.is_empty() || b.is_empty() {
                continue;
            }
            acc += 2.0 * jx_element(n_q, r) * sign.bilinear(a, b);
        }
        acc / j
    }

    pub(crate) fn squeezing(&self) -> f64 {
        2.0 * self.components.iter().map(|c| p_squared_expectation(c)).sum::<f64>()
    }

    pub(crate) fn abs_field(&self, sign: &SignOperator) -> f64 {
        self.components
            .iter()
            .filter(|c| !c.is_empty())
            .map(|c| abs_field(c, sign))
            .sum()
    }

    pub(crate) fn max_len(&self) -> usize {
        self.components.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// S, C, s_p+1 and α_cond of a normalized sector vector.
pub fn sector_observables(sector: &ParitySector, c: &[f64]) -> Result<StateObservables> {
    if c.len() != sector.dim() {
        return Err(Error::DimensionMismatch {
            expected: sector.dim(),
            got: c.len(),
        });
    }
    let state = SectorState::new(sector, c);
    let sign = SignOperator::new(state.max_len().max(1) + 1)?;
    Ok(StateObservables {
        entropy_s: state.entropy()?,
        corr_c: state.correlation(&sign).abs(),
        squeeze_sp1: state.squeezing(),
        alpha_cond: state.abs_field(&sign),
    })
}
