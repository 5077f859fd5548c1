//! Eigensolvers: dense decompositions, Lanczos, spectrum slicing on parity sectors,
//! and the adaptive Fock-cutoff loop.

mod converge;
mod dense;
mod lanczos;
mod slicing;
pub mod tridiag;

pub use converge::{converge_ground_state, converge_truncation, ground_evaluator, initial_cutoff, Candidate};
pub use dense::{dense_eigh, dense_eigh_capped, DEFAULT_DENSE_CAP};
pub use lanczos::{lanczos_lowest, lanczos_with, LanczosConfig, MAX_K};
pub use slicing::BlockTridiagonal;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelSpec, Parity, ParitySector};

pub const DEFAULT_SEED: u64 = 0x5EED;

/// Eigenvalues (ascending) and optionally eigenvectors of one Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// Columns aligned with `eigenvalues`.
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub n_max_used: usize,
    pub converged: bool,
    /// `‖Hv − Ev‖` per returned pair; empty when no vectors were computed.
    pub residual_norms: Vec<f64>,
}

impl SpectrumResult {
    pub fn new(eigenvalues: Vec<f64>, n_max_used: usize) -> Self {
        Self {
            eigenvalues,
            eigenvectors: None,
            n_max_used,
            converged: true,
            residual_norms: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn ground_energy(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    /// `max |⟨v_i|v_j⟩ − δ_ij|`.
    pub fn orthonormality_error(&self) -> Option<f64> {
        let vecs = self.eigenvectors.as_ref()?;
        let mut worst: f64 = 0.0;
        for (i, a) in vecs.iter().enumerate() {
            for (j, b) in vecs.iter().enumerate().skip(i) {
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                worst = worst.max((d - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        Some(worst)
    }
}

/// Anything that can apply a real symmetric matrix to a vector.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// Upper bound on the spectral radius.
    fn norm_bound(&self) -> f64;
}

impl SymmetricOperator for ParitySector {
    fn dim(&self) -> usize {
        ParitySector::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        ParitySector::apply(self, x, y)
    }

    fn norm_bound(&self) -> f64 {
        ParitySector::norm_bound(self)
    }
}

impl SymmetricOperator for BlockTridiagonal {
    fn dim(&self) -> usize {
        BlockTridiagonal::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        BlockTridiagonal::apply(self, x, y)
    }

    fn norm_bound(&self) -> f64 {
        BlockTridiagonal::norm_bound(self)
    }
}

pub(crate) fn residual_norm(op: &dyn SymmetricOperator, v: &[f64], e: f64) -> f64 {
    let mut hv = vec![0.0; v.len()];
    op.apply(v, &mut hv);
    hv.iter().zip(v).map(|(h, x)| (h - e * x).powi(2)).sum::<f64>().sqrt()
}

/// Solver choice for ground-state work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum SolverKind {
    /// Spectrum slicing on parity sectors.
    #[default]
    Auto,
    Dense,
    Lanczos,
    Slicing,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "dense" => Ok(Self::Dense),
            "lanczos" => Ok(Self::Lanczos),
            "slicing" => Ok(Self::Slicing),
            other => Err(crate::error::invalid("solver", format!("unknown solver {other:?}"))),
        }
    }
}

/// Lowest eigenpairs of both parity sectors at one cutoff.
#[derive(Debug, Clone)]
pub struct SectorSpectra {
    pub n_max: usize,
    pub sectors: [ParitySector; 2],
    /// Even first. Each holds its sector ground vector when requested.
    pub spectra: [SpectrumResult; 2],
}

impl SectorSpectra {
    /// Lowest `k` levels of the merged spectrum with their parities.
    pub fn merged(&self, k: usize) -> (SpectrumResult, Vec<Parity>) {
        let mut all: Vec<(f64, Parity)> = Vec::new();
        for (spec, parity) in self.spectra.iter().zip(Parity::BOTH) {
            all.extend(spec.eigenvalues.iter().map(|&e| (e, parity)));
        }
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        all.truncate(k);
        let mut result = SpectrumResult::new(all.iter().map(|p| p.0).collect(), self.n_max);
        result.converged = self.spectra.iter().all(|s| s.converged);
        (result, all.into_iter().map(|p| p.1).collect())
    }

    pub fn sector(&self, parity: Parity) -> (&ParitySector, &SpectrumResult) {
        let i = parity.bit();
        (&self.sectors[i], &self.spectra[i])
    }
}

/// Solves both parity sectors for their `k` lowest levels each. The ground vector of
/// each sector is attached when `want_ground` is set.
pub fn solve_sectors(
    spec: &ModelSpec,
    n_max: usize,
    k: usize,
    solver: SolverKind,
    want_ground: bool,
    seed: u64,
) -> Result<SectorSpectra> {
    let sectors = ParitySector::pair(spec, n_max)?;
    let mut spectra = Vec::with_capacity(2);
    for sector in &sectors {
        spectra.push(solve_sector(sector, k, solver, want_ground, seed)?);
    }
    let spectra: [SpectrumResult; 2] = spectra.try_into().expect("two sectors");
    Ok(SectorSpectra { n_max, sectors, spectra })
}

/// `k` lowest levels of one sector.
pub fn solve_sector(
    sector: &ParitySector,
    k: usize,
    solver: SolverKind,
    want_ground: bool,
    seed: u64,
) -> Result<SpectrumResult> {
    let k = k.min(sector.dim());
    let mut result = match solver {
        SolverKind::Auto | SolverKind::Slicing => {
            let bt = BlockTridiagonal::from_sector(sector);
            let values = bt.lowest_eigenvalues(k.max(2));
            let mut r = SpectrumResult::new(values[..k].to_vec(), sector.n_max());
            if want_ground {
                let (v, res) = bt.ground_vector(values[0], values[1], seed)?;
                r.converged = res <= 1e-10 * bt.norm_bound().max(1.0);
                r.residual_norms = vec![res];
                r.eigenvectors = Some(vec![v]);
            }
            r
        }
        SolverKind::Dense => {
            let mut r = dense_eigh(&sector.to_operator(), want_ground)?;
            r.eigenvalues.truncate(k);
            if let Some(v) = r.eigenvectors.as_mut() {
                v.truncate(1);
                r.residual_norms.truncate(1);
            }
            r
        }
        SolverKind::Lanczos => {
            let mut r = lanczos_lowest(sector, k, LanczosConfig::default().tol, seed)?;
            if want_ground {
                if let Some(v) = r.eigenvectors.as_mut() {
                    v.truncate(1);
                }
            } else {
                r.eigenvectors = None;
            }
            r
        }
    };
    result.n_max_used = sector.n_max();
    Ok(result)
}
