//! Physical observables: entanglement entropy, sign correlation, squeezing, branch
//! field, energy gaps and Gibbs averages.

mod sign;
mod state;
mod thermal;

pub use sign::SignOperator;
pub use state::{
    conditional_field, correlation_c, energy_gaps, mean_field, projected_field, reduced_spin_density,
    sector_observables, squeezing, von_neumann_entropy, StateObservables, TRACE_TOL,
};
pub use thermal::{gibbs_observables, thermal_cutoff, thermal_records, DEGENERACY_TOL, TAIL_TOL};

use serde::{Deserialize, Serialize};

use crate::eigensolver::SectorSpectra;
use crate::error::{Error, Result};
use crate::model::{ModelSpec, Parity};

/// Number of gaps stored per record.
pub const N_GAPS: usize = 10;

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub ratio: f64,
    pub lambda_rel: f64,
    pub n_qubits: usize,
    /// In units of Δ; 0 for ground-state records.
    pub temperature: f64,
    /// Bits.
    #[serde(rename = "entropy_S")]
    pub entropy_s: f64,
    /// Magnitude of `⟨(Ĵz/J) sgn(x̂)⟩`.
    #[serde(rename = "corr_C")]
    pub corr_c: f64,
    pub squeeze_sp1: f64,
    pub alpha_cond: f64,
    pub e0: f64,
    /// `E_n − E_0`, `n = 1..=10`.
    pub gaps: Vec<f64>,
    pub n_max_used: usize,
    pub converged: bool,
}

impl ObservableRecord {
    /// Placeholder for a point whose solve failed: NaN values, not converged.
    pub fn failed(spec: &ModelSpec, temperature: f64) -> Self {
        Self {
            ratio: spec.ratio(),
            lambda_rel: spec.lambda_rel().unwrap_or(f64::NAN),
            n_qubits: spec.n_qubits,
            temperature,
            entropy_s: f64::NAN,
            corr_c: f64::NAN,
            squeeze_sp1: f64::NAN,
            alpha_cond: f64::NAN,
            e0: f64::NAN,
            gaps: vec![f64::NAN; N_GAPS],
            n_max_used: 0,
            converged: false,
        }
    }

    pub fn gap(&self, n: usize) -> f64 {
        self.gaps[n - 1]
    }
}

/// Ground-state record from a sector solve carrying the even-sector ground vector.
///
/// The even sector holds the ground state at ε = 0; above λc its odd partner is
/// quasi-degenerate but never lower.
pub fn ground_record(spec: &ModelSpec, solved: &SectorSpectra) -> Result<ObservableRecord> {
    let (sector, spectrum) = solved.sector(Parity::Even);
    let vector = spectrum
        .eigenvectors
        .as_ref()
        .and_then(|v| v.first())
        .ok_or(Error::MissingEigenvectors)?;
    let obs = sector_observables(sector, vector)?;
    let (merged, _) = solved.merged(N_GAPS + 1);
    let gaps = energy_gaps(&merged, N_GAPS)?;
    Ok(ObservableRecord {
        ratio: spec.ratio(),
        lambda_rel: spec.lambda_rel().unwrap_or(f64::NAN),
        n_qubits: spec.n_qubits,
        temperature: 0.0,
        entropy_s: obs.entropy_s,
        corr_c: obs.corr_c,
        squeeze_sp1: obs.squeeze_sp1,
        alpha_cond: obs.alpha_cond,
        e0: merged.eigenvalues[0],
        gaps,
        n_max_used: solved.n_max,
        converged: merged.converged,
    })
}
