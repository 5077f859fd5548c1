//! Truncated-Hilbert-space operators and Hamiltonians for the Rabi and Dicke models.
//!
//! Units: ħ = 1 and energies are measured in units of the qubit gap Δ whenever a
//! model is built from the dimensionless ratios `ω0/Δ` and `λ/λc`. The oscillator
//! zero-point energy ħω0/2 is omitted from every Hamiltonian.
//!
//! Basis ordering of full-space matrices is spin index major, Fock index minor:
//! `index = m * (n_max + 1) + n`, where `m = J - M` labels the `Ĵz` eigenvalue `M`
//! (so `m = 0` is `|↑⟩` for a single qubit) and `n` is the photon number.

mod operator;
mod sector;

pub use operator::{
    build_dicke_hamiltonian, build_operator, build_rabi_hamiltonian, Basis, BasisTag, OperatorKind,
    OperatorMatrix,
};
pub use sector::{parity_block_split, BlockMap, Parity, ParityBlock, ParitySector, SpinFrame};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Smallest accepted Fock cutoff for Hamiltonian builders.
pub const MIN_FOCK_CUTOFF: usize = 8;

/// Physical parameters of one model instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Qubit gap Δ.
    pub delta: f64,
    /// Qubit bias ε. Zero on every critical-analysis path.
    pub epsilon: f64,
    /// Oscillator frequency ħω0.
    pub omega0: f64,
    /// Coupling strength λ.
    pub lambda: f64,
    /// Number of qubits N.
    pub n_qubits: usize,
}

impl ModelSpec {
    pub fn new(delta: f64, epsilon: f64, omega0: f64, lambda: f64, n_qubits: usize) -> Result<Self> {
        let spec = Self {
            delta,
            epsilon,
            omega0,
            lambda,
            n_qubits,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Single-qubit Rabi model at the symmetry point.
    pub fn rabi(delta: f64, omega0: f64, lambda: f64) -> Result<Self> {
        Self::new(delta, 0.0, omega0, lambda, 1)
    }

    /// Model with Δ = 1, ħω0 = `ratio` and λ = `lambda_rel`·λc.
    pub fn from_ratios(ratio: f64, lambda_rel: f64, n_qubits: usize) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(invalid("ratio", format!("ω0/Δ must be positive, got {ratio}")));
        }
        if !(lambda_rel.is_finite() && lambda_rel >= 0.0) {
            return Err(invalid("lambda_rel", format!("λ/λc must be non-negative, got {lambda_rel}")));
        }
        let lambda_c = crate::semiclassics::lambda_c(1.0, ratio)?;
        Self::new(1.0, 0.0, ratio, lambda_rel * lambda_c, n_qubits)
    }

    /// Checks finiteness and sign constraints.
    ///
    /// Δ = 0 is accepted: it is the decoupled displaced-oscillator limit. Anything
    /// that needs λc additionally requires Δ > 0.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.delta, self.epsilon, self.omega0, self.lambda]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("spec", "non-finite parameter"));
        }
        if self.delta < 0.0 {
            return Err(invalid("delta", format!("must be >= 0, got {}", self.delta)));
        }
        if self.omega0 <= 0.0 {
            return Err(invalid("omega0", format!("must be > 0, got {}", self.omega0)));
        }
        if self.lambda < 0.0 {
            return Err(invalid("lambda", format!("must be >= 0, got {}", self.lambda)));
        }
        if self.n_qubits == 0 {
            return Err(invalid("n_qubits", "must be >= 1"));
        }
        Ok(())
    }

    pub fn lambda_c(&self) -> Result<f64> {
        crate::semiclassics::lambda_c(self.delta, self.omega0)
    }

    /// λ/λc.
    pub fn lambda_rel(&self) -> Result<f64> {
        Ok(self.lambda / self.lambda_c()?)
    }

    /// ħω0/Δ.
    pub fn ratio(&self) -> f64 {
        self.omega0 / self.delta
    }

    /// Total spin J = N/2.
    pub fn spin_j(&self) -> f64 {
        self.n_qubits as f64 / 2.0
    }

    /// Dimension 2J + 1 of the symmetric spin sector.
    pub fn spin_dim(&self) -> usize {
        self.n_qubits + 1
    }

    /// Per-qubit collective coupling 2λ/√N multiplying `(â+â†)Ĵz`.
    pub fn collective_coupling(&self) -> f64 {
        2.0 * self.lambda / (self.n_qubits as f64).sqrt()
    }

    pub fn has_parity(&self) -> bool {
        self.epsilon == 0.0
    }
}

/// Fock truncation and convergence settings for the adaptive-cutoff loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    /// Lower bound for the initial Fock cutoff.
    pub n_max: usize,
    pub growth_factor: f64,
    /// Relative tolerance on the ground energy between rounds.
    pub tol_energy: f64,
    /// Absolute tolerance on S, C and s_p+1 between rounds.
    pub tol_observable: f64,
    pub max_rounds: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            n_max: 32,
            growth_factor: 2.0,
            tol_energy: 1e-10,
            tol_observable: 1e-8,
            max_rounds: 6,
        }
    }
}

impl TruncationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < MIN_FOCK_CUTOFF {
            return Err(Error::CutoffTooSmall(self.n_max));
        }
        if !(self.growth_factor > 1.0 && self.growth_factor.is_finite()) {
            return Err(invalid("growth_factor", format!("must be > 1, got {}", self.growth_factor)));
        }
        if !(self.tol_energy > 0.0 && self.tol_observable > 0.0) {
            return Err(invalid("tolerance", "tolerances must be > 0"));
        }
        if self.max_rounds == 0 {
            return Err(invalid("max_rounds", "must be >= 1"));
        }
        Ok(())
    }
}

/// `⟨M'|Ĵx|M⟩` for `M' = M + 1`, written in terms of the index `m = J - M`
/// (so this is the element between `m` and `m - 1`). Condon–Shortley phase: positive.
pub(crate) fn jx_element(n_qubits: usize, m: usize) -> f64 {
    let j = n_qubits as f64 / 2.0;
    let mm = j - m as f64;
    0.5 * (j * (j + 1.0) - mm * (mm + 1.0)).sqrt()
}

pub(crate) fn check_cutoff(n_max: usize) -> Result<()> {
    if n_max < MIN_FOCK_CUTOFF {
        Err(Error::CutoffTooSmall(n_max))
    } else {
        Ok(())
    }
}
