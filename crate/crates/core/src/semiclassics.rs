//! Closed-form semiclassical predictions for the superradiance transition.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::ModelSpec;

/// Which side of the transition a prediction refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Below,
    At,
    Above,
}

impl Side {
    pub fn of(lambda_rel: f64) -> Self {
        if lambda_rel < 1.0 {
            Self::Below
        } else if lambda_rel > 1.0 {
            Self::Above
        } else {
            Self::At
        }
    }
}

/// `λc = √(ħω0 Δ) / 2`.
pub fn lambda_c(delta: f64, omega0: f64) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(invalid("delta", format!("λc needs Δ > 0, got {delta}")));
    }
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(invalid("omega0", format!("λc needs ω0 > 0, got {omega0}")));
    }
    Ok((omega0 * delta).sqrt() / 2.0)
}

/// Low-lying level spacing near λc.
///
/// Below: `√2 ħω0 (1 − λ/λc)^{1/2}` (E1 − E0). Above: `2 ħω0 (λ/λc − 1)^{1/2}`, the
/// spacing between doublets (E2 − E0). Exactly at λc the gap is reported as 0.
pub fn gap_semiclassical(lambda_rel: f64, omega0: f64) -> Result<(Side, f64)> {
    if !(lambda_rel.is_finite() && lambda_rel >= 0.0) {
        return Err(invalid("lambda_rel", format!("must be >= 0, got {lambda_rel}")));
    }
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(invalid("omega0", format!("must be > 0, got {omega0}")));
    }
    let side = Side::of(lambda_rel);
    let gap = match side {
        Side::Below => std::f64::consts::SQRT_2 * omega0 * (1.0 - lambda_rel).sqrt(),
        Side::Above => 2.0 * omega0 * (lambda_rel - 1.0).sqrt(),
        Side::At => 0.0,
    };
    Ok((side, gap))
}

/// Coherent field amplitude of each branch above λc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaPrediction {
    /// `(Δ/4λ)[(λ/λc)^4 − 1]^{1/2}`
    pub full: f64,
    /// `(Δ/2λc)(λ/λc − 1)^{1/2}`
    pub near: f64,
}

pub fn alpha_semiclassical(lambda: f64, delta: f64, lambda_c: f64) -> AlphaPrediction {
    if !(lambda > lambda_c) || lambda_c <= 0.0 {
        return AlphaPrediction { full: 0.0, near: 0.0 };
    }
    let g = lambda / lambda_c;
    AlphaPrediction {
        full: delta / (4.0 * lambda) * (g.powi(4) - 1.0).sqrt(),
        near: delta / (2.0 * lambda_c) * (g - 1.0).sqrt(),
    }
}

/// Overlap `cos^{2N}(θ/2)` between the qubit states of the two branches.
pub fn qubit_overlap(n_qubits: usize, theta: f64) -> f64 {
    (theta / 2.0).cos().powi(2 * n_qubits as i32)
}

/// Qubit rotation angle in each branch above λc: `cos θ = (λc/λ)²`.
pub fn branch_angle(lambda_rel: f64) -> f64 {
    if lambda_rel <= 1.0 {
        0.0
    } else {
        (1.0 / (lambda_rel * lambda_rel)).acos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalPrediction {
    pub lambda_c: f64,
    pub lambda_rel: f64,
    pub valid_side: Side,
    /// Set below λc only.
    pub gap_below: Option<f64>,
    /// Set above λc only.
    pub gap_above: Option<f64>,
    pub alpha_full: f64,
    pub alpha_near: f64,
    pub theta: f64,
    pub overlap: f64,
}

impl SemiclassicalPrediction {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let lc = spec.lambda_c()?;
        let g = spec.lambda / lc;
        let (side, gap) = gap_semiclassical(g, spec.omega0)?;
        let alpha = alpha_semiclassical(spec.lambda, spec.delta, lc);
        let theta = branch_angle(g);
        Ok(Self {
            lambda_c: lc,
            lambda_rel: g,
            valid_side: side,
            gap_below: (side == Side::Below).then_some(gap),
            gap_above: (side == Side::Above).then_some(gap),
            alpha_full: alpha.full,
            alpha_near: alpha.near,
            theta,
            overlap: qubit_overlap(spec.n_qubits, theta),
        })
    }
}
