use super::{solve_sectors, SolverKind, SpectrumResult};
use crate::error::{Error, Result};
use crate::model::{ModelSpec, TruncationConfig};
use crate::observables::{ground_record, ObservableRecord, N_GAPS};
use crate::semiclassics::alpha_semiclassical;

/// One evaluated solve at a fixed cutoff.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub spectrum: SpectrumResult,
    pub record: ObservableRecord,
}

/// Semiclassical field used to size the first cutoff: the near-critical branch
/// amplitude (zero below λc), scaled by √N; for Δ = 0 the exact displacement.
fn field_scale(spec: &ModelSpec) -> f64 {
    let alpha = match spec.lambda_c() {
        Ok(lc) => alpha_semiclassical(spec.lambda, spec.delta, lc).near,
        Err(_) => spec.lambda / spec.omega0,
    };
    alpha * (spec.n_qubits as f64).sqrt()
}

/// `max(n_max, ceil(4(α² + 5α + 10)))`.
pub fn initial_cutoff(spec: &ModelSpec, trunc: &TruncationConfig) -> usize {
    let a = field_scale(spec);
    let est = (4.0 * (a * a + 5.0 * a + 10.0)).ceil();
    trunc.n_max.max(est as usize)
}

/// Doubles (by `growth_factor`) the Fock cutoff until consecutive candidates agree.
/// The smaller cutoff of the agreeing pair is reported.
///
/// `evaluate` solves and measures at a given cutoff. The ground energy must not rise
/// as the cutoff grows; a rise beyond rounding is reported as an error.
pub fn converge_truncation<F>(spec: &ModelSpec, trunc: &TruncationConfig, mut evaluate: F) -> Result<Candidate>
where
    F: FnMut(usize) -> Result<Candidate>,
{
    spec.validate()?;
    trunc.validate()?;
    let mut n_max = initial_cutoff(spec, trunc);
    let mut prev = evaluate(n_max)?;
    for _ in 1..trunc.max_rounds.max(1) {
        n_max = ((n_max as f64) * trunc.growth_factor).ceil() as usize;
        let next = evaluate(n_max)?;
        let (e_old, e_new) = (prev.record.e0, next.record.e0);
        if e_new > e_old + 1e-13 * e_old.abs().max(1.0) {
            return Err(Error::NoConvergence(format!(
                "ground energy rose from {e_old} to {e_new} at n_max = {n_max}"
            )));
        }
        let a = &prev.record;
        let b = &next.record;
        let stable = (e_new - e_old).abs() <= trunc.tol_energy * e_new.abs()
            && (a.entropy_s - b.entropy_s).abs() < trunc.tol_observable
            && (a.corr_c - b.corr_c).abs() < trunc.tol_observable
            && (a.squeeze_sp1 - b.squeeze_sp1).abs() < trunc.tol_observable;
        if stable {
            prev.record.converged &= prev.spectrum.converged;
            return Ok(prev);
        }
        prev = next;
    }
    prev.record.converged = false;
    Ok(prev)
}

/// Ground-state evaluator on parity sectors.
pub fn ground_evaluator(spec: ModelSpec, solver: SolverKind, seed: u64) -> impl FnMut(usize) -> Result<Candidate> {
    move |n_max| {
        let solved = solve_sectors(&spec, n_max, N_GAPS + 1, solver, true, seed)?;
        let record = ground_record(&spec, &solved)?;
        let (spectrum, _) = solved.merged(N_GAPS + 1);
        Ok(Candidate { spectrum, record })
    }
}

/// [`converge_truncation`] with [`ground_evaluator`].
pub fn converge_ground_state(
    spec: &ModelSpec,
    trunc: &TruncationConfig,
    solver: SolverKind,
    seed: u64,
) -> Result<Candidate> {
    converge_truncation(spec, trunc, ground_evaluator(*spec, solver, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::DEFAULT_SEED;

    #[test]
    fn initial_cutoff_examples() {
        let t = TruncationConfig::default();
        assert_eq!(initial_cutoff(&ModelSpec::from_ratios(1e-3, 0.5, 1).unwrap(), &t), 40);
        let n = initial_cutoff(&ModelSpec::from_ratios(1e-3, 1.2, 1).unwrap(), &t);
        assert!((1120..1130).contains(&n), "{n}");
        let n = initial_cutoff(&ModelSpec::from_ratios(1e-7, 1.0 + 1e-4, 1).unwrap(), &t);
        assert!((4660..4690).contains(&n), "{n}");
    }

    #[test]
    fn decoupled_converges_at_initial_cutoff() {
        let spec = ModelSpec::from_ratios(1e-2, 0.0, 1).unwrap();
        let mut calls = Vec::new();
        let mut eval = ground_evaluator(spec, SolverKind::Auto, DEFAULT_SEED);
        let c = converge_truncation(&spec, &TruncationConfig::default(), |n| {
            calls.push(n);
            eval(n)
        })
        .unwrap();
        assert_eq!(calls, vec![40, 80]);
        assert!(c.record.converged);
        assert_eq!(c.record.n_max_used, 40);
        assert_eq!(c.record.entropy_s, 0.0);
    }

    #[test]
    fn above_threshold_matches_oversized_solve() {
        let spec = ModelSpec::from_ratios(1e-2, 1.2, 1).unwrap();
        let c = converge_ground_state(&spec, &TruncationConfig::default(), SolverKind::Auto, DEFAULT_SEED).unwrap();
        assert!(c.record.converged);
        let mut oracle = ground_evaluator(spec, SolverKind::Auto, DEFAULT_SEED);
        let big = oracle(4 * c.record.n_max_used).unwrap().record;
        assert!((big.e0 - c.record.e0).abs() < 1e-10 * big.e0.abs());
        assert!((big.entropy_s - c.record.entropy_s).abs() < 1e-8);
        assert!((big.corr_c - c.record.corr_c).abs() < 1e-8);
        assert!((big.squeeze_sp1 - c.record.squeeze_sp1).abs() < 1e-8);
    }

    #[test]
    fn exhausted_rounds_are_flagged() {
        let spec = ModelSpec::from_ratios(1e-3, 0.99, 1).unwrap();
        let trunc = TruncationConfig {
            n_max: 8,
            max_rounds: 1,
            ..Default::default()
        };
        let c = converge_ground_state(&spec, &trunc, SolverKind::Auto, DEFAULT_SEED).unwrap();
        assert!(!c.record.converged);
        assert_eq!(c.record.n_max_used, 40);
    }
}
