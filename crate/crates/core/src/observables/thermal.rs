//! Gibbs averages over full parity-resolved spectra.

use nalgebra::{DMatrix, SymmetricEigen};
use rustfft::num_complex::Complex64;

use super::sign::{CorrelationPlan, SignOperator};
use super::state::{conditional_field, entropy_of, reduced_spin_density, von_neumann_entropy, SectorState};
use super::{ObservableRecord, N_GAPS};
use crate::eigensolver::{tridiag, SpectrumResult, DEFAULT_SEED};
use crate::error::{invalid, Error, Result};
use crate::model::{build_operator, jx_element, Basis, ModelSpec, OperatorKind, ParitySector};

/// Levels within this distance of `E0` share the weight at `T = 0`.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// A record is flagged when the highest retained level carries more than this
/// fraction of `Z`.
pub const TAIL_TOL: f64 = 1e-12;

/// States whose weight relative to the ground level is below this are skipped.
const SKIP_WEIGHT: f64 = 1e-17;

/// Boltzmann weights relative to the ground level, `e^{−(E − E0)/T}`.
fn weight(e: f64, e0: f64, t: f64) -> f64 {
    if t == 0.0 {
        if e - e0 < DEGENERACY_TOL {
            1.0
        } else {
            0.0
        }
    } else {
        (-(e - e0) / t).exp()
    }
}

fn check_temperatures(temperatures: &[f64]) -> Result<()> {
    if temperatures.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(invalid("temperature", "must be finite and >= 0"));
    }
    Ok(())
}

/// Gibbs averages from a full-space spectrum with eigenvectors.
///
/// Reference implementation: every state is evaluated directly.
pub fn gibbs_observables(
    spectrum: &SpectrumResult,
    spec: &ModelSpec,
    basis: &Basis,
    temperature: f64,
) -> Result<ObservableRecord> {
    check_temperatures(&[temperature])?;
    let vectors = spectrum.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
    if spectrum.len() < N_GAPS + 1 {
        return Err(Error::TooFewEigenvalues {
            needed: N_GAPS + 1,
            have: spectrum.len(),
        });
    }
    let e0 = spectrum.eigenvalues[0];
    let sign = SignOperator::new(basis.fock_dim + 1)?;
    let p2 = build_operator(OperatorKind::PSquared, spec, basis.n_max())?;
    let spin_dim = basis.spin_dim;
    let mut rho = DMatrix::zeros(spin_dim, spin_dim);
    let (mut z, mut c, mut sp, mut alpha) = (0.0, 0.0, 0.0, 0.0);
    let j = basis.n_qubits() as f64 / 2.0;
    for (v, &e) in vectors.iter().zip(&spectrum.eigenvalues) {
        let w = weight(e, e0, temperature);
        if w == 0.0 {
            continue;
        }
        z += w;
        rho += w * reduced_spin_density(v, spin_dim, basis.fock_dim)?;
        // signed correlation so that degenerate partners do not cancel in magnitude
        let mut signed = 0.0;
        for (m, row) in v.chunks(basis.fock_dim).enumerate() {
            signed += (j - m as f64) / j * sign.expectation(row);
        }
        c += w * signed;
        sp += w * 2.0 * p2.expectation(v);
        alpha += w * conditional_field(v, basis, &sign)?;
    }
    let top = *spectrum.eigenvalues.last().expect("non-empty");
    let tail = weight(top, e0, temperature) / z;
    Ok(ObservableRecord {
        ratio: spec.ratio(),
        lambda_rel: spec.lambda_rel().unwrap_or(f64::NAN),
        n_qubits: spec.n_qubits,
        temperature,
        entropy_s: von_neumann_entropy(&(rho / z))?,
        corr_c: (c / z).abs(),
        squeeze_sp1: sp / z,
        alpha_cond: alpha / z,
        e0,
        gaps: spectrum.eigenvalues[1..=N_GAPS].iter().map(|e| e - e0).collect(),
        n_max_used: basis.n_max(),
        converged: spectrum.converged && (temperature == 0.0 || tail <= TAIL_TOL),
    })
}

/// Fock cutoff for thermal runs: enough levels that the Boltzmann tail at `t_max`
/// falls below [`TAIL_TOL`], clamped to `[floor, cap]`.
pub fn thermal_cutoff(spec: &ModelSpec, t_max: f64, floor: usize, cap: usize) -> usize {
    let needed = (t_max * (1.0 / TAIL_TOL).ln() + 4.0 * spec.delta) / spec.omega0;
    (needed.ceil() as usize + floor).clamp(floor, cap.max(floor))
}

/// Per-temperature accumulators.
struct Accumulator {
    z: f64,
    rho: DMatrix<f64>,
    sp1: f64,
    corr: Vec<Complex64>,
    field: Vec<Complex64>,
    top: f64,
}

/// Gibbs records for every temperature at one cutoff, from dense solves of both
/// parity sectors.
///
/// Sign-operator sums are accumulated in Fourier space across states so that each
/// state costs a handful of forward transforms.
pub fn thermal_records(spec: &ModelSpec, n_max: usize, temperatures: &[f64]) -> Result<Vec<ObservableRecord>> {
    check_temperatures(temperatures)?;
    let sectors = ParitySector::pair(spec, n_max)?;
    let n_q = spec.n_qubits;
    let spin_dim = n_q + 1;

    // eigenvalues first: weights need the global ground energy
    enum Solved {
        Tridiagonal { d: Vec<f64>, e: Vec<f64>, values: Vec<f64> },
        Dense { values: Vec<f64>, vectors: DMatrix<f64> },
    }
    let mut solved = Vec::with_capacity(2);
    for sector in &sectors {
        solved.push(match sector.tridiagonal() {
            Some((d, e)) => {
                let values = tridiag::all_eigenvalues(&d, &e);
                Solved::Tridiagonal { d, e, values }
            }
            None => {
                let eig = SymmetricEigen::try_new(sector.to_operator().to_dense(), f64::EPSILON, 10_000)
                    .ok_or_else(|| Error::NoConvergence("dense QR iteration cap reached".into()))?;
                let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
                let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
                let vectors = eig.eigenvectors.select_columns(&order);
                Solved::Dense { values, vectors }
            }
        });
    }
    let values_of = |s: &Solved| -> Vec<f64> {
        match s {
            Solved::Tridiagonal { values, .. } | Solved::Dense { values, .. } => values.clone(),
        }
    };
    let mut all: Vec<f64> = solved.iter().flat_map(values_of).collect();
    all.sort_by(f64::total_cmp);
    let e0 = all[0];

    let plan = CorrelationPlan::new(n_max + 2);
    let sign = SignOperator::new(n_max + 1)?;
    let j = n_q as f64 / 2.0;
    let mut acc: Vec<Accumulator> = temperatures
        .iter()
        .map(|_| Accumulator {
            z: 0.0,
            rho: DMatrix::zeros(spin_dim, spin_dim),
            sp1: 0.0,
            corr: vec![Complex64::new(0.0, 0.0); plan.size()],
            field: vec![Complex64::new(0.0, 0.0); plan.size()],
            top: 0.0,
        })
        .collect();

    let visit = |sector: &ParitySector, e: f64, c: &[f64], acc: &mut [Accumulator]| {
        let weights: Vec<f64> = temperatures.iter().map(|&t| weight(e, e0, t)).collect();
        if weights.iter().all(|&w| w < SKIP_WEIGHT) {
            return;
        }
        let state = SectorState::new(sector, c);
        let rho = state.spin_density();
        let sp1 = state.squeezing();
        let transforms: Vec<Transforms> = state
            .components
            .iter()
            .map(|comp| Transforms::new(&plan, &sign, comp))
            .collect();
        let mut corr = vec![Complex64::new(0.0, 0.0); plan.size()];
        let mut field = vec![Complex64::new(0.0, 0.0); plan.size()];
        for r in 1..=n_q {
            let coef = 2.0 * jx_element(n_q, r) / j;
            cross(&mut corr, coef, &transforms[r - 1].even, &transforms[r].odd);
            cross(&mut corr, coef, &transforms[r].even, &transforms[r - 1].odd);
        }
        for t in &transforms {
            cross(&mut field, 1.0, &t.even, &t.x_odd);
            cross(&mut field, 1.0, &t.x_even, &t.odd);
        }
        for (a, &w) in acc.iter_mut().zip(&weights) {
            if w < SKIP_WEIGHT {
                continue;
            }
            a.z += w;
            a.rho += w * &rho;
            a.sp1 += w * sp1;
            for (s, v) in a.corr.iter_mut().zip(&corr) {
                *s += w * v;
            }
            for (s, v) in a.field.iter_mut().zip(&field) {
                *s += w * v;
            }
        }
    };

    for (sector, s) in sectors.iter().zip(&solved) {
        match s {
            Solved::Tridiagonal { d, e, values } => {
                tridiag::for_each_eigenvector(d, e, values, DEFAULT_SEED, |i, v| {
                    visit(sector, values[i], v, &mut acc)
                });
                let top = *values.last().expect("non-empty sector");
                for (a, &t) in acc.iter_mut().zip(temperatures) {
                    a.top = a.top.max(weight(top, e0, t));
                }
            }
            Solved::Dense { values, vectors } => {
                for (i, &e) in values.iter().enumerate() {
                    let v: Vec<f64> = vectors.column(i).iter().copied().collect();
                    visit(sector, e, &v, &mut acc);
                }
                let top = *values.last().expect("non-empty sector");
                for (a, &t) in acc.iter_mut().zip(temperatures) {
                    a.top = a.top.max(weight(top, e0, t));
                }
            }
        }
    }

    let gaps: Vec<f64> = all[1..=N_GAPS].iter().map(|e| e - e0).collect();
    let mut records = Vec::with_capacity(temperatures.len());
    for (a, &t) in acc.into_iter().zip(temperatures) {
        let rho = a.rho / a.z;
        let entropy = if n_q == 1 {
            // the rotated components of each sector live on opposite photon parities
            entropy_of(&[rho[(0, 0)], rho[(1, 1)]])
        } else {
            von_neumann_entropy(&rho)?
        };
        let corr = plan.finish_spectrum(a.corr) / a.z;
        let field = plan.finish_spectrum(a.field) / a.z;
        records.push(ObservableRecord {
            ratio: spec.ratio(),
            lambda_rel: spec.lambda_rel().unwrap_or(f64::NAN),
            n_qubits: n_q,
            temperature: t,
            entropy_s: entropy,
            corr_c: corr.abs(),
            squeeze_sp1: a.sp1 / a.z,
            alpha_cond: field,
            e0,
            gaps: gaps.clone(),
            n_max_used: n_max,
            converged: t == 0.0 || a.top / a.z <= TAIL_TOL,
        });
    }
    Ok(records)
}

fn cross(out: &mut [Complex64], coef: f64, even: &Option<Vec<Complex64>>, odd: &Option<Vec<Complex64>>) {
    if let (Some(a), Some(b)) = (even, odd) {
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            *o += coef * x.conj() * y;
        }
    }
}

/// Fourier transforms of the weighted even and odd parts of one Fock component and
/// of `x̂` applied to it; `None` where the part vanishes.
struct Transforms {
    even: Option<Vec<Complex64>>,
    odd: Option<Vec<Complex64>>,
    x_even: Option<Vec<Complex64>>,
    x_odd: Option<Vec<Complex64>>,
}

impl Transforms {
    fn new(plan: &CorrelationPlan, sign: &SignOperator, comp: &[f64]) -> Self {
        let has = |v: &[f64], parity: usize| v.iter().skip(parity).step_by(2).any(|&x| x != 0.0);
        let mut xc = vec![0.0; comp.len() + 1];
        for (n, &v) in comp.iter().enumerate() {
            xc[n + 1] += 0.5 * ((n + 1) as f64).sqrt() * v;
            if n > 0 {
                xc[n - 1] += 0.5 * (n as f64).sqrt() * v;
            }
        }
        let weights = [sign.phi(), sign.dphi()];
        // (slot, values, parity): even, odd, x_even, x_odd
        let parts: Vec<(usize, &[f64], usize)> = [(0, comp, 0), (1, comp, 1), (2, &xc[..], 0), (3, &xc[..], 1)]
            .into_iter()
            .filter(|&(_, v, p)| has(v, p))
            .collect();
        let mut slots: [Option<Vec<Complex64>>; 4] = Default::default();
        for pair in parts.chunks(2) {
            match pair {
                [(i, a, pa), (j, b, pb)] => {
                    let [fa, fb] = plan.forward_two((a, weights[*pa], *pa), (b, weights[*pb], *pb));
                    slots[*i] = Some(fa);
                    slots[*j] = Some(fb);
                }
                [(i, a, pa)] => {
                    slots[*i] = Some(if *pa == 0 {
                        plan.forward_even(a, weights[0])
                    } else {
                        plan.forward_odd(a, weights[1])
                    });
                }
                _ => unreachable!(),
            }
        }
        let [even, odd, x_even, x_odd] = slots;
        Self {
            even,
            odd,
            x_even,
            x_odd,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::{dense_eigh, solve_sectors, SolverKind};
    use crate::model::build_dicke_hamiltonian;
    use crate::observables::ground_record;

    #[test]
    fn fast_path_matches_reference() {
        for n_q in [1, 2] {
            let spec = ModelSpec::from_ratios(0.2, 1.3, n_q).unwrap();
            let n_max = 30;
            let temps = [0.0, 0.05, 0.5];
            let fast = thermal_records(&spec, n_max, &temps).unwrap();
            let h = build_dicke_hamiltonian(&spec, n_max).unwrap();
            let full = dense_eigh(&h, true).unwrap();
            let basis = h.basis().unwrap();
            for (rec, &t) in fast.iter().zip(&temps) {
                let slow = gibbs_observables(&full, &spec, &basis, t).unwrap();
                assert!((rec.entropy_s - slow.entropy_s).abs() < 1e-9, "N={n_q} T={t} S");
                assert!((rec.corr_c - slow.corr_c).abs() < 1e-9, "N={n_q} T={t} C");
                assert!((rec.squeeze_sp1 - slow.squeeze_sp1).abs() < 1e-6, "N={n_q} T={t} sp");
                assert!((rec.alpha_cond - slow.alpha_cond).abs() < 1e-9, "N={n_q} T={t} a");
                assert!((rec.e0 - slow.e0).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn zero_temperature_is_ground_state() {
        let spec = ModelSpec::from_ratios(0.1, 0.5, 1).unwrap();
        let rec = &thermal_records(&spec, 60, &[0.0]).unwrap()[0];
        let ground = ground_record(&spec, &solve_sectors(&spec, 60, 11, SolverKind::Slicing, true, DEFAULT_SEED).unwrap()).unwrap();
        assert!((rec.corr_c - ground.corr_c).abs() < 1e-8);
        assert!((rec.entropy_s - ground.entropy_s).abs() < 1e-8);
    }

    #[test]
    fn tail_flag_and_cutoff() {
        let spec = ModelSpec::from_ratios(0.1, 0.5, 1).unwrap();
        let recs = thermal_records(&spec, 20, &[0.0, 0.1, 5.0]).unwrap();
        assert!(recs[0].converged && recs[1].converged);
        assert!(!recs[2].converged);
        let n = thermal_cutoff(&spec, 1.0, 32, 100_000);
        assert!(0.1 * n as f64 > 27.0);
    }

    #[test]
    fn missing_vectors() {
        let spec = ModelSpec::from_ratios(0.1, 0.5, 1).unwrap();
        let h = build_dicke_hamiltonian(&spec, 10).unwrap();
        let r = dense_eigh(&h, false).unwrap();
        assert!(matches!(
            gibbs_observables(&r, &spec, &h.basis().unwrap(), 0.1),
            Err(Error::MissingEigenvectors)
        ));
    }
}
