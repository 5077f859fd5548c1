//! Python bindings: model parameters, ground-state and thermal observables, sweeps
//! and the semiclassical reference.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rabi_core::criticality::{self, SweepGrid};
use rabi_core::eigensolver::{self, SolverKind, DEFAULT_SEED};
use rabi_core::observables::{self, SignOperator};
use rabi_core::semiclassics::{SemiclassicalPrediction, Side};
use rabi_core::Error;

create_exception!(rabi, RabiError, PyException);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter { .. } | Error::CutoffTooSmall(_) | Error::DimensionMismatch { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => RabiError::new_err(other.to_string()),
    }
}

fn solver_kind(name: &str) -> PyResult<SolverKind> {
    name.parse().map_err(to_py)
}

/// Model parameters. Energies in units of your choice; `from_ratios` sets Δ = 1.
#[pyclass(name = "ModelSpec", module = "rabi", frozen)]
struct PyModelSpec(rabi_core::ModelSpec);

#[pymethods]
impl PyModelSpec {
    #[new]
    #[pyo3(signature = (delta, omega0, lambda_, n_qubits = 1, epsilon = 0.0))]
    fn new(delta: f64, omega0: f64, lambda_: f64, n_qubits: usize, epsilon: f64) -> PyResult<Self> {
        rabi_core::ModelSpec::new(delta, epsilon, omega0, lambda_, n_qubits)
            .map(Self)
            .map_err(to_py)
    }

    /// Δ = 1, ω0 = `ratio`, λ = `lambda_rel`·λc.
    #[staticmethod]
    #[pyo3(signature = (ratio, lambda_rel, n_qubits = 1))]
    fn from_ratios(ratio: f64, lambda_rel: f64, n_qubits: usize) -> PyResult<Self> {
        rabi_core::ModelSpec::from_ratios(ratio, lambda_rel, n_qubits)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon
    }

    #[getter]
    fn omega0(&self) -> f64 {
        self.0.omega0
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.0.lambda
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.0.n_qubits
    }

    fn lambda_c(&self) -> PyResult<f64> {
        self.0.lambda_c().map_err(to_py)
    }

    fn lambda_rel(&self) -> PyResult<f64> {
        self.0.lambda_rel().map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let s = &self.0;
        format!(
            "ModelSpec(delta={}, omega0={}, lambda_={}, n_qubits={}, epsilon={})",
            s.delta, s.omega0, s.lambda, s.n_qubits, s.epsilon
        )
    }
}

/// Adaptive Fock-cutoff settings.
#[pyclass(name = "TruncationConfig", module = "rabi", get_all, set_all)]
struct PyTruncation {
    n_max: usize,
    growth_factor: f64,
    tol_energy: f64,
    tol_observable: f64,
    max_rounds: usize,
}

impl PyTruncation {
    fn core(&self) -> PyResult<rabi_core::TruncationConfig> {
        let t = rabi_core::TruncationConfig {
            n_max: self.n_max,
            growth_factor: self.growth_factor,
            tol_energy: self.tol_energy,
            tol_observable: self.tol_observable,
            max_rounds: self.max_rounds,
        };
        t.validate().map_err(to_py)?;
        Ok(t)
    }
}

fn truncation(t: Option<PyRef<'_, PyTruncation>>) -> PyResult<rabi_core::TruncationConfig> {
    t.map_or_else(|| Ok(rabi_core::TruncationConfig::default()), |t| t.core())
}

#[pymethods]
impl PyTruncation {
    #[new]
    #[pyo3(signature = (n_max = None, growth_factor = None, tol_energy = None, tol_observable = None, max_rounds = None))]
    fn new(
        n_max: Option<usize>,
        growth_factor: Option<f64>,
        tol_energy: Option<f64>,
        tol_observable: Option<f64>,
        max_rounds: Option<usize>,
    ) -> PyResult<Self> {
        let d = rabi_core::TruncationConfig::default();
        let t = Self {
            n_max: n_max.unwrap_or(d.n_max),
            growth_factor: growth_factor.unwrap_or(d.growth_factor),
            tol_energy: tol_energy.unwrap_or(d.tol_energy),
            tol_observable: tol_observable.unwrap_or(d.tol_observable),
            max_rounds: max_rounds.unwrap_or(d.max_rounds),
        };
        t.core()?;
        Ok(t)
    }

    fn __repr__(&self) -> String {
        format!(
            "TruncationConfig(n_max={}, growth_factor={}, tol_energy={}, tol_observable={}, max_rounds={})",
            self.n_max, self.growth_factor, self.tol_energy, self.tol_observable, self.max_rounds
        )
    }
}

/// Observables at one grid point.
#[pyclass(name = "ObservableRecord", module = "rabi", frozen)]
struct PyRecord(observables::ObservableRecord);

#[pymethods]
impl PyRecord {
    #[getter]
    fn ratio(&self) -> f64 {
        self.0.ratio
    }

    #[getter]
    fn lambda_rel(&self) -> f64 {
        self.0.lambda_rel
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.0.n_qubits
    }

    #[getter]
    fn temperature(&self) -> f64 {
        self.0.temperature
    }

    #[getter]
    fn entropy_s(&self) -> f64 {
        self.0.entropy_s
    }

    #[getter]
    fn corr_c(&self) -> f64 {
        self.0.corr_c
    }

    #[getter]
    fn squeeze_sp1(&self) -> f64 {
        self.0.squeeze_sp1
    }

    #[getter]
    fn alpha_cond(&self) -> f64 {
        self.0.alpha_cond
    }

    #[getter]
    fn e0(&self) -> f64 {
        self.0.e0
    }

    /// `E_n − E_0` for n = 1..10.
    #[getter]
    fn gaps(&self) -> Vec<f64> {
        self.0.gaps.clone()
    }

    #[getter]
    fn n_max_used(&self) -> usize {
        self.0.n_max_used
    }

    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = &self.0;
        let d = PyDict::new(py);
        d.set_item("ratio", r.ratio)?;
        d.set_item("lambda_rel", r.lambda_rel)?;
        d.set_item("n_qubits", r.n_qubits)?;
        d.set_item("temperature", r.temperature)?;
        d.set_item("entropy_S", r.entropy_s)?;
        d.set_item("corr_C", r.corr_c)?;
        d.set_item("squeeze_sp1", r.squeeze_sp1)?;
        d.set_item("alpha_cond", r.alpha_cond)?;
        d.set_item("e0", r.e0)?;
        d.set_item("gaps", r.gaps.clone())?;
        d.set_item("n_max_used", r.n_max_used)?;
        d.set_item("converged", r.converged)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let r = &self.0;
        format!(
            "ObservableRecord(ratio={}, lambda_rel={}, n_qubits={}, temperature={}, entropy_S={}, corr_C={}, \
             squeeze_sp1={}, alpha_cond={}, e0={}, n_max_used={}, converged={})",
            r.ratio,
            r.lambda_rel,
            r.n_qubits,
            r.temperature,
            r.entropy_s,
            r.corr_c,
            r.squeeze_sp1,
            r.alpha_cond,
            r.e0,
            r.n_max_used,
            r.converged
        )
    }
}

fn records(list: &[PyRef<'_, PyRecord>]) -> Vec<observables::ObservableRecord> {
    list.iter().map(|r| r.0.clone()).collect()
}

/// Ground-state observables with an adaptively converged Fock cutoff.
#[pyfunction]
#[pyo3(signature = (spec, trunc = None, solver = "auto", seed = DEFAULT_SEED))]
fn ground_state(
    py: Python<'_>,
    spec: &PyModelSpec,
    trunc: Option<PyRef<'_, PyTruncation>>,
    solver: &str,
    seed: u64,
) -> PyResult<PyRecord> {
    let (spec, trunc, solver) = (spec.0, truncation(trunc)?, solver_kind(solver)?);
    py.detach(|| eigensolver::converge_ground_state(&spec, &trunc, solver, seed))
        .map(|c| PyRecord(c.record))
        .map_err(to_py)
}

/// Lowest `levels` energies at a fixed cutoff as `(energy, parity)` pairs.
#[pyfunction]
#[pyo3(signature = (spec, n_max, levels = 11, solver = "auto", seed = DEFAULT_SEED))]
fn spectrum(
    py: Python<'_>,
    spec: &PyModelSpec,
    n_max: usize,
    levels: usize,
    solver: &str,
    seed: u64,
) -> PyResult<Vec<(f64, &'static str)>> {
    let (spec, solver) = (spec.0, solver_kind(solver)?);
    let solved = py
        .detach(|| eigensolver::solve_sectors(&spec, n_max, levels, solver, false, seed))
        .map_err(to_py)?;
    let (merged, parities) = solved.merged(levels);
    Ok(merged
        .eigenvalues
        .into_iter()
        .zip(parities)
        .map(|(e, p)| (e, if p.sign() > 0.0 { "even" } else { "odd" }))
        .collect())
}

/// Gibbs-state observables at a fixed cutoff, one record per temperature.
#[pyfunction]
fn thermal(py: Python<'_>, spec: &PyModelSpec, n_max: usize, temperatures: Vec<f64>) -> PyResult<Vec<PyRecord>> {
    let spec = spec.0;
    py.detach(|| observables::thermal_records(&spec, n_max, &temperatures))
        .map(|v| v.into_iter().map(PyRecord).collect())
        .map_err(to_py)
}

/// Records over a ratio × N × λ/λc × T grid, in that order.
#[pyfunction]
#[pyo3(signature = (ratios, lambda_points, n_qubits = vec![1], temperatures = vec![0.0], solver = "auto", seed = DEFAULT_SEED, trunc = None))]
#[allow(clippy::too_many_arguments)]
fn sweep(
    py: Python<'_>,
    ratios: Vec<f64>,
    lambda_points: Vec<f64>,
    n_qubits: Vec<usize>,
    temperatures: Vec<f64>,
    solver: &str,
    seed: u64,
    trunc: Option<PyRef<'_, PyTruncation>>,
) -> PyResult<Vec<PyRecord>> {
    let mut grid = SweepGrid::new(ratios, lambda_points, n_qubits);
    grid.temperatures = temperatures;
    grid.solver = solver_kind(solver)?;
    grid.seed = seed;
    let trunc = truncation(trunc)?;
    py.detach(|| criticality::run_sweep(&grid, &trunc))
        .map(|v| v.into_iter().map(PyRecord).collect())
        .map_err(to_py)
}

/// Mean-field predictions for `spec`.
#[pyfunction]
fn semiclassical<'py>(py: Python<'py>, spec: &PyModelSpec) -> PyResult<Bound<'py, PyDict>> {
    let p = SemiclassicalPrediction::new(&spec.0).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("lambda_c", p.lambda_c)?;
    d.set_item("lambda_rel", p.lambda_rel)?;
    let side = match p.valid_side {
        Side::Below => "below",
        Side::At => "at",
        Side::Above => "above",
    };
    d.set_item("side", side)?;
    d.set_item("gap_below", p.gap_below)?;
    d.set_item("gap_above", p.gap_above)?;
    d.set_item("alpha_full", p.alpha_full)?;
    d.set_item("alpha_near", p.alpha_near)?;
    d.set_item("theta", p.theta)?;
    d.set_item("overlap", p.overlap)?;
    Ok(d)
}

/// `⟨m|sgn(x̂)|n⟩` for `m, n ≤ n_max` as nested lists.
#[pyfunction]
fn sign_matrix(n_max: usize) -> PyResult<Vec<Vec<f64>>> {
    let s = SignOperator::new(n_max).map_err(to_py)?;
    Ok((0..=n_max).map(|m| (0..=n_max).map(|n| s.element(m, n)).collect()).collect())
}

/// `(x, y, slopes)` of log10 S against log10(λ/λc − 1) above threshold.
#[pyfunction]
fn entropy_slopes(records: Vec<PyRef<'_, PyRecord>>) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let s = criticality::SlopeSeries::entropy(&self::records(&records)).map_err(to_py)?;
    Ok((s.x, s.y, s.slopes))
}

/// λ/λc span between the `low` and `high` fractions of the plateau entropy.
#[pyfunction]
fn transition_width(records: Vec<PyRef<'_, PyRecord>>, low: f64, high: f64) -> PyResult<f64> {
    criticality::transition_width(&self::records(&records), low, high).map_err(to_py)
}

/// `(exponent, prefactor)` of a least-squares log-log fit.
#[pyfunction]
fn fit_power_law(x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, f64)> {
    let f = criticality::fit_power_law(&x, &y).map_err(to_py)?;
    Ok((f.exponent, f.prefactor))
}

#[pymodule]
fn rabi(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RabiError", m.py().get_type::<RabiError>())?;
    m.add("DEFAULT_SEED", DEFAULT_SEED)?;
    m.add_class::<PyModelSpec>()?;
    m.add_class::<PyTruncation>()?;
    m.add_class::<PyRecord>()?;
    m.add_function(wrap_pyfunction!(ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(thermal, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(semiclassical, m)?)?;
    m.add_function(wrap_pyfunction!(sign_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_slopes, m)?)?;
    m.add_function(wrap_pyfunction!(transition_width, m)?)?;
    m.add_function(wrap_pyfunction!(fit_power_law, m)?)?;
    Ok(())
}
