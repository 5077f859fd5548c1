//! Sweeps over (ratio, N, λ/λc, T) grids and critical-scaling analysis.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{converge_ground_state, initial_cutoff, SolverKind, DEFAULT_DENSE_CAP, DEFAULT_SEED};
use crate::error::{invalid, Error, Result};
use crate::model::{ModelSpec, TruncationConfig};
use crate::observables::{thermal_cutoff, thermal_records, ObservableRecord};

/// Which observables a sweep reports; deselected columns are written as NaN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservableSelection {
    pub entropy: bool,
    pub correlation: bool,
    pub squeezing: bool,
    pub field: bool,
    pub gaps: bool,
}

impl Default for ObservableSelection {
    fn default() -> Self {
        Self {
            entropy: true,
            correlation: true,
            squeezing: true,
            field: true,
            gaps: true,
        }
    }
}

impl ObservableSelection {
    fn apply(&self, r: &mut ObservableRecord) {
        if !self.entropy {
            r.entropy_s = f64::NAN;
        }
        if !self.correlation {
            r.corr_c = f64::NAN;
        }
        if !self.squeezing {
            r.squeeze_sp1 = f64::NAN;
        }
        if !self.field {
            r.alpha_cond = f64::NAN;
        }
        if !self.gaps {
            r.gaps.iter_mut().for_each(|g| *g = f64::NAN);
        }
    }
}

/// Sweep axes. Records are emitted ratio-major, then N, then λ/λc, then T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub ratios: Vec<f64>,
    /// λ/λc values.
    pub lambda_points: Vec<f64>,
    pub n_qubits_list: Vec<usize>,
    /// In units of Δ. `[0]` selects the ground-state path.
    pub temperatures: Vec<f64>,
    pub observables: ObservableSelection,
    pub solver: SolverKind,
    /// Seed for randomized starting vectors.
    pub seed: u64,
}

impl SweepGrid {
    /// Ground-state grid with every observable selected.
    pub fn new(ratios: Vec<f64>, lambda_points: Vec<f64>, n_qubits_list: Vec<usize>) -> Self {
        Self {
            ratios,
            lambda_points,
            n_qubits_list,
            temperatures: vec![0.0],
            observables: ObservableSelection::default(),
            solver: SolverKind::Auto,
            seed: DEFAULT_SEED,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ratios.is_empty() || self.lambda_points.is_empty() || self.n_qubits_list.is_empty() {
            return Err(invalid("grid", "every axis needs at least one point"));
        }
        if self.ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(invalid("ratio", "must be > 0"));
        }
        if self.lambda_points.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(invalid("lambda_rel", "must be >= 0"));
        }
        if self.n_qubits_list.contains(&0) {
            return Err(invalid("n_qubits", "must be >= 1"));
        }
        if self.temperatures.is_empty() || self.temperatures.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(invalid("temperature", "need at least one value, all >= 0"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ratios.len() * self.n_qubits_list.len() * self.lambda_points.len() * self.temperatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn is_thermal(&self) -> bool {
        self.temperatures.iter().any(|&t| t > 0.0)
    }
}

/// `count` points evenly spaced from `start` to `stop` inclusive.
pub fn linear_points(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(invalid("grid", "need finite bounds and count >= 1"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

/// λ/λc = 1 + 10^x for `count` values of x evenly spaced in `[log_start, log_stop]`.
pub fn log_distance_points(log_start: f64, log_stop: f64, count: usize) -> Result<Vec<f64>> {
    Ok(linear_points(log_start, log_stop, count)?
        .into_iter()
        .map(|x| 1.0 + 10f64.powf(x))
        .collect())
}

/// Largest Fock cutoff whose parity sectors fit the dense cap.
pub fn dense_cutoff_cap(n_qubits: usize) -> usize {
    2 * DEFAULT_DENSE_CAP / (n_qubits + 1) - 2
}

/// One record per grid point, in grid order. Points are solved in parallel on the
/// current rayon pool; a failing point yields a [`ObservableRecord::failed`] entry.
pub fn run_sweep(grid: &SweepGrid, trunc: &TruncationConfig) -> Result<Vec<ObservableRecord>> {
    grid.validate()?;
    trunc.validate()?;
    let mut items = Vec::new();
    for &ratio in &grid.ratios {
        for &n_q in &grid.n_qubits_list {
            for &lr in &grid.lambda_points {
                items.push((ratio, n_q, lr));
            }
        }
    }
    let blocks: Vec<Vec<ObservableRecord>> = items
        .par_iter()
        .map(|&(ratio, n_q, lr)| {
            let out = ModelSpec::from_ratios(ratio, lr, n_q).and_then(|spec| solve_point(grid, trunc, &spec));
            let mut records = match out {
                Ok(r) => r,
                Err(_) => failed_block(grid, ratio, lr, n_q),
            };
            records.iter_mut().for_each(|r| grid.observables.apply(r));
            records
        })
        .collect();
    Ok(blocks.into_iter().flatten().collect())
}

fn failed_block(grid: &SweepGrid, ratio: f64, lambda_rel: f64, n_qubits: usize) -> Vec<ObservableRecord> {
    grid.temperatures
        .iter()
        .map(|&t| {
            let mut r = ObservableRecord::failed(&ModelSpec::from_ratios(ratio, 0.0, n_qubits.max(1)).expect("valid"), t);
            r.ratio = ratio;
            r.lambda_rel = lambda_rel;
            r.n_qubits = n_qubits;
            r
        })
        .collect()
}

fn solve_point(grid: &SweepGrid, trunc: &TruncationConfig, spec: &ModelSpec) -> Result<Vec<ObservableRecord>> {
    if grid.is_thermal() {
        let t_max = grid.temperatures.iter().copied().fold(0.0, f64::max);
        let n_max = thermal_cutoff(spec, t_max, initial_cutoff(spec, trunc), dense_cutoff_cap(spec.n_qubits));
        return thermal_records(spec, n_max, &grid.temperatures);
    }
    let c = converge_ground_state(spec, trunc, grid.solver, grid.seed)?;
    Ok(vec![c.record])
}

/// Log-log series `y = log10 v` against `x = log10(λ/λc − 1)` with centered slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeSeries {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `slopes[i]` belongs to `x[i + 1]`.
    pub slopes: Vec<f64>,
}

impl SlopeSeries {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if x.len() < 3 {
            return Err(invalid("series", "need at least 3 points"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("series", "x must be strictly increasing"));
        }
        if y.iter().chain(&x).any(|v| !v.is_finite()) {
            return Err(invalid("series", "non-finite value"));
        }
        let slopes = (1..x.len() - 1)
            .map(|i| (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]))
            .collect();
        Ok(Self { x, y, slopes })
    }

    /// Series from `(λ/λc, value)` pairs above λc with positive values.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(l, v)| l > 1.0 && v > 0.0).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (x, y) = pts.iter().map(|&(l, v)| ((l - 1.0).log10(), v.log10())).unzip();
        Self::new(x, y)
    }

    /// Entropy series from sweep records.
    pub fn entropy(records: &[ObservableRecord]) -> Result<Self> {
        let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.lambda_rel, r.entropy_s)).collect();
        Self::from_points(&pts)
    }
}

/// Centered slope at the interior grid point nearest `at_x`.
pub fn loglog_slope(series: &SlopeSeries, at_x: f64) -> Result<f64> {
    let n = series.x.len();
    if !(at_x >= series.x[1] && at_x <= series.x[n - 2]) {
        return Err(invalid("at_x", format!("{at_x} outside interior of [{}, {}]", series.x[1], series.x[n - 2])));
    }
    let i = (1..n - 1)
        .min_by(|&a, &b| (series.x[a] - at_x).abs().total_cmp(&(series.x[b] - at_x).abs()))
        .expect("interior non-empty");
    Ok(series.slopes[i - 1])
}

/// λ/λc span between the crossings of `threshold_low` and `threshold_high` times the
/// entropy at λ/λc = 1.5, interpolating linearly between grid points.
pub fn transition_width(records: &[ObservableRecord], threshold_low: f64, threshold_high: f64) -> Result<f64> {
    if !(0.0 < threshold_low && threshold_low < threshold_high) {
        return Err(invalid("threshold", "need 0 < low < high"));
    }
    let plateau = records
        .iter()
        .find(|r| (r.lambda_rel - 1.5).abs() < 1e-9)
        .map(|r| r.entropy_s)
        .ok_or_else(|| Error::Undefined("no record at λ/λc = 1.5".into()))?;
    if !(plateau > 0.0) {
        return Err(Error::Undefined("plateau entropy is not positive".into()));
    }
    let mut pts: Vec<(f64, f64)> = records.iter().map(|r| (r.lambda_rel, r.entropy_s)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lo = crossing(&pts, threshold_low * plateau)?;
    let hi = crossing(&pts, threshold_high * plateau)?;
    Ok(hi - lo)
}

/// First upward crossing of `level`, linearly interpolated.
fn crossing(pts: &[(f64, f64)], level: f64) -> Result<f64> {
    if pts.first().is_none_or(|p| p.1 >= level) {
        return Err(Error::Undefined(format!("level {level} not spanned from below")));
    }
    for w in pts.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 < level && y1 >= level {
            return Ok(x0 + (x1 - x0) * (level - y0) / (y1 - y0));
        }
    }
    Err(Error::Undefined(format!("level {level} never reached")))
}

/// Least-squares power law `y = a x^p` in log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
}

pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
    let (lx, ly) = log_pairs(x, y)?;
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("x", "need at least two distinct values"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let p = sxy / sxx;
    Ok(PowerLawFit {
        exponent: p,
        prefactor: (my - p * mx).exp(),
    })
}

/// Prefactor `a` of `y = a x^p` for a fixed exponent (geometric-mean estimate).
pub fn power_law_prefactor(x: &[f64], y: &[f64], exponent: f64) -> Result<f64> {
    let (lx, ly) = log_pairs(x, y)?;
    let n = lx.len() as f64;
    Ok((lx.iter().zip(&ly).map(|(a, b)| b - exponent * a).sum::<f64>() / n).exp())
}

fn log_pairs(x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(invalid("fit", "need at least 2 points"));
    }
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(invalid("fit", "values must be positive and finite"));
    }
    Ok((x.iter().map(|v| v.ln()).collect(), y.iter().map(|v| v.ln()).collect()))
}

/// Midpoint of the grid interval with the largest forward slope of `y(x)`.
pub fn steepest_ascent(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(invalid("series", "need matching x, y with at least 2 points"));
    }
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..x.len() - 1 {
        let dx = x[i + 1] - x[i];
        if !(dx > 0.0) {
            return Err(invalid("series", "x must be strictly increasing"));
        }
        let s = (y[i + 1] - y[i]) / dx;
        if s > best.0 {
            best = (s, 0.5 * (x[i] + x[i + 1]));
        }
    }
    Ok(best.1)
}
