//! Numerical acceptance criteria. Runs every criterion, prints a verdict per
//! criterion and exits non-zero if any of them fails.

use std::time::Instant;

use rabi_core::criticality::{
    fit_power_law, linear_points, log_distance_points, loglog_slope, power_law_prefactor, run_sweep,
    steepest_ascent, SlopeSeries, SweepGrid,
};
use rabi_core::eigensolver::{converge_ground_state, initial_cutoff, solve_sectors, SolverKind, DEFAULT_SEED};
use rabi_core::observables::{ObservableRecord, SignOperator};
use rabi_core::{ModelSpec, TruncationConfig};

struct Verdict {
    pass: bool,
    lines: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Self {
            pass: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.lines.push(format!("  [{}] {line}", if ok { "ok" } else { "FAIL" }));
    }
}

fn sweep(ratio: f64, lambdas: Vec<f64>, n_qubits: Vec<usize>, solver: SolverKind) -> Vec<ObservableRecord> {
    let mut grid = SweepGrid::new(vec![ratio], lambdas, n_qubits);
    grid.solver = solver;
    run_sweep(&grid, &TruncationConfig::default()).expect("sweep")
}

fn ground(ratio: f64, lambda_rel: f64, n_qubits: usize) -> ObservableRecord {
    let spec = ModelSpec::from_ratios(ratio, lambda_rel, n_qubits).unwrap();
    converge_ground_state(&spec, &TruncationConfig::default(), SolverKind::Auto, DEFAULT_SEED)
        .unwrap()
        .record
}

/// Entropy at λ/λc = 1 + 10^-4 for N = 1, shared by criteria 1 and 2.
fn criterion_1(v: &mut Verdict) -> f64 {
    let lambdas = log_distance_points(-6.0, -2.0, 41).unwrap();
    let records = sweep(1e-7, lambdas, vec![1], SolverKind::Auto);
    let all_converged = records.iter().all(|r| r.converged);
    v.check(all_converged, format!("all 41 points converged: {all_converged}"));
    let series = SlopeSeries::entropy(&records).unwrap();
    let slope = loglog_slope(&series, -4.0).unwrap();
    v.check((slope - 0.92).abs() <= 0.05, format!("dlogS/dlog(λ/λc-1) at 1e-4 = {slope:.4} (0.92 ± 0.05)"));
    let s1 = records[20].entropy_s;
    v.lines.push(format!("  S_1(1e-4) = {s1:.6e}"));
    s1
}

fn criterion_2(v: &mut Verdict, s1: f64) {
    let ns = vec![2, 3, 5, 10];
    let records = sweep(1e-7, vec![1.0 + 1e-4], ns.clone(), SolverKind::Auto);
    for (n, r) in ns.iter().zip(&records) {
        let ratio = r.entropy_s / s1;
        let dev = (ratio - *n as f64).abs() / *n as f64;
        v.check(
            dev <= 0.10 && r.converged,
            format!("N = {n}: S_N/S_1 = {ratio:.4} (deviation {:.1}%, converged {})", 100.0 * dev, r.converged),
        );
    }
}

fn criterion_3(v: &mut Verdict) {
    let ratio = 1e-5;
    let d = log_distance_points(-3.0, -2.0, 11).unwrap().iter().map(|l| l - 1.0).collect::<Vec<_>>();
    let below = sweep(ratio, d.iter().map(|x| 1.0 - x).collect(), vec![1], SolverKind::Auto);
    let above = sweep(ratio, d.iter().map(|x| 1.0 + x).collect(), vec![1], SolverKind::Auto);
    for (name, records, level, expected) in [
        ("below, gap1", &below, 1, std::f64::consts::SQRT_2),
        ("above, gap2", &above, 2, 2.0),
    ] {
        let gaps: Vec<f64> = records.iter().map(|r| r.gap(level) / ratio).collect();
        let fit = fit_power_law(&d, &gaps).unwrap();
        v.check(
            (fit.exponent - 0.5).abs() <= 0.02,
            format!("{name}: fitted exponent {:.4} (0.5 ± 0.02)", fit.exponent),
        );
        let a = power_law_prefactor(&d, &gaps, 0.5).unwrap();
        let dev = (a - expected).abs() / expected;
        v.check(
            dev <= 0.05,
            format!("{name}: prefactor at exponent 1/2 = {a:.4} ω0 vs {expected:.4} ω0 ({:.1}%)", 100.0 * dev),
        );
    }
}

fn criterion_4(v: &mut Verdict) {
    let g0 = ground(1e-3, 0.0, 1).gap(1);
    let gc = ground(1e-3, 1.0, 1).gap(1);
    let q = gc / g0;
    v.check(
        (1.0 / 12.0..=1.0 / 8.0).contains(&q),
        format!("gap1(λc)/gap1(0) = {q:.4} in [{:.4}, {:.4}]", 1.0 / 12.0, 1.0 / 8.0),
    );
}

fn criterion_5(v: &mut Verdict) {
    let ratio: f64 = 1e-3;
    let lc = ratio.sqrt() / 2.0;
    for g in [1.05, 1.1, 1.2, 1.5] {
        let r = ground(ratio, g, 1);
        let lambda = g * lc;
        let pred = 1.0 / (4.0 * lambda) * (g.powi(4) - 1.0).sqrt();
        let dev = (r.alpha_cond - pred).abs() / pred;
        v.check(
            dev <= 0.02,
            format!("λ/λc = {g}: α = {:.5}, prediction {pred:.5} ({:.2}%)", r.alpha_cond, 100.0 * dev),
        );
    }
}

fn criterion_6(v: &mut Verdict) {
    let lambdas = linear_points(0.9, 1.1, 41).unwrap();
    let step = lambdas[1] - lambdas[0];
    let records = sweep(1e-5, lambdas.clone(), vec![1], SolverKind::Auto);
    let (i, min) = records
        .iter()
        .map(|r| r.squeeze_sp1)
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    v.check(min < 0.5, format!("min s_p+1 = {min:.5} < 0.5"));
    let at = lambdas[i];
    v.check(
        (at - 1.0).abs() <= step + 1e-12,
        format!("located at λ/λc = {at:.4}, grid step {step:.4}"),
    );
}

fn criterion_7(v: &mut Verdict) {
    let start = Instant::now();
    let lambdas = linear_points(0.5, 1.5, 11).unwrap();
    let temps = vec![0.0, 1.0, 5.0];
    let step = lambdas[1] - lambdas[0];
    let mut grid = SweepGrid::new(vec![1e-2], lambdas.clone(), vec![1]);
    grid.temperatures = temps.clone();
    grid.solver = SolverKind::Dense;
    let records = run_sweep(&grid, &TruncationConfig::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    for (k, t) in temps.iter().enumerate() {
        let c: Vec<f64> = records.iter().skip(k).step_by(temps.len()).map(|r| r.corr_c).collect();
        let conv = records.iter().skip(k).step_by(temps.len()).all(|r| r.converged);
        let x = steepest_ascent(&lambdas, &c).unwrap();
        v.check(
            (x - 1.0).abs() <= step + 1e-12,
            format!("T = {t}Δ: steepest ascent of C at λ/λc = {x:.3} (grid step {step}, converged {conv})"),
        );
    }
    let last = &records[records.len() - temps.len()..];
    let c_hot: Vec<f64> = last.iter().map(|r| r.corr_c).collect();
    let monotone = c_hot.windows(2).all(|w| w[1] <= w[0]);
    v.check(monotone, format!("C(T) at λ/λc = 1.5: {c_hot:.5?} nonincreasing"));
    v.check(elapsed <= 600.0, format!("wall time {elapsed:.1} s (budget 600 s)"));
}

fn criterion_8(v: &mut Verdict) {
    let mut worst = 0.0f64;
    for ratio in [1e-1, 1e-2] {
        for g in [0.5, 0.9, 1.0, 1.1, 1.5] {
            let spec = ModelSpec::from_ratios(ratio, g, 1).unwrap();
            let n_max = initial_cutoff(&spec, &TruncationConfig::default());
            let dense = solve_sectors(&spec, n_max, 11, SolverKind::Dense, false, DEFAULT_SEED).unwrap().merged(11).0;
            let lz = solve_sectors(&spec, n_max, 11, SolverKind::Lanczos, false, DEFAULT_SEED).unwrap().merged(11).0;
            for (a, b) in dense.eigenvalues.iter().zip(&lz.eigenvalues) {
                worst = worst.max((a - b).abs() / b.abs());
            }
        }
    }
    v.check(worst <= 1e-10, format!("Lanczos vs dense, lowest 11 levels: max relative difference {worst:.2e}"));
    let mut worst = 0.0f64;
    for n_max in [1, 2, 7, 32, 64, 128] {
        let reference = rabi_validation::sign_matrix_by_quadrature(n_max, 1e-14);
        let sign = SignOperator::new(n_max).unwrap().matrix();
        worst = worst.max((&sign - &reference).amax());
    }
    v.check(worst <= 1e-10, format!("sign recurrence vs quadrature, n_max <= 128: max difference {worst:.2e}"));
}

fn criterion_9(v: &mut Verdict) {
    let mut worst = [0.0f64; 3];
    for ratio in [1e-1, 1e-2, 1e-3] {
        for n in [1, 2, 3] {
            let r = ground(ratio, 0.0, n);
            worst[0] = worst[0].max(r.entropy_s.abs());
            worst[1] = worst[1].max(r.corr_c.abs());
            worst[2] = worst[2].max((r.squeeze_sp1 - 1.0).abs());
        }
    }
    v.check(
        worst.iter().all(|w| *w <= 1e-12),
        format!("λ = 0: |S| <= {:.1e}, |C| <= {:.1e}, |s_p+1 - 1| <= {:.1e}", worst[0], worst[1], worst[2]),
    );
    let mut worst = 0.0f64;
    for omega0 in [1.0, 0.1] {
        for lambda in [0.1, 0.5, 1.0] {
            let spec = ModelSpec::new(0.0, 0.0, omega0, lambda, 1).unwrap();
            let e0 = converge_ground_state(&spec, &TruncationConfig::default(), SolverKind::Auto, DEFAULT_SEED)
                .unwrap()
                .record
                .e0;
            let exact = -lambda * lambda / omega0;
            worst = worst.max((e0 - exact).abs() / exact.abs().max(1.0));
        }
    }
    v.check(worst <= 1e-10, format!("Δ = 0: E0 vs -λ²/ω0, max deviation {worst:.2e}"));
}

fn main() {
    let mut failed = Vec::new();
    let mut report = |k: usize, v: Verdict, secs: f64| {
        println!("criterion {k}: {} ({secs:.1} s)", if v.pass { "PASS" } else { "FAIL" });
        for l in &v.lines {
            println!("{l}");
        }
        if !v.pass {
            failed.push(k);
        }
    };
    let timed = |f: &mut dyn FnMut(&mut Verdict)| {
        let t = Instant::now();
        let mut v = Verdict::new();
        f(&mut v);
        (v, t.elapsed().as_secs_f64())
    };
    let mut s1 = 0.0;
    let (v, t) = timed(&mut |v| s1 = criterion_1(v));
    report(1, v, t);
    let (v, t) = timed(&mut |v| criterion_2(v, s1));
    report(2, v, t);
    let rest: [(usize, fn(&mut Verdict)); 7] = [
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    for (k, f) in rest {
        let (v, t) = timed(&mut |v| f(v));
        report(k, v, t);
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
