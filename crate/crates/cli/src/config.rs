//! Flag and config-file parsing into a resolved [`RunConfig`].

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rabi_core::criticality::{linear_points, log_distance_points, ObservableSelection, SweepGrid};
use rabi_core::eigensolver::DEFAULT_SEED;
use rabi_core::TruncationConfig;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "rabi", version, about = "Rabi and Dicke model sweeps across the superradiance transition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ground-state observables over a (ratio, N, λ/λc) grid.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Lowest levels against λ/λc.
    #[command(args_override_self = true)]
    Spectrum(SpectrumArgs),
    /// Gibbs-state observables over a λ/λc grid and a temperature grid.
    #[command(args_override_self = true)]
    Thermal(SweepArgs),
    /// Appends log-log entropy slopes to a sweep CSV.
    #[command(args_override_self = true)]
    Slope(SlopeArgs),
    /// Closed-form semiclassical predictions.
    #[command(args_override_self = true)]
    Semiclassical(SemiclassicalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Comma-separated ω0/Δ values [default: 0.01]
    #[arg(long)]
    pub ratio: Option<String>,
    /// Linear λ/λc grid `start:stop:count` [default: 0:1.5:16]
    #[arg(long)]
    pub lambda_rel: Option<String>,
    /// Grid of log10(λ/λc − 1) as `start:stop:count`
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_dist_log: Option<String>,
    /// Comma-separated qubit counts [default: 1]
    #[arg(long)]
    pub n_qubits: Option<String>,
}

#[derive(Debug, Args)]
pub struct TruncArgs {
    /// Lower bound for the first Fock cutoff [default: 32]
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Cutoff multiplier per round [default: 2]
    #[arg(long)]
    pub growth_factor: Option<f64>,
    /// Relative E0 tolerance between rounds [default: 1e-10]
    #[arg(long)]
    pub tol_energy: Option<f64>,
    /// Absolute S, C, s_p+1 tolerance between rounds [default: 1e-8]
    #[arg(long)]
    pub tol_observable: Option<f64>,
    /// Refinement rounds before a point is flagged [default: 6]
    #[arg(long)]
    pub max_rounds: Option<usize>,
    /// auto, dense, lanczos or slicing [default: auto]
    #[arg(long)]
    pub solver: Option<String>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: csv]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomized starting vectors [default: 24301]
    #[arg(long)]
    pub seed: Option<u64>,
    /// `key = value` config file; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Comma-separated temperatures in units of Δ [default: 0; thermal: 0,1,5]
    #[arg(long)]
    pub temperature: Option<String>,
    /// Comma-separated subset of entropy,corr,squeeze,alpha,gaps [default: all]
    #[arg(long)]
    pub observables: Option<String>,
    #[command(flatten)]
    pub trunc: TruncArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Number of levels per point [default: 11]
    #[arg(long)]
    pub levels: Option<usize>,
    #[command(flatten)]
    pub trunc: TruncArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SlopeArgs {
    /// Sweep CSV to read
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key = value` config file; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SemiclassicalArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key = value` config file; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub enum RunConfig {
    Sweep(SweepConfig),
    Thermal(SweepConfig),
    Spectrum { sweep: SweepConfig, levels: usize },
    Slope { input: PathBuf, out: PathBuf },
    Semiclassical { grid: SweepGrid, out: Option<PathBuf> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub grid: SweepGrid,
    pub trunc: TruncationConfig,
    pub out: PathBuf,
    pub format: Format,
    pub seed: u64,
}

/// Parses `argv` (program name first), merging the `--config` file beneath the flags.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let first = Cli::try_parse_from(&argv)?;
    let Some(path) = config_path(&first.command) else {
        return resolve(first.command);
    };
    let sub = argv
        .iter()
        .position(|a| subcommand_name(&first.command) == a.to_string_lossy())
        .expect("parsed subcommand is present");
    let mut entries = read_config_file(path)?;
    check_keys(subcommand_name(&first.command), &entries, path)?;
    // a grid given on the command line replaces either grid form from the file
    if argv.iter().any(|a| {
        let a = a.to_string_lossy();
        a.starts_with("--lambda-rel") || a.starts_with("--lambda-dist-log")
    }) {
        entries.remove("lambda-rel");
        entries.remove("lambda-dist-log");
    }
    let mut merged: Vec<OsString> = argv[..=sub].to_vec();
    for (k, v) in entries {
        merged.push(format!("--{k}={v}").into());
    }
    merged.extend_from_slice(&argv[sub + 1..]);
    resolve(Cli::try_parse_from(merged)?.command)
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Sweep(_) => "sweep",
        Command::Spectrum(_) => "spectrum",
        Command::Thermal(_) => "thermal",
        Command::Slope(_) => "slope",
        Command::Semiclassical(_) => "semiclassical",
    }
}

fn config_path(c: &Command) -> Option<&Path> {
    match c {
        Command::Sweep(a) | Command::Thermal(a) => a.output.config.as_deref(),
        Command::Spectrum(a) => a.output.config.as_deref(),
        Command::Slope(a) => a.config.as_deref(),
        Command::Semiclassical(a) => a.config.as_deref(),
    }
}

/// `key = value` lines; `#` starts a comment. Underscores in keys read as dashes.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)?;
    parse_config_text(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        let key = k.trim().replace('_', "-");
        let value = v.trim();
        if key.is_empty() || value.is_empty() {
            return Err(format!("line {}: empty key or value", i + 1));
        }
        if out.insert(key.clone(), value.to_string()).is_some() {
            return Err(format!("line {}: duplicate key {key}", i + 1));
        }
    }
    Ok(out)
}

fn check_keys(sub: &str, entries: &BTreeMap<String, String>, path: &Path) -> Result<(), CliError> {
    let cmd = Cli::command();
    let sc = cmd.find_subcommand(sub).expect("known subcommand");
    for key in entries.keys() {
        let known = key != "config" && sc.get_arguments().any(|a| a.get_long() == Some(key.as_str()));
        if !known {
            return Err(CliError::Usage(format!("{}: unknown key `{key}` for `{sub}`", path.display())));
        }
    }
    Ok(())
}

fn resolve(command: Command) -> Result<RunConfig, CliError> {
    Ok(match command {
        Command::Sweep(a) => RunConfig::Sweep(sweep_config(&a, "0")?),
        Command::Thermal(a) => RunConfig::Thermal(sweep_config(&a, "0,1,5")?),
        Command::Spectrum(a) => {
            let levels = a.levels.unwrap_or(11);
            if levels == 0 {
                return Err(CliError::Usage("--levels must be >= 1".into()));
            }
            let grid = grid_from(&a.grid)?;
            RunConfig::Spectrum {
                sweep: finish_sweep(grid, &a.trunc, &a.output)?,
                levels,
            }
        }
        Command::Slope(a) => RunConfig::Slope {
            input: a.input.ok_or_else(|| CliError::Usage("missing --input".into()))?,
            out: a.out.ok_or_else(|| CliError::Usage("missing --out".into()))?,
        },
        Command::Semiclassical(a) => RunConfig::Semiclassical {
            grid: grid_from(&a.grid)?,
            out: a.out,
        },
    })
}

fn sweep_config(a: &SweepArgs, default_t: &str) -> Result<SweepConfig, CliError> {
    let mut grid = grid_from(&a.grid)?;
    grid.temperatures = parse_list(a.temperature.as_deref().unwrap_or(default_t), "temperature")?;
    if let Some(obs) = &a.observables {
        grid.observables = parse_observables(obs)?;
    }
    finish_sweep(grid, &a.trunc, &a.output)
}

fn finish_sweep(mut grid: SweepGrid, t: &TruncArgs, o: &OutputArgs) -> Result<SweepConfig, CliError> {
    let defaults = TruncationConfig::default();
    let trunc = TruncationConfig {
        n_max: t.n_max.unwrap_or(defaults.n_max),
        growth_factor: t.growth_factor.unwrap_or(defaults.growth_factor),
        tol_energy: t.tol_energy.unwrap_or(defaults.tol_energy),
        tol_observable: t.tol_observable.unwrap_or(defaults.tol_observable),
        max_rounds: t.max_rounds.unwrap_or(defaults.max_rounds),
    };
    trunc.validate()?;
    if let Some(s) = &t.solver {
        grid.solver = s.parse()?;
    }
    let seed = o.seed.unwrap_or(DEFAULT_SEED);
    grid.seed = seed;
    grid.validate()?;
    Ok(SweepConfig {
        grid,
        trunc,
        out: o.out.clone().ok_or_else(|| CliError::Usage("missing --out".into()))?,
        format: o.format.unwrap_or(Format::Csv),
        seed,
    })
}

fn grid_from(g: &GridArgs) -> Result<SweepGrid, CliError> {
    let lambda_points = match (&g.lambda_rel, &g.lambda_dist_log) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("--lambda-rel and --lambda-dist-log are mutually exclusive".into()))
        }
        (None, Some(spec)) => {
            let (a, b, n) = parse_range(spec, "lambda-dist-log")?;
            log_distance_points(a, b, n)?
        }
        (lin, None) => {
            let (a, b, n) = parse_range(lin.as_deref().unwrap_or("0:1.5:16"), "lambda-rel")?;
            linear_points(a, b, n)?
        }
    };
    let ratios = parse_list(g.ratio.as_deref().unwrap_or("0.01"), "ratio")?;
    let n_qubits_list = parse_list(g.n_qubits.as_deref().unwrap_or("1"), "n-qubits")?;
    let grid = SweepGrid::new(ratios, lambda_points, n_qubits_list);
    grid.validate()?;
    Ok(grid)
}

/// `start:stop:count`.
pub fn parse_range(s: &str, name: &str) -> Result<(f64, f64, usize), CliError> {
    let bad = || CliError::Usage(format!("--{name}: expected start:stop:count, got `{s}`"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let count: usize = n.parse().map_err(|_| bad())?;
    if count == 0 {
        return Err(bad());
    }
    Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?, count))
}

pub fn parse_list<T: std::str::FromStr>(s: &str, name: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("--{name}: cannot parse `{}`", v.trim())))
        })
        .collect()
}

fn parse_observables(s: &str) -> Result<ObservableSelection, CliError> {
    let mut sel = ObservableSelection {
        entropy: false,
        correlation: false,
        squeezing: false,
        field: false,
        gaps: false,
    };
    for name in s.split(',').map(str::trim) {
        match name {
            "entropy" => sel.entropy = true,
            "corr" => sel.correlation = true,
            "squeeze" => sel.squeezing = true,
            "alpha" => sel.field = true,
            "gaps" => sel.gaps = true,
            other => return Err(CliError::Usage(format!("--observables: unknown observable `{other}`"))),
        }
    }
    Ok(sel)
}
