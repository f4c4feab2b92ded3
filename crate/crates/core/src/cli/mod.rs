//! Command-line front end: `converge`, `psi-sweep`, `stability`, `benchmark`
//! and `lte-check`.
//!
//! Every command accepts the same flags. A `--config` file holds `key = value`
//! lines using the long flag names (`#` starts a comment, repeatable flags take
//! comma-separated lists); flags given on the command line replace the file's
//! values. Output is CSV on stdout or `--out`, with `key=value` summary lines on
//! stderr or `--summary`.
//!
//! Exit codes: 0 on success, 1 when a run or the reference cross-check fails,
//! 2 on usage errors.

pub mod commands;
pub mod report;
pub mod spec;

use std::collections::HashMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
pub use commands::{
    cmd_benchmark, cmd_converge, cmd_lte_check, cmd_psi_sweep, cmd_stability, default_psi_ratios,
};
pub use report::Report;
pub use spec::{parse_orders, parse_param, parse_range, parse_step, RunSpec, SchemeId};

#[derive(Debug, Parser)]
#[command(name = "imex-sav", version, about = "IMEX-BDFk-SAV integrators: convergence, stability and benchmark studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Global error against Δt and fitted convergence slopes.
    Converge(CommonArgs),
    /// Error against ψ/Ψ_max at fixed Δt.
    PsiSweep(CommonArgs),
    /// Boundedness over a wide range of Δt.
    Stability(CommonArgs),
    /// Accuracy and cost against the comparison schemes.
    Benchmark(CommonArgs),
    /// Predicted against measured local truncation error on a damped oscillator.
    LteCheck(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Converge(_) => "converge",
            Self::PsiSweep(_) => "psi-sweep",
            Self::Stability(_) => "stability",
            Self::Benchmark(_) => "benchmark",
            Self::LteCheck(_) => "lte-check",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Self::Converge(a) | Self::PsiSweep(a) | Self::Stability(a) | Self::Benchmark(a) | Self::LteCheck(a) => a,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// key = value file with defaults for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// linear-sdof, van-der-pol, duffing, pendulum, spring-pendulum or duffing-chain.
    #[arg(long)]
    pub problem: Option<String>,
    /// Problem parameter override, key=value (repeatable).
    #[arg(long = "param")]
    pub params: Vec<String>,
    /// Scheme name, e.g. imex-bdf3-sav, tr, generalized-alpha(0), bathe(0.5), cd, cd-pu, rk4 (repeatable).
    #[arg(long = "scheme")]
    pub schemes: Vec<String>,
    /// SAV orders, e.g. 3, 1,2,5 or 1-5 (repeatable).
    #[arg(long = "k")]
    pub orders: Vec<String>,
    /// Step size: a number, T/n or xT with T the problem period (repeatable).
    #[arg(long = "dt")]
    pub dts: Vec<String>,
    /// Log-spaced steps lo:hi:n.
    #[arg(long)]
    pub dt_range: Option<String>,
    #[arg(long)]
    pub psi: Option<f64>,
    /// ψ as a multiple of the problem's Ψ_max estimate (repeatable).
    #[arg(long = "psi-ratio")]
    pub psi_ratios: Vec<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary destination; stderr when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Step of the high-resolution reference.
    #[arg(long)]
    pub fine_dt: Option<f64>,
    #[arg(long)]
    pub cross_check_tol: Option<f64>,
    /// Minimum steps per stability run.
    #[arg(long)]
    pub min_steps: Option<usize>,
    /// Run comparison schemes at Δt instead of n_sub·Δt.
    #[arg(long)]
    pub no_cost_parity: bool,
    /// Extra randomized parameter sets for lte-check.
    #[arg(long)]
    pub random_sets: Option<usize>,
}

/// Parses a `key = value` config file into lists of values per key.
pub fn parse_config(text: &str) -> Result<HashMap<String, Vec<String>>> {
    let mut map: HashMap<String, Vec<String>> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        let entry = map.entry(key).or_default();
        entry.extend(v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()));
    }
    Ok(map)
}

const CONFIG_KEYS: [&str; 19] = [
    "problem", "param", "scheme", "k", "dt", "dt-range", "psi", "psi-ratio", "t-end", "out",
    "summary", "seed", "jobs", "fine-dt", "cross-check-tol", "min-steps", "no-cost-parity",
    "random-sets", "config",
];

fn one<T: std::str::FromStr>(map: &HashMap<String, Vec<String>>, key: &str) -> Result<Option<T>> {
    match map.get(key).and_then(|v| v.last()) {
        None => Ok(None),
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidConfig(format!("config: bad value '{s}' for {key}"))),
    }
}

fn list(map: &HashMap<String, Vec<String>>, key: &str) -> Vec<String> {
    map.get(key).cloned().unwrap_or_default()
}

/// Fills every flag left unset on the command line from the config file.
pub fn merge_config(mut args: CommonArgs, map: &HashMap<String, Vec<String>>) -> Result<CommonArgs> {
    if let Some(k) = map.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(Error::InvalidConfig(format!("config: unknown key '{k}'")));
    }
    macro_rules! fill_one {
        ($field:ident, $key:expr) => {
            if args.$field.is_none() {
                args.$field = one(map, $key)?;
            }
        };
    }
    macro_rules! fill_list {
        ($field:ident, $key:expr) => {
            if args.$field.is_empty() {
                args.$field = list(map, $key);
            }
        };
    }
    fill_one!(problem, "problem");
    fill_list!(params, "param");
    fill_list!(schemes, "scheme");
    fill_list!(orders, "k");
    fill_list!(dts, "dt");
    fill_one!(dt_range, "dt-range");
    fill_one!(psi, "psi");
    if args.psi_ratios.is_empty() {
        args.psi_ratios = list(map, "psi-ratio")
            .iter()
            .map(|s| s.parse().map_err(|_| Error::InvalidConfig(format!("config: bad psi-ratio '{s}'"))))
            .collect::<Result<_>>()?;
    }
    fill_one!(t_end, "t-end");
    fill_one!(out, "out");
    fill_one!(summary, "summary");
    fill_one!(seed, "seed");
    fill_one!(jobs, "jobs");
    fill_one!(fine_dt, "fine-dt");
    fill_one!(cross_check_tol, "cross-check-tol");
    fill_one!(min_steps, "min-steps");
    fill_one!(random_sets, "random-sets");
    if !args.no_cost_parity {
        args.no_cost_parity = one::<bool>(map, "no-cost-parity")?.unwrap_or(false);
    }
    Ok(args)
}

fn parse_steps(items: &[String], period: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for s in items {
        if s.contains(':') {
            out.extend(parse_range(s, period)?);
        } else {
            out.push(parse_step(s, period)?);
        }
    }
    Ok(out)
}

/// Resolves flags (already merged with the config file) into a [`RunSpec`]
/// and the SAV orders named by `--k`, applying the command's defaults.
pub fn resolve(command: &str, args: &CommonArgs) -> Result<(RunSpec, Vec<usize>)> {
    let (default_problem, default_params) = commands::default_problem(command);
    let (problem, mut params) = match &args.problem {
        Some(p) => (p.clone(), Vec::new()),
        None => (default_problem.to_string(), default_params),
    };
    for p in &args.params {
        params.push(parse_param(p)?);
    }
    let orders = parse_orders(&args.orders)?;

    let mut spec = RunSpec {
        problem,
        params,
        schemes: Vec::new(),
        dts: Vec::new(),
        psi: args.psi,
        psi_ratios: args.psi_ratios.clone(),
        t_end: args.t_end,
        out: args.out.clone(),
        summary: args.summary.clone(),
        seed: args.seed.unwrap_or(0),
        jobs: args.jobs.unwrap_or(0),
        fine_dt: args.fine_dt,
        cross_check_tol: args.cross_check_tol.unwrap_or(crate::reference::DEFAULT_CROSS_CHECK_TOL),
        min_steps: args.min_steps.unwrap_or(100),
        cost_parity: !args.no_cost_parity,
        random_sets: args.random_sets.unwrap_or(0),
    };
    if command == "lte-check" {
        let orders = if orders.is_empty() { (1..=5).collect() } else { orders };
        return Ok((spec, orders));
    }

    let problem = commands::build_problem(&spec)?;
    for s in &args.schemes {
        spec.schemes.push(s.parse()?);
    }
    spec.schemes.extend(orders.iter().map(|&k| SchemeId::Sav(k)));
    if spec.schemes.is_empty() {
        spec.schemes = commands::default_schemes(command, &problem);
    }
    let mut steps = args.dts.clone();
    steps.extend(args.dt_range.clone());
    if steps.is_empty() {
        steps = commands::default_steps(command, problem.id);
    }
    spec.dts = parse_steps(&steps, problem.period)?;
    if spec.dts.is_empty() {
        return Err(Error::InvalidConfig("no step sizes given".into()));
    }
    Ok((spec, orders))
}

/// Runs one parsed command and returns its report.
pub fn run_command(cmd: &Command) -> Result<Report> {
    let mut args = cmd.args().clone();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("reading {}: {e}", path.display())))?;
        args = merge_config(args, &parse_config(&text)?)?;
    }
    let (spec, orders) = resolve(cmd.name(), &args)?;
    let report = match cmd {
        Command::Converge(_) => cmd_converge(&spec)?,
        Command::PsiSweep(_) => cmd_psi_sweep(&spec)?,
        Command::Stability(_) => cmd_stability(&spec)?,
        Command::Benchmark(_) => cmd_benchmark(&spec)?,
        Command::LteCheck(_) => cmd_lte_check(&spec, &orders)?,
    };
    report.emit(spec.out.as_deref(), spec.summary.as_deref())?;
    Ok(report)
}

fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidConfig(_) | Error::InvalidProblem(_) | Error::UnsupportedOrder(_)
    )
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_command(&cli.command) {
        Ok(r) if r.ok => 0,
        Ok(_) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines_are_lists() {
        let map = parse_config("# study\nproblem = duffing\nk = 1, 3\ndt_range = 1e-3:1e-2:4 # tail\n").unwrap();
        assert_eq!(map["problem"], vec!["duffing"]);
        assert_eq!(map["k"], vec!["1", "3"]);
        assert_eq!(map["dt-range"], vec!["1e-3:1e-2:4"]);
        assert!(parse_config("nonsense").is_err());
    }

    #[test]
    fn flags_override_config() {
        let map = parse_config("problem = duffing\nseed = 4\njobs = 2").unwrap();
        let args = CommonArgs {
            problem: Some("van-der-pol".into()),
            ..Default::default()
        };
        let merged = merge_config(args, &map).unwrap();
        assert_eq!(merged.problem.as_deref(), Some("van-der-pol"));
        assert_eq!(merged.seed, Some(4));
        assert_eq!(merged.jobs, Some(2));
        assert!(merge_config(CommonArgs::default(), &parse_config("colour = red").unwrap()).is_err());
    }

    #[test]
    fn resolve_applies_command_defaults() {
        let (spec, _) = resolve("stability", &CommonArgs::default()).unwrap();
        assert_eq!(spec.problem, "linear-sdof");
        assert_eq!(spec.dts.len(), 10);
        assert_eq!(spec.schemes.len(), 5);
        let args = CommonArgs {
            problem: Some("van-der-pol".into()),
            orders: vec!["2".into()],
            dts: vec!["0.01".into(), "0.001:0.004:3".into()],
            ..Default::default()
        };
        let (spec, orders) = resolve("converge", &args).unwrap();
        assert_eq!(orders, vec![2]);
        assert_eq!(spec.schemes, vec![SchemeId::Sav(2)]);
        assert_eq!(spec.dts.len(), 4);
    }

    #[test]
    fn usage_errors_exit_with_two() {
        assert_eq!(main_with_args(["imex-sav", "converge", "--problem", "nope"]), 2);
        assert_eq!(main_with_args(["imex-sav", "frobnicate"]), 2);
    }
}
