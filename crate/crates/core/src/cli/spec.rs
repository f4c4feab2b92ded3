//! Scheme identifiers, step-size syntax and the resolved run specification.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::baselines::{BaselineScheme, NewtonConfig};
use crate::bdf_sav::{integrate_sav, SavRunConfig};
use crate::error::{Error, Result};
use crate::metrics::log_space;
use crate::problems::BenchmarkProblem;
use crate::trajectory::Trajectory;

/// A time integrator selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeId {
    /// IMEX-BDFk with the auxiliary-variable scaling.
    Sav(usize),
    Baseline(BaselineScheme),
}

impl SchemeId {
    /// Classical order of accuracy.
    pub fn order(&self) -> usize {
        match self {
            Self::Sav(k) | Self::Baseline(BaselineScheme::ImexBdf(k)) => *k,
            Self::Baseline(BaselineScheme::Rk4) => 4,
            Self::Baseline(_) => 2,
        }
    }

    pub fn n_sub(&self) -> usize {
        match self {
            Self::Sav(_) => 1,
            Self::Baseline(b) => b.n_sub(),
        }
    }

    pub fn is_sav(&self) -> bool {
        matches!(self, Self::Sav(_))
    }

    /// Runs the scheme on `problem` with step `dt` up to `t_end`. `psi` is
    /// only used by the SAV schemes.
    pub fn run(&self, problem: &BenchmarkProblem, dt: f64, psi: f64, t_end: f64) -> Result<Trajectory> {
        match self {
            Self::Sav(k) => {
                let cfg = SavRunConfig::new(*k, dt, psi, t_end)?;
                integrate_sav(&problem.system, &cfg, &problem.u0, &problem.v0)
            }
            Self::Baseline(b) => b.run(
                &problem.system,
                dt,
                t_end,
                &problem.u0,
                &problem.v0,
                &NewtonConfig::default(),
            ),
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sav(k) => write!(f, "imex-bdf{k}-sav"),
            Self::Baseline(b) => write!(f, "{b}"),
        }
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    /// Accepts `imex-bdf{k}-sav`, `bdf{k}-sav` and `sav{k}` for the SAV
    /// schemes, otherwise any baseline id.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase().replace('_', "-");
        let sav_order = t
            .strip_suffix("-sav")
            .map(|r| r.trim_start_matches("imex-").trim_start_matches("bdf"))
            .or_else(|| t.strip_prefix("sav"));
        if let Some(k) = sav_order {
            let k: usize = k
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad SAV scheme '{s}'")))?;
            if !(1..=5).contains(&k) {
                return Err(Error::UnsupportedOrder(k));
            }
            return Ok(Self::Sav(k));
        }
        t.parse().map(Self::Baseline)
    }
}

/// Parses a step size: a number, `T/n` or `xT`, where `T` is the problem's
/// characteristic period.
pub fn parse_step(s: &str, period: f64) -> Result<f64> {
    let t = s.trim();
    let bad = || Error::InvalidConfig(format!("bad step size '{s}'"));
    let value = if let Some(div) = t.strip_prefix("T/") {
        period / div.parse::<f64>().map_err(|_| bad())?
    } else if let Some(mul) = t.strip_suffix('T') {
        let mul = mul.trim_end_matches('*');
        if mul.is_empty() {
            period
        } else {
            period * mul.parse::<f64>().map_err(|_| bad())?
        }
    } else {
        t.parse::<f64>().map_err(|_| bad())?
    };
    if !(value > 0.0 && value.is_finite()) {
        return Err(bad());
    }
    Ok(value)
}

/// Parses `lo:hi:n` into `n` logarithmically spaced values; `lo` and `hi`
/// use the [`parse_step`] syntax.
pub fn parse_range(s: &str, period: f64) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::InvalidConfig(format!("bad range '{s}', expected lo:hi:n"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo = parse_step(parts[0], period)?;
    let hi = parse_step(parts[1], period)?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || hi < lo {
        return Err(bad());
    }
    Ok(log_space(lo, hi, n))
}

/// Parses `1,3,5`, `2..4` or `1-5` into a list of orders.
pub fn parse_orders(items: &[String]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in items.iter().flat_map(|s| s.split(',')) {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let bad = || Error::InvalidConfig(format!("bad order list '{item}'"));
        let range = item.split_once("..").or_else(|| item.split_once('-'));
        let (a, b) = match range {
            Some((a, b)) => (
                a.trim().parse::<usize>().map_err(|_| bad())?,
                b.trim().trim_start_matches('=').parse::<usize>().map_err(|_| bad())?,
            ),
            None => {
                let k = item.parse::<usize>().map_err(|_| bad())?;
                (k, k)
            }
        };
        for k in a..=b {
            if !(1..=5).contains(&k) {
                return Err(Error::UnsupportedOrder(k));
            }
            out.push(k);
        }
    }
    Ok(out)
}

/// Parses `key=value` with a numeric value.
pub fn parse_param(s: &str) -> Result<(String, f64)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidConfig(format!("bad parameter '{s}', expected key=value")))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad value in parameter '{s}'")))?;
    Ok((k.trim().to_string(), v))
}

/// Fully resolved inputs of one command. Every field has a default chosen by
/// the command when the flag and the config file leave it unset.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub problem: String,
    pub params: Vec<(String, f64)>,
    pub schemes: Vec<SchemeId>,
    /// Step sizes in time units.
    pub dts: Vec<f64>,
    /// Explicit `ψ`; takes precedence over `psi_ratios` where one value is needed.
    pub psi: Option<f64>,
    /// `ψ / Ψ_max` values.
    pub psi_ratios: Vec<f64>,
    pub t_end: Option<f64>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    /// Step of the high-resolution reference runs.
    pub fine_dt: Option<f64>,
    /// Threshold on the mutual difference of the two reference schemes.
    pub cross_check_tol: f64,
    /// Minimum number of steps per stability run.
    pub min_steps: usize,
    /// Run comparison schemes at `n_sub · Δt`.
    pub cost_parity: bool,
    /// Extra randomized parameter sets for `lte-check`.
    pub random_sets: usize,
}
