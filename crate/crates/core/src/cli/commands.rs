//! The study commands behind the `imex-sav` binary. Each returns a [`Report`].

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{num, opt_num, Report};
use super::spec::{RunSpec, SchemeId};
use crate::bdf_sav::beta_parameter;
use crate::error::{Error, Result};
use crate::lte::{
    compare_leading_term, default_fit_step, default_sav_window, sav_contribution_slope, LteParams,
};
use crate::metrics::{convergence_slope, global_errors, period_elongation_amplitude_decay, ErrorReport};
use crate::problems::{default_params, problem_with_params, BenchmarkProblem, PendulumSolution};
use crate::reference::{
    cross_validate, recommended_fine_dt, CrossCheck, ReferenceSource,
};
use crate::system::{pseudo_energy, State};
use crate::trajectory::{step_count, Trajectory};

/// `ψ` used by `lte-check` when none is given.
pub const LTE_DEFAULT_PSI: f64 = 5.0;
/// `ψ` of the state used to fit the SAV-contribution slope.
pub const SAV_PROBE_PSI: f64 = 0.5;
/// Samples per interval when measuring the range of a closed-form solution.
const RANGE_SAMPLES: usize = 20_000;

/// The SAV schemes of orders 1..=5.
pub fn all_sav() -> Vec<SchemeId> {
    (1..=5).map(SchemeId::Sav).collect()
}

pub(crate) fn build_problem(spec: &RunSpec) -> Result<BenchmarkProblem> {
    let p = problem_with_params(&spec.problem, &spec.params)?;
    Ok(match spec.t_end {
        Some(t) if t > 0.0 && t.is_finite() => p.with_t_end(t),
        Some(t) => return Err(Error::InvalidConfig(format!("t-end must be positive, got {t}"))),
        None => p,
    })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

/// `t_end / round(t_end / dt)`: the nearest step that lands on `t_end`.
pub fn snap_step(dt: f64, t_end: f64) -> f64 {
    t_end / (t_end / dt).round().max(1.0)
}

/// `ψ` for runs that need a single value.
fn single_psi(spec: &RunSpec, problem: &BenchmarkProblem) -> f64 {
    spec.psi
        .or_else(|| spec.psi_ratios.first().map(|r| r * problem.psi_max_estimate))
        .unwrap_or(problem.psi_recommended)
}

fn fine_dt(spec: &RunSpec, problem: &BenchmarkProblem) -> f64 {
    spec.fine_dt.unwrap_or_else(|| recommended_fine_dt(problem.id))
}

/// Reference source for `problem`, cross-validated on the grid `dt_out`
/// when no closed form exists.
fn reference(
    spec: &RunSpec,
    problem: &BenchmarkProblem,
    dt_out: f64,
    report: &mut Report,
) -> Result<ReferenceSource> {
    let fine = fine_dt(spec, problem);
    let source = ReferenceSource::for_problem(problem, fine)?;
    match source {
        ReferenceSource::Exact => report.note("reference", "closed-form"),
        ReferenceSource::Dense(_) => {
            let check: CrossCheck = cross_validate(problem, dt_out, fine, spec.cross_check_tol)?;
            report.note("reference", format!("rk4 fine_dt={}", num(fine)));
            report.note("cross_check_difference", num(check.max_difference()));
            report.note("cross_check_threshold", num(check.threshold));
        }
    }
    Ok(source)
}

fn status(res: &Result<Trajectory>) -> String {
    match res {
        Ok(t) if t.is_divergent() => format!("divergent at step {}", t.divergence.unwrap_or(0)),
        Ok(_) => "ok".into(),
        Err(e) => format!("error: {e}"),
    }
}

fn errors_or_nan(res: &Result<Trajectory>, refs: &[State]) -> [f64; 3] {
    match res {
        Ok(t) if !t.is_divergent() => global_errors(t, refs).unwrap_or([f64::NAN; 3]),
        _ => [f64::NAN; 3],
    }
}

fn slope_or_nan(dts: &[f64], errs: &[f64]) -> f64 {
    let (d, e): (Vec<f64>, Vec<f64>) = dts
        .iter()
        .zip(errs)
        .filter(|(_, e)| e.is_finite() && **e > 0.0)
        .map(|(d, e)| (*d, *e))
        .unzip();
    convergence_slope(&d, &e).map_or(f64::NAN, |f| f.slope)
}

/// Global errors against the reference for every (scheme, Δt) cell, with a
/// fitted slope per scheme.
///
/// Columns: `scheme, order, dt, n_steps, err_u, err_v, err_a, status`.
/// Summary: `slope.<scheme>=<u>,<v>,<a>` and the reference provenance.
pub fn cmd_converge(spec: &RunSpec) -> Result<Report> {
    let problem = build_problem(spec)?;
    let mut report = Report::new(&["scheme", "order", "dt", "n_steps", "err_u", "err_v", "err_a", "status"]);
    report.note("problem", problem.id);
    let dts: Vec<f64> = spec.dts.iter().map(|&d| snap_step(d, problem.t_end)).collect();
    let psi = single_psi(spec, &problem);
    report.note("psi", num(psi));
    let dt_min = dts.iter().copied().fold(f64::INFINITY, f64::min);
    let source = reference(spec, &problem, dt_min, &mut report)?;
    let refs: Vec<Vec<State>> = dts
        .iter()
        .map(|&dt| source.states(&problem, dt, step_count(problem.t_end, dt)))
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize)> = (0..spec.schemes.len())
        .flat_map(|s| (0..dts.len()).map(move |d| (s, d)))
        .collect();
    let results: Vec<([f64; 3], String)> = pool(spec.jobs)?.install(|| {
        cells
            .par_iter()
            .map(|&(s, d)| {
                let res = spec.schemes[s].run(&problem, dts[d], psi, problem.t_end);
                (errors_or_nan(&res, &refs[d]), status(&res))
            })
            .collect()
    });

    for (&(s, d), (e, st)) in cells.iter().zip(&results) {
        if st.starts_with("error") {
            report.ok = false;
        }
        let scheme = spec.schemes[s];
        report.push_row(vec![
            scheme.to_string(),
            scheme.order().to_string(),
            num(dts[d]),
            step_count(problem.t_end, dts[d]).to_string(),
            num(e[0]),
            num(e[1]),
            num(e[2]),
            st.clone(),
        ]);
    }
    for (s, scheme) in spec.schemes.iter().enumerate() {
        let rows: Vec<&([f64; 3], String)> =
            cells.iter().zip(&results).filter(|(c, _)| c.0 == s).map(|(_, r)| r).collect();
        let slopes: Vec<String> = (0..3)
            .map(|i| {
                let errs: Vec<f64> = rows.iter().map(|r| r.0[i]).collect();
                num(slope_or_nan(&dts, &errs))
            })
            .collect();
        report.note(format!("slope.{scheme}"), slopes.join(","));
    }
    Ok(report)
}

/// The `ψ/Ψ_max` grid `10^-3, 10^-2.9, …, 10^3`.
pub fn default_psi_ratios() -> Vec<f64> {
    (0..=60).map(|i| 10f64.powf(-3.0 + 0.1 * i as f64)).collect()
}

fn find_ratio(ratios: &[f64], target: f64) -> Option<usize> {
    ratios.iter().position(|r| ((r - target) / target).abs() < 1e-6)
}

/// Smallest ratio from which every later error (u, v and a) stays within 10%
/// of the error at the largest ratio.
pub fn stabilization_threshold(ratios: &[f64], errors: &[[f64; 3]]) -> Option<f64> {
    let last = errors.last()?;
    let close = |e: &[f64; 3]| (0..3).all(|i| ((e[i] - last[i]) / last[i]).abs() < 0.1);
    let mut idx = None;
    for i in (0..errors.len()).rev() {
        if close(&errors[i]) {
            idx = Some(i);
        } else {
            break;
        }
    }
    idx.map(|i| ratios[i])
}

/// Errors against `ψ/Ψ_max` at fixed step sizes.
///
/// Columns: `scheme, dt, psi_ratio, psi, err_u, err_v, err_a, recoveries, status`.
/// Summary: `threshold.<scheme>.dt=<dt>` (see [`stabilization_threshold`]) and
/// `plateau.<scheme>.dt=<dt>`, the error ratios between `ψ/Ψ_max = 10³` and `10²`.
pub fn cmd_psi_sweep(spec: &RunSpec) -> Result<Report> {
    let problem = build_problem(spec)?;
    let mut report = Report::new(&[
        "scheme", "dt", "psi_ratio", "psi", "err_u", "err_v", "err_a", "recoveries", "status",
    ]);
    report.note("problem", problem.id);
    report.note("psi_max", num(problem.psi_max_estimate));
    let ratios = if spec.psi_ratios.is_empty() {
        default_psi_ratios()
    } else {
        spec.psi_ratios.clone()
    };
    let dts: Vec<f64> = spec.dts.iter().map(|&d| snap_step(d, problem.t_end)).collect();
    let dt_min = dts.iter().copied().fold(f64::INFINITY, f64::min);
    let source = reference(spec, &problem, dt_min, &mut report)?;
    let refs: Vec<Vec<State>> = dts
        .iter()
        .map(|&dt| source.states(&problem, dt, step_count(problem.t_end, dt)))
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for s in 0..spec.schemes.len() {
        for d in 0..dts.len() {
            for r in 0..ratios.len() {
                cells.push((s, d, r));
            }
        }
    }
    let results: Vec<([f64; 3], usize, String)> = pool(spec.jobs)?.install(|| {
        cells
            .par_iter()
            .map(|&(s, d, r)| {
                let psi = ratios[r] * problem.psi_max_estimate;
                let res = spec.schemes[s].run(&problem, dts[d], psi, problem.t_end);
                let rec = res
                    .as_ref()
                    .ok()
                    .and_then(|t| t.sav.as_ref())
                    .map_or(0, |h| h.recovery_steps().len());
                (errors_or_nan(&res, &refs[d]), rec, status(&res))
            })
            .collect()
    });
    for (&(s, d, r), (e, rec, st)) in cells.iter().zip(&results) {
        if st.starts_with("error") {
            report.ok = false;
        }
        report.push_row(vec![
            spec.schemes[s].to_string(),
            num(dts[d]),
            num(ratios[r]),
            num(ratios[r] * problem.psi_max_estimate),
            num(e[0]),
            num(e[1]),
            num(e[2]),
            rec.to_string(),
            st.clone(),
        ]);
    }
    for (s, scheme) in spec.schemes.iter().enumerate() {
        for (d, dt) in dts.iter().enumerate() {
            let errs: Vec<[f64; 3]> = cells
                .iter()
                .zip(&results)
                .filter(|(c, _)| c.0 == s && c.1 == d)
                .map(|(_, r)| r.0)
                .collect();
            let key = format!("{scheme}.dt={}", num(*dt));
            report.note(
                format!("threshold.{key}"),
                opt_num(stabilization_threshold(&ratios, &errs)),
            );
            if let (Some(i2), Some(i3)) = (find_ratio(&ratios, 1e2), find_ratio(&ratios, 1e3)) {
                let q: Vec<String> = (0..3).map(|i| num(errs[i3][i] / errs[i2][i])).collect();
                report.note(format!("plateau.{key}"), q.join(","));
            }
        }
    }
    Ok(report)
}

/// Outcome of one stability run.
#[derive(Debug, Clone, Default)]
pub struct StabilityCell {
    pub n_steps: usize,
    pub completed: bool,
    pub divergence: Option<usize>,
    pub max_psi: f64,
    pub phi_increases: usize,
    pub recoveries: usize,
    pub clamps: usize,
    pub status: String,
}

pub fn stability_cell(problem: &BenchmarkProblem, scheme: SchemeId, dt: f64, psi: f64, n_steps: usize) -> StabilityCell {
    let res = scheme.run(problem, dt, psi, n_steps as f64 * dt);
    let status = status(&res);
    match res {
        Ok(t) => {
            let max_psi = t
                .states
                .iter()
                .map(|s| pseudo_energy(&problem.system, &s.u, &s.v))
                .fold(0.0, f64::max);
            let (inc, rec, clamps) = t.sav.as_ref().map_or((0, 0, 0), |h| {
                (h.increase_count(), h.recovery_steps().len(), h.clamp_steps().len())
            });
            StabilityCell {
                n_steps,
                completed: t.all_finite() && !t.is_divergent(),
                divergence: t.divergence,
                max_psi,
                phi_increases: inc,
                recoveries: rec,
                clamps,
                status,
            }
        }
        Err(_) => StabilityCell {
            n_steps,
            max_psi: f64::NAN,
            status,
            ..Default::default()
        },
    }
}

/// Boundedness over a wide range of step sizes.
///
/// Columns: `scheme, dt, n_steps, completed, divergent, divergence_step,
/// max_psi, phi_increases, recoveries, clamps, status`. Each run takes at
/// least `min_steps` steps. Baseline divergence is recorded data; a SAV run
/// that does not complete makes the command fail.
pub fn cmd_stability(spec: &RunSpec) -> Result<Report> {
    let problem = build_problem(spec)?;
    let psi = single_psi(spec, &problem);
    let mut report = Report::new(&[
        "scheme", "dt", "n_steps", "completed", "divergent", "divergence_step", "max_psi",
        "phi_increases", "recoveries", "clamps", "status",
    ]);
    report.note("problem", problem.id);
    report.note("psi", num(psi));
    let cells: Vec<(usize, usize)> = (0..spec.schemes.len())
        .flat_map(|s| (0..spec.dts.len()).map(move |d| (s, d)))
        .collect();
    let results: Vec<StabilityCell> = pool(spec.jobs)?.install(|| {
        cells
            .par_iter()
            .map(|&(s, d)| {
                let dt = spec.dts[d];
                let n = step_count(problem.t_end, dt).max(spec.min_steps);
                stability_cell(&problem, spec.schemes[s], dt, psi, n)
            })
            .collect()
    });
    let mut sav_failures = 0;
    let mut increases = 0;
    for (&(s, d), c) in cells.iter().zip(&results) {
        let scheme = spec.schemes[s];
        if scheme.is_sav() {
            increases += c.phi_increases;
            if !c.completed {
                sav_failures += 1;
            }
        }
        report.push_row(vec![
            scheme.to_string(),
            num(spec.dts[d]),
            c.n_steps.to_string(),
            c.completed.to_string(),
            (!c.completed).to_string(),
            c.divergence.map(|x| x.to_string()).unwrap_or_default(),
            num(c.max_psi),
            c.phi_increases.to_string(),
            c.recoveries.to_string(),
            c.clamps.to_string(),
            c.status.clone(),
        ]);
    }
    for (s, scheme) in spec.schemes.iter().enumerate() {
        let first = cells
            .iter()
            .zip(&results)
            .filter(|(c, r)| c.0 == s && !r.completed)
            .map(|(c, _)| spec.dts[c.1])
            .fold(f64::INFINITY, f64::min);
        report.note(
            format!("first_divergent_dt.{scheme}"),
            if first.is_finite() { num(first) } else { "none".into() },
        );
    }
    report.note("sav_incomplete_runs", sav_failures);
    report.note("sav_phi_increases", increases);
    report.ok = sav_failures == 0;
    Ok(report)
}

fn param(id: &str, overrides: &[(String, f64)], key: &str) -> Result<f64> {
    if let Some((_, v)) = overrides.iter().rev().find(|(k, _)| k.replace('-', "_") == key) {
        return Ok(*v);
    }
    default_params(id)?
        .into_iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| v)
        .ok_or_else(|| Error::InvalidProblem(format!("{id} has no parameter {key}")))
}

/// One benchmark row.
#[derive(Debug, Clone)]
pub struct BenchmarkRow {
    pub scheme: SchemeId,
    pub step: f64,
    pub errors: Option<ErrorReport>,
    pub pe_pct: Option<f64>,
    pub ad_pct: Option<f64>,
    pub valid: bool,
    pub status: String,
}

/// Accuracy and cost per scheme at one step size.
///
/// Columns: `scheme, dt_step, n_sub, avg_newton_iters, wall_us,
/// linear_solves, pe_pct, ad_pct, valid, eps_u, eps_v, eps_a, status`.
/// With cost parity each scheme steps with `n_sub · Δt`. `pe_pct`/`ad_pct`
/// are filled for the pendulum only; `valid = false` marks a response that
/// lost its oscillation. Runs are sequential and timed after one warm-up run.
pub fn cmd_benchmark(spec: &RunSpec) -> Result<Report> {
    let problem = build_problem(spec)?;
    let psi = single_psi(spec, &problem);
    let mut report = Report::new(&[
        "scheme", "dt_step", "n_sub", "avg_newton_iters", "wall_us", "linear_solves", "pe_pct",
        "ad_pct", "valid", "eps_u", "eps_v", "eps_a", "status",
    ]);
    report.note("problem", problem.id);
    report.note("psi", num(psi));
    let pendulum = if problem.id == "pendulum" {
        let g = param(problem.id, &spec.params, "g_over_l")?;
        let th = param(problem.id, &spec.params, "theta0")?;
        let v0 = param(problem.id, &spec.params, "v0")?;
        Some(PendulumSolution::new(g, th, v0)?)
    } else {
        None
    };
    let dt_min = spec.dts.iter().copied().fold(f64::INFINITY, f64::min);
    let source = reference(spec, &problem, dt_min, &mut report)?;
    let ranges = problem.exact_ranges(RANGE_SAMPLES);
    for &dt in &spec.dts {
        for &scheme in &spec.schemes {
            let row = benchmark_row(&problem, &source, ranges, pendulum.as_ref(), scheme, dt, psi, spec.cost_parity)?;
            if row.status.starts_with("error") {
                report.ok = false;
            }
            let e = row.errors.as_ref();
            let eps = |i: usize| e.map_or(f64::NAN, |r| r.eps_max[i]);
            report.push_row(vec![
                row.scheme.to_string(),
                num(row.step),
                row.scheme.n_sub().to_string(),
                e.map_or(String::new(), |r| num(r.avg_newton_iters)),
                e.map_or(String::new(), |r| num(r.wall_time.as_secs_f64() * 1e6)),
                e.map_or(String::new(), |r| r.linear_solves.to_string()),
                opt_num(row.pe_pct),
                opt_num(row.ad_pct),
                row.valid.to_string(),
                num(eps(0)),
                num(eps(1)),
                num(eps(2)),
                row.status,
            ]);
        }
    }
    Ok(report)
}

/// Runs `scheme` twice (warm-up, then timed) and measures it against the reference.
#[allow(clippy::too_many_arguments)]
pub fn benchmark_row(
    problem: &BenchmarkProblem,
    source: &ReferenceSource,
    ranges: Option<[f64; 3]>,
    pendulum: Option<&PendulumSolution>,
    scheme: SchemeId,
    dt: f64,
    psi: f64,
    cost_parity: bool,
) -> Result<BenchmarkRow> {
    let step = if cost_parity { dt * scheme.n_sub() as f64 } else { dt };
    let _ = scheme.run(problem, step, psi, problem.t_end);
    let start = Instant::now();
    let res = scheme.run(problem, step, psi, problem.t_end);
    let wall: Duration = start.elapsed();
    let st = status(&res);
    let traj = match res {
        Ok(t) => t,
        Err(_) => {
            return Ok(BenchmarkRow {
                scheme,
                step,
                errors: None,
                pe_pct: None,
                ad_pct: None,
                valid: false,
                status: st,
            })
        }
    };
    let (pe_pct, ad_pct, valid) = match pendulum {
        Some(sol) => {
            let r = period_elongation_amplitude_decay(&traj, 0, sol.first_peak_time() + sol.period(), sol.amplitude());
            (r.pe_pct, r.ad_pct, r.valid)
        }
        None => (None, None, !traj.is_divergent()),
    };
    let errors = if traj.is_divergent() {
        None
    } else {
        let refs = source.states(problem, step, traj.len() - 1)?;
        Some(match ranges {
            Some(rg) => ErrorReport::with_ranges(&traj, &refs, rg, wall)?,
            None => ErrorReport::new(&traj, &refs, wall)?,
        })
    };
    Ok(BenchmarkRow {
        scheme,
        step,
        errors,
        pe_pct,
        ad_pct,
        valid,
        status: st,
    })
}

/// Parameter set for the modal oscillator checked by `lte-check`.
pub fn lte_params(overrides: &[(String, f64)]) -> Result<LteParams> {
    let get = |key: &str, default: f64| {
        overrides
            .iter()
            .rev()
            .find(|(k, _)| k.replace('-', "_") == key)
            .map_or(default, |(_, v)| *v)
    };
    let known = ["omega0", "zeta", "u0", "v0", "p0", "omega_f"];
    if let Some((k, _)) = overrides.iter().find(|(k, _)| !known.contains(&k.replace('-', "_").as_str())) {
        return Err(Error::InvalidProblem(format!(
            "unknown parameter '{k}' for lte-check, expected one of {}",
            known.join(", ")
        )));
    }
    let w0 = get("omega0", 2.0 * PI);
    LteParams::new(
        w0,
        get("zeta", 0.2),
        get("u0", 1.0),
        get("v0", 0.5),
        get("p0", 1.0),
        get("omega_f", 2.0 * w0),
    )
}

/// Randomized parameter sets: `ζ ∈ [0, 0.5)`, `p₀ ∈ {0, 1}`, `u₀, v₀ ∈ [−1, 1]`,
/// `ω_f ∈ [1.5, 3)·ω₀`.
pub fn random_lte_params(base: &LteParams, count: usize, seed: u64) -> Result<Vec<LteParams>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            LteParams::new(
                base.omega0,
                rng.gen_range(0.0..0.5),
                rng.gen_range(-1.0..=1.0),
                rng.gen_range(-1.0..=1.0),
                if rng.gen_bool(0.5) { 1.0 } else { 0.0 },
                base.omega0 * rng.gen_range(1.5..3.0),
            )
        })
        .collect()
}

/// The state used for the SAV-contribution slope: same oscillator, started
/// from `u₀ = 0, v₀ = 1`.
pub fn sav_probe(p: &LteParams) -> Result<LteParams> {
    LteParams::new(p.omega0, p.zeta, 0.0, 1.0, p.p0, p.omega_f)
}

/// Predicted against measured leading one-step error coefficients.
///
/// Columns: `set, k, zeta, p0, u0, v0, omega_f, tau_u_pred, tau_u_meas,
/// ratio_u, tau_v_pred, tau_v_meas, ratio_v, sav_slope, two_beta`.
/// `sav_slope` is fitted on the probe state `u₀ = 0, v₀ = 1` with
/// `ψ = 0.5`; `nan` means the contribution is below round-off.
pub fn cmd_lte_check(spec: &RunSpec, orders: &[usize]) -> Result<Report> {
    let psi = spec.psi.unwrap_or(LTE_DEFAULT_PSI);
    let base = lte_params(&spec.params)?;
    let mut sets = vec![base];
    sets.extend(random_lte_params(&base, spec.random_sets, spec.seed)?);
    let mut report = Report::new(&[
        "set", "k", "zeta", "p0", "u0", "v0", "omega_f", "tau_u_pred", "tau_u_meas", "ratio_u",
        "tau_v_pred", "tau_v_meas", "ratio_v", "sav_slope", "two_beta",
    ]);
    report.note("psi", num(psi));
    report.note("omega0", num(base.omega0));
    let cells: Vec<(usize, usize)> = (0..sets.len())
        .flat_map(|s| orders.iter().map(move |&k| (s, k)))
        .collect();
    type Row = (crate::lte::LteComparison, f64);
    let results: Vec<Result<Row>> = pool(spec.jobs)?.install(|| {
        cells
            .par_iter()
            .map(|&(s, k)| {
                let c = compare_leading_term(&sets[s], k, default_fit_step(k), psi)?;
                let (lo, hi) = default_sav_window(k);
                let slope = sav_contribution_slope(&sav_probe(&sets[s])?, k, SAV_PROBE_PSI, lo, hi, 8)
                    .unwrap_or(f64::NAN);
                Ok((c, slope))
            })
            .collect()
    });
    let mut worst: f64 = 0.0;
    let mut slopes_ok = true;
    for (&(s, k), res) in cells.iter().zip(results) {
        let (c, slope) = res?;
        let p = &sets[s];
        let (ru, rv) = c.ratios();
        worst = worst.max((ru - 1.0).abs()).max((rv - 1.0).abs());
        let two_beta = 2 * beta_parameter(k)?;
        if slope.is_finite() && (slope - two_beta as f64).abs() > 0.3 {
            slopes_ok = false;
        }
        report.push_row(vec![
            s.to_string(),
            k.to_string(),
            num(p.zeta),
            num(p.p0),
            num(p.u0),
            num(p.v0),
            num(p.omega_f),
            num(c.predicted.0),
            num(c.measured.0),
            num(ru),
            num(c.predicted.1),
            num(c.measured.1),
            num(rv),
            num(slope),
            two_beta.to_string(),
        ]);
    }
    report.note("max_ratio_deviation", num(worst));
    report.note("ratios_within_5pct", worst <= 0.05);
    report.note("sav_slopes_within_0.3", slopes_ok);
    Ok(report)
}

/// Default step sizes per problem and command, in the [`super::spec::parse_step`] syntax.
pub fn default_steps(command: &str, problem: &str) -> Vec<String> {
    let range = |s: &str| vec![s.to_string()];
    match (command, problem) {
        ("converge", "linear-sdof") => range("1e-3T:1e-1T:20"),
        ("converge", "van-der-pol") => range("4e-3:1e-1:20"),
        ("converge", "duffing") => range("2e-4:1e-2:20"),
        ("converge", _) => range("T/200:T/10:10"),
        ("psi-sweep", "linear-sdof") => vec!["0.1T".into(), "0.001T".into()],
        ("psi-sweep", "van-der-pol") => vec!["0.1".into(), "0.004".into()],
        ("psi-sweep", "duffing") => vec!["0.01".into(), "0.0002".into()],
        ("psi-sweep", _) => vec!["T/20".into(), "T/100".into()],
        ("stability", _) => (-3..=6).map(|e| format!("1e{e}T")).collect(),
        ("benchmark", "spring-pendulum") => vec!["T/20".into()],
        ("benchmark", "duffing-chain") => vec!["0.01".into()],
        ("benchmark", _) => vec!["T/100".into()],
        _ => Vec::new(),
    }
}

/// Default scheme list per command.
pub fn default_schemes(command: &str, problem: &BenchmarkProblem) -> Vec<SchemeId> {
    use crate::baselines::BaselineScheme as B;
    match command {
        "benchmark" => {
            let cd = if problem.system.nonlinear_depends_on_velocity() {
                B::CdParkUnderwood
            } else {
                B::CentralDifference
            };
            let mut s = all_sav();
            s.extend([B::NewmarkTr, B::GeneralizedAlpha(0.0), B::Bathe(0.5), cd, B::Rk4].map(SchemeId::Baseline));
            s
        }
        _ => all_sav(),
    }
}

/// Default problem per command.
pub fn default_problem(command: &str) -> (&'static str, Vec<(String, f64)>) {
    match command {
        "benchmark" => ("pendulum", Vec::new()),
        "stability" => (
            "linear-sdof",
            vec![("p0".into(), 0.0), ("u0".into(), 1.0), ("v0".into(), 0.0)],
        ),
        _ => ("linear-sdof", Vec::new()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapping_lands_on_t_end() {
        let dt = snap_step(0.0031, 15.0);
        assert!(((15.0 / dt) - (15.0 / dt).round()).abs() < 1e-9);
        assert_eq!(snap_step(100.0, 1.0), 1.0);
    }

    #[test]
    fn psi_grid_matches_decimal_steps() {
        let r = default_psi_ratios();
        assert_eq!(r.len(), 61);
        assert!((r[0] - 1e-3).abs() < 1e-18);
        assert!((r[60] - 1e3).abs() < 1e-9);
        assert_eq!(find_ratio(&r, 1e2), Some(50));
    }

    #[test]
    fn threshold_is_start_of_flat_tail() {
        let ratios = [1.0, 10.0, 100.0, 1000.0];
        let errs = [[5.0; 3], [2.0; 3], [1.05; 3], [1.0; 3]];
        assert_eq!(stabilization_threshold(&ratios, &errs), Some(100.0));
    }

    #[test]
    fn lte_params_reject_unknown_keys() {
        assert!(lte_params(&[("mu".into(), 1.0)]).is_err());
        let p = lte_params(&[("zeta".into(), 0.0)]).unwrap();
        assert_eq!(p.zeta, 0.0);
        assert_eq!(p.omega_f, 4.0 * PI);
    }

    #[test]
    fn random_sets_are_reproducible() {
        let base = lte_params(&[]).unwrap();
        let a = random_lte_params(&base, 3, 7).unwrap();
        let b = random_lte_params(&base, 3, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| (0.0..0.5).contains(&p.zeta)));
    }
}
