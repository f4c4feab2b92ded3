//! Error norms, instantaneous errors, period/amplitude errors and slope fits.

use std::time::Duration;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::system::State;
use crate::trajectory::{Kinematic, Trajectory};

/// `√(Σ(zₙ − z̃ₙ)² / Σ z̃ₙ²)`.
pub fn global_error_norm(z: &[f64], z_ref: &[f64]) -> Result<f64> {
    if z.len() != z_ref.len() {
        return Err(Error::Dimension {
            what: "error series",
            expected: z_ref.len(),
            found: z.len(),
        });
    }
    let num: f64 = z.iter().zip(z_ref).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = z_ref.iter().map(|b| b * b).sum();
    if den == 0.0 {
        return Err(Error::UndefinedNorm("reference series is identically zero"));
    }
    Ok((num / den).sqrt())
}

/// Global norm over every DOF of a vector series.
pub fn global_error_norm_vec(z: &[&DVector<f64>], z_ref: &[&DVector<f64>]) -> Result<f64> {
    let flat = |s: &[&DVector<f64>]| s.iter().flat_map(|x| x.iter().copied()).collect::<Vec<_>>();
    check_shapes(z, z_ref)?;
    global_error_norm(&flat(z), &flat(z_ref))
}

fn check_shapes(z: &[&DVector<f64>], z_ref: &[&DVector<f64>]) -> Result<()> {
    if z.len() != z_ref.len() {
        return Err(Error::Dimension {
            what: "number of samples",
            expected: z_ref.len(),
            found: z.len(),
        });
    }
    if let Some((a, b)) = z.iter().zip(z_ref).find(|(a, b)| a.len() != b.len()) {
        return Err(Error::Dimension {
            what: "sample length",
            expected: b.len(),
            found: a.len(),
        });
    }
    Ok(())
}

/// `(εₙ, ε)`: per-sample maximum over DOFs of `|zⁱₙ − z̃ⁱₙ|` divided by the
/// range of the reference over all DOFs and samples, and its maximum.
pub fn instantaneous_errors(
    z: &[&DVector<f64>],
    z_ref: &[&DVector<f64>],
) -> Result<(Vec<f64>, f64)> {
    check_shapes(z, z_ref)?;
    instantaneous_errors_with_range(z, z_ref, sample_range(z_ref))
}

/// As [`instantaneous_errors`] with the normalizing range supplied, e.g. the
/// range of a closed-form reference over the whole interval rather than over
/// the sampled grid.
pub fn instantaneous_errors_with_range(
    z: &[&DVector<f64>],
    z_ref: &[&DVector<f64>],
    range: f64,
) -> Result<(Vec<f64>, f64)> {
    check_shapes(z, z_ref)?;
    if !(range > 0.0) {
        return Err(Error::UndefinedNorm("reference series has zero range"));
    }
    let series: Vec<f64> = z
        .iter()
        .zip(z_ref)
        .map(|(a, b)| (*a - *b).amax() / range)
        .collect();
    let max = series.iter().copied().fold(0.0, f64::max);
    Ok((series, max))
}

/// `max z̃ − min z̃` over all DOFs and samples.
pub fn sample_range(z_ref: &[&DVector<f64>]) -> f64 {
    let (lo, hi) = z_ref
        .iter()
        .flat_map(|x| x.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo
}

/// Accuracy and cost of one run against a reference on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// Global norms for displacement, velocity and acceleration.
    pub global_norm: [f64; 3],
    /// Maximum instantaneous errors `ε` for displacement, velocity and acceleration.
    pub eps_max: [f64; 3],
    /// `εₙ` for the displacement.
    pub eps_series: Vec<f64>,
    pub avg_newton_iters: f64,
    pub wall_time: Duration,
    pub linear_solves: usize,
}

impl ErrorReport {
    pub fn new(traj: &Trajectory, reference: &[State], wall_time: Duration) -> Result<Self> {
        Self::build(traj, reference, None, wall_time)
    }

    /// Normalizes `ε` for u, v, a by the given ranges instead of the sampled ones.
    pub fn with_ranges(
        traj: &Trajectory,
        reference: &[State],
        ranges: [f64; 3],
        wall_time: Duration,
    ) -> Result<Self> {
        Self::build(traj, reference, Some(ranges), wall_time)
    }

    fn build(
        traj: &Trajectory,
        reference: &[State],
        ranges: Option<[f64; 3]>,
        wall_time: Duration,
    ) -> Result<Self> {
        if traj.len() != reference.len() {
            return Err(Error::Dimension {
                what: "trajectory length",
                expected: reference.len(),
                found: traj.len(),
            });
        }
        let mut global_norm = [0.0; 3];
        let mut eps_max = [0.0; 3];
        let mut eps_series = Vec::new();
        for (i, kind) in Kinematic::ALL.into_iter().enumerate() {
            let z = traj.vectors(kind);
            let r = reference_vectors(reference, kind);
            global_norm[i] = global_error_norm_vec(&z, &r)?;
            let range = ranges.map_or_else(|| sample_range(&r), |rg| rg[i]);
            let (series, max) = instantaneous_errors_with_range(&z, &r, range)?;
            eps_max[i] = max;
            if kind == Kinematic::Displacement {
                eps_series = series;
            }
        }
        Ok(Self {
            global_norm,
            eps_max,
            eps_series,
            avg_newton_iters: traj.stats.average_newton_iterations(),
            wall_time,
            linear_solves: traj.stats.linear_solves,
        })
    }
}

pub fn reference_vectors(reference: &[State], kind: Kinematic) -> Vec<&DVector<f64>> {
    reference
        .iter()
        .map(|s| match kind {
            Kinematic::Displacement => &s.u,
            Kinematic::Velocity => &s.v,
            Kinematic::Acceleration => &s.a,
        })
        .collect()
}

/// Global norms `[u, v, a]` of a trajectory against reference states.
pub fn global_errors(traj: &Trajectory, reference: &[State]) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (i, kind) in Kinematic::ALL.into_iter().enumerate() {
        out[i] = global_error_norm_vec(&traj.vectors(kind), &reference_vectors(reference, kind))?;
    }
    Ok(out)
}

/// Period elongation and amplitude decay at one peak of an oscillation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeadReport {
    /// Numerical minus exact peak time.
    pub pe: Option<f64>,
    /// Exact minus numerical peak value.
    pub ad: Option<f64>,
    /// `pe` relative to the exact peak time, in percent.
    pub pe_pct: Option<f64>,
    /// `ad` relative to the exact amplitude, in percent.
    pub ad_pct: Option<f64>,
    /// False when the response leaves `|z| ≤ π` or no peak is found.
    pub valid: bool,
}

impl PeadReport {
    fn invalid() -> Self {
        Self {
            pe: None,
            ad: None,
            pe_pct: None,
            ad_pct: None,
            valid: false,
        }
    }
}

/// Vertex `(offset, value)` of the parabola through three equispaced samples,
/// the offset in units of the spacing relative to the middle sample.
pub fn parabolic_peak(ym: f64, y0: f64, yp: f64) -> (f64, f64) {
    let curv = ym - 2.0 * y0 + yp;
    if curv == 0.0 {
        return (0.0, y0);
    }
    let d = 0.5 * (ym - yp) / curv;
    (d, y0 - 0.25 * (ym - yp) * d)
}

/// Locates the discrete maximum of `dof` nearest `peak_time`, refines it by
/// parabolic interpolation and compares with the exact `(peak_time, amplitude)`.
///
/// Angles beyond `π` in magnitude mark the run invalid: the pendulum has gone
/// over the top and no longer oscillates about its equilibrium.
pub fn period_elongation_amplitude_decay(
    traj: &Trajectory,
    dof: usize,
    peak_time: f64,
    amplitude: f64,
) -> PeadReport {
    let z = traj.series(Kinematic::Displacement, dof);
    if traj.is_divergent() || z.iter().any(|x| !x.is_finite() || x.abs() > std::f64::consts::PI) {
        return PeadReport::invalid();
    }
    let t = traj.times();
    let best = (1..z.len().saturating_sub(1))
        .filter(|&i| z[i] >= z[i - 1] && z[i] >= z[i + 1])
        .min_by(|&a, &b| (t[a] - peak_time).abs().total_cmp(&(t[b] - peak_time).abs()));
    let Some(i) = best else {
        return PeadReport::invalid();
    };
    let (d, peak) = parabolic_peak(z[i - 1], z[i], z[i + 1]);
    let t_peak = t[i] + d * (t[i + 1] - t[i]);
    let pe = t_peak - peak_time;
    let ad = amplitude - peak;
    PeadReport {
        pe: Some(pe),
        ad: Some(ad),
        pe_pct: Some(100.0 * pe / peak_time),
        ad_pct: Some(100.0 * ad / amplitude),
        valid: true,
    }
}

/// Least-squares line through `(log Δt, log error)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn convergence_slope(dts: &[f64], errors: &[f64]) -> Result<SlopeFit> {
    if dts.len() != errors.len() {
        return Err(Error::Dimension {
            what: "error list",
            expected: dts.len(),
            found: errors.len(),
        });
    }
    if dts.len() < 3 {
        return Err(Error::InvalidConfig("slope fit needs at least 3 points".into()));
    }
    if dts.iter().chain(errors).any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidConfig("slope fit needs positive finite values".into()));
    }
    let x: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("slope fit needs distinct step sizes".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
    })
}

/// `count` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn global_norm_examples() {
        let r = [1.0, -2.0, 0.5];
        assert_eq!(global_error_norm(&r, &r).unwrap(), 0.0);
        let z: Vec<f64> = r.iter().map(|x| 2.0 * x).collect();
        assert_relative_eq!(global_error_norm(&z, &r).unwrap(), 1.0);
        assert_eq!(global_error_norm(&[1.0, 1.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert!(matches!(
            global_error_norm(&[1.0], &[0.0]),
            Err(Error::UndefinedNorm(_))
        ));
    }

    #[test]
    fn instantaneous_examples() {
        let r: Vec<DVector<f64>> = vec![
            DVector::from_vec(vec![-1.0, 0.0]),
            DVector::from_vec(vec![1.0, 0.5]),
        ];
        let rr: Vec<&DVector<f64>> = r.iter().collect();
        let (s, m) = instantaneous_errors(&rr, &rr).unwrap();
        assert_eq!(s, vec![0.0, 0.0]);
        assert_eq!(m, 0.0);
        let mut z = r.clone();
        z[1][1] += 0.04;
        let zz: Vec<&DVector<f64>> = z.iter().collect();
        assert_relative_eq!(instantaneous_errors(&zz, &rr).unwrap().1, 0.02, epsilon = 1e-15);
        let flat = vec![DVector::from_element(1, 3.0); 2];
        let ff: Vec<&DVector<f64>> = flat.iter().collect();
        assert!(instantaneous_errors(&ff, &ff).is_err());
    }

    #[test]
    fn slope_examples() {
        let dts = log_space(1e-3, 1e-1, 20);
        let e: Vec<f64> = dts.iter().map(|d| 7.0 * d.powi(3)).collect();
        let fit = convergence_slope(&dts, &e).unwrap();
        assert_relative_eq!(fit.slope, 3.0, epsilon = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 7.0_f64.ln(), epsilon = 1e-10);
        assert!(convergence_slope(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(convergence_slope(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn parabola_vertex() {
        // y = 1 − (x − 0.3)² sampled at −1, 0, 1
        let f = |x: f64| 1.0 - (x - 0.3) * (x - 0.3);
        let (d, p) = parabolic_peak(f(-1.0), f(0.0), f(1.0));
        assert_relative_eq!(d, 0.3, epsilon = 1e-14);
        assert_relative_eq!(p, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(1e-3, 1e-1, 3);
        assert_relative_eq!(v[0], 1e-3, epsilon = 1e-18);
        assert_relative_eq!(v[1], 1e-2, epsilon = 1e-16);
        assert_relative_eq!(v[2], 1e-1, epsilon = 1e-15);
    }
}
