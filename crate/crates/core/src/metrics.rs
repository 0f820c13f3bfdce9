//! Quantitative comparison of asymptotic and numeric trajectories: error
//! norms, envelope extraction, and damping-strength convergence studies.

use crate::asymptotics::AsymptoticSolution;
use crate::error::{Error, Result};
use crate::ode::{integrate_pinney, PinneyParams, Trajectory};
use crate::solver::SolverOptions;
use crate::Real;

/// Error norms of one asymptotic-vs-numeric comparison.
#[derive(Debug, Clone)]
pub struct ComparisonReport<T> {
    pub max_abs_err: T,
    pub rms_err: T,
    pub sample_count: usize,
    pub eps: T,
    /// Midline of the numeric trajectory's oscillation envelope; empty when
    /// the trajectory has fewer than three extrema.
    pub envelope_midline: Vec<(T, T)>,
    pub convergence_ratio: Option<T>,
}

/// Max and RMS absolute difference of two equally sampled series.
pub fn compare_series<T: Real>(a: &[T], b: &[T]) -> (T, T) {
    assert_eq!(a.len(), b.len());
    let mut max = T::zero();
    let mut sq = T::zero();
    for (x, y) in a.iter().zip(b) {
        let d = (*x - *y).abs();
        max = max.max(d);
        sq += d * d;
    }
    let rms = if a.is_empty() {
        T::zero()
    } else {
        (sq / T::of(a.len() as f64)).sqrt()
    };
    (max, rms)
}

/// Integrate the full equation from the zeroth-order initial conditions at
/// `t = 0` and compare against the closed form on `n_samples` uniform times.
pub fn compare<T: Real>(
    params: &PinneyParams<T>,
    sol: &AsymptoticSolution<T>,
    t_end: T,
    n_samples: usize,
) -> Result<ComparisonReport<T>> {
    let (x0, v0) = sol.eval_x0(T::zero())?;
    let traj = integrate_pinney(
        params,
        (x0, v0),
        T::zero(),
        t_end,
        &SolverOptions::default(),
        None,
        n_samples,
    )?;
    compare_with_trajectory(params, sol, &traj)
}

/// The comparison core against an already-integrated trajectory.
pub fn compare_with_trajectory<T: Real>(
    params: &PinneyParams<T>,
    sol: &AsymptoticSolution<T>,
    traj: &Trajectory<T>,
) -> Result<ComparisonReport<T>> {
    let numeric: Vec<T> = traj.samples.iter().map(|s| s.x).collect();
    let mut closed_form = Vec::with_capacity(numeric.len());
    for s in &traj.samples {
        closed_form.push(sol.eval_x0(s.t)?.0);
    }
    let (max_abs_err, rms_err) = compare_series(&numeric, &closed_form);
    let envelope_midline = envelope_midline(traj).unwrap_or_default();
    Ok(ComparisonReport {
        max_abs_err,
        rms_err,
        sample_count: numeric.len(),
        eps: params.eps,
        envelope_midline,
        convergence_ratio: None,
    })
}

/// Successive-extrema midline `(max + min) / 2` of an oscillatory
/// trajectory, with parabolic refinement of each sample-level extremum.
pub fn envelope_midline<T: Real>(traj: &Trajectory<T>) -> Result<Vec<(T, T)>> {
    let s = &traj.samples;
    let mut extrema: Vec<(T, T)> = Vec::new();
    for i in 1..s.len().saturating_sub(1) {
        let is_max = s[i].x > s[i - 1].x && s[i].x > s[i + 1].x;
        let is_min = s[i].x < s[i - 1].x && s[i].x < s[i + 1].x;
        if is_max || is_min {
            extrema.push(parabolic_vertex(
                (s[i - 1].t, s[i - 1].x),
                (s[i].t, s[i].x),
                (s[i + 1].t, s[i + 1].x),
            ));
        }
    }
    if extrema.len() < 3 {
        return Err(Error::TooFewExtrema {
            found: extrema.len(),
        });
    }
    let half = T::of(0.5);
    Ok(extrema
        .windows(2)
        .map(|w| (half * (w[0].0 + w[1].0), half * (w[0].1 + w[1].1)))
        .collect())
}

/// Vertex of the parabola through three points.
fn parabolic_vertex<T: Real>(p0: (T, T), p1: (T, T), p2: (T, T)) -> (T, T) {
    let (t0, y0) = p0;
    let (t1, y1) = p1;
    let (t2, y2) = p2;
    let d01 = (y1 - y0) / (t1 - t0);
    let d12 = (y2 - y1) / (t2 - t1);
    let curvature = (d12 - d01) / (t2 - t0);
    if curvature == T::zero() {
        return (t1, y1);
    }
    // Newton form: y = y0 + d01 (t - t0) + curvature (t - t0)(t - t1).
    let t_star = (t0 + t1) * T::of(0.5) - d01 / (T::of(2.0) * curvature);
    let y_star = y0 + d01 * (t_star - t0) + curvature * (t_star - t0) * (t_star - t1);
    (t_star, y_star)
}

/// Per-damping errors, fitted order, and the strong-damping breakdown point.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy<T> {
    /// `(eps, max_abs_err)` per requested damping value.
    pub per_eps: Vec<(T, T)>,
    /// Least-squares slope of `log err` against `log eps`; `None` for a
    /// single-point study.
    pub fitted_order: Option<T>,
    /// Largest damping whose error exceeds [`ConvergenceStudy::breakdown_threshold`].
    pub breakdown_eps: Option<T>,
    /// The absolute error level that flags breakdown,
    /// `BREAKDOWN_FRACTION * k^(1/4) / Omega^(1/2)(0)`.
    pub breakdown_threshold: T,
}

/// Breakdown threshold fraction: the approximation is flagged as broken
/// when the max error exceeds this fraction of the fixed-point length
/// `k^(1/4) / Omega^(1/2)(0)`, the scale every trajectory settles to.
pub const BREAKDOWN_FRACTION: f64 = 0.1;

/// Run [`compare`] across damping values with the amplitude parameters
/// held fixed.
pub fn convergence_study<T: Real>(
    base: &AsymptoticSolution<T>,
    eps_list: &[T],
    t_end: T,
    n_samples: usize,
) -> Result<ConvergenceStudy<T>> {
    if eps_list.is_empty() {
        return Err(Error::invalid("eps list must be non-empty"));
    }
    for w in eps_list.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid("eps list must be positive and sorted"));
        }
    }
    if !(eps_list[0] > T::zero()) {
        return Err(Error::invalid("eps list must be positive and sorted"));
    }

    let mut per_eps = Vec::with_capacity(eps_list.len());
    let mut breakdown = None;
    let mut threshold = T::zero();
    for &eps in eps_list {
        let params = PinneyParams::new(eps, base.params.k, base.params.profile.clone())?;
        let sol = AsymptoticSolution::new(params.clone(), base.a0, base.t0, base.phi)?;
        let report = compare(&params, &sol, t_end, n_samples)?;
        threshold = T::of(BREAKDOWN_FRACTION) * sol.fixed_point(T::zero())?;
        if report.max_abs_err > threshold {
            breakdown = Some(eps);
        }
        per_eps.push((eps, report.max_abs_err));
    }

    let fitted_order = if per_eps.len() >= 2 {
        let n = T::of(per_eps.len() as f64);
        let mut sx = T::zero();
        let mut sy = T::zero();
        let mut sxx = T::zero();
        let mut sxy = T::zero();
        for &(eps, err) in &per_eps {
            let lx = eps.ln();
            let ly = err.ln();
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
    } else {
        None
    };

    Ok(ConvergenceStudy {
        per_eps,
        fitted_order,
        breakdown_eps: breakdown,
        breakdown_threshold: threshold,
    })
}
