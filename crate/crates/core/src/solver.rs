//! Embedded Dormand-Prince 5(4) integrator with PI step-size control,
//! quartic dense output, and falling-threshold event detection.
//!
//! The engine is dimension-generic over fixed-size states `[T; N]` and is the
//! single integration backend for the whole crate: trajectories, oscillator
//! bases, auxiliary-map co-integration and wave-packet evolution all run
//! through [`integrate_dense`].
//!
//! Near a collapse the right-hand side `k/x^3` is singular and the exact
//! solution reaches the threshold with unbounded velocity, so the adaptive
//! step size can underflow before a step endpoint brackets the event. When
//! that happens with an armed event whose linear crossing estimate lies
//! within a tiny horizon, the run is classified as event-stopped instead of
//! failed; the crossing time error of the estimate is far below the event
//! bracketing tolerance for power-law approaches.

use crate::error::{Error, Result};
use crate::Real;

/// Step size below which integration is declared failed (time units).
pub const STEP_FLOOR: f64 = 1e-12;

/// Event times are bracketed to this width by bisection on dense output.
pub const EVENT_TIME_TOL: f64 = 1e-9;

/// Horizon for classifying a step-size underflow as an imminent event.
const EVENT_RESCUE_HORIZON: f64 = 1e-6;

/// Tolerances and limits for one integration run.
#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    /// Initial step; `None` selects one automatically.
    pub h_initial: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::of(1e-10),
            rel_tol: T::of(1e-10),
            h_initial: None,
            max_steps: 1_000_000,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn with_tol(abs_tol: T, rel_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > T::zero()) || !(self.rel_tol > T::zero()) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be positive"));
        }
        Ok(())
    }
}

/// Work counters for one integration run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// How an integration run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveStatus<T> {
    /// Reached `t_end`.
    Completed,
    /// The armed event fired; integration stopped at `t`.
    EventStopped { t: T },
    /// Step size underflowed below [`STEP_FLOOR`] (or the step budget ran out).
    Failed { t: T },
}

/// Falling-threshold event on state component 0: fires when
/// `y[0] - threshold` (or `|y[0]| - threshold`) crosses from positive to
/// non-positive. Accepted steps are probed at eight dense-output points, so
/// only dips narrower than an eighth of a step can slip through.
#[derive(Debug, Clone, Copy)]
pub struct StopEvent<T> {
    pub threshold: T,
    pub magnitude: bool,
}

impl<T: Real> StopEvent<T> {
    fn g(&self, y: &[T]) -> T {
        let v = if self.magnitude { y[0].abs() } else { y[0] };
        v - self.threshold
    }
}

/// One accepted step's quartic interpolation coefficients.
#[derive(Debug, Clone)]
struct DenseSegment<T, const N: usize> {
    t_start: T,
    h: T,
    cont: [[T; N]; 5],
}

impl<T: Real, const N: usize> DenseSegment<T, N> {
    fn eval(&self, t: T) -> [T; N] {
        let s = (t - self.t_start) / self.h;
        let s1 = T::one() - s;
        let mut out = [T::zero(); N];
        let [c0, c1, c2, c3, c4] = &self.cont;
        for i in 0..N {
            out[i] = c0[i] + (c1[i] + (c2[i] + (c3[i] + c4[i] * s1) * s) * s1) * s;
        }
        out
    }
}

/// Continuously evaluable solution of one integration run.
#[derive(Debug, Clone)]
pub struct DenseOutput<T, const N: usize> {
    pub t_start: T,
    /// Last time covered: `t_end` of the request, the event time, or the
    /// failure point.
    pub t_reached: T,
    pub y_reached: [T; N],
    pub status: SolveStatus<T>,
    pub stats: Stats,
    segments: Vec<DenseSegment<T, N>>,
}

impl<T: Real, const N: usize> DenseOutput<T, N> {
    /// Interpolated state at `t` in `[t_start, t_reached]`.
    pub fn eval(&self, t: T) -> Result<[T; N]> {
        if t < self.t_start || t > self.t_reached {
            return Err(Error::OutOfRange {
                value: t.as_f64(),
                min: self.t_start.as_f64(),
                max: self.t_reached.as_f64(),
            });
        }
        if self.segments.is_empty() {
            return Ok(self.y_reached);
        }
        // last segment starting at or before t
        let mut lo = 0usize;
        let mut hi = self.segments.len() - 1;
        while hi > lo {
            let mid = (lo + hi).div_ceil(2);
            if self.segments[mid].t_start <= t {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Ok(self.segments[lo].eval(t))
    }

    pub fn span(&self) -> (T, T) {
        (self.t_start, self.t_reached)
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// 5th-order minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrate `dy/dt = rhs(t, y)` from `t0` to `t_end` (`t_end > t0`).
///
/// A non-finite right-hand side or error estimate rejects the step, so
/// singular regions shrink the step until either the event rescue or the
/// step floor decides the outcome.
pub fn integrate_dense<T: Real, const N: usize>(
    rhs: impl Fn(T, &[T; N]) -> [T; N],
    y0: [T; N],
    t0: T,
    t_end: T,
    opts: &SolverOptions<T>,
    event: Option<StopEvent<T>>,
) -> Result<DenseOutput<T, N>> {
    opts.validate()?;
    if !(t_end > t0) {
        return Err(Error::invalid(format!(
            "integration span must be forward: t0 = {t0}, t_end = {t_end}"
        )));
    }

    let mut stats = Stats::default();
    let mut segments: Vec<DenseSegment<T, N>> = Vec::new();

    let mut t = t0;
    let mut y = y0;
    let k1 = rhs(t, &y);
    stats.rhs_evals += 1;

    if let Some(ev) = &event {
        if ev.g(&y) <= T::zero() {
            return Ok(DenseOutput {
                t_start: t0,
                t_reached: t0,
                y_reached: y,
                status: SolveStatus::EventStopped { t: t0 },
                stats,
                segments,
            });
        }
    }

    let step_floor = T::of(STEP_FLOOR);
    let mut h = match opts.h_initial {
        Some(h0) => h0.min(t_end - t0),
        None => initial_step(&rhs, t, &y, &k1, t_end - t0, opts, &mut stats),
    }
    .max(step_floor);

    // PI controller constants (order 5).
    let safe = T::of(0.9);
    let beta = T::of(0.04);
    let expo1 = T::of(0.2) - beta * T::of(0.75);
    let fac_shrink = T::of(0.2); // h may shrink at most 5x per step
    let fac_grow = T::of(10.0); // and grow at most 10x
    let mut facold = T::of(1e-4);
    let mut last_rejected = false;

    let mut ks = [[T::zero(); N]; 7];
    ks[0] = k1;

    loop {
        if stats.steps + stats.rejected >= opts.max_steps {
            return Ok(finish_failed(t0, t, y, stats, segments));
        }
        if h < step_floor {
            // Imminent-event rescue: the exact solution may reach the
            // threshold with unbounded slope, which no explicit step can
            // resolve; a linear crossing estimate from the last accepted
            // state decides whether this is a collapse or a genuine failure.
            if let Some(ev) = &event {
                let g = ev.g(&y);
                let sign = if ev.magnitude && y[0] < T::zero() {
                    -T::one()
                } else {
                    T::one()
                };
                // ks[0] holds f(t, y) at the last accepted state (FSAL).
                let gdot = sign * ks[0][0];
                if g > T::zero() && gdot < T::zero() {
                    let dt_cross = g / (-gdot);
                    if dt_cross <= T::of(EVENT_RESCUE_HORIZON) {
                        let t_star = t + dt_cross;
                        let mut y_star = y;
                        // Near the singular approach the velocity scales as
                        // 1/x, so extrapolate the companion component that way
                        // when the state is two-dimensional (x, v).
                        y_star[0] = sign * ev.threshold;
                        if N == 2 && ev.threshold > T::zero() {
                            y_star[1] = y[1] * y[0] / (sign * ev.threshold);
                        }
                        return Ok(DenseOutput {
                            t_start: t0,
                            t_reached: t_star,
                            y_reached: y_star,
                            status: SolveStatus::EventStopped { t: t_star },
                            stats,
                            segments,
                        });
                    }
                }
            }
            return Ok(finish_failed(t0, t, y, stats, segments));
        }

        let last_step = t + h >= t_end;
        if last_step {
            h = t_end - t;
        }

        // Stages 2..7 (stage 1 is the FSAL value already in ks[0]).
        for stage in 0..6 {
            let mut yi = y;
            for i in 0..N {
                let mut acc = T::zero();
                for (j, kj) in ks.iter().enumerate().take(stage + 1) {
                    let a = T::of(A[stage][j]);
                    if a != T::zero() {
                        acc += a * kj[i];
                    }
                }
                yi[i] = y[i] + h * acc;
            }
            let ti = t + T::of(C[stage]) * h;
            ks[stage + 1] = rhs(ti, &yi);
        }
        stats.rhs_evals += 6;

        // 5th-order advance is stage 7's state (FSAL).
        let mut y_new = y;
        for i in 0..N {
            let mut acc = T::zero();
            for (j, kj) in ks.iter().enumerate().take(6) {
                let a = T::of(A[5][j]);
                if a != T::zero() {
                    acc += a * kj[i];
                }
            }
            y_new[i] = y[i] + h * acc;
        }
        let k_new = ks[6];

        // Scaled RMS error estimate.
        let mut err = T::zero();
        for i in 0..N {
            let mut e = T::zero();
            for (j, kj) in ks.iter().enumerate() {
                let c = T::of(E[j]);
                if c != T::zero() {
                    e += c * kj[i];
                }
            }
            e *= h;
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / T::of(N as f64)).sqrt();

        if !err.is_finite() {
            stats.rejected += 1;
            last_rejected = true;
            h *= fac_shrink;
            continue;
        }

        if err <= T::one() {
            // Accept: dense coefficients, event check, FSAL.
            let mut cont = [[T::zero(); N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * ks[0][i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k_new[i] - bspl;
                let mut dsum = T::zero();
                for (j, kj) in ks.iter().enumerate() {
                    dsum += T::of(D[j]) * kj[i];
                }
                cont[4][i] = h * dsum;
            }
            let segment = DenseSegment {
                t_start: t,
                h,
                cont,
            };

            if let Some(ev) = &event {
                // Check the endpoint plus a few interior dense points so
                // crossings narrower than the step are still caught.
                let mut bracket = None;
                let mut t_lo = t;
                for j in 1..=8 {
                    let tj = t + h * T::of(j as f64 / 8.0);
                    if ev.g(&segment.eval(tj)) <= T::zero() {
                        bracket = Some((t_lo, tj));
                        break;
                    }
                    t_lo = tj;
                }
                if let Some((lo, hi)) = bracket {
                    let t_star = bisect_event(&segment, ev, lo, hi);
                    let y_star = segment.eval(t_star);
                    segments.push(segment);
                    stats.steps += 1;
                    return Ok(DenseOutput {
                        t_start: t0,
                        t_reached: t_star,
                        y_reached: y_star,
                        status: SolveStatus::EventStopped { t: t_star },
                        stats,
                        segments,
                    });
                }
            }

            segments.push(segment);
            stats.steps += 1;
            t += h;
            y = y_new;
            ks[0] = k_new;

            if last_step {
                return Ok(DenseOutput {
                    t_start: t0,
                    t_reached: t_end,
                    y_reached: y,
                    status: SolveStatus::Completed,
                    stats,
                    segments,
                });
            }

            let fac11 = err.powf(expo1).max(T::of(1e-30));
            let mut fac = fac11 / facold.powf(beta);
            fac = (T::one() / fac_grow).max((T::one() / fac_shrink).min(fac / safe));
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
                last_rejected = false;
            }
            facold = err.max(T::of(1e-4));
            h = h_new;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            let fac11 = err.powf(expo1);
            h /= (T::one() / fac_shrink).min(fac11 / safe);
        }
    }
}

fn finish_failed<T: Real, const N: usize>(
    t0: T,
    t: T,
    y: [T; N],
    stats: Stats,
    segments: Vec<DenseSegment<T, N>>,
) -> DenseOutput<T, N> {
    DenseOutput {
        t_start: t0,
        t_reached: t,
        y_reached: y,
        status: SolveStatus::Failed { t },
        stats,
        segments,
    }
}

/// Bisect the event crossing inside `[t_lo, t_hi]` on the dense segment,
/// returning the non-positive side of a bracket narrower than
/// [`EVENT_TIME_TOL`].
fn bisect_event<T: Real, const N: usize>(
    segment: &DenseSegment<T, N>,
    ev: &StopEvent<T>,
    mut t_lo: T,
    mut t_hi: T,
) -> T {
    let tol = T::of(EVENT_TIME_TOL);
    for _ in 0..200 {
        if t_hi - t_lo < tol {
            break;
        }
        let mid = (t_lo + t_hi) * T::of(0.5);
        if ev.g(&segment.eval(mid)) > T::zero() {
            t_lo = mid;
        } else {
            t_hi = mid;
        }
    }
    t_hi
}

/// Hairer-style automatic initial step selection.
fn initial_step<T: Real, const N: usize>(
    rhs: &impl Fn(T, &[T; N]) -> [T; N],
    t: T,
    y: &[T; N],
    f0: &[T; N],
    span: T,
    opts: &SolverOptions<T>,
    stats: &mut Stats,
) -> T {
    let sc = |i: usize| opts.abs_tol + opts.rel_tol * y[i].abs();
    let mut d0 = T::zero();
    let mut d1 = T::zero();
    for i in 0..N {
        d0 += (y[i] / sc(i)) * (y[i] / sc(i));
        d1 += (f0[i] / sc(i)) * (f0[i] / sc(i));
    }
    let n = T::of(N as f64);
    d0 = (d0 / n).sqrt();
    d1 = (d1 / n).sqrt();

    let tiny = T::of(1e-10);
    let mut h0 = if d0 < tiny || d1 < tiny {
        T::of(1e-6)
    } else {
        T::of(0.01) * d0 / d1
    };
    h0 = h0.min(span);

    // One explicit Euler probe to estimate the second derivative scale.
    let mut y1 = *y;
    for i in 0..N {
        y1[i] = y[i] + h0 * f0[i];
    }
    let f1 = rhs(t + h0, &y1);
    stats.rhs_evals += 1;
    let mut d2 = T::zero();
    for i in 0..N {
        d2 += ((f1[i] - f0[i]) / sc(i)) * ((f1[i] - f0[i]) / sc(i));
    }
    d2 = (d2 / n).sqrt() / h0;

    let d_max = d1.max(d2);
    let h1 = if d_max <= tiny {
        (h0 * T::of(1e-3)).max(T::of(1e-6))
    } else {
        (T::of(0.01) / d_max).powf(T::of(0.2))
    };
    let h = (T::of(100.0) * h0).min(h1).min(span);
    if h.is_finite() && h > T::zero() {
        h
    } else {
        T::of(1e-6)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(tol: f64) -> SolverOptions<f64> {
        SolverOptions::with_tol(tol, tol)
    }

    #[test]
    fn harmonic_oscillator_period() {
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let sol = integrate_dense(
            rhs,
            [1.0, 0.0],
            0.0,
            2.0 * std::f64::consts::PI,
            &opts(1e-10),
            None,
        )
        .unwrap();
        assert_eq!(sol.status, SolveStatus::Completed);
        assert!((sol.y_reached[0] - 1.0).abs() < 1e-8, "{:?}", sol.y_reached);
        assert!(sol.y_reached[1].abs() < 1e-8);
    }

    #[test]
    fn dense_output_matches_exact_solution() {
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let sol = integrate_dense(rhs, [1.0, 0.0], 0.0, 10.0, &opts(1e-10), None).unwrap();
        for i in 0..=1000 {
            let t = 0.01 * i as f64;
            let y = sol.eval(t).unwrap();
            assert!((y[0] - t.cos()).abs() < 1e-8, "t = {t}");
            assert!((y[1] + t.sin()).abs() < 1e-8, "t = {t}");
        }
        assert!(sol.eval(-0.1).is_err());
        assert!(sol.eval(10.1).is_err());
    }

    #[test]
    fn event_stops_on_falling_crossing() {
        // y' = -1 from 1: crosses 0.25 at t = 0.75.
        let rhs = |_t: f64, _y: &[f64; 1]| [-1.0];
        let sol = integrate_dense(
            rhs,
            [1.0],
            0.0,
            10.0,
            &opts(1e-10),
            Some(StopEvent {
                threshold: 0.25,
                magnitude: false,
            }),
        )
        .unwrap();
        match sol.status {
            SolveStatus::EventStopped { t } => {
                assert!((t - 0.75).abs() < 1e-9, "t = {t}");
            }
            other => panic!("expected event, got {other:?}"),
        }
        assert!(sol.y_reached[0] <= 0.25);
    }

    #[test]
    fn magnitude_event_fires_before_sign_change() {
        // y = 1 - t: |y| falls through 0.25 first at t = 0.75, well before
        // the sign flip at t = 1.
        let rhs = |_t: f64, _y: &[f64; 1]| [-1.0];
        let sol = integrate_dense(
            rhs,
            [1.0],
            0.0,
            10.0,
            &opts(1e-10),
            Some(StopEvent {
                threshold: 0.25,
                magnitude: true,
            }),
        )
        .unwrap();
        match sol.status {
            SolveStatus::EventStopped { t } => {
                assert!((t - 0.75).abs() < 1e-9, "t = {t}");
            }
            other => panic!("expected event, got {other:?}"),
        }
    }

    #[test]
    fn interior_dense_points_catch_narrow_dips() {
        // A parabola dipping to 0.05 at t = 5 inside what the controller
        // takes as large steps: y = 0.05 + (t - 5)^2 / 10.
        let rhs = |t: f64, _y: &[f64; 1]| [(t - 5.0) / 5.0];
        let sol = integrate_dense(
            rhs,
            [0.05 + 2.5],
            0.0,
            20.0,
            &opts(1e-10),
            Some(StopEvent {
                threshold: 0.2,
                magnitude: false,
            }),
        )
        .unwrap();
        match sol.status {
            SolveStatus::EventStopped { t } => {
                // Crossing at (t - 5)^2 = 1.5.
                let expect = 5.0 - 1.5_f64.sqrt();
                assert!((t - expect).abs() < 1e-8, "t = {t}, expect {expect}");
            }
            other => panic!("expected event, got {other:?}"),
        }
    }

    #[test]
    fn tightening_tolerance_pays_off() {
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let endpoint = |tol: f64| {
            integrate_dense(rhs, [1.0, 0.0], 0.0, 50.0, &opts(tol), None)
                .unwrap()
                .y_reached[0]
        };
        let e1 = (endpoint(1e-6) - endpoint(1e-8)).abs();
        let e2 = (endpoint(1e-7) - endpoint(1e-9)).abs();
        assert!(e1 / e2 >= 5.0, "e1 = {e1:.3e}, e2 = {e2:.3e}");
    }

    #[test]
    fn max_steps_reports_failure() {
        let rhs = |_t: f64, y: &[f64; 1]| [-y[0]];
        let mut o = opts(1e-10);
        o.max_steps = 3;
        let sol = integrate_dense(rhs, [1.0], 0.0, 100.0, &o, None).unwrap();
        assert!(matches!(sol.status, SolveStatus::Failed { .. }));
    }

    #[test]
    fn rejects_bad_span_and_tolerances() {
        let rhs = |_t: f64, y: &[f64; 1]| [-y[0]];
        assert!(integrate_dense(rhs, [1.0], 1.0, 1.0, &opts(1e-10), None).is_err());
        assert!(integrate_dense(rhs, [1.0], 0.0, 1.0, &opts(0.0), None).is_err());
    }

    #[test]
    fn single_precision_instantiation() {
        let rhs = |_t: f32, y: &[f32; 2]| [y[1], -y[0]];
        let sol = integrate_dense(
            rhs,
            [1.0_f32, 0.0],
            0.0,
            2.0 * std::f32::consts::PI,
            &SolverOptions::with_tol(1e-5_f32, 1e-5),
            None,
        )
        .unwrap();
        assert_eq!(sol.status, SolveStatus::Completed);
        assert!((sol.y_reached[0] - 1.0).abs() < 1e-3, "{:?}", sol.y_reached);
    }
}
