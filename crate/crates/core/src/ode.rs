//! Damped Pinney and classical oscillator right-hand sides, plus the
//! trajectory-producing integration front end.
//!
//! The damped Pinney equation is
//!
//! ```text
//! x'' + 2 eps x' + Omega^2(eps t) x = k / x^3
//! ```
//!
//! and the companion classical oscillator drops the inverse-cubic term.
//! `k > 0` keeps trajectories away from the origin; for `k <= 0` the
//! solution reaches `x = 0` in finite time, which the integrator reports as
//! a collapse event rather than an error.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::frequency::FrequencyProfile;
use crate::solver::{integrate_dense, DenseOutput, SolveStatus, SolverOptions, Stats, StopEvent};
use crate::{Real, LENGTH_FLOOR};

/// Default collapse threshold, in length units: far below every trajectory
/// scale of interest yet clear of the `1/x^3` overflow region.
pub const COLLAPSE_DELTA: f64 = 1e-6;

/// Parameters of the damped Pinney equation.
///
/// `eps` is both the damping coefficient and the slow-time scale of the
/// frequency argument; the damping coefficient is constant by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PinneyParams<T: Real> {
    pub eps: T,
    pub k: T,
    pub profile: FrequencyProfile<T>,
}

impl<T: Real> PinneyParams<T> {
    /// `eps >= 0`; `k <= 0` is accepted (it is the collapse regime).
    pub fn new(eps: T, k: T, profile: FrequencyProfile<T>) -> Result<Self> {
        if !(eps >= T::zero()) {
            return Err(Error::invalid(format!(
                "eps must be non-negative, got {eps}"
            )));
        }
        Ok(Self { eps, k, profile })
    }

    /// `Omega(eps t)`.
    pub fn omega(&self, t: T) -> Result<T> {
        self.profile.omega_eval(self.eps, t)
    }

    /// Right-hand side as an infallible vector field for the integrator.
    ///
    /// Singular or invalid evaluations return infinities, which the solver
    /// rejects and resolves by shrinking the step.
    pub fn damped_pinney_field(&self) -> impl Fn(T, &[T; 2]) -> [T; 2] + '_ {
        move |t, y| match rhs_damped_pinney(self, t, (y[0], y[1])) {
            Ok((dx, dv)) => [dx, dv],
            Err(_) => [T::infinity(), T::infinity()],
        }
    }

    /// Classical-oscillator right-hand side as an infallible vector field.
    pub fn classical_field(&self) -> impl Fn(T, &[T; 2]) -> [T; 2] + '_ {
        move |t, y| match rhs_classical(self, t, (y[0], y[1])) {
            Ok((dq, dv)) => [dq, dv],
            Err(_) => [T::infinity(), T::infinity()],
        }
    }
}

/// `(dx/dt, dv/dt)` of the damped Pinney equation at `(t, x, v)`.
pub fn rhs_damped_pinney<T: Real>(params: &PinneyParams<T>, t: T, state: (T, T)) -> Result<(T, T)> {
    let (x, v) = state;
    if x.abs() < T::of(LENGTH_FLOOR) {
        return Err(Error::DivisionByZero {
            x: x.as_f64(),
            floor: LENGTH_FLOOR,
        });
    }
    let omega = params.omega(t)?;
    let two = T::of(2.0);
    Ok((
        v,
        -two * params.eps * v - omega * omega * x + params.k / (x * x * x),
    ))
}

/// `(dq/dt, dq'/dt)` of the classical damped oscillator at `(t, q, q')`.
pub fn rhs_classical<T: Real>(params: &PinneyParams<T>, t: T, state: (T, T)) -> Result<(T, T)> {
    let (q, qdot) = state;
    let omega = params.omega(t)?;
    let two = T::of(2.0);
    Ok((qdot, -two * params.eps * qdot - omega * omega * q))
}

/// One trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub x: T,
    pub v: T,
}

/// How a trajectory run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryStatus<T> {
    Completed,
    /// `x` reached the collapse threshold; `t_star` is the located crossing.
    CollapseDetected {
        t_star: T,
    },
    StepFailure {
        t: T,
    },
}

/// Time-ordered `(t, x, v)` series with integrator metadata.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub samples: Vec<Sample<T>>,
    pub status: TrajectoryStatus<T>,
    pub stats: Stats,
}

impl<T: Real> Trajectory<T> {
    /// Uniformly resample a dense two-state solution into a trajectory.
    ///
    /// `n_samples` points are requested on `[t0, t_end]`; only those inside
    /// the reached span are emitted, and an event run ends with the located
    /// event sample itself.
    pub fn from_dense(
        dense: &DenseOutput<T, 2>,
        t0: T,
        t_end: T,
        n_samples: usize,
    ) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::invalid("need at least 2 samples"));
        }
        let step = (t_end - t0) / T::of((n_samples - 1) as f64);
        let mut samples = Vec::with_capacity(n_samples);
        for i in 0..n_samples {
            let mut t = t0 + step * T::of(i as f64);
            if i + 1 == n_samples {
                t = t_end;
            }
            if t > dense.t_reached {
                break;
            }
            let y = dense.eval(t)?;
            samples.push(Sample {
                t,
                x: y[0],
                v: y[1],
            });
        }
        let status = match dense.status {
            SolveStatus::Completed => TrajectoryStatus::Completed,
            SolveStatus::EventStopped { t } => {
                let last_kept = samples.last().map(|s| s.t);
                if last_kept != Some(t) {
                    samples.push(Sample {
                        t,
                        x: dense.y_reached[0],
                        v: dense.y_reached[1],
                    });
                }
                TrajectoryStatus::CollapseDetected { t_star: t }
            }
            SolveStatus::Failed { t } => TrajectoryStatus::StepFailure { t },
        };
        Ok(Self {
            samples,
            status,
            stats: dense.stats,
        })
    }

    /// Write the `t,x,v` CSV with 17-significant-digit formatting.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "t,x,v")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{},{}",
                format_sig17(s.t.as_f64()),
                format_sig17(s.x.as_f64()),
                format_sig17(s.v.as_f64())
            )?;
        }
        Ok(())
    }
}

/// Fixed 17-significant-digit decimal formatting used by every CSV emitter.
pub fn format_sig17(value: f64) -> String {
    format!("{value:.16e}")
}

/// Integrate a second-order system given as a first-order vector field,
/// sampling the result uniformly.
///
/// `collapse` arms the falling event `x - delta`; a located crossing ends
/// the run with [`TrajectoryStatus::CollapseDetected`]. Step-size underflow
/// below the solver floor maps to [`TrajectoryStatus::StepFailure`].
pub fn integrate<T: Real>(
    rhs: impl Fn(T, &[T; 2]) -> [T; 2],
    y0: (T, T),
    t0: T,
    t_end: T,
    opts: &SolverOptions<T>,
    collapse: Option<T>,
    n_samples: usize,
) -> Result<Trajectory<T>> {
    let event = collapse.map(|delta| StopEvent {
        threshold: delta,
        magnitude: false,
    });
    let dense = integrate_dense(rhs, [y0.0, y0.1], t0, t_end, opts, event)?;
    Trajectory::from_dense(&dense, t0, t_end, n_samples)
}

/// Convenience wrapper: integrate the damped Pinney equation itself.
pub fn integrate_pinney<T: Real>(
    params: &PinneyParams<T>,
    y0: (T, T),
    t0: T,
    t_end: T,
    opts: &SolverOptions<T>,
    collapse: Option<T>,
    n_samples: usize,
) -> Result<Trajectory<T>> {
    // Surface tabulated-range problems as a clean error up front.
    params.omega(t0)?;
    params.omega(t_end)?;
    integrate(
        params.damped_pinney_field(),
        y0,
        t0,
        t_end,
        opts,
        collapse,
        n_samples,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_params(eps: f64, k: f64) -> PinneyParams<f64> {
        PinneyParams::new(eps, k, FrequencyProfile::constant(1.0).unwrap()).unwrap()
    }

    #[test]
    fn pinney_rhs_values() {
        let equilibrium = rhs_damped_pinney(&constant_params(0.0, 1.0), 0.0, (1.0, 0.0)).unwrap();
        assert_eq!(equilibrium, (0.0, 0.0));

        let damped = rhs_damped_pinney(&constant_params(0.1, 1.0), 0.0, (2.0, 0.0)).unwrap();
        assert_eq!(damped.0, 0.0);
        assert!((damped.1 - (-1.875)).abs() < 1e-15);

        let decaying: PinneyParams<f64> =
            PinneyParams::new(0.1, 1.0, FrequencyProfile::decaying(1.0).unwrap()).unwrap();
        let (dx, dv) = rhs_damped_pinney(&decaying, 10.0, (1.0, 1.0)).unwrap();
        assert_eq!(dx, 1.0);
        assert!((dv - 0.3).abs() < 1e-14, "dv = {dv}");
    }

    #[test]
    fn pinney_rhs_guards_origin() {
        let err = rhs_damped_pinney(&constant_params(0.0, 1.0), 0.0, (1e-13, 0.0));
        assert!(matches!(err, Err(Error::DivisionByZero { .. })));
    }

    #[test]
    fn classical_rhs_values() {
        assert_eq!(
            rhs_classical(&constant_params(0.0, 1.0), 0.0, (1.0, 0.0)).unwrap(),
            (0.0, -1.0)
        );
        let (dq, dv) = rhs_classical(&constant_params(0.1, 1.0), 0.0, (0.0, 1.0)).unwrap();
        assert_eq!(dq, 1.0);
        assert!((dv - (-0.2)).abs() < 1e-15);

        let osc =
            PinneyParams::new(0.1, 1.0, FrequencyProfile::oscillating(1.0, 0.7).unwrap()).unwrap();
        assert_eq!(rhs_classical(&osc, 0.0, (1.0, 0.0)).unwrap(), (0.0, -1.0));
    }

    #[test]
    fn classical_period_returns_home() {
        let params = constant_params(0.0, 1.0);
        let traj = integrate(
            params.classical_field(),
            (1.0, 0.0),
            0.0,
            2.0 * std::f64::consts::PI,
            &SolverOptions::default(),
            None,
            101,
        )
        .unwrap();
        let last = traj.samples.last().unwrap();
        assert!((last.x - 1.0).abs() < 1e-8);
        assert!(last.v.abs() < 1e-8);
    }

    #[test]
    fn equilibrium_stays_put() {
        let params = constant_params(0.0, 1.0);
        let traj = integrate_pinney(
            &params,
            (1.0, 0.0),
            0.0,
            10.0,
            &SolverOptions::default(),
            Some(COLLAPSE_DELTA),
            201,
        )
        .unwrap();
        assert_eq!(traj.status, TrajectoryStatus::Completed);
        for s in &traj.samples {
            assert!((s.x - 1.0).abs() < 1e-8, "t = {}", s.t);
        }
    }

    #[test]
    fn collapse_detected_for_negative_k() {
        let params = constant_params(0.0, -0.5);
        let traj = integrate_pinney(
            &params,
            (1.0, 0.0),
            0.0,
            5.0,
            &SolverOptions::default(),
            Some(COLLAPSE_DELTA),
            501,
        )
        .unwrap();
        // Independent oracle: bisect x^2 = cos^2 t + k sin^2 t to its root.
        let closed = |t: f64| t.cos().powi(2) - 0.5 * t.sin().powi(2);
        let (mut lo, mut hi) = (0.0_f64, 1.2_f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if closed(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_root = 0.5 * (lo + hi);
        assert!((t_root - 2.0_f64.sqrt().atan()).abs() < 1e-12);

        match traj.status {
            TrajectoryStatus::CollapseDetected { t_star } => {
                assert!(
                    (t_star - t_root).abs() < 1e-3,
                    "t_star = {t_star}, oracle = {t_root}"
                );
                let last = traj.samples.last().unwrap();
                assert!(last.x <= COLLAPSE_DELTA * (1.0 + 1e-12));
                assert_eq!(last.t, t_star);
            }
            other => panic!("expected collapse, got {other:?}"),
        }
        // t strictly increasing across all samples.
        for w in traj.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }

    #[test]
    fn negative_k_without_event_is_step_failure() {
        let params = constant_params(0.0, -0.5);
        let traj = integrate_pinney(
            &params,
            (1.0, 0.0),
            0.0,
            5.0,
            &SolverOptions::default(),
            None,
            101,
        )
        .unwrap();
        assert!(matches!(traj.status, TrajectoryStatus::StepFailure { .. }));
    }

    #[test]
    fn positive_k_never_collapses() {
        for profile in [
            FrequencyProfile::constant(1.0).unwrap(),
            FrequencyProfile::decaying(1.0).unwrap(),
            FrequencyProfile::growing(1.0).unwrap(),
            FrequencyProfile::oscillating(1.0, 0.7).unwrap(),
        ] {
            for eps in [0.0, 0.1, 0.2] {
                let params = PinneyParams::new(eps, 1.0, profile.clone()).unwrap();
                let traj = integrate_pinney(
                    &params,
                    (2.414213562373095, -0.17),
                    0.0,
                    50.0,
                    &SolverOptions::default(),
                    Some(COLLAPSE_DELTA),
                    501,
                )
                .unwrap();
                assert_eq!(traj.status, TrajectoryStatus::Completed, "eps = {eps}");
                assert!(traj.samples.iter().all(|s| s.x > 0.0));
            }
        }
    }

    #[test]
    fn undamped_energy_conserved() {
        let params = constant_params(0.0, 1.0);
        let traj = integrate_pinney(
            &params,
            (2.0, 0.3),
            0.0,
            100.0,
            &SolverOptions::default(),
            None,
            2001,
        )
        .unwrap();
        let energy = |s: &Sample<f64>| 0.5 * s.v * s.v + 0.5 * s.x * s.x + 0.5 / (s.x * s.x);
        let e0 = energy(&traj.samples[0]);
        for s in &traj.samples {
            assert!((energy(s) - e0).abs() < 1e-7 * e0, "t = {}", s.t);
        }
    }

    #[test]
    fn conservative_run_is_time_reversible() {
        let params = constant_params(0.0, 1.0);
        let forward = integrate_pinney(
            &params,
            (2.0, 0.3),
            0.0,
            20.0,
            &SolverOptions::default(),
            None,
            3,
        )
        .unwrap();
        let end = forward.samples.last().unwrap();
        // Reverse by flipping velocity and integrating forward again.
        let back = integrate_pinney(
            &params,
            (end.x, -end.v),
            0.0,
            20.0,
            &SolverOptions::default(),
            None,
            3,
        )
        .unwrap();
        let home = back.samples.last().unwrap();
        assert!((home.x - 2.0).abs() < 1e-6, "x = {}", home.x);
        assert!((-home.v - 0.3).abs() < 1e-6, "v = {}", home.v);
    }

    #[test]
    fn csv_format_is_17_significant_digits() {
        let traj = Trajectory {
            samples: vec![Sample {
                t: 0.5_f64,
                x: 1.0 / 3.0,
                v: -2.0,
            }],
            status: TrajectoryStatus::Completed,
            stats: Stats::default(),
        };
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,v"));
        assert_eq!(
            lines.next(),
            Some("5.0000000000000000e-1,3.3333333333333331e-1,-2.0000000000000000e0")
        );
    }
}
