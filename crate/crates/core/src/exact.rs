//! Ground-truth solutions of the undamped Pinney equation.
//!
//! The general solution of `x'' + omega^2(t) x = k / x^3` is the nonlinear
//! superposition
//!
//! ```text
//! x = (c1 s1^2 + c2 s2^2 + 2 c3 s1 s2)^(1/2),   c1 c2 - c3^2 = k,
//! ```
//!
//! where `s1, s2` solve the linear oscillator `s'' + omega^2(t) s = 0` with
//! unit Wronskian. With the basis pinned to identity initial data at `t0`
//! the constants matching `x(t0) = x0`, `x'(t0) = v0` are closed-form:
//! `c1 = x0^2`, `c3 = x0 v0`, `c2 = (c3^2 + k) / c1`, which satisfies the
//! constraint identically. This module is the oracle the integrator and the
//! asymptotic formulas are checked against.

use crate::error::{Error, Result};
use crate::frequency::FrequencyProfile;
use crate::ode::PinneyParams;
use crate::solver::{integrate_dense, DenseOutput, SolveStatus, SolverOptions};
use crate::{Real, LENGTH_FLOOR};

/// Assembled superposition solution over a fixed integrated span.
///
/// Immutable after construction; evaluation is pure.
#[derive(Debug, Clone)]
pub struct SuperpositionSolution<T: Real> {
    pub c1: T,
    pub c2: T,
    pub c3: T,
    pub k: T,
    sigma: DenseOutput<T, 4>,
}

/// Integrate the oscillator basis and match the superposition constants.
///
/// `eps` only scales the frequency argument `Omega(eps t)`; the damping of
/// the full model is zero here; this is the `eps -> 0` oracle with a
/// slowly varying frequency.
pub fn build_superposition<T: Real>(
    k: T,
    profile: &FrequencyProfile<T>,
    eps: T,
    x0: T,
    v0: T,
    t0: T,
    t_end: T,
) -> Result<SuperpositionSolution<T>> {
    if !(x0 > T::zero()) {
        return Err(Error::NoRealConstants { x0: x0.as_f64() });
    }
    let c1 = x0 * x0;
    let c3 = x0 * v0;
    let c2 = (c3 * c3 + k) / c1;

    let rhs = |t: T, y: &[T; 4]| match profile.omega_eval(eps, t) {
        Ok(om) => {
            let w2 = om * om;
            [y[1], -w2 * y[0], y[3], -w2 * y[2]]
        }
        Err(_) => [T::infinity(); 4],
    };
    // Identity initial data: unit Wronskian by construction.
    let sigma = integrate_dense(
        rhs,
        [T::one(), T::zero(), T::zero(), T::one()],
        t0,
        t_end,
        &SolverOptions::default(),
        None,
    )?;
    if !matches!(sigma.status, SolveStatus::Completed) {
        return Err(Error::StepFailure {
            t: sigma.t_reached.as_f64(),
        });
    }
    Ok(SuperpositionSolution {
        c1,
        c2,
        c3,
        k,
        sigma,
    })
}

impl<T: Real> SuperpositionSolution<T> {
    /// `(x, x')` from the superposition law at `t` within the built span.
    pub fn eval(&self, t: T) -> Result<(T, T)> {
        let [s1, s1d, s2, s2d] = self.sigma.eval(t)?;
        let quad = self.c1 * s1 * s1 + self.c2 * s2 * s2 + T::of(2.0) * self.c3 * s1 * s2;
        if quad <= T::zero() {
            return Err(Error::NegativeRadicand {
                t: t.as_f64(),
                value: quad.as_f64(),
            });
        }
        let x = quad.sqrt();
        let v = (self.c1 * s1 * s1d + self.c2 * s2 * s2d + self.c3 * (s1 * s2d + s2 * s1d)) / x;
        Ok((x, v))
    }

    /// Wronskian of the oscillator basis at `t`; stays at 1 up to
    /// integrator drift.
    pub fn wronskian(&self, t: T) -> Result<T> {
        let [s1, s1d, s2, s2d] = self.sigma.eval(t)?;
        Ok(s1 * s2d - s2 * s1d)
    }

    pub fn span(&self) -> (T, T) {
        self.sigma.span()
    }
}

/// Slowly varying energy `v^2/2 + Omega^2(eps t) x^2/2 + k/(2 x^2)`.
///
/// Evaluated on a trajectory of the fast time the derivative term of the
/// two-timing energy reduces to `v^2/2`.
pub fn energy<T: Real>(params: &PinneyParams<T>, t: T, x: T, v: T) -> Result<T> {
    if x.abs() < T::of(LENGTH_FLOOR) {
        return Err(Error::DivisionByZero {
            x: x.as_f64(),
            floor: LENGTH_FLOOR,
        });
    }
    let omega = params.omega(t)?;
    let half = T::of(0.5);
    Ok(half * v * v + half * omega * omega * x * x + half * params.k / (x * x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate, integrate_pinney};

    fn constant_profile() -> FrequencyProfile<f64> {
        FrequencyProfile::constant(1.0).unwrap()
    }

    #[test]
    fn equilibrium_superposition_is_flat() {
        let sol = build_superposition(1.0, &constant_profile(), 0.0, 1.0, 0.0, 0.0, 60.0).unwrap();
        assert_eq!(sol.c1, 1.0);
        assert_eq!(sol.c2, 1.0);
        assert_eq!(sol.c3, 0.0);
        let (x, v) = sol.eval(17.3).unwrap();
        assert!((x - 1.0).abs() < 1e-9);
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn quarter_k_closed_form() {
        let sol = build_superposition(0.25, &constant_profile(), 0.0, 1.0, 0.0, 0.0, 30.0).unwrap();
        for i in 0..=300 {
            let t = 0.1 * i as f64;
            let (x, _) = sol.eval(t).unwrap();
            let want = (t.cos().powi(2) + 0.25 * t.sin().powi(2)).sqrt();
            assert!((x - want).abs() < 1e-7, "t = {t}: {x} vs {want}");
        }
        let (x, v) = sol.eval(std::f64::consts::FRAC_PI_2).unwrap();
        assert!((x - 0.5).abs() < 1e-9);
        assert!(v.abs() < 1e-8);
    }

    #[test]
    fn constraint_holds_exactly() {
        for (k, x0, v0) in [
            (1.0, 2.0, 0.5),
            (0.25, 1.0, 0.0),
            (-0.5, 1.0, 0.0),
            (3.0, 0.7, -1.2),
        ] {
            let sol = build_superposition(k, &constant_profile(), 0.0, x0, v0, 0.0, 1.0).unwrap();
            assert!(
                (sol.c1 * sol.c2 - sol.c3 * sol.c3 - k).abs() < 1e-12,
                "k = {k}"
            );
            // Initial data reproduced.
            let (x, v) = sol.eval(0.0).unwrap();
            assert!((x - x0).abs() < 1e-12);
            assert!((v - v0).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_k_hits_negative_radicand() {
        let sol = build_superposition(-0.5, &constant_profile(), 0.0, 1.0, 0.0, 0.0, 3.0).unwrap();
        let t_star = 2.0_f64.sqrt().atan();
        assert!(sol.eval(t_star - 0.05).is_ok());
        assert!(matches!(
            sol.eval(t_star + 0.05),
            Err(Error::NegativeRadicand { .. })
        ));
    }

    #[test]
    fn wronskian_drift_stays_tiny() {
        let profile = FrequencyProfile::decaying(1.0).unwrap();
        let sol = build_superposition(1.0, &profile, 0.1, 2.41, 0.0, 0.0, 50.0).unwrap();
        for i in 0..=500 {
            let t = 0.1 * i as f64;
            let w = sol.wronskian(t).unwrap();
            assert!((w - 1.0).abs() < 1e-8, "t = {t}: W = {w}");
        }
    }

    #[test]
    fn oracle_matches_direct_integration() {
        // Slowly varying frequency, no damping: the oracle against the
        // integrator run of the same equation.
        for profile in [
            FrequencyProfile::decaying(1.0).unwrap(),
            FrequencyProfile::growing(1.0).unwrap(),
            FrequencyProfile::oscillating(1.0, 0.7).unwrap(),
        ] {
            for (eps, x0, v0, k) in [
                (0.1, 2.41, 0.0, 1.0),
                (0.2, 1.7, -0.4, 0.5),
                (0.0, 0.8, 0.6, 2.0),
            ] {
                let sol = build_superposition(k, &profile, eps, x0, v0, 0.0, 50.0).unwrap();
                let rhs = |t: f64, y: &[f64; 2]| {
                    let om = profile.omega_eval(eps, t).unwrap();
                    [y[1], -om * om * y[0] + k / (y[0] * y[0] * y[0])]
                };
                let traj = integrate(
                    rhs,
                    (x0, v0),
                    0.0,
                    50.0,
                    &SolverOptions::default(),
                    None,
                    1001,
                )
                .unwrap();
                for s in &traj.samples {
                    let (x, _) = sol.eval(s.t).unwrap();
                    assert!(
                        (x - s.x).abs() < 1e-7,
                        "{profile:?} eps = {eps} t = {}: {} vs {}",
                        s.t,
                        x,
                        s.x
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_non_positive_initial_length() {
        assert!(matches!(
            build_superposition(1.0, &constant_profile(), 0.0, 0.0, 0.0, 0.0, 1.0),
            Err(Error::NoRealConstants { .. })
        ));
        assert!(build_superposition(1.0, &constant_profile(), 0.0, -1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn eval_outside_span_errors() {
        let sol = build_superposition(1.0, &constant_profile(), 0.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!(matches!(sol.eval(2.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn energy_values() {
        let params = PinneyParams::new(0.0, 1.0, constant_profile()).unwrap();
        assert!((energy(&params, 0.0, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((energy(&params, 0.0, 2.0, 0.0).unwrap() - 2.125).abs() < 1e-15);
        // Reference-scenario initial data sits near the adiabatic value 3.
        let e = energy(&params, 0.0, 2.41, -0.17).unwrap();
        assert!((e - 3.0).abs() < 0.02, "E = {e}");
        assert!(matches!(
            energy(&params, 0.0, 0.0, 1.0),
            Err(Error::DivisionByZero { .. })
        ));
    }

    #[test]
    fn energy_constant_undamped_decreasing_damped() {
        let undamped = PinneyParams::new(0.0, 1.0, constant_profile()).unwrap();
        let traj = integrate_pinney(
            &undamped,
            (2.0, 0.3),
            0.0,
            50.0,
            &SolverOptions::default(),
            None,
            501,
        )
        .unwrap();
        let e0 = energy(&undamped, 0.0, 2.0, 0.3).unwrap();
        for s in &traj.samples {
            let e = energy(&undamped, s.t, s.x, s.v).unwrap();
            assert!((e - e0).abs() < 1e-7 * e0);
        }

        let damped = PinneyParams::new(0.1, 1.0, constant_profile()).unwrap();
        let traj = integrate_pinney(
            &damped,
            (2.414213562373095, -0.17070),
            0.0,
            50.0,
            &SolverOptions::default(),
            None,
            5001,
        )
        .unwrap();
        // Sampled at period marks t_n = n * pi (x oscillates at 2 Omega).
        let period = std::f64::consts::PI;
        let mut prev = f64::INFINITY;
        let mut n = 0;
        while (n as f64) * period < 50.0 {
            let t = n as f64 * period;
            let s = traj
                .samples
                .iter()
                .min_by(|a, b| (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap())
                .unwrap();
            let e = energy(&damped, s.t, s.x, s.v).unwrap();
            assert!(e < prev, "t = {t}: E = {e} not below {prev}");
            prev = e;
            n += 1;
        }
    }
}
