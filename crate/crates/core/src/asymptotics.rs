//! Two-timing (Kuzmak-Luke) zeroth-order solution of the damped Pinney
//! equation, valid for weak damping and slowly varying frequency.
//!
//! With `sqrt_k = k^(1/2)`, `Om0 = Omega(0)`, `d = exp(-eps t)` and the
//! doubled phase `theta = 2 ∫_{t0}^{t} Omega(eps t') dt' + phi`, the solution
//! is
//!
//! ```text
//! x0(t) = Omega^(-1/2) [ B + C cos(theta) ]^(1/2)
//! B = sqrt_k + Om0 A0^2 d^2 / 2
//! C = sqrt(Om0) A0 d (sqrt_k + Om0 A0^2 d^2 / 4)^(1/2)
//! ```
//!
//! `B^2 - C^2 = k` identically, so the radicand stays positive for `k > 0`
//! and the motion spirals toward the slowly varying fixed point
//! `k^(1/4) / Omega^(1/2)`. The time derivative is carried analytically
//! through the amplitude factors and the phase integral. The accompanying
//! adiabatic energy law is `E0 = Omega (Om0 A0^2 d^2 / 2 + sqrt_k)`.
//!
//! `k <= 0` is rejected here: the square-root form degenerates at `k = 0`
//! (the cosine leaves through the radical as a magnitude) and the collapse
//! regime has no bounded zeroth-order orbit.

use crate::error::{Error, Result};
use crate::exact::energy;
use crate::ode::PinneyParams;
use crate::Real;

/// Parameters `(A0, t0, phi)` of the zeroth-order solution.
///
/// `A0 >= 0` is the reference amplitude (`A0 = 0` is the fixed-point
/// boundary), `t0` the lower limit of the phase integral and `phi` a
/// constant phase offset. The amplitude law is referenced to `t = 0`
/// through `Om0 = Omega(0)` regardless of `t0`.
#[derive(Debug, Clone)]
pub struct AsymptoticSolution<T: Real> {
    pub params: PinneyParams<T>,
    pub a0: T,
    pub t0: T,
    pub phi: T,
}

struct Terms<T> {
    omega: T,
    sqrt_k: T,
    b: T,
    c: T,
    r: T,
    theta: T,
}

impl<T: Real> AsymptoticSolution<T> {
    pub fn new(params: PinneyParams<T>, a0: T, t0: T, phi: T) -> Result<Self> {
        if !(params.k > T::zero()) {
            return Err(Error::invalid(format!(
                "asymptotic solution needs k > 0, got {}",
                params.k
            )));
        }
        if !(a0 >= T::zero()) {
            return Err(Error::invalid(format!("A0 must be non-negative, got {a0}")));
        }
        Ok(Self {
            params,
            a0,
            t0,
            phi,
        })
    }

    fn terms(&self, t: T, damped: bool) -> Result<Terms<T>> {
        let eps = self.params.eps;
        let omega = self.params.omega(t)?;
        let om0 = self.params.profile.omega_ref()?;
        let sqrt_k = self.params.k.sqrt();
        let decay = if damped { (-eps * t).exp() } else { T::one() };
        let u = om0 * self.a0 * self.a0 * decay * decay;
        let r = sqrt_k + T::of(0.25) * u;
        let b = sqrt_k + T::of(0.5) * u;
        let c = om0.sqrt() * self.a0 * decay * r.sqrt();
        let theta = T::of(2.0) * self.params.profile.phase_integral(eps, self.t0, t)? + self.phi;
        Ok(Terms {
            omega,
            sqrt_k,
            b,
            c,
            r,
            theta,
        })
    }

    fn eval_inner(&self, t: T, damped: bool) -> Result<(T, T)> {
        let w = self.terms(t, damped)?;
        let eps = self.params.eps;
        let g = w.b + w.c * w.theta.cos();
        debug_assert!(g > T::zero(), "radicand must stay positive for k > 0");
        if g <= T::zero() {
            return Err(Error::NegativeRadicand {
                t: t.as_f64(),
                value: g.as_f64(),
            });
        }
        let x = (g / w.omega).sqrt();

        // d/dt of the amplitude factors: B' = -2 eps (B - sqrt_k),
        // C' = -eps C (2R - sqrt_k) / R, both zero in the undamped form.
        let two = T::of(2.0);
        let (db, dc) = if damped && eps > T::zero() {
            (
                -two * eps * (w.b - w.sqrt_k),
                -eps * w.c * (two * w.r - w.sqrt_k) / w.r,
            )
        } else {
            (T::zero(), T::zero())
        };
        let dtheta = two * w.omega;
        let dg = db + dc * w.theta.cos() - w.c * w.theta.sin() * dtheta;
        let domega = eps * self.params.profile.omega_slow_derivative(eps * t)?;
        let v = dg / (two * (g * w.omega).sqrt()) - domega / (two * w.omega) * x;
        Ok((x, v))
    }

    /// Squared slow amplitude `A^2(eps t)`; equals `C / Omega`.
    pub fn amplitude_squared(&self, t: T) -> Result<T> {
        let w = self.terms(t, true)?;
        Ok(w.c / w.omega)
    }

    /// Zeroth-order solution `(x0, x0')` at `t`.
    pub fn eval_x0(&self, t: T) -> Result<(T, T)> {
        self.eval_inner(t, true)
    }

    /// The undamped form: amplitude decay factors replaced by 1, frequency
    /// still slowly varying. Exact for constant frequency.
    pub fn eval_x0_undamped(&self, t: T) -> Result<(T, T)> {
        self.eval_inner(t, false)
    }

    /// Adiabatic energy law `E0(t) = Omega (Om0 A0^2 e^(-2 eps t) / 2 + sqrt_k)`.
    pub fn adiabatic_energy(&self, t: T) -> Result<T> {
        let w = self.terms(t, true)?;
        Ok(w.omega * w.b)
    }

    /// Slowly varying fixed point `k^(1/4) / Omega^(1/2)(eps t)`.
    pub fn fixed_point(&self, t: T) -> Result<T> {
        let omega = self.params.omega(t)?;
        Ok(self.params.k.powf(T::of(0.25)) / omega.sqrt())
    }
}

/// Fit `(A0, t0 = 0, phi)` so the zeroth-order solution passes through
/// `(x_init, v_init)` at `t = 0`.
///
/// The closed-form seed takes `A0` from the adiabatic energy relation
/// `E0(0) = Om0 (Om0 A0^2 / 2 + sqrt_k)` and `phi` from the position
/// equation plus the velocity sign. For `eps > 0` the measured energy
/// carries an `O(eps)` slow-drift bias, so the seed is polished by a Newton
/// iteration on the exact `(x0, x0')` equations; the seed alone is already
/// exact for `eps = 0`.
pub fn fit_a0_t0<T: Real>(params: &PinneyParams<T>, x_init: T, v_init: T) -> Result<(T, T, T)> {
    if !(params.k > T::zero()) {
        return Err(Error::invalid("fit needs k > 0"));
    }
    if !(x_init > T::zero()) {
        return Err(Error::invalid(format!(
            "x_init must be positive, got {x_init}"
        )));
    }
    let om0 = params.profile.omega_ref()?;
    let sqrt_k = params.k.sqrt();
    let two = T::of(2.0);

    let e = energy(params, T::zero(), x_init, v_init)?;
    let mut a0_sq = two * (e / om0 - sqrt_k) / om0;
    if a0_sq < T::zero() {
        a0_sq = T::zero();
    }
    let a0_seed = a0_sq.sqrt();
    if a0_seed < T::of(1e-8) {
        return Ok((a0_seed, T::zero(), T::zero()));
    }

    let mut sol = AsymptoticSolution::new(params.clone(), a0_seed, T::zero(), T::zero())?;

    // Position equation at t = 0: Om0 x^2 = B + C cos(phi).
    let w = sol.terms(T::zero(), true)?;
    let g_target = om0 * x_init * x_init;
    let cos_raw = (g_target - w.b) / w.c;
    let slack = if params.eps == T::zero() {
        T::of(1e-9)
    } else {
        // O(eps) seed bias in A0 shifts the implied cosine; only gross
        // violations are rejected before the Newton stage decides.
        T::of(0.5)
    };
    if cos_raw.abs() > T::one() + slack {
        return Err(Error::OffOrbit {
            implied_cos: cos_raw.as_f64(),
        });
    }
    let cos_seed = cos_raw.max(-T::one()).min(T::one());

    // Velocity equation resolves the phase sign.
    let eps = params.eps;
    let (db, dc) = if eps > T::zero() {
        (
            -two * eps * (w.b - w.sqrt_k),
            -eps * w.c * (two * w.r - w.sqrt_k) / w.r,
        )
    } else {
        (T::zero(), T::zero())
    };
    let domega = eps * params.profile.omega_slow_derivative(T::zero())?;
    let dg_target = two * (g_target * om0).sqrt() * v_init + domega / om0 * g_target;
    let sin_raw = (db + dc * cos_seed - dg_target) / (w.c * two * om0);
    let sin_seed = sin_raw.max(-T::one()).min(T::one());
    let mut phi = sin_seed.atan2(cos_seed);
    let mut a0 = a0_seed;

    // Newton polish on F(A0, phi) = (x0(0) - x_init, x0'(0) - v_init).
    let scale_x = x_init.abs().max(T::one());
    let scale_v = v_init.abs().max(T::one());
    let mut residual = |a0: T, phi: T| -> Result<(T, T)> {
        sol.a0 = a0;
        sol.phi = phi;
        let (x, v) = sol.eval_x0(T::zero())?;
        Ok((x - x_init, v - v_init))
    };
    let tol = T::of(1e-12);
    let mut converged = false;
    for _ in 0..40 {
        let (fx, fv) = residual(a0, phi)?;
        if fx.abs() / scale_x < tol && fv.abs() / scale_v < tol {
            converged = true;
            break;
        }
        let da = (a0.abs() + T::one()) * T::of(1e-7);
        let dp = T::of(1e-7);
        let (fx_a, fv_a) = residual(a0 + da, phi)?;
        let (fx_p, fv_p) = residual(a0, phi + dp)?;
        let j00 = (fx_a - fx) / da;
        let j01 = (fx_p - fx) / dp;
        let j10 = (fv_a - fv) / da;
        let j11 = (fv_p - fv) / dp;
        let det = j00 * j11 - j01 * j10;
        if det.abs() < T::of(1e-30) || !det.is_finite() {
            break;
        }
        let step_a = (fx * j11 - fv * j01) / det;
        let step_p = (fv * j00 - fx * j10) / det;
        a0 = (a0 - step_a).max(T::of(1e-14));
        phi -= step_p;
        if !a0.is_finite() || !phi.is_finite() {
            break;
        }
    }
    if !converged {
        // The loop may have landed on the root at its last update.
        let (fx, fv) = residual(a0, phi)?;
        if !(fx.abs() / scale_x < T::of(1e-9) && fv.abs() / scale_v < T::of(1e-9)) {
            return Err(Error::OffOrbit {
                implied_cos: cos_raw.as_f64(),
            });
        }
    }

    let tau = T::of(2.0) * T::PI();
    phi %= tau;
    if phi < T::zero() {
        phi += tau;
    }
    Ok((a0, T::zero(), phi))
}
