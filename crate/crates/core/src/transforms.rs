//! Numerical verifiers for the coordinate transformations of the damped
//! Pinney equation.
//!
//! Each transformation claim is checked as a residual on mapped
//! trajectories rather than symbolically: map the samples, differentiate on
//! the (generally nonuniform) transformed grid with 5-point Lagrange
//! stencils, and report the worst interior defect. A correct map plus a
//! correct integrator drives the residual to the stencil truncation floor,
//! which must shrink by at least 4x when the sample density doubles.
//!
//! The quasi-invariance change of variables `x = rho(t) Q(T)` with
//! `dT/dt = exp(-2 eps t) / rho^2` strips the damping term and yields
//!
//! ```text
//! d^2Q/dT^2 + W^2 Q = k exp(4 eps t) / Q^3
//! ```
//!
//! provided `rho` solves the auxiliary equation
//! `rho'' + 2 eps rho' + omega^2 rho = W^2 exp(-4 eps t) / rho^3`. With
//! `W = 0` this is a generalized Emden-Fowler equation of index -3 with
//! `mu(T) = k exp(4 eps t(T))`. The map is singular wherever `rho = 0`.

use crate::error::{Error, Result};
use crate::frequency::FrequencyProfile;
use crate::ode::{PinneyParams, Trajectory};
use crate::solver::{integrate_dense, DenseOutput, SolveStatus, SolverOptions, StopEvent};
use crate::Real;

/// `|rho|` below which the quasi-invariance map is treated as singular.
pub const RHO_FLOOR: f64 = 1e-6;

/// Minimum number of samples a monotone arc must have.
pub const MIN_ARC_LEN: usize = 11;

/// A scalar function of time with two derivatives, used for the
/// time-dependent mass and the auxiliary scaling function.
pub trait TimeFunction<T> {
    fn value(&self, t: T) -> T;
    fn first_derivative(&self, t: T) -> T;
    fn second_derivative(&self, t: T) -> T;
}

/// Constant function.
pub struct ConstantFn<T>(pub T);

impl<T: Real> TimeFunction<T> for ConstantFn<T> {
    fn value(&self, _t: T) -> T {
        self.0
    }
    fn first_derivative(&self, _t: T) -> T {
        T::zero()
    }
    fn second_derivative(&self, _t: T) -> T {
        T::zero()
    }
}

/// `exp(rate * t)`.
pub struct ExpFn<T> {
    pub rate: T,
}

impl<T: Real> TimeFunction<T> for ExpFn<T> {
    fn value(&self, t: T) -> T {
        (self.rate * t).exp()
    }
    fn first_derivative(&self, t: T) -> T {
        self.rate * self.value(t)
    }
    fn second_derivative(&self, t: T) -> T {
        self.rate * self.rate * self.value(t)
    }
}

/// Finite-difference weights for the `order`-th derivative at `x0` on the
/// arbitrary nodes, by Fornberg's recursion.
pub fn fd_weights<T: Real>(nodes: &[T], x0: T, order: usize) -> Vec<T> {
    let n = nodes.len();
    assert!(n > order, "need more nodes than the derivative order");
    let mut c = vec![vec![T::zero(); order + 1]; n];
    c[0][0] = T::one();
    let mut c1 = T::one();
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (T::of(k as f64) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - T::of(k as f64) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// `order`-th derivative of the sampled function at index `i` using the
/// centered 5-point window (clamped at the ends).
fn stencil_derivative<T: Real>(xs: &[T], ys: &[T], i: usize, order: usize) -> T {
    let n = xs.len();
    let lo = i.saturating_sub(2).min(n.saturating_sub(5));
    let w = fd_weights(&xs[lo..lo + 5], xs[i], order);
    let mut acc = T::zero();
    for (j, wj) in w.iter().enumerate() {
        acc += *wj * ys[lo + j];
    }
    acc
}

/// The quasi-invariance map: auxiliary `rho(t)` with its derivative and the
/// accumulated new-time coordinate `T(t)`, all densely evaluable.
#[derive(Debug, Clone)]
pub struct QuasiInvarianceMap<T: Real> {
    pub w: T,
    pub eps: T,
    pub k: T,
    sol: DenseOutput<T, 3>,
}

/// Co-integrate the auxiliary equation and `dT/dt = exp(-2 eps t) / rho^2`
/// from `t = 0`, stopping before the first zero of `rho`.
pub fn build_quasi_invariance<T: Real>(
    params: &PinneyParams<T>,
    rho0: (T, T),
    w: T,
    t_end: T,
) -> Result<QuasiInvarianceMap<T>> {
    if !(w >= T::zero()) {
        return Err(Error::invalid(format!("W must be non-negative, got {w}")));
    }
    if rho0.0.abs() <= T::of(RHO_FLOOR) {
        return Err(Error::RhoZeroCrossing { t: 0.0 });
    }
    let eps = params.eps;
    let two = T::of(2.0);
    let four = T::of(4.0);
    let rhs = |t: T, y: &[T; 3]| {
        let rho = y[0];
        if rho == T::zero() {
            return [T::infinity(); 3];
        }
        match params.omega(t) {
            Ok(om) => {
                let forcing = w * w * (-four * eps * t).exp() / (rho * rho * rho);
                [
                    y[1],
                    -two * eps * y[1] - om * om * rho + forcing,
                    (-two * eps * t).exp() / (rho * rho),
                ]
            }
            Err(_) => [T::infinity(); 3],
        }
    };
    // Tighter than the default tolerance: the map feeds finite-difference
    // residuals whose noise floor is set by the dense-output accuracy.
    let sol = integrate_dense(
        rhs,
        [rho0.0, rho0.1, T::zero()],
        T::zero(),
        t_end,
        &SolverOptions::with_tol(T::of(1e-12), T::of(1e-12)),
        Some(StopEvent {
            threshold: T::of(RHO_FLOOR),
            magnitude: true,
        }),
    )?;
    if let SolveStatus::Failed { t } = sol.status {
        return Err(Error::StepFailure { t: t.as_f64() });
    }
    Ok(QuasiInvarianceMap {
        w,
        eps,
        k: params.k,
        sol,
    })
}

impl<T: Real> QuasiInvarianceMap<T> {
    /// `(rho, rho', T)` at `t`.
    pub fn eval(&self, t: T) -> Result<(T, T, T)> {
        let y = self.sol.eval(t)?;
        Ok((y[0], y[1], y[2]))
    }

    /// Last time the map covers; earlier than requested when `rho`
    /// approached a zero.
    pub fn t_valid_end(&self) -> T {
        self.sol.t_reached
    }

    /// Whether the build stopped early on an imminent `rho` zero.
    pub fn stopped_at_zero(&self) -> bool {
        matches!(self.sol.status, SolveStatus::EventStopped { .. })
    }

    /// Emden-Fowler data for the `W = 0` gauge: `(mu, T)` at `t`, with
    /// `mu = k exp(4 eps t)`.
    pub fn emden_fowler_mu(&self, t: T) -> Result<(T, T)> {
        if self.w != T::zero() {
            return Err(Error::invalid("Emden-Fowler gauge needs W = 0"));
        }
        let (_, _, big_t) = self.eval(t)?;
        let mu = self.k * (T::of(4.0) * self.eps * t).exp();
        Ok((mu, big_t))
    }
}

/// Max interior residual of the transformed equation
/// `d^2Q/dT^2 + W^2 Q - k exp(4 eps t)/Q^3` over the trajectory samples.
pub fn transform_residual_e3<T: Real>(
    map: &QuasiInvarianceMap<T>,
    traj: &Trajectory<T>,
) -> Result<T> {
    let n = traj.samples.len();
    if n < 5 {
        return Err(Error::invalid("need at least 5 trajectory samples"));
    }
    let t_last = traj.samples[n - 1].t;
    if t_last > map.t_valid_end() {
        return Err(Error::RhoZeroCrossing {
            t: map.t_valid_end().as_f64(),
        });
    }
    let mut big_t = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for s in &traj.samples {
        let (rho, _, tt) = map.eval(s.t)?;
        if rho.abs() <= T::of(RHO_FLOOR) {
            return Err(Error::RhoZeroCrossing { t: s.t.as_f64() });
        }
        big_t.push(tt);
        q.push(s.x / rho);
    }
    let four = T::of(4.0);
    let mut worst = T::zero();
    for i in 2..n - 2 {
        let qdd = stencil_derivative(&big_t, &q, i, 2);
        let t = traj.samples[i].t;
        let qi = q[i];
        let resid = qdd + map.w * map.w * qi - map.k * (four * map.eps * t).exp() / (qi * qi * qi);
        worst = worst.max(resid.abs());
    }
    Ok(worst)
}

/// Max residual of the Abel form `v dv/dx + 2 eps v + omega^2 x - k/x^3` on
/// the first monotone-in-x arc, with `dv/dx` taken by stencils in `x`.
///
/// Constant frequency only: the Abel reduction treats `v` as a function of
/// `x` alone. The arc is trimmed near its turning points, where `v(x)` has
/// vertical tangents.
pub fn abel_residual<T: Real>(params: &PinneyParams<T>, traj: &Trajectory<T>) -> Result<T> {
    if !matches!(params.profile, FrequencyProfile::Constant { .. }) {
        return Err(Error::invalid(
            "Abel residual is defined for constant frequency",
        ));
    }
    let samples = &traj.samples;
    let n = samples.len();

    // First maximal strictly monotone run in x.
    let mut start = 0usize;
    let mut arc: Option<(usize, usize)> = None;
    while start + 1 < n {
        let dir = (samples[start + 1].x - samples[start].x).signum();
        if dir == T::zero() {
            start += 1;
            continue;
        }
        let mut end = start + 1;
        while end + 1 < n && ((samples[end + 1].x - samples[end].x) * dir) > T::zero() {
            end += 1;
        }
        if end - start + 1 >= MIN_ARC_LEN {
            arc = Some((start, end));
            break;
        }
        start = end;
    }
    let Some((lo, hi)) = arc else {
        return Err(Error::NonMonotoneArc {
            min_len: MIN_ARC_LEN,
        });
    };

    // Trim 5% of the arc at each end, at least 2 samples: turning points
    // have v -> 0 and dv/dx unbounded.
    let len = hi - lo + 1;
    let trim = (len / 20).max(2);
    let lo = lo + trim;
    let hi = hi - trim;
    if hi.saturating_sub(lo) + 1 < 5 {
        return Err(Error::NonMonotoneArc {
            min_len: MIN_ARC_LEN,
        });
    }

    let xs: Vec<T> = samples[lo..=hi].iter().map(|s| s.x).collect();
    let vs: Vec<T> = samples[lo..=hi].iter().map(|s| s.v).collect();
    let omega = params.omega(samples[lo].t)?;
    let two = T::of(2.0);
    let mut worst = T::zero();
    for i in 2..xs.len() - 2 {
        let dvdx = stencil_derivative(&xs, &vs, i, 1);
        let x = xs[i];
        let v = vs[i];
        let resid = v * dvdx + two * params.eps * v + omega * omega * x - params.k / (x * x * x);
        worst = worst.max(resid.abs());
    }
    Ok(worst)
}

/// Right-hand side of the time-dependent-mass Pinney variant
/// `x'' - (m'/m) x' + omega^2 x = k m^2 / x^3`.
pub fn rhs_mass_pinney<T: Real>(
    mass: &dyn TimeFunction<T>,
    profile: &FrequencyProfile<T>,
    eps: T,
    k: T,
    t: T,
    state: (T, T),
) -> Result<(T, T)> {
    let (x, v) = state;
    let m = mass.value(t);
    if m <= T::zero() {
        return Err(Error::NonPositiveMass {
            t: t.as_f64(),
            m: m.as_f64(),
        });
    }
    if x.abs() < T::of(crate::LENGTH_FLOOR) {
        return Err(Error::DivisionByZero {
            x: x.as_f64(),
            floor: crate::LENGTH_FLOOR,
        });
    }
    let om = profile.omega_eval(eps, t)?;
    let md = mass.first_derivative(t);
    Ok((v, md / m * v - om * om * x + k * m * m / (x * x * x)))
}

/// Residual of the standard-form reduction of the mass-Pinney variant.
///
/// With `Q = x / (sqrt(m) rho)` and `T = ∫ dt / rho^2` the equation maps to
/// `d^2Q/dT^2 + rho^3 [rho'' + (omega^2 + m''/(2m) - 3 m'^2/(4 m^2)) rho] Q
/// = k / Q^3`; the bracket is evaluated from the supplied functions and the
/// second derivative by stencils on the `T` grid.
pub fn mass_pinney_to_standard<T: Real>(
    mass: &dyn TimeFunction<T>,
    profile: &FrequencyProfile<T>,
    eps: T,
    rho: &dyn TimeFunction<T>,
    k: T,
    traj: &Trajectory<T>,
) -> Result<T> {
    let n = traj.samples.len();
    if n < 5 {
        return Err(Error::invalid("need at least 5 trajectory samples"));
    }
    let t0 = traj.samples[0].t;
    let t_end = traj.samples[n - 1].t;

    // New-time coordinate by its own tightly-toleranced integration.
    let t_rhs = |t: T, _y: &[T; 1]| {
        let r = rho.value(t);
        [T::one() / (r * r)]
    };
    let t_sol = integrate_dense(
        t_rhs,
        [T::zero()],
        t0,
        t_end,
        &SolverOptions::with_tol(T::of(1e-12), T::of(1e-12)),
        None,
    )?;
    if !matches!(t_sol.status, SolveStatus::Completed) {
        return Err(Error::StepFailure {
            t: t_sol.t_reached.as_f64(),
        });
    }

    let half = T::of(0.5);
    let three_quarters = T::of(0.75);
    let mut big_t = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let mut bracket = Vec::with_capacity(n);
    for s in &traj.samples {
        let m = mass.value(s.t);
        if m <= T::zero() {
            return Err(Error::NonPositiveMass {
                t: s.t.as_f64(),
                m: m.as_f64(),
            });
        }
        let r = rho.value(s.t);
        if r <= T::zero() {
            return Err(Error::RhoZeroCrossing { t: s.t.as_f64() });
        }
        let om = profile.omega_eval(eps, s.t)?;
        let md = mass.first_derivative(s.t);
        let mdd = mass.second_derivative(s.t);
        let rdd = rho.second_derivative(s.t);
        let coeff = om * om + half * mdd / m - three_quarters * md * md / (m * m);
        bracket.push(r * r * r * (rdd + coeff * r));
        big_t.push(t_sol.eval(s.t)?[0]);
        q.push(s.x / (m.sqrt() * r));
    }

    let mut worst = T::zero();
    for i in 2..n - 2 {
        let qdd = stencil_derivative(&big_t, &q, i, 2);
        let qi = q[i];
        let resid = qdd + bracket[i] * qi - k / (qi * qi * qi);
        worst = worst.max(resid.abs());
    }
    Ok(worst)
}
