//! Gaussian wave packets of the logarithmic-nonlinearity (Kostin) model of
//! dissipative quantum mechanics.
//!
//! Under the Madelung/de Broglie-Bohm decomposition with a Gaussian ansatz
//!
//! ```text
//! n(q, t) = (pi x^2)^(-1/2) exp(-((q - q_cl)/x)^2)
//! u(q, t) = (x'/x) (q - q_cl) + q_cl'
//! ```
//!
//! the packet width `x(t)` solves a damped Pinney equation with
//! `k = hbar^2 / m^2` and the center `q_cl(t)` the classical damped
//! oscillator; the PDE itself is never discretized. The two ODEs are
//! uncoupled and are always integrated independently, so the center series
//! is bit-identical whether or not the width is evolved alongside.
//!
//! The ansatz satisfies the continuity equation identically whenever the
//! stored velocities are the true derivatives of the stored series, so the
//! measured continuity residual of reconstructed fields is pure
//! finite-difference truncation.

use crate::asymptotics::{fit_a0_t0, AsymptoticSolution};
use crate::error::{Error, Result};
use crate::frequency::FrequencyProfile;
use crate::ode::{integrate, PinneyParams, TrajectoryStatus};
use crate::solver::SolverOptions;
use crate::Real;

/// Kostin-model parameters: the Pinney block carries `k = hbar^2 / m^2` by
/// construction.
#[derive(Debug, Clone)]
pub struct KostinParams<T: Real> {
    pub hbar: T,
    pub mass: T,
    pub pinney: PinneyParams<T>,
    /// `(q_cl, q_cl')` at `t = 0`.
    pub q_cl_init: (T, T),
    pub width_init: WidthInit<T>,
}

/// Width initial data: either a direct state or asymptotic parameters.
#[derive(Debug, Clone, Copy)]
pub enum WidthInit<T> {
    State { x: T, xdot: T },
    Asymptotic { a0: T, phi: T },
}

/// Which width evolution to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolveMode {
    /// Integrate the width equation numerically.
    Numeric,
    /// Evaluate the two-timing closed form for the width; the center is
    /// still integrated numerically.
    Asymptotic,
}

impl<T: Real> KostinParams<T> {
    pub fn new(
        hbar: T,
        mass: T,
        eps: T,
        profile: FrequencyProfile<T>,
        q_cl_init: (T, T),
        width_init: WidthInit<T>,
    ) -> Result<Self> {
        if !(hbar > T::zero()) {
            return Err(Error::invalid(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass > T::zero()) {
            return Err(Error::invalid(format!("mass must be positive, got {mass}")));
        }
        let k = (hbar / mass) * (hbar / mass);
        let pinney = PinneyParams::new(eps, k, profile)?;
        Ok(Self {
            hbar,
            mass,
            pinney,
            q_cl_init,
            width_init,
        })
    }

    /// Width state at `t = 0`, resolving asymptotic initial data through
    /// the closed form.
    pub fn width_state_init(&self) -> Result<(T, T)> {
        match self.width_init {
            WidthInit::State { x, xdot } => Ok((x, xdot)),
            WidthInit::Asymptotic { a0, phi } => {
                let sol = AsymptoticSolution::new(self.pinney.clone(), a0, T::zero(), phi)?;
                sol.eval_x0(T::zero())
            }
        }
    }

    /// Asymptotic width parameters, fitting them from a state if needed.
    pub fn width_asymptotic_init(&self) -> Result<AsymptoticSolution<T>> {
        match self.width_init {
            WidthInit::Asymptotic { a0, phi } => {
                AsymptoticSolution::new(self.pinney.clone(), a0, T::zero(), phi)
            }
            WidthInit::State { x, xdot } => {
                let (a0, t0, phi) = fit_a0_t0(&self.pinney, x, xdot)?;
                AsymptoticSolution::new(self.pinney.clone(), a0, t0, phi)
            }
        }
    }
}

/// Width and center series on a shared uniform time grid.
#[derive(Debug, Clone)]
pub struct WidthCenterSeries<T> {
    pub times: Vec<T>,
    pub width: Vec<T>,
    pub width_dot: Vec<T>,
    pub center: Vec<T>,
    pub center_dot: Vec<T>,
}

/// Evolve the packet: width per `mode`, center always by numerical
/// integration of the classical equation.
pub fn evolve_kostin<T: Real>(
    params: &KostinParams<T>,
    t_end: T,
    mode: EvolveMode,
    n_samples: usize,
) -> Result<WidthCenterSeries<T>> {
    let center = evolve_center(params, t_end, n_samples)?;

    let (times, width, width_dot) = match mode {
        EvolveMode::Numeric => {
            let (x0, v0) = params.width_state_init()?;
            let traj = integrate(
                params.pinney.damped_pinney_field(),
                (x0, v0),
                T::zero(),
                t_end,
                &SolverOptions::default(),
                None,
                n_samples,
            )?;
            if !matches!(traj.status, TrajectoryStatus::Completed) {
                return Err(Error::StepFailure {
                    t: traj.samples.last().map(|s| s.t.as_f64()).unwrap_or(0.0),
                });
            }
            let times: Vec<T> = traj.samples.iter().map(|s| s.t).collect();
            let width: Vec<T> = traj.samples.iter().map(|s| s.x).collect();
            let width_dot: Vec<T> = traj.samples.iter().map(|s| s.v).collect();
            (times, width, width_dot)
        }
        EvolveMode::Asymptotic => {
            let sol = params.width_asymptotic_init()?;
            let times = center.0.clone();
            let mut width = Vec::with_capacity(times.len());
            let mut width_dot = Vec::with_capacity(times.len());
            for &t in &times {
                let (x, v) = sol.eval_x0(t)?;
                width.push(x);
                width_dot.push(v);
            }
            (times, width, width_dot)
        }
    };

    debug_assert_eq!(times.len(), center.0.len());
    Ok(WidthCenterSeries {
        times,
        width,
        width_dot,
        center: center.1,
        center_dot: center.2,
    })
}

/// The center integration on its own; used by [`evolve_kostin`] and
/// directly by tests that pin down its independence from the width.
pub fn evolve_center<T: Real>(
    params: &KostinParams<T>,
    t_end: T,
    n_samples: usize,
) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let traj = integrate(
        params.pinney.classical_field(),
        params.q_cl_init,
        T::zero(),
        t_end,
        &SolverOptions::default(),
        None,
        n_samples,
    )?;
    if !matches!(traj.status, TrajectoryStatus::Completed) {
        return Err(Error::StepFailure {
            t: traj.samples.last().map(|s| s.t.as_f64()).unwrap_or(0.0),
        });
    }
    Ok((
        traj.samples.iter().map(|s| s.t).collect(),
        traj.samples.iter().map(|s| s.x).collect(),
        traj.samples.iter().map(|s| s.v).collect(),
    ))
}

/// Gaussian fluid density `(pi x^2)^(-1/2) exp(-((q - q_cl)/x)^2)`.
pub fn density<T: Real>(x: T, q_cl: T, q: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::NonPositiveWidth { x: x.as_f64() });
    }
    let xi = (q - q_cl) / x;
    Ok((T::PI() * x * x).powf(T::of(-0.5)) * (-xi * xi).exp())
}

/// Fluid velocity `(x'/x)(q - q_cl) + q_cl'`.
pub fn velocity_field<T: Real>(x: T, xdot: T, q_cl: T, q_cl_dot: T, q: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::NonPositiveWidth { x: x.as_f64() });
    }
    Ok(xdot / x * (q - q_cl) + q_cl_dot)
}

/// Density and velocity fields sampled on a uniform space-time grid.
#[derive(Debug, Clone)]
pub struct QuantumFields<T> {
    pub grid: Vec<T>,
    pub times: Vec<T>,
    /// `density[time][q]`
    pub density: Vec<Vec<T>>,
    /// `velocity[time][q]`
    pub velocity: Vec<Vec<T>>,
    pub series: WidthCenterSeries<T>,
}

impl<T: Real> QuantumFields<T> {
    /// Fill the fields from an evolved series on `n_q` uniform grid points.
    ///
    /// Without explicit bounds the grid spans
    /// `[min q_cl - 5 max x, max q_cl + 5 max x]`.
    pub fn from_series(
        series: WidthCenterSeries<T>,
        n_q: usize,
        bounds: Option<(T, T)>,
    ) -> Result<Self> {
        if n_q < 2 {
            return Err(Error::invalid("need at least 2 grid points"));
        }
        let (q_min, q_max) = match bounds {
            Some(b) => b,
            None => {
                let mut qc_min = T::infinity();
                let mut qc_max = T::neg_infinity();
                let mut x_max = T::zero();
                for (&qc, &x) in series.center.iter().zip(&series.width) {
                    qc_min = qc_min.min(qc);
                    qc_max = qc_max.max(qc);
                    x_max = x_max.max(x);
                }
                let five = T::of(5.0);
                (qc_min - five * x_max, qc_max + five * x_max)
            }
        };
        if !(q_max > q_min) {
            return Err(Error::invalid("empty q range"));
        }
        let h = (q_max - q_min) / T::of((n_q - 1) as f64);
        let grid: Vec<T> = (0..n_q).map(|i| q_min + h * T::of(i as f64)).collect();

        let nt = series.times.len();
        let mut dens = Vec::with_capacity(nt);
        let mut vel = Vec::with_capacity(nt);
        for i in 0..nt {
            let x = series.width[i];
            let xd = series.width_dot[i];
            let qc = series.center[i];
            let qcd = series.center_dot[i];
            let mut drow = Vec::with_capacity(n_q);
            let mut vrow = Vec::with_capacity(n_q);
            for &q in &grid {
                drow.push(density(x, qc, q)?);
                vrow.push(velocity_field(x, xd, qc, qcd, q)?);
            }
            dens.push(drow);
            vel.push(vrow);
        }
        Ok(Self {
            grid,
            times: series.times.clone(),
            density: dens,
            velocity: vel,
            series,
        })
    }

    /// Trapezoid quadrature of the density at one time slice.
    pub fn normalization(&self, time_index: usize) -> T {
        let row = &self.density[time_index];
        let h = self.grid[1] - self.grid[0];
        let mut acc = T::zero();
        for j in 0..row.len() {
            let w = if j == 0 || j + 1 == row.len() {
                T::of(0.5)
            } else {
                T::one()
            };
            acc += w * row[j];
        }
        acc * h
    }
}

/// Max interior residual of `dn/dt + d(n u)/dq`, centered differences,
/// normalized by the largest `|d(n u)/dq|` on the grid.
pub fn continuity_residual<T: Real>(fields: &QuantumFields<T>) -> Result<T> {
    let nt = fields.times.len();
    let nq = fields.grid.len();
    if nt < 5 || nq < 5 {
        return Err(Error::GridTooCoarse { nq, nt });
    }
    let dt = fields.times[1] - fields.times[0];
    let dq = fields.grid[1] - fields.grid[0];
    let two = T::of(2.0);
    let flux = |i: usize, j: usize| fields.density[i][j] * fields.velocity[i][j];
    let mut worst = T::zero();
    let mut scale = T::zero();
    for i in 1..nt - 1 {
        for j in 1..nq - 1 {
            let dn_dt = (fields.density[i + 1][j] - fields.density[i - 1][j]) / (two * dt);
            let dnu_dq = (flux(i, j + 1) - flux(i, j - 1)) / (two * dq);
            worst = worst.max((dn_dt + dnu_dq).abs());
            scale = scale.max(dnu_dq.abs());
        }
    }
    if scale == T::zero() {
        return Ok(worst);
    }
    Ok(worst / scale)
}
